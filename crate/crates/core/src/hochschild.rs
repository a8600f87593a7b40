//! Hochschild (co)homology through the normalized bar complex, the
//! comparison maps with Koszul (co)homology and the operators e_D, B, L_D.
//!
//! Elements of A are indexed globally: weight components are laid out in
//! increasing weight, so index 0 is the unit and Ā is spanned by 1….

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::algebra::{Bimodule, QuadraticAlgebra};
use crate::error::{Error, Result};
use crate::koszul::{hk, w_space, HomologySpace, Kind, Variant};
use crate::linalg::{homology_at, Accum, Homology, LinearMap, SparseVec};
use crate::scalars::{Field, Scalar};
use crate::tensor::TensorBasisIndex;

pub const DEFAULT_CAP: usize = 100_000;

/// A ⊗ Ā^{⊗p} at one total weight (chains), or the A-valued functionals on
/// Ā^{⊗p} raising weight by a fixed shift (cochains). Each basis element is
/// (element of A, tuple of elements of Ā).
#[derive(Debug)]
pub struct BarSpace {
    pub kind: Kind,
    pub p: usize,
    pub grade: i64,
    elems: Vec<(usize, Vec<usize>)>,
    index: HashMap<(usize, Vec<usize>), usize>,
}

impl BarSpace {
    fn new(kind: Kind, p: usize, grade: i64, elems: Vec<(usize, Vec<usize>)>) -> BarSpace {
        let index = elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        BarSpace {
            kind,
            p,
            grade,
            elems,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    pub fn element(&self, i: usize) -> (usize, &[usize]) {
        let (a, t) = &self.elems[i];
        (*a, t)
    }

    pub fn position(&self, a: usize, tuple: &[usize]) -> Option<usize> {
        self.index.get(&(a, tuple.to_vec())).copied()
    }

    fn locate(&self, a: usize, tuple: Vec<usize>) -> Result<usize> {
        let key = (a, tuple);
        self.index
            .get(&key)
            .copied()
            .ok_or_else(|| Error::Invariant(format!("bar term {key:?} outside its graded piece")))
    }
}

/// One graded piece of HH_p or HH^p.
#[derive(Debug)]
pub struct HochschildPiece {
    pub basis: Arc<BarSpace>,
    pub homology: Homology,
}

impl HochschildPiece {
    pub fn dim(&self) -> usize {
        self.homology.dim()
    }

    pub fn grade(&self) -> i64 {
        self.basis.grade
    }

    pub fn class_of(&self, v: &SparseVec) -> Result<SparseVec> {
        self.homology.project(v).map_err(|_| {
            Error::Invariant(format!(
                "vector is not a Hochschild cycle in degree {} grade {}",
                self.basis.p, self.basis.grade
            ))
        })
    }
}

/// HH_p(A) (graded by total weight) or HH^p(A) (graded by weight shift).
#[derive(Debug)]
pub struct HochschildSpace {
    pub kind: Kind,
    pub p: usize,
    pub pieces: Vec<Arc<HochschildPiece>>,
}

impl HochschildSpace {
    pub fn dim(&self) -> usize {
        self.pieces.iter().map(|x| x.dim()).sum()
    }

    pub fn piece(&self, grade: i64) -> Option<&HochschildPiece> {
        self.pieces.iter().find(|x| x.grade() == grade).map(|x| x.as_ref())
    }

    /// (grade, dim) for every nonzero piece.
    pub fn graded_dims(&self) -> Vec<(i64, usize)> {
        self.pieces.iter().filter(|x| x.dim() > 0).map(|x| (x.grade(), x.dim())).collect()
    }

    fn offset(&self, grade: i64) -> usize {
        self.pieces.iter().take_while(|x| x.grade() != grade).map(|x| x.dim()).sum()
    }
}

/// An induced map on (co)homology with its rank data.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub map: LinearMap,
}

impl Comparison {
    pub fn rank(&self) -> usize {
        self.map.rank()
    }
    pub fn is_injective(&self) -> bool {
        self.map.is_injective()
    }
    pub fn is_surjective(&self) -> bool {
        self.map.is_surjective()
    }
    pub fn is_isomorphism(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GradedOp {
    /// e_D(a⊗a_1…a_p) = (−1)^{p−1}(|a_p| a_p a)⊗a_1…a_{p−1}
    EulerCap,
    /// Connes' B
    Connes,
    /// L_D(z) = |z| z
    Weight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HigherKind {
    /// (HH_•, H(e_D))
    Homology,
    /// (HH^•, [D] ⌣ −)
    Cohomology,
    /// (HH_•, H(B)), the de Rham complex
    DeRham,
}

#[derive(Debug)]
pub struct HigherHochschild {
    pub kind: HigherKind,
    pub p: usize,
    pub homology: Homology,
}

impl HigherHochschild {
    pub fn dim(&self) -> usize {
        self.homology.dim()
    }
}

#[derive(Debug, Clone)]
pub struct RgCheck {
    pub p: usize,
    /// [H(e_D), H(B)]_gc − H(L_D) on HH_p.
    pub residual: LinearMap,
}

impl RgCheck {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

type PieceKey = (Kind, usize, i64);

/// The normalized bar complex of a finite-dimensional (or truncated) algebra.
pub struct Bar<'a> {
    a: &'a QuadraticAlgebra,
    top: usize,
    cap: usize,
    offsets: Vec<usize>,
    weight: Vec<usize>,
    /// Ā basis by weight; `by_weight[0]` holds just the unit.
    by_weight: Vec<Vec<usize>>,
    prod: Vec<Vec<SparseVec>>,
    /// For each k, the pairs (g, h, c) with e_g e_h having coefficient c at e_k.
    factors: Vec<Vec<(usize, usize, Scalar)>>,
    spaces: Mutex<HashMap<PieceKey, Arc<BarSpace>>>,
    pieces: Mutex<HashMap<PieceKey, Arc<HochschildPiece>>>,
}

impl<'a> Bar<'a> {
    pub fn new(a: &'a QuadraticAlgebra) -> Result<Bar<'a>> {
        match a.top_weight() {
            Some(top) => Bar::build(a, top),
            None => Err(Error::Unsupported(
                "Hochschild homology needs a finite-dimensional algebra or an explicit truncation".into(),
            )),
        }
    }

    /// Works with A/A_{>t}.
    pub fn truncated(a: &'a QuadraticAlgebra, t: usize) -> Result<Bar<'a>> {
        if !a.knows_weight(t) {
            return Err(Error::Truncated {
                weight: t,
                bound: a.weight_bound(),
            });
        }
        Bar::build(a, a.top_weight().map_or(t, |top| top.min(t)))
    }

    pub fn with_cap(mut self, cap: usize) -> Bar<'a> {
        self.cap = cap;
        self
    }

    fn build(a: &'a QuadraticAlgebra, top: usize) -> Result<Bar<'a>> {
        let field = a.field();
        let mut offsets = Vec::with_capacity(top + 2);
        let mut weight = Vec::new();
        let mut by_weight = Vec::new();
        for m in 0..=top {
            offsets.push(weight.len());
            let d = a.dim(m)?;
            by_weight.push((weight.len()..weight.len() + d).collect::<Vec<_>>());
            weight.extend(std::iter::repeat_n(m, d));
        }
        offsets.push(weight.len());
        let total = weight.len();
        let mut prod = vec![vec![SparseVec::zero(); total]; total];
        let mut factors = vec![Vec::new(); total];
        for g in 0..total {
            for h in 0..total {
                let (wg, wh) = (weight[g], weight[h]);
                if wg + wh > top {
                    continue;
                }
                let local = a.multiply(
                    &SparseVec::unit(g - offsets[wg], field),
                    wg,
                    &SparseVec::unit(h - offsets[wh], field),
                    wh,
                )?;
                let v = local.map_indices_monotone(|i| i + offsets[wg + wh]);
                if wg > 0 && wh > 0 {
                    for (k, c) in v.iter() {
                        factors[k].push((g, h, c.clone()));
                    }
                }
                prod[g][h] = v;
            }
        }
        Ok(Bar {
            a,
            top,
            cap: DEFAULT_CAP,
            offsets,
            weight,
            by_weight,
            prod,
            factors,
            spaces: Mutex::new(HashMap::new()),
            pieces: Mutex::new(HashMap::new()),
        })
    }

    pub fn algebra(&self) -> &'a QuadraticAlgebra {
        self.a
    }

    pub fn field(&self) -> Field {
        self.a.field()
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// dim A (of the possibly truncated algebra).
    pub fn total_dim(&self) -> usize {
        self.weight.len()
    }

    /// Global index of generator x_i.
    pub fn generator(&self, i: usize) -> usize {
        self.offsets[1] + i
    }

    /// Global index of the i-th basis element of A_m.
    pub fn global(&self, m: usize, i: usize) -> usize {
        self.offsets[m] + i
    }

    /// (weight, local index) of a global index.
    pub fn local(&self, g: usize) -> (usize, usize) {
        let m = self.weight[g];
        (m, g - self.offsets[m])
    }

    /// dim A · (dim A − 1)^p, the full size of bar degree p.
    pub fn degree_size(&self, p: usize) -> u128 {
        let d = self.total_dim() as u128;
        d * (d.saturating_sub(1)).pow(p as u32)
    }

    fn guard(&self, p: usize) -> Result<()> {
        let size = self.degree_size(p + 1);
        if size > self.cap as u128 {
            return Err(Error::ResourceCap(format!(
                "bar degree {} has {size} basis elements, above the cap of {}",
                p + 1,
                self.cap
            )));
        }
        Ok(())
    }

    fn tuples(&self, p: usize, w: usize) -> Vec<Vec<usize>> {
        if p == 0 {
            return if w == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        for first in 1..=self.top.min(w) {
            let rest = self.tuples(p - 1, w - first);
            for g in &self.by_weight[first] {
                for r in &rest {
                    let mut t = Vec::with_capacity(p);
                    t.push(*g);
                    t.extend_from_slice(r);
                    out.push(t);
                }
            }
        }
        out
    }

    /// The graded piece of bar degree p; negative degrees give the zero space.
    pub fn space(&self, kind: Kind, p: i64, grade: i64) -> Arc<BarSpace> {
        if p < 0 {
            return Arc::new(BarSpace::new(kind, 0, grade, vec![]));
        }
        let p = p as usize;
        let key = (kind, p, grade);
        if let Some(s) = self.spaces.lock().expect("cache poisoned").get(&key) {
            return s.clone();
        }
        let mut elems = Vec::new();
        let top = self.top as i64;
        match kind {
            Kind::Chain => {
                for aw in 0..=top.min(grade) {
                    if aw < 0 {
                        continue;
                    }
                    let ts = self.tuples(p, (grade - aw) as usize);
                    for &a in &self.by_weight[aw as usize] {
                        for t in &ts {
                            elems.push((a, t.clone()));
                        }
                    }
                }
            }
            Kind::Cochain => {
                for wi in p..=p * self.top {
                    let ow = wi as i64 + grade;
                    if !(0..=top).contains(&ow) {
                        continue;
                    }
                    for t in self.tuples(p, wi) {
                        for &o in &self.by_weight[ow as usize] {
                            elems.push((o, t.clone()));
                        }
                    }
                }
            }
        }
        let s = Arc::new(BarSpace::new(kind, p, grade, elems));
        self.spaces.lock().expect("cache poisoned").entry(key).or_insert(s).clone()
    }

    fn sign(&self, exponent: usize) -> Scalar {
        if exponent.is_multiple_of(2) {
            self.field().one()
        } else {
            -self.field().one()
        }
    }

    /// b: degree p → p − 1 (chains) or p → p + 1 (cochains), on one graded piece.
    pub fn differential(&self, kind: Kind, p: i64, grade: i64) -> Result<LinearMap> {
        let src = self.space(kind, p, grade);
        let dst = match kind {
            Kind::Chain => self.space(kind, p - 1, grade),
            Kind::Cochain => self.space(kind, p + 1, grade),
        };
        let field = self.field();
        let mut cols = Vec::with_capacity(src.dim());
        for i in 0..src.dim() {
            let (a, t) = src.element(i);
            let v = match kind {
                Kind::Chain => self.chain_boundary(&dst, a, t)?,
                Kind::Cochain => self.cochain_coboundary(&dst, a, t)?,
            };
            cols.push(v);
        }
        Ok(LinearMap::new(src.dim(), dst.dim(), field, cols))
    }

    fn chain_boundary(&self, dst: &BarSpace, a: usize, t: &[usize]) -> Result<SparseVec> {
        let p = t.len();
        let mut acc = Accum::default();
        if p == 0 {
            return Ok(acc.finish());
        }
        for (k, c) in self.prod[a][t[0]].iter() {
            acc.add(dst.locate(k, t[1..].to_vec())?, c);
        }
        for i in 1..p {
            let s = self.sign(i);
            for (k, c) in self.prod[t[i - 1]][t[i]].iter() {
                let mut u = Vec::with_capacity(p - 1);
                u.extend_from_slice(&t[..i - 1]);
                u.push(k);
                u.extend_from_slice(&t[i + 1..]);
                acc.add(dst.locate(a, u)?, &(&s * c));
            }
        }
        let s = self.sign(p);
        for (k, c) in self.prod[t[p - 1]][a].iter() {
            acc.add(dst.locate(k, t[..p - 1].to_vec())?, &(&s * c));
        }
        Ok(acc.finish())
    }

    /// Image of the cochain sending the tuple t to e_o (and other tuples to 0),
    /// under (bf)(a_1…a_{p+1}) = f(a_1…a_p) a_{p+1} + (−1)^{p+1} a_1 f(a_2…)
    /// + Σ_i (−1)^{p+1+i} f(…a_i a_{i+1}…).
    fn cochain_coboundary(&self, dst: &BarSpace, o: usize, t: &[usize]) -> Result<SparseVec> {
        let p = t.len();
        let mut acc = Accum::default();
        let s_left = self.sign(p + 1);
        for g in 1..self.total_dim() {
            let mut u = t.to_vec();
            u.push(g);
            for (k, c) in self.prod[o][g].iter() {
                acc.add(dst.locate(k, u.clone())?, c);
            }
            let mut u = vec![g];
            u.extend_from_slice(t);
            for (k, c) in self.prod[g][o].iter() {
                acc.add(dst.locate(k, u.clone())?, &(&s_left * c));
            }
        }
        for i in 1..=p {
            let s = self.sign(p + 1 + i);
            for (g, h, c) in &self.factors[t[i - 1]] {
                let mut u = Vec::with_capacity(p + 1);
                u.extend_from_slice(&t[..i - 1]);
                u.push(*g);
                u.push(*h);
                u.extend_from_slice(&t[i..]);
                acc.add(dst.locate(o, u)?, &(&s * c));
            }
        }
        Ok(acc.finish())
    }

    fn grades(&self, kind: Kind, p: usize) -> Vec<i64> {
        let top = self.top as i64;
        let p = p as i64;
        match kind {
            Kind::Chain => (p..=top * (p + 1)).collect(),
            Kind::Cochain => (-(p * top)..=top - p).collect(),
        }
    }

    pub fn piece(&self, kind: Kind, p: usize, grade: i64) -> Result<Arc<HochschildPiece>> {
        let key = (kind, p, grade);
        if let Some(x) = self.pieces.lock().expect("cache poisoned").get(&key) {
            return Ok(x.clone());
        }
        self.guard(p)?;
        let pi = p as i64;
        let (d_in, d_out) = match kind {
            Kind::Chain => (self.differential(kind, pi + 1, grade)?, self.differential(kind, pi, grade)?),
            Kind::Cochain => (self.differential(kind, pi - 1, grade)?, self.differential(kind, pi, grade)?),
        };
        let piece = Arc::new(HochschildPiece {
            basis: self.space(kind, pi, grade),
            homology: homology_at(&d_in, &d_out)?,
        });
        Ok(self.pieces.lock().expect("cache poisoned").entry(key).or_insert(piece).clone())
    }

    /// HH_p(A) for `Kind::Chain`, HH^p(A) for `Kind::Cochain`.
    pub fn hh(&self, kind: Kind, p: usize) -> Result<HochschildSpace> {
        self.guard(p)?;
        let pieces = self
            .grades(kind, p)
            .into_iter()
            .map(|g| self.piece(kind, p, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(HochschildSpace { kind, p, pieces })
    }

    /// χ̃ on a Koszul chain with A coefficients at (p, m).
    pub fn include_chain(&self, p: usize, m: usize, coords: &SparseVec) -> Result<SparseVec> {
        let w = w_space(self.a, p);
        let dw = w.dim();
        let idx = TensorBasisIndex::new(self.a.n(), p);
        let dst = self.space(Kind::Chain, p as i64, (m + p) as i64);
        let mut acc = Accum::default();
        for (k, c) in coords.iter() {
            let a = self.global(m, k / dw);
            for (r, x) in w.basis()[k % dw].iter() {
                let t = idx.word(r).into_iter().map(|i| self.generator(i)).collect();
                acc.add(dst.locate(a, t)?, &(c * x));
            }
        }
        Ok(acc.finish())
    }

    /// χ* on a bar cochain of degree p and shift s, landing at (p, p + s).
    pub fn restrict_cochain(&self, p: usize, s: i64, v: &SparseVec) -> Result<SparseVec> {
        let w = w_space(self.a, p);
        let dw = w.dim();
        let idx = TensorBasisIndex::new(self.a.n(), p);
        let src = self.space(Kind::Cochain, p as i64, s);
        let first_gen = self.offsets[1];
        let mut acc = Accum::default();
        for (k, c) in v.iter() {
            let (o, t) = src.element(k);
            if t.iter().any(|&g| self.weight[g] != 1) {
                continue;
            }
            let word: Vec<usize> = t.iter().map(|&g| g - first_gen).collect();
            let r = idx.rank(&word);
            let (_, ol) = self.local(o);
            for (j, b) in w.basis().iter().enumerate() {
                if let Some(x) = b.get(r) {
                    acc.add(ol * dw + j, &(c * x));
                }
            }
        }
        Ok(acc.finish())
    }

    fn koszul_space(&self, kind: Kind, p: usize, m: usize) -> Result<HomologySpace> {
        hk(&Bimodule::regular(self.a), kind, Variant::Standard, p as i64, m as i64)
    }

    /// H(χ̃)_p: HK_p(A)_m → HH_p(A) at total weight m + p.
    pub fn chi_tilde_block(&self, p: usize, m: usize) -> Result<LinearMap> {
        let src = self.koszul_space(Kind::Chain, p, m)?;
        let dst = self.piece(Kind::Chain, p, (m + p) as i64)?;
        let cols = (0..src.dim())
            .map(|i| dst.class_of(&self.include_chain(p, m, src.representative(i))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(LinearMap::new(src.dim(), dst.dim(), self.field(), cols))
    }

    /// H(χ*)_p: HH^p(A) at shift s → HK^p(A)_{p+s}.
    pub fn chi_star_block(&self, p: usize, s: i64) -> Result<LinearMap> {
        let src = self.piece(Kind::Cochain, p, s)?;
        let m = p as i64 + s;
        if m < 0 || m > self.top as i64 {
            return Ok(LinearMap::zero(src.dim(), 0, self.field()));
        }
        let dst = self.koszul_space(Kind::Cochain, p, m as usize)?;
        let cols = (0..src.dim())
            .map(|i| dst.class_of(&self.restrict_cochain(p, s, src.homology.representative(i))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(LinearMap::new(src.dim(), dst.dim(), self.field(), cols))
    }

    /// H(χ̃)_p on all of HK_p(A) (blocks by weight) or H(χ*)_p on all of HH^p(A).
    pub fn comparison(&self, kind: Kind, p: usize) -> Result<Comparison> {
        let blocks = match kind {
            Kind::Chain => (0..=self.top).map(|m| self.chi_tilde_block(p, m)).collect::<Result<Vec<_>>>()?,
            Kind::Cochain => self
                .grades(kind, p)
                .into_iter()
                .map(|s| self.chi_star_block(p, s))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Comparison {
            map: block_diagonal(&blocks, self.field()),
        })
    }

    /// A graded operator on bar chains of degree p and total weight w.
    pub fn graded_op(&self, op: GradedOp, p: i64, w: i64) -> Result<LinearMap> {
        let src = self.space(Kind::Chain, p, w);
        let field = self.field();
        let target_p = match op {
            GradedOp::EulerCap => p - 1,
            GradedOp::Connes => p + 1,
            GradedOp::Weight => p,
        };
        let dst = self.space(Kind::Chain, target_p, w);
        let mut cols = Vec::with_capacity(src.dim());
        for i in 0..src.dim() {
            let (a, t) = src.element(i);
            let mut acc = Accum::default();
            match op {
                GradedOp::EulerCap => {
                    if let Some((&last, rest)) = t.split_last() {
                        let c = &self.sign(t.len() - 1) * &field.from_i64(self.weight[last] as i64);
                        for (k, x) in self.prod[last][a].iter() {
                            acc.add(dst.locate(k, rest.to_vec())?, &(&c * x));
                        }
                    }
                }
                GradedOp::Connes => {
                    if a != 0 {
                        let q = t.len();
                        for j in 0..=q {
                            let mut u = Vec::with_capacity(q + 1);
                            u.extend_from_slice(&t[q - j..]);
                            u.push(a);
                            u.extend_from_slice(&t[..q - j]);
                            acc.add(dst.locate(0, u)?, &self.sign(q * j));
                        }
                    }
                }
                GradedOp::Weight => acc.add(i, &field.from_i64(w)),
            }
            cols.push(acc.finish());
        }
        Ok(LinearMap::new(src.dim(), dst.dim(), field, cols))
    }

    /// The map induced by `op` from HH_p at weight w.
    pub fn induced_op(&self, op: GradedOp, p: usize, w: i64) -> Result<LinearMap> {
        let src = self.piece(Kind::Chain, p, w)?;
        let tp = match op {
            GradedOp::EulerCap => p as i64 - 1,
            GradedOp::Connes => p as i64 + 1,
            GradedOp::Weight => p as i64,
        };
        if tp < 0 {
            return Ok(LinearMap::zero(src.dim(), 0, self.field()));
        }
        let dst = self.piece(Kind::Chain, tp as usize, w)?;
        let m = self.graded_op(op, p as i64, w)?;
        let cols = (0..src.dim())
            .map(|i| dst.class_of(&m.apply(src.homology.representative(i))))
            .collect::<Result<Vec<_>>>()?;
        Ok(LinearMap::new(src.dim(), dst.dim(), self.field(), cols))
    }

    /// Block-diagonal sum of `induced_op` over all weights of HH_p.
    pub fn induced_op_total(&self, op: GradedOp, p: usize) -> Result<LinearMap> {
        let grades = self.grades(Kind::Chain, p);
        if op == GradedOp::EulerCap && p == 0 {
            let d = self.hh(Kind::Chain, 0)?.dim();
            return Ok(LinearMap::zero(d, 0, self.field()));
        }
        let target = match op {
            GradedOp::EulerCap => p - 1,
            GradedOp::Connes => p + 1,
            GradedOp::Weight => p,
        };
        // align blocks with the target's grade list
        let tgt = self.hh(Kind::Chain, target)?;
        let src = self.hh(Kind::Chain, p)?;
        let mut cols = Vec::with_capacity(src.dim());
        for g in grades {
            let block = self.induced_op(op, p, g)?;
            let off = if tgt.piece(g).is_some() { tgt.offset(g) } else { 0 };
            for c in block.columns() {
                cols.push(c.map_indices_monotone(|i| i + off));
            }
        }
        Ok(LinearMap::new(src.dim(), tgt.dim(), self.field(), cols))
    }

    /// Checks [H(e_D), H(B)]_gc = H(L_D) on HH_p.
    pub fn rg_check(&self, p: usize) -> Result<RgCheck> {
        if self.field().characteristic() != 0 {
            return Err(Error::Characteristic("the identity is checked in characteristic 0".into()));
        }
        let field = self.field();
        let pieces: Vec<i64> = self.grades(Kind::Chain, p);
        let mut blocks = Vec::new();
        for w in pieces {
            let b_p = self.induced_op(GradedOp::Connes, p, w)?;
            let e_up = self.induced_op(GradedOp::EulerCap, p + 1, w)?;
            let mut total = e_up.compose(&b_p)?;
            if p > 0 {
                let e_p = self.induced_op(GradedOp::EulerCap, p, w)?;
                let b_down = self.induced_op(GradedOp::Connes, p - 1, w)?;
                total = total.add(&b_down.compose(&e_p)?);
            }
            blocks.push(total.sub(&self.induced_op(GradedOp::Weight, p, w)?));
        }
        Ok(RgCheck {
            p,
            residual: block_diagonal(&blocks, field),
        })
    }

    /// The Euler derivation D(a) = |a| a as a bar 1-cochain of shift 0.
    pub fn euler_derivation(&self) -> SparseVec {
        let s = self.space(Kind::Cochain, 1, 0);
        SparseVec::from_entries(
            (1..self.total_dim())
                .filter_map(|g| s.position(g, &[g]).map(|i| (i, self.field().from_i64(self.weight[g] as i64)))),
        )
    }

    /// D ⌣ f for a bar cochain f of degree p and shift s:
    /// (D ⌣ f)(a_1…a_{p+1}) = |a_1| a_1 f(a_2…a_{p+1}).
    pub fn euler_cup(&self, p: usize, s: i64, f: &SparseVec) -> Result<SparseVec> {
        let src = self.space(Kind::Cochain, p as i64, s);
        let dst = self.space(Kind::Cochain, p as i64 + 1, s);
        let field = self.field();
        let mut acc = Accum::default();
        for (k, c) in f.iter() {
            let (o, t) = src.element(k);
            for g in 1..self.total_dim() {
                let wg = field.from_i64(self.weight[g] as i64);
                let mut u = vec![g];
                u.extend_from_slice(t);
                for (r, x) in self.prod[g][o].iter() {
                    acc.add(dst.locate(r, u.clone())?, &(&(c * x) * &wg));
                }
            }
        }
        Ok(acc.finish())
    }

    fn induced_cup_block(&self, p: usize, s: i64) -> Result<LinearMap> {
        let src = self.piece(Kind::Cochain, p, s)?;
        let dst = self.piece(Kind::Cochain, p + 1, s)?;
        let cols = (0..src.dim())
            .map(|i| dst.class_of(&self.euler_cup(p, s, src.homology.representative(i))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(LinearMap::new(src.dim(), dst.dim(), self.field(), cols))
    }

    /// Homology of HH_• under H(e_D) or H(B), or of HH^• under [D] ⌣ −, at p.
    pub fn higher_hochschild(&self, kind: HigherKind, p: usize) -> Result<HigherHochschild> {
        if self.field().characteristic() == 2 {
            return Err(Error::Characteristic("higher Hochschild homology needs characteristic ≠ 2".into()));
        }
        let field = self.field();
        let homology = match kind {
            HigherKind::Homology => {
                let d_in = self.induced_op_total(GradedOp::EulerCap, p + 1)?;
                let d_out = self.induced_op_total(GradedOp::EulerCap, p)?;
                homology_at(&d_in, &d_out)?
            }
            HigherKind::DeRham => {
                let d_out = self.induced_op_total(GradedOp::Connes, p)?;
                let d_in = if p == 0 {
                    LinearMap::zero(0, d_out.src_dim(), field)
                } else {
                    self.induced_op_total(GradedOp::Connes, p - 1)?
                };
                homology_at(&d_in, &d_out)?
            }
            HigherKind::Cohomology => {
                let grades = self.grades(Kind::Cochain, p);
                let mut ins = Vec::new();
                let mut outs = Vec::new();
                for s in grades {
                    outs.push(self.induced_cup_block(p, s)?);
                    ins.push(if p == 0 {
                        LinearMap::zero(0, self.piece(Kind::Cochain, 0, s)?.dim(), field)
                    } else {
                        self.induced_cup_block(p - 1, s)?
                    });
                }
                // [D] ⌣ − preserves the shift, so the pieces are independent complexes
                let hs = ins.iter().zip(&outs).map(|(i, o)| homology_at(i, o)).collect::<std::result::Result<Vec<_>, _>>()?;
                combine_homologies(&hs, field)
            }
        };
        Ok(HigherHochschild { kind, p, homology })
    }
}

fn block_diagonal(blocks: &[LinearMap], field: Field) -> LinearMap {
    let src: usize = blocks.iter().map(|b| b.src_dim()).sum();
    let dst: usize = blocks.iter().map(|b| b.dst_dim()).sum();
    let mut cols = Vec::with_capacity(src);
    let mut off = 0;
    for b in blocks {
        for c in b.columns() {
            cols.push(c.map_indices_monotone(|i| i + off));
        }
        off += b.dst_dim();
    }
    LinearMap::new(src, dst, field, cols)
}

/// Direct sum of homologies of independent complexes.
fn combine_homologies(hs: &[Homology], field: Field) -> Homology {
    let d_in = block_diagonal(
        &hs.iter()
            .map(|h| LinearMap::new(h.boundaries.dim(), h.cycles.ambient_dim(), field, h.boundaries.basis().to_vec()))
            .collect::<Vec<_>>(),
        field,
    );
    let d_out = block_diagonal(
        &hs.iter()
            .map(|h| {
                // any map with kernel = cycles: the quotient by the cycle space
                let q = crate::linalg::QuotientSpace::full(h.cycles.clone());
                q.project_map().expect("full quotient projects everything")
            })
            .collect::<Vec<_>>(),
        field,
    );
    homology_at(&d_in, &d_out).expect("direct sum of complexes")
}
