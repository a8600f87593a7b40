//! The Koszul complex: the spaces W_p, chain and cochain differentials with
//! coefficients in A, k or A*, biweight-local (co)homology, and the left
//! Koszul complex used for the Koszulity test.

use std::sync::Arc;

use crate::algebra::{cached, render_combination, Bimodule, CoeffKind, QuadraticAlgebra, Side};
use crate::error::{Error, Result};
use crate::linalg::{homology_at, intersect, Accum, Homology, LinearMap, Subspace, SparseVec};
use crate::scalars::{Field, Scalar};
use crate::tensor::{embed_block, factor_vector, pow, TensorBasisIndex};

/// W_p ⊆ V^{⊗p}, computed as (V⊗W_{p−1}) ∩ (W_{p−1}⊗V) for p ≥ 3.
pub fn w_space(a: &QuadraticAlgebra, p: usize) -> Arc<Subspace> {
    if let Some(w) = a.w_cache.lock().expect("cache poisoned").get(&p) {
        return w.clone();
    }
    let n = a.n();
    let field = a.field();
    let w = match p {
        0 => Subspace::full(1, field),
        1 => Subspace::full(n, field),
        2 => a.relations().clone(),
        _ => {
            let prev = w_space(a, p - 1);
            if prev.dim() == 0 {
                Subspace::zero(pow(n, p), field)
            } else {
                let left = embed_block(&prev, n, p - 1, 1, 0);
                let right = embed_block(&prev, n, p - 1, 0, 1);
                intersect(&[left, right]).expect("equal ambients")
            }
        }
    };
    let w = Arc::new(w);
    a.w_cache.lock().expect("cache poisoned").entry(p).or_insert(w).clone()
}

/// W_p straight from the definition, as the intersection of all
/// V^{⊗i} ⊗ R ⊗ V^{⊗j} with i + 2 + j = p.
pub fn w_space_definitional(a: &QuadraticAlgebra, p: usize) -> Subspace {
    if p < 2 {
        return (*w_space(a, p)).clone();
    }
    let parts: Vec<Subspace> = (0..=p - 2)
        .map(|i| embed_block(a.relations(), a.n(), 2, i, p - 2 - i))
        .collect();
    intersect(&parts).expect("equal ambients")
}

pub fn w_dim(a: &QuadraticAlgebra, p: i64) -> usize {
    if p < 0 {
        0
    } else {
        w_space(a, p as usize).dim()
    }
}

/// Coordinates of each basis vector of W_{p+q} in the product basis of
/// W_p ⊗ W_q (index i·dim W_q + j).
pub fn split_table(a: &QuadraticAlgebra, p: usize, q: usize) -> Result<Arc<Vec<SparseVec>>> {
    cached(&a.split_cache, (p, q), || {
        let whole = w_space(a, p + q);
        let left = w_space(a, p);
        let right = w_space(a, q);
        whole
            .basis()
            .iter()
            .map(|v| {
                factor_vector(v, a.n(), q, &left, &right).ok_or_else(|| {
                    Error::Invariant(format!("W_{} does not factor through W_{p} ⊗ W_{q}", p + q))
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Chain,
    Cochain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Standard,
    Tilde,
}

pub(crate) fn sign(field: Field, exponent: i64) -> Scalar {
    if exponent.rem_euclid(2) == 0 {
        field.one()
    } else {
        -field.one()
    }
}

macro_rules! element_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq)]
        pub struct $name {
            pub coeff: CoeffKind,
            /// Homological weight.
            pub p: i64,
            /// Coefficient weight.
            pub m: i64,
            pub coords: SparseVec,
        }

        impl $name {
            pub fn new(coeff: CoeffKind, p: i64, m: i64, coords: SparseVec) -> $name {
                $name { coeff, p, m, coords }
            }

            pub fn zero(coeff: CoeffKind, p: i64, m: i64) -> $name {
                $name::new(coeff, p, m, SparseVec::zero())
            }

            pub fn is_zero(&self) -> bool {
                self.coords.is_zero()
            }

            fn same_space(&self, other: &$name) {
                assert!(
                    self.coeff == other.coeff && self.p == other.p && self.m == other.m,
                    "adding elements of different spaces: ({},{}) and ({},{})",
                    self.p, self.m, other.p, other.m
                );
            }

            pub fn add(&self, other: &$name) -> $name {
                self.same_space(other);
                $name::new(self.coeff, self.p, self.m, self.coords.add(&other.coords))
            }

            pub fn sub(&self, other: &$name) -> $name {
                self.same_space(other);
                $name::new(self.coeff, self.p, self.m, self.coords.sub(&other.coords))
            }

            pub fn scale(&self, c: &Scalar) -> $name {
                $name::new(self.coeff, self.p, self.m, self.coords.scale(c))
            }

            pub fn neg(&self) -> $name {
                $name::new(self.coeff, self.p, self.m, self.coords.neg())
            }
        }
    };
}

element_type!(
    /// Element of M_m ⊗ W_p; coordinate index = (M_m basis)·dim W_p + (W_p basis).
    Chain
);
element_type!(
    /// Element of Hom(W_p, M_m); index i·dim W_p + j is the coefficient of
    /// the i-th basis vector of M_m in the value on the j-th basis vector of W_p.
    Cochain
);

/// dim M_m · dim W_p (zero for negative weights).
pub fn space_dim(module: &Bimodule<'_>, p: i64, m: i64) -> Result<usize> {
    if p < 0 || m < 0 {
        return Ok(0);
    }
    let dw = w_dim(module.algebra(), p);
    if dw == 0 {
        return Ok(0);
    }
    Ok(module.dim(m)? * dw)
}

/// f(w_j) ∈ M_m for every basis vector w_j of W_p.
pub fn cochain_values(f: &Cochain, dim_w: usize) -> Vec<SparseVec> {
    let mut acc: Vec<Accum> = (0..dim_w).map(|_| Accum::default()).collect();
    for (idx, c) in f.coords.iter() {
        acc[idx % dim_w].add(idx / dim_w, c);
    }
    acc.into_iter().map(Accum::finish).collect()
}

pub fn cochain_from_values(values: &[SparseVec]) -> SparseVec {
    let dw = values.len();
    let mut acc = Accum::default();
    for (j, v) in values.iter().enumerate() {
        for (i, c) in v.iter() {
            acc.add(i * dw + j, c);
        }
    }
    acc.finish()
}

fn check_variant(module: &Bimodule<'_>, variant: Variant) -> Result<()> {
    if variant == Variant::Tilde && module.kind() == CoeffKind::Trivial {
        return Err(Error::Unsupported(
            "tilde differentials need graded coefficients (A or A*)".into(),
        ));
    }
    Ok(())
}

fn module_weight(module: &Bimodule<'_>, m: i64) -> Result<usize> {
    if !module.knows_weight(m) || !module.knows_weight(m + module.shift()) {
        let w = m.max(m + module.shift()).max(0) as usize;
        return Err(Error::Truncated {
            weight: w,
            bound: module.algebra().weight_bound(),
        });
    }
    Ok(m as usize)
}

/// b(z) for a chain z: m·x_1⊗x_2…x_p + ε x_p·m⊗x_1…x_{p−1}, with
/// ε = (−1)^p (standard) or (−1)^{|m|} (tilde).
pub fn chain_differential(module: &Bimodule<'_>, variant: Variant, z: &Chain) -> Result<Chain> {
    check_variant(module, variant)?;
    let target_m = z.m + module.shift();
    let out = |coords| Chain::new(module.kind(), z.p - 1, target_m, coords);
    if z.p <= 0 || z.m < 0 || z.is_zero() {
        return Ok(out(SparseVec::zero()));
    }
    let a = module.algebra();
    let (p, m) = (z.p as usize, module_weight(module, z.m)?);
    let n = a.n();
    let dw = w_dim(a, z.p);
    let dw1 = w_dim(a, z.p - 1);
    let left = split_table(a, 1, p - 1)?;
    let right = split_table(a, p - 1, 1)?;
    let eps = match variant {
        Variant::Standard => sign(a.field(), z.p),
        Variant::Tilde => sign(a.field(), z.m),
    };
    let act_r: Vec<_> = (0..n).map(|x| module.act_map(Side::Right, x, m)).collect::<Result<_>>()?;
    let act_l: Vec<_> = (0..n).map(|x| module.act_map(Side::Left, x, m)).collect::<Result<_>>()?;
    let mut acc = Accum::default();
    for (idx, c) in z.coords.iter() {
        let (i, j) = (idx / dw, idx % dw);
        for (t, coef) in left[j].iter() {
            let (x, k) = (t / dw1, t % dw1);
            acc.add_vec_offset(&(c * coef), act_r[x].column(i), |i2| i2 * dw1 + k);
        }
        for (t, coef) in right[j].iter() {
            let (k, x) = (t / n, t % n);
            acc.add_vec_offset(&(&eps * &(c * coef)), act_l[x].column(i), |i2| i2 * dw1 + k);
        }
    }
    Ok(out(acc.finish()))
}

/// b(f)(x_1…x_{p+1}) = f(x_1…x_p)·x_{p+1} − ε x_1·f(x_2…x_{p+1}), with
/// ε = (−1)^p (standard) or (−1)^{|f|} (tilde).
pub fn cochain_differential(module: &Bimodule<'_>, variant: Variant, f: &Cochain) -> Result<Cochain> {
    check_variant(module, variant)?;
    let target_m = f.m + module.shift();
    let out = |coords| Cochain::new(module.kind(), f.p + 1, target_m, coords);
    if f.p < 0 || f.m < 0 || f.is_zero() {
        return Ok(out(SparseVec::zero()));
    }
    let a = module.algebra();
    let (p, m) = (f.p as usize, module_weight(module, f.m)?);
    let n = a.n();
    let dw = w_dim(a, f.p);
    let dw1 = w_dim(a, f.p + 1);
    if dw1 == 0 {
        return Ok(out(SparseVec::zero()));
    }
    let values = cochain_values(f, dw);
    let by_right = split_table(a, p, 1)?;
    let by_left = split_table(a, 1, p)?;
    let eps = match variant {
        Variant::Standard => sign(a.field(), f.p),
        Variant::Tilde => sign(a.field(), f.m),
    };
    let act_r: Vec<_> = (0..n).map(|x| module.act_map(Side::Right, x, m)).collect::<Result<_>>()?;
    let act_l: Vec<_> = (0..n).map(|x| module.act_map(Side::Left, x, m)).collect::<Result<_>>()?;
    let mut new_values = Vec::with_capacity(dw1);
    for l in 0..dw1 {
        let mut acc = Accum::default();
        for (t, coef) in by_right[l].iter() {
            let (k, x) = (t / n, t % n);
            acc.add_vec(coef, &act_r[x].apply(&values[k]));
        }
        for (t, coef) in by_left[l].iter() {
            let (x, k) = (t / dw, t % dw);
            acc.add_vec(&-(&eps * coef), &act_l[x].apply(&values[k]));
        }
        new_values.push(acc.finish());
    }
    Ok(out(cochain_from_values(&new_values)))
}

/// Matrix of the differential leaving biweight (p, m).
pub fn differential(module: &Bimodule<'_>, kind: Kind, variant: Variant, p: i64, m: i64) -> Result<LinearMap> {
    check_variant(module, variant)?;
    let field = module.field();
    let tp = match kind {
        Kind::Chain => p - 1,
        Kind::Cochain => p + 1,
    };
    let tm = m + module.shift();
    let src = space_dim(module, p, m)?;
    let dst = space_dim(module, tp, tm)?;
    let mut cols = Vec::with_capacity(src);
    for idx in 0..src {
        let unit = SparseVec::unit(idx, field);
        let image = match kind {
            Kind::Chain => chain_differential(module, variant, &Chain::new(module.kind(), p, m, unit))?.coords,
            Kind::Cochain => cochain_differential(module, variant, &Cochain::new(module.kind(), p, m, unit))?.coords,
        };
        cols.push(image);
    }
    Ok(LinearMap::new(src, dst, field, cols))
}

/// (Co)homology at one biweight, with canonical representatives.
#[derive(Debug, Clone)]
pub struct HomologySpace {
    pub kind: Kind,
    pub variant: Variant,
    pub coeff: CoeffKind,
    pub p: i64,
    pub m: i64,
    pub homology: Homology,
}

impl HomologySpace {
    pub fn dim(&self) -> usize {
        self.homology.dim()
    }

    pub fn representative(&self, i: usize) -> &SparseVec {
        self.homology.representative(i)
    }

    pub fn representatives(&self) -> &[SparseVec] {
        self.homology.representatives()
    }

    /// Coordinates of the class of a cycle (fails if not a cycle).
    pub fn class_of(&self, v: &SparseVec) -> Result<SparseVec> {
        self.homology
            .project(v)
            .map_err(|_| Error::Invariant(format!("element at ({},{}) is not a cycle", self.p, self.m)))
    }

    pub fn rep_chain(&self, i: usize) -> Chain {
        Chain::new(self.coeff, self.p, self.m, self.representative(i).clone())
    }

    pub fn rep_cochain(&self, i: usize) -> Cochain {
        Cochain::new(self.coeff, self.p, self.m, self.representative(i).clone())
    }

    /// A cycle representing the class with the given coordinates.
    pub fn lift(&self, class: &SparseVec) -> SparseVec {
        let mut acc = Accum::default();
        for (i, c) in class.iter() {
            acc.add_vec(c, self.representative(i));
        }
        acc.finish()
    }
}

/// HK at one biweight. Fails with `NeedsHalo` instead of guessing when the
/// weight bound does not reach the adjacent differentials.
pub fn hk(module: &Bimodule<'_>, kind: Kind, variant: Variant, p: i64, m: i64) -> Result<HomologySpace> {
    let halo = |e: Error| match e {
        Error::Truncated { .. } => Error::NeedsHalo {
            p: p.max(0) as usize,
            m: m.max(0) as usize,
        },
        other => other,
    };
    let d_out = differential(module, kind, variant, p, m).map_err(halo)?;
    let (ip, im) = match kind {
        Kind::Chain => (p + 1, m - module.shift()),
        Kind::Cochain => (p - 1, m - module.shift()),
    };
    let d_in = differential(module, kind, variant, ip, im).map_err(halo)?;
    let homology = homology_at(&d_in, &d_out)?;
    Ok(HomologySpace {
        kind,
        variant,
        coeff: module.kind(),
        p,
        m,
        homology,
    })
}

/// Whether HK at coefficient weight m can be certified with the available weights.
pub fn certifiable(module: &Bimodule<'_>, m: i64) -> bool {
    let d = module.shift();
    let ok = |w: i64| w < 0 || (module.knows_weight(w) && module.knows_weight(w + d));
    ok(m) && ok(m - d)
}

/// The left Koszul complex A ⊗ W_•, d(a ⊗ x_1…x_p) = a x_1 ⊗ x_2…x_p,
/// leaving biweight (p, m).
pub fn left_differential(a: &QuadraticAlgebra, p: i64, m: i64) -> Result<LinearMap> {
    let field = a.field();
    let module = Bimodule::regular(a);
    let src = space_dim(&module, p, m)?;
    let dst = space_dim(&module, p - 1, m + 1)?;
    if src == 0 || dst == 0 {
        return Ok(LinearMap::zero(src, dst, field));
    }
    let (pu, mu) = (p as usize, m as usize);
    let dw = w_dim(a, p);
    let dw1 = w_dim(a, p - 1);
    let left = split_table(a, 1, pu - 1)?;
    let act: Vec<_> = (0..a.n()).map(|x| a.right_mult(x, mu)).collect::<Result<_>>()?;
    let cols = (0..src)
        .map(|idx| {
            let (i, j) = (idx / dw, idx % dw);
            let mut acc = Accum::default();
            for (t, coef) in left[j].iter() {
                let (x, k) = (t / dw1, t % dw1);
                acc.add_vec_offset(coef, act[x].column(i), |i2| i2 * dw1 + k);
            }
            acc.finish()
        })
        .collect();
    Ok(LinearMap::new(src, dst, field, cols))
}

/// H_p(K_ℓ(A)) at coefficient weight m.
pub fn left_koszul_space(a: &QuadraticAlgebra, p: i64, m: i64) -> Result<Homology> {
    let d_out = left_differential(a, p, m)?;
    let d_in = left_differential(a, p + 1, m - 1)?;
    Ok(homology_at(&d_in, &d_out)?)
}

/// dim H_p(K_ℓ(A))_m for m = 0..=weight_bound.
pub fn left_koszul_homology(a: &QuadraticAlgebra, p: usize, weight_bound: usize) -> Result<Vec<usize>> {
    (0..=weight_bound)
        .map(|m| left_koszul_space(a, p as i64, m as i64).map(|h| h.dim()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KoszulityReport {
    pub bound: usize,
    /// (p, coefficient weight, dim H_p) for every nonzero H_p with p ≥ 1.
    pub failures: Vec<(usize, usize, usize)>,
}

impl KoszulityReport {
    pub fn is_koszul_up_to_bound(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn verdict(&self) -> String {
        match self.failures.first() {
            None => format!("Koszul up to degree {}", self.bound),
            Some((p, _, _)) => format!("NOT Koszul: H_{p}(K_ℓ) ≠ 0"),
        }
    }
}

/// Exactness of K_ℓ(A) in degrees 1..=N at every total weight ≤ N.
/// The algebra must be built to weight N (or be finite).
pub fn koszulity(a: &QuadraticAlgebra, bound: usize) -> Result<KoszulityReport> {
    if bound < 2 {
        return Err(Error::Unsupported("the Koszulity degree bound must be at least 2".into()));
    }
    if !a.knows_weight(bound) {
        return Err(Error::Truncated {
            weight: bound,
            bound: a.weight_bound(),
        });
    }
    let mut failures = Vec::new();
    for p in 1..=bound {
        for t in p..=bound {
            let m = t - p;
            let d = left_koszul_space(a, p as i64, m as i64)?.dim();
            if d != 0 {
                failures.push((p, m, d));
            }
        }
    }
    Ok(KoszulityReport { bound, failures })
}

/// Renders a chain as Σ (coefficient) ⊗ (basis vector of W_p).
pub fn render_chain(module: &Bimodule<'_>, p: i64, m: i64, coords: &SparseVec) -> String {
    let a = module.algebra();
    let pres = a.presentation();
    let w = w_space(a, p.max(0) as usize);
    let dw = w.dim().max(1);
    let mut by_w: Vec<Accum> = (0..dw).map(|_| Accum::default()).collect();
    for (idx, c) in coords.iter() {
        by_w[idx % dw].add(idx / dw, c);
    }
    let mut parts = Vec::new();
    for (j, acc) in by_w.into_iter().enumerate() {
        let coef = acc.finish();
        if coef.is_zero() {
            continue;
        }
        let left = paren(module.render_element(&coef, m.max(0) as usize), coef.nnz() > 1);
        let right_vec = &w.basis()[j];
        let right = paren(pres.render_tensor(right_vec, p as usize), right_vec.nnz() > 1);
        parts.push(format!("{left}⊗{right}"));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Renders a cochain as Σ f(w_j) ⊗ w_j^*, each dual basis vector written as
/// the starred pivot word of w_j.
pub fn render_cochain(module: &Bimodule<'_>, p: i64, m: i64, coords: &SparseVec) -> String {
    let a = module.algebra();
    let w = w_space(a, p.max(0) as usize);
    let idx = TensorBasisIndex::new(a.n(), p.max(0) as usize);
    let values = cochain_values(&Cochain::new(module.kind(), p, m, coords.clone()), w.dim().max(1));
    let mut parts = Vec::new();
    for (j, v) in values.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let left = paren(module.render_element(v, m.max(0) as usize), v.nnz() > 1);
        let dual = if p == 0 {
            "1".to_string()
        } else {
            let word = idx.word(w.pivots()[j]);
            starred_word(a, &word)
        };
        parts.push(format!("{left}⊗{dual}"));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn starred_word(a: &QuadraticAlgebra, word: &[usize]) -> String {
    let gens = a.gens();
    let mut out = String::new();
    let mut i = 0;
    while i < word.len() {
        let mut j = i;
        while j < word.len() && word[j] == word[i] {
            j += 1;
        }
        out.push_str(&gens[word[i]]);
        out.push('*');
        if j - i > 1 {
            out.push_str(&format!("^{}", j - i));
        }
        i = j;
    }
    out
}

fn paren(s: String, wrap: bool) -> String {
    if wrap {
        format!("({s})")
    } else {
        s
    }
}

/// Render a plain tensor, re-exported for reports.
pub fn render_w_vector(a: &QuadraticAlgebra, v: &SparseVec, p: usize) -> String {
    if v.is_zero() {
        return "0".into();
    }
    render_combination(
        v.iter()
            .map(|(r, c)| (c.clone(), a.presentation().render_word(&TensorBasisIndex::new(a.n(), p).word(r)))),
    )
}
