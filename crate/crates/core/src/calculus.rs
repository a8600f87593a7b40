//! Cup and cap products, brackets, the fundamental cocycle e_A, higher
//! Koszul (co)homology and the small-weight Connes-type operators.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rand::Rng;

use crate::algebra::{Bimodule, CoeffKind, QuadraticAlgebra, Side};
use crate::error::{Error, Result};
use crate::koszul::{
    chain_differential, cochain_differential, cochain_from_values, cochain_values, hk, sign, space_dim, split_table,
    w_dim, w_space, Chain, Cochain, HomologySpace, Kind, Variant,
};
use crate::linalg::{homology_at, intersect, Accum, Homology, LinearMap, Subspace, SparseVec};
use crate::scalars::{Field, Scalar};
use crate::tensor::{pow, tensor_vec, TensorBasisIndex};

/// Sign convention of a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductSign {
    /// Signs from homological degrees.
    Standard,
    /// Signs from coefficient weights.
    Tilde,
    Unsigned,
}

impl From<Variant> for ProductSign {
    fn from(v: Variant) -> ProductSign {
        match v {
            Variant::Standard => ProductSign::Standard,
            Variant::Tilde => ProductSign::Tilde,
        }
    }
}

/// How two coefficient values multiply.
#[derive(Clone, Copy)]
enum Pairing {
    Algebra,
    /// a · v with a ∈ A, v ∈ M.
    LeftAction,
    /// v · a with v ∈ M, a ∈ A.
    RightAction,
}

fn pairing(module: &Bimodule<'_>, left: CoeffKind, right: CoeffKind) -> Result<(Pairing, CoeffKind)> {
    use CoeffKind::Regular;
    let ok = |k: CoeffKind| k == Regular || k == module.kind();
    if !ok(left) || !ok(right) {
        return Err(Error::Unsupported("coefficients do not match the supplied bimodule".into()));
    }
    match (left, right) {
        (Regular, Regular) => Ok((Pairing::Algebra, Regular)),
        (Regular, k) => Ok((Pairing::LeftAction, k)),
        (k, Regular) => Ok((Pairing::RightAction, k)),
        _ => Err(Error::Unsupported("one factor must have coefficients in A".into())),
    }
}

fn result_weight(module: &Bimodule<'_>, pairing: Pairing, m_left: i64, m_right: i64) -> i64 {
    match pairing {
        Pairing::Algebra => m_left + m_right,
        Pairing::LeftAction => m_right + module.shift() * m_left,
        Pairing::RightAction => m_left + module.shift() * m_right,
    }
}

fn multiply_values(
    module: &Bimodule<'_>,
    pairing: Pairing,
    u: &SparseVec,
    mu: usize,
    v: &SparseVec,
    mv: usize,
) -> Result<SparseVec> {
    match pairing {
        Pairing::Algebra => module.algebra().multiply(u, mu, v, mv),
        Pairing::LeftAction => module.act(Side::Left, u, mu, v, mv),
        Pairing::RightAction => module.act(Side::Right, v, mv, u, mu),
    }
}

fn product_sign(field: Field, sign_kind: ProductSign, degrees: i64, weights: i64) -> Scalar {
    match sign_kind {
        ProductSign::Standard => sign(field, degrees),
        ProductSign::Tilde => sign(field, weights),
        ProductSign::Unsigned => field.one(),
    }
}

/// (f ⌣ g)(x_1…x_{p+q}) = ε f(x_1…x_p) g(x_{p+1}…x_{p+q}), ε = (−1)^{pq},
/// (−1)^{mn} or 1. One factor must be A-valued; the other may take values
/// in `module`.
pub fn cup(sign_kind: ProductSign, module: &Bimodule<'_>, f: &Cochain, g: &Cochain) -> Result<Cochain> {
    let (pair, kind) = pairing(module, f.coeff, g.coeff)?;
    let (p, q) = (f.p, g.p);
    let m = result_weight(module, pair, f.m, g.m);
    let zero = Cochain::zero(kind, p + q, m);
    if p < 0 || q < 0 || m < 0 || f.m < 0 || g.m < 0 || f.is_zero() || g.is_zero() {
        return Ok(zero);
    }
    let a = module.algebra();
    let d_total = w_dim(a, p + q);
    if d_total == 0 {
        return Ok(zero);
    }
    let (dp, dq) = (w_dim(a, p), w_dim(a, q));
    let fv = cochain_values(f, dp);
    let gv = cochain_values(g, dq);
    let table = split_table(a, p as usize, q as usize)?;
    let eps = product_sign(a.field(), sign_kind, p * q, f.m * g.m);
    let mut memo: HashMap<(usize, usize), SparseVec> = HashMap::new();
    let mut values = Vec::with_capacity(d_total);
    for row in table.iter() {
        let mut acc = Accum::default();
        for (t, c) in row.iter() {
            let (i, j) = (t / dq, t % dq);
            if fv[i].is_zero() || gv[j].is_zero() {
                continue;
            }
            let prod = match memo.entry((i, j)) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(multiply_values(module, pair, &fv[i], f.m as usize, &gv[j], g.m as usize)?),
            };
            acc.add_vec(c, prod);
        }
        values.push(acc.finish());
    }
    Ok(Cochain::new(kind, p + q, m, cochain_from_values(&values).scale(&eps)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CapSide {
    /// f ⌢ z: f acts through the last p letters, on the left of the coefficient.
    Left,
    /// z ⌢ f: f acts through the first p letters, on the right of the coefficient.
    Right,
}

/// Cap product of an A-valued cochain f at (p, n) with a chain z at (q, m):
///   f ⌢ z = ε f(x_{q−p+1}…x_q)·a ⊗ x_1…x_{q−p},  ε = (−1)^{(q−p)p} or (−1)^{(m−n)n},
///   z ⌢ f = ε a·f(x_1…x_p) ⊗ x_{p+1}…x_q,        ε = (−1)^{pq} or (−1)^{mn}.
/// Zero when q < p.
pub fn cap(side: CapSide, sign_kind: ProductSign, module: &Bimodule<'_>, f: &Cochain, z: &Chain) -> Result<Chain> {
    if f.coeff != CoeffKind::Regular {
        return Err(Error::Unsupported("cap products need an A-valued cochain".into()));
    }
    let (pair, kind) = match side {
        CapSide::Left => pairing(module, CoeffKind::Regular, z.coeff)?,
        CapSide::Right => pairing(module, z.coeff, CoeffKind::Regular)?,
    };
    let (p, q) = (f.p, z.p);
    let m = match side {
        CapSide::Left => result_weight(module, pair, f.m, z.m),
        CapSide::Right => result_weight(module, pair, z.m, f.m),
    };
    let zero = Chain::zero(kind, q - p, m);
    if p < 0 || q < p || m < 0 || f.m < 0 || z.m < 0 || f.is_zero() || z.is_zero() {
        return Ok(zero);
    }
    let a = module.algebra();
    let field = a.field();
    let (dp, dq, dr) = (w_dim(a, p), w_dim(a, q), w_dim(a, q - p));
    let fv = cochain_values(f, dp);
    let eps = match side {
        CapSide::Left => product_sign(field, sign_kind, (q - p) * p, (z.m - f.m) * f.m),
        CapSide::Right => product_sign(field, sign_kind, p * q, z.m * f.m),
    };
    let table = match side {
        CapSide::Left => split_table(a, (q - p) as usize, p as usize)?,
        CapSide::Right => split_table(a, p as usize, (q - p) as usize)?,
    };
    let mut memo: HashMap<(usize, usize), SparseVec> = HashMap::new();
    let mut acc = Accum::default();
    for (idx, c) in z.coords.iter() {
        let (i, j) = (idx / dq, idx % dq);
        for (t, s) in table[j].iter() {
            let (k, l) = match side {
                CapSide::Left => (t / dp, t % dp),
                CapSide::Right => (t % dr, t / dr),
            };
            if fv[l].is_zero() {
                continue;
            }
            let prod = match memo.entry((i, l)) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(slot) => {
                    let e = SparseVec::unit(i, field);
                    slot.insert(match side {
                        CapSide::Left => multiply_values(module, pair, &fv[l], f.m as usize, &e, z.m as usize)?,
                        CapSide::Right => multiply_values(module, pair, &e, z.m as usize, &fv[l], f.m as usize)?,
                    })
                }
            };
            acc.add_vec_offset(&(c * s), prod, |i2| i2 * dr + k);
        }
    }
    Ok(Chain::new(kind, q - p, m, acc.finish().scale(&eps)))
}

/// [f, g] = f⌣g − ε g⌣f with ε = (−1)^{pq} (standard) or (−1)^{mn} (tilde).
pub fn cup_bracket(variant: Variant, module: &Bimodule<'_>, f: &Cochain, g: &Cochain) -> Result<Cochain> {
    let s: ProductSign = variant.into();
    let fg = cup(s, module, f, g)?;
    let gf = cup(s, module, g, f)?;
    let eps = product_sign(module.field(), s, f.p * g.p, f.m * g.m);
    Ok(fg.sub(&gf.scale(&eps)))
}

/// [f, z] = f⌢z − ε z⌢f with ε = (−1)^{pq} (standard) or (−1)^{mn} (tilde).
pub fn cap_bracket(variant: Variant, module: &Bimodule<'_>, f: &Cochain, z: &Chain) -> Result<Chain> {
    let s: ProductSign = variant.into();
    let l = cap(CapSide::Left, s, module, f, z)?;
    let r = cap(CapSide::Right, s, module, f, z)?;
    let eps = product_sign(module.field(), s, f.p * z.p, f.m * z.m);
    Ok(l.sub(&r.scale(&eps)))
}

/// e_A: V → A, x ↦ x, at biweight (1, 1).
pub fn euler_cocycle(a: &QuadraticAlgebra) -> Cochain {
    let n = a.n();
    let f = a.field();
    Cochain::new(CoeffKind::Regular, 1, 1, SparseVec::from_entries((0..n).map(|i| (i * n + i, f.one()))))
}

/// The unit 0-cochain 1 ↦ 1.
pub fn unit_cochain(a: &QuadraticAlgebra) -> Cochain {
    Cochain::new(CoeffKind::Regular, 0, 0, SparseVec::unit(0, a.field()))
}

/// f(x_1)x_2 + x_1 f(x_2) = 0 on every relation, evaluated directly on a
/// basis of R.
pub fn is_koszul_derivation(module: &Bimodule<'_>, f: &Cochain) -> Result<bool> {
    if f.p != 1 {
        return Err(Error::Unsupported("Koszul derivations are 1-cochains".into()));
    }
    let a = module.algebra();
    let n = a.n();
    if f.m < 0 {
        return Ok(true);
    }
    let m = f.m as usize;
    let values = cochain_values(f, n);
    for r in a.relations().basis() {
        let mut acc = Accum::default();
        for (t, c) in r.iter() {
            let (x1, x2) = (t / n, t % n);
            acc.add_vec(c, &module.act_map(Side::Right, x2, m)?.apply(&values[x1]));
            acc.add_vec(c, &module.act_map(Side::Left, x1, m)?.apply(&values[x2]));
        }
        if !acc.finish().is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Matrix of a linear operation between two homology spaces:
/// lift each class, apply, verify the image is a cycle, project.
pub fn induced_map(
    src: &HomologySpace,
    dst: &HomologySpace,
    mut op: impl FnMut(&SparseVec) -> Result<SparseVec>,
) -> Result<LinearMap> {
    let field = src.homology.cycles.field();
    let cols = (0..src.dim())
        .map(|i| dst.class_of(&op(src.representative(i))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(LinearMap::new(src.dim(), dst.dim(), field, cols))
}

/// The operator ē_A ⌣ − (cohomology) or ē_A ⌢ − (homology) between the
/// spaces at `src` and its image biweight.
pub fn higher_differential(
    module: &Bimodule<'_>,
    src: &HomologySpace,
    dst: &HomologySpace,
) -> Result<LinearMap> {
    let e = euler_cocycle(module.algebra());
    higher_differential_with(module, &e, src, dst)
}

/// The operator [D] ⌣ − or [D] ⌢ − for a Koszul derivation D. Outside the
/// fundamental class this needs char(k) ≠ 2.
pub fn higher_differential_with(
    module: &Bimodule<'_>,
    derivation: &Cochain,
    src: &HomologySpace,
    dst: &HomologySpace,
) -> Result<LinearMap> {
    let a = module.algebra();
    if !is_koszul_derivation(&Bimodule::regular(a), derivation)? {
        return Err(Error::Unsupported("the cochain is not a Koszul derivation".into()));
    }
    if *derivation != euler_cocycle(a) && a.field().characteristic() == 2 {
        return Err(Error::Characteristic(
            "higher (co)homology of a general derivation needs characteristic ≠ 2".into(),
        ));
    }
    if src.variant != dst.variant || src.kind != dst.kind {
        return Err(Error::Unsupported("source and target must be the same kind of space".into()));
    }
    let s: ProductSign = src.variant.into();
    match src.kind {
        Kind::Cochain => induced_map(src, dst, |v| {
            let f = Cochain::new(src.coeff, src.p, src.m, v.clone());
            let out = cup(s, module, derivation, &f)?;
            expect_biweight(out.p, out.m, dst)?;
            Ok(out.coords)
        }),
        Kind::Chain => induced_map(src, dst, |v| {
            let z = Chain::new(src.coeff, src.p, src.m, v.clone());
            let out = cap(CapSide::Left, s, module, derivation, &z)?;
            expect_biweight(out.p, out.m, dst)?;
            Ok(out.coords)
        }),
    }
}

fn expect_biweight(p: i64, m: i64, dst: &HomologySpace) -> Result<()> {
    if (p, m) != (dst.p, dst.m) {
        return Err(Error::Invariant(format!(
            "product landed in ({p},{m}) but the target space is at ({},{})",
            dst.p, dst.m
        )));
    }
    Ok(())
}

/// Biweight reached by ē_A ⌣ − or ē_A ⌢ − from (p, m).
pub fn higher_target(module: &Bimodule<'_>, kind: Kind, p: i64, m: i64) -> (i64, i64) {
    match kind {
        Kind::Cochain => (p + 1, m + module.shift()),
        Kind::Chain => (p - 1, m + module.shift()),
    }
}

/// Homology of HK under ∂ at one biweight.
#[derive(Debug, Clone)]
pub struct HigherSpace {
    pub center: HomologySpace,
    /// Classes inside the coordinates of `center`.
    pub homology: Homology,
}

impl HigherSpace {
    pub fn dim(&self) -> usize {
        self.homology.dim()
    }

    /// A (co)cycle representing the i-th higher class.
    pub fn cycle(&self, i: usize) -> SparseVec {
        self.center.lift(self.homology.representative(i))
    }

    /// Higher class of a (co)cycle whose HK class is ∂-closed.
    pub fn class_of_cycle(&self, v: &SparseVec) -> Result<SparseVec> {
        let c = self.center.class_of(v)?;
        self.homology
            .project(&c)
            .map_err(|_| Error::Invariant(format!("class at ({},{}) is not ∂-closed", self.center.p, self.center.m)))
    }
}

pub fn higher_space(module: &Bimodule<'_>, kind: Kind, variant: Variant, p: i64, m: i64) -> Result<HigherSpace> {
    let center = hk(module, kind, variant, p, m)?;
    let (tp, tm) = higher_target(module, kind, p, m);
    let (sp, sm) = match kind {
        Kind::Cochain => (p - 1, m - module.shift()),
        Kind::Chain => (p + 1, m - module.shift()),
    };
    let target = hk(module, kind, variant, tp, tm)?;
    let source = hk(module, kind, variant, sp, sm)?;
    let d_out = higher_differential(module, &center, &target)?;
    let d_in = higher_differential(module, &source, &center)?;
    let homology = homology_at(&d_in, &d_out)?;
    Ok(HigherSpace { center, homology })
}

/// Class-level cup product of higher cohomology: entry i·dim(g) + j is the
/// class of cycle_i(f) ⌣ cycle_j(g) in `dst`.
pub fn higher_cup_table(module: &Bimodule<'_>, f: &HigherSpace, g: &HigherSpace, dst: &HigherSpace) -> Result<Vec<SparseVec>> {
    let sign: ProductSign = f.center.variant.into();
    let mut out = Vec::with_capacity(f.dim() * g.dim());
    for i in 0..f.dim() {
        let x = Cochain::new(f.center.coeff, f.center.p, f.center.m, f.cycle(i));
        for j in 0..g.dim() {
            let y = Cochain::new(g.center.coeff, g.center.p, g.center.m, g.cycle(j));
            out.push(dst.class_of_cycle(&cup(sign, module, &x, &y)?.coords)?);
        }
    }
    Ok(out)
}

/// Class-level action f ⌢ z of higher cohomology on higher homology, laid
/// out like `higher_cup_table`.
pub fn higher_cap_table(module: &Bimodule<'_>, f: &HigherSpace, z: &HigherSpace, dst: &HigherSpace) -> Result<Vec<SparseVec>> {
    let sign: ProductSign = f.center.variant.into();
    let mut out = Vec::with_capacity(f.dim() * z.dim());
    for i in 0..f.dim() {
        let x = Cochain::new(f.center.coeff, f.center.p, f.center.m, f.cycle(i));
        for j in 0..z.dim() {
            let y = Chain::new(z.center.coeff, z.center.p, z.center.m, z.cycle(j));
            out.push(dst.class_of_cycle(&cap(CapSide::Left, sign, module, &x, &y)?.coords)?);
        }
    }
    Ok(out)
}

fn require_odd_char(field: Field, what: &str) -> Result<()> {
    if field.characteristic() == 2 {
        return Err(Error::Characteristic(format!("{what} divides by 2 and needs characteristic ≠ 2")));
    }
    Ok(())
}

fn swap_pairs(v: &SparseVec, n: usize) -> SparseVec {
    v.map_indices(|t| (t % n) * n + t / n)
}

/// ant(x⊗y) = ½(x⊗y − y⊗x) on V⊗V.
pub fn ant(field: Field, n: usize, v: &SparseVec) -> Result<SparseVec> {
    require_odd_char(field, "ant")?;
    let half = field.ratio(1, 2)?;
    Ok(v.sub(&swap_pairs(v, n)).scale(&half))
}

/// sym(x⊗y) = ½(x⊗y + y⊗x) on V⊗V.
pub fn sym(field: Field, n: usize, v: &SparseVec) -> Result<SparseVec> {
    require_odd_char(field, "sym")?;
    let half = field.ratio(1, 2)?;
    Ok(v.add(&swap_pairs(v, n)).scale(&half))
}

/// τ(v_1⊗…⊗v_p) = (−1)^{p−1} v_p⊗v_1⊗…⊗v_{p−1}.
pub fn tau(field: Field, n: usize, p: usize, v: &SparseVec) -> SparseVec {
    if p == 0 {
        return v.clone();
    }
    let block = pow(n, p - 1);
    v.map_indices(|t| (t % n) * block + t / n).scale(&sign(field, p as i64 - 1))
}

/// γ = 1 + τ + … + τ^{p−1}.
pub fn gamma(field: Field, n: usize, p: usize, v: &SparseVec) -> SparseVec {
    let mut acc = v.clone();
    let mut cur = v.clone();
    for _ in 1..p {
        cur = tau(field, n, p, &cur);
        acc = acc.add(&cur);
    }
    acc
}

/// Small-weight Koszul analogues of the Connes operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnesOp {
    /// HK_0(A)_1 = V → HK_1(A)_0 = V, the identity.
    Bk01,
    /// HK_0(A)_2 → HK_1(A)_1, [a] ↦ [2 sym(a)], the transport of Connes' B
    /// through HK_1 ≅ HH_1.
    Bk02,
    /// HK_1(A)_1 → HK_2(A)_0, [a] ↦ 2 ant(a).
    Bk11,
    /// HK_{p−1}(A)_1 → HK_p(A)_0, [z] ↦ γ(z).
    BkP1(usize),
}

impl ConnesOp {
    pub fn source(&self) -> (i64, i64) {
        match *self {
            ConnesOp::Bk01 => (0, 1),
            ConnesOp::Bk02 => (0, 2),
            ConnesOp::Bk11 => (1, 1),
            ConnesOp::BkP1(p) => (p as i64 - 1, 1),
        }
    }

    pub fn target(&self) -> (i64, i64) {
        let (p, m) = self.source();
        (p + 1, m - 1)
    }
}

/// Regular-coefficient chain at (p, m) with m ≤ 1 as a tensor in V^{⊗(m+p)}.
fn chain_to_tensor(a: &QuadraticAlgebra, p: i64, m: i64, v: &SparseVec) -> Result<SparseVec> {
    let w = w_space(a, p as usize);
    let dw = w.dim();
    let np = pow(a.n(), p as usize);
    let words = a.basis_words(m as usize)?;
    let idx_m = TensorBasisIndex::new(a.n(), m as usize);
    let mut acc = Accum::default();
    for (t, c) in v.iter() {
        let (i, j) = (t / dw, t % dw);
        let left = SparseVec::unit(idx_m.rank(&words[i]), a.field());
        acc.add_vec(c, &tensor_vec(&left, &w.basis()[j], np));
    }
    Ok(acc.finish())
}

/// Inverse of `chain_to_tensor` for tensors in A_m ⊗ W_p when A_m = V^{⊗m}
/// (m ≤ 1).
fn tensor_to_chain(a: &QuadraticAlgebra, p: i64, m: i64, t: &SparseVec) -> Result<SparseVec> {
    debug_assert!(m <= 1);
    let w = w_space(a, p as usize);
    let left = Subspace::full(pow(a.n(), m as usize), a.field());
    crate::tensor::factor_vector(t, a.n(), p as usize, &left, &w)
        .ok_or_else(|| Error::Invariant("tensor does not lie in A_m ⊗ W_p".into()))
}

/// The operator on homology, as a matrix between HK spaces at `source()`
/// and `target()`.
pub fn connes_small(a: &QuadraticAlgebra, op: ConnesOp) -> Result<LinearMap> {
    let module = Bimodule::regular(a);
    let field = a.field();
    let n = a.n();
    let (sp, sm) = op.source();
    let (tp, tm) = op.target();
    let src = hk(&module, Kind::Chain, Variant::Standard, sp, sm)?;
    let dst = hk(&module, Kind::Chain, Variant::Standard, tp, tm)?;
    match op {
        ConnesOp::Bk01 => induced_map(&src, &dst, |v| Ok(v.clone())),
        ConnesOp::Bk02 => {
            require_odd_char(field, "B_K on HK_0(A)_2")?;
            let words = a.basis_words(2)?.to_vec();
            let idx = TensorBasisIndex::new(n, 2);
            let two = field.from_i64(2);
            induced_map(&src, &dst, |v| {
                let lift = SparseVec::from_entries(v.iter().map(|(i, c)| (idx.rank(&words[i]), c.clone())));
                // A_1 ⊗ W_1 = V ⊗ V with the same index
                Ok(sym(field, n, &lift)?.scale(&two))
            })
        }
        ConnesOp::Bk11 => {
            require_odd_char(field, "B_K on HK_1(A)_1")?;
            let two = field.from_i64(2);
            induced_map(&src, &dst, |v| {
                let t = ant(field, n, v)?.scale(&two);
                tensor_to_chain(a, 2, 0, &t)
            })
        }
        ConnesOp::BkP1(p) => {
            if p < 2 {
                return Err(Error::Unsupported("B_K on HK_{p−1}(A)_1 needs p ≥ 2".into()));
            }
            let c = field.characteristic();
            if c != 0 && (p as u64).is_multiple_of(c) {
                return Err(Error::Characteristic(format!("B_K on HK_{}(A)_1 needs p = {p} prime to the characteristic", p - 1)));
            }
            induced_map(&src, &dst, |v| {
                let t = chain_to_tensor(a, sp, 1, v)?;
                tensor_to_chain(a, p as i64, 0, &gamma(field, n, p, &t))
            })
        }
    }
}

/// R ∩ ant(V⊗V) inside V⊗V.
pub fn relations_antisymmetric_part(a: &QuadraticAlgebra) -> Result<Subspace> {
    let field = a.field();
    let n = a.n();
    let images = (0..n * n)
        .map(|t| ant(field, n, &SparseVec::unit(t, field)))
        .collect::<Result<Vec<_>>>()?;
    let ant_image = Subspace::span(n * n, field, &images);
    Ok(intersect(&[a.relations().clone(), ant_image])?)
}

/// The cycle space of HK_2(A)_0 as a subspace of V⊗V.
pub fn hk2_weight0_cycles(a: &QuadraticAlgebra) -> Result<Subspace> {
    let module = Bimodule::regular(a);
    let h = hk(&module, Kind::Chain, Variant::Standard, 2, 0)?;
    let vecs = h
        .homology
        .cycles
        .basis()
        .iter()
        .map(|v| chain_to_tensor(a, 2, 0, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(Subspace::span(a.n() * a.n(), a.field(), &vecs))
}

fn random_coords(field: Field, dim: usize, rng: &mut impl Rng) -> SparseVec {
    SparseVec::from_entries((0..dim).map(|i| (i, field.from_i64(rng.gen_range(-2..=2)))))
}

/// A cochain at (p, m) with coordinates drawn from {−2, …, 2}.
pub fn random_cochain(module: &Bimodule<'_>, p: i64, m: i64, rng: &mut impl Rng) -> Result<Cochain> {
    let d = space_dim(module, p, m)?;
    Ok(Cochain::new(module.kind(), p, m, random_coords(module.field(), d, rng)))
}

pub fn random_chain(module: &Bimodule<'_>, p: i64, m: i64, rng: &mut impl Rng) -> Result<Chain> {
    let d = space_dim(module, p, m)?;
    Ok(Chain::new(module.kind(), p, m, random_coords(module.field(), d, rng)))
}

/// b on a cochain or chain, dispatching on the variant.
pub fn b_cochain(module: &Bimodule<'_>, variant: Variant, f: &Cochain) -> Result<Cochain> {
    cochain_differential(module, variant, f)
}

pub fn b_chain(module: &Bimodule<'_>, variant: Variant, z: &Chain) -> Result<Chain> {
    chain_differential(module, variant, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> Field {
        Field::Rationals
    }

    fn example() -> QuadraticAlgebra {
        catalog::example(6)
    }

    #[test]
    fn euler_squares_to_zero_and_unit_acts_trivially() {
        let a = example();
        let m = Bimodule::regular(&a);
        let e = euler_cocycle(&a);
        for s in [ProductSign::Standard, ProductSign::Tilde, ProductSign::Unsigned] {
            assert!(cup(s, &m, &e, &e).unwrap().is_zero());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let f = random_cochain(&m, 2, 1, &mut rng).unwrap();
        let one = unit_cochain(&a);
        assert_eq!(cup(ProductSign::Standard, &m, &f, &one).unwrap(), f);
        assert_eq!(cup(ProductSign::Standard, &m, &one, &f).unwrap(), f);
    }

    #[test]
    fn euler_cocycle_properties() {
        let a = example();
        let m = Bimodule::regular(&a);
        let e = euler_cocycle(&a);
        assert_eq!(e.coords, SparseVec::from_entries([(0, q().one()), (3, q().one())]));
        assert!(is_koszul_derivation(&m, &e).unwrap());
        assert!(b_cochain(&m, Variant::Standard, &e).unwrap().is_zero());
        // not a coboundary: b from HK^0 at weight 0 has image spanned by commutators with scalars = 0
        let d = crate::koszul::differential(&m, Kind::Cochain, Variant::Standard, 0, 0).unwrap();
        assert!(!crate::linalg::image_basis(&d).contains(&e.coords));
    }

    #[test]
    fn derivation_detection() {
        let a = example();
        let m = Bimodule::regular(&a);
        // x ↦ 0, y ↦ x
        let f = Cochain::new(CoeffKind::Regular, 1, 1, SparseVec::unit(2, q()));
        assert!(!is_koszul_derivation(&m, &f).unwrap());
        assert!(!b_cochain(&m, Variant::Standard, &f).unwrap().is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for w in 0..3 {
            let c = random_cochain(&m, 0, w, &mut rng).unwrap();
            let bc = b_cochain(&m, Variant::Standard, &c).unwrap();
            assert!(is_koszul_derivation(&m, &bc).unwrap());
        }
    }

    #[test]
    fn cap_examples() {
        let a = example();
        let m = Bimodule::regular(&a);
        let e = euler_cocycle(&a);
        for qd in 1..=5i64 {
            // 1 ⊗ x^q: W_q basis vector 0 is x^q for the example
            let z = Chain::new(CoeffKind::Regular, qd, 0, SparseVec::unit(0, q()));
            let got = cap(CapSide::Left, ProductSign::Standard, &m, &e, &z).unwrap();
            let expected = SparseVec::unit(0, q()).scale(&sign(q(), qd - 1));
            // x ∈ A_1 is basis 0 and x^{q−1} is W_{q−1} basis 0
            let dw = w_dim(&a, qd - 1);
            assert_eq!(got.coords, expected.map_indices_monotone(|i| i * dw));
            assert_eq!((got.p, got.m), (qd - 1, 1));
        }
        let z = Chain::new(CoeffKind::Regular, 0, 1, SparseVec::unit(0, q()));
        assert!(cap(CapSide::Left, ProductSign::Standard, &m, &e, &z).unwrap().is_zero());
    }

    #[test]
    fn euler_cap_on_cycles_is_left_koszul_differential() {
        let a = example();
        let m = Bimodule::regular(&a);
        let e = euler_cocycle(&a);
        for p in 1..=4i64 {
            for w in 0..=3i64 {
                let h = hk(&m, Kind::Chain, Variant::Standard, p, w).unwrap();
                let dl = crate::koszul::left_differential(&a, p, w).unwrap();
                for z in h.homology.cycles.basis() {
                    let zz = Chain::new(CoeffKind::Regular, p, w, z.clone());
                    let got = cap(CapSide::Left, ProductSign::Standard, &m, &e, &zz).unwrap();
                    assert_eq!(got.coords, dl.apply(z));
                }
            }
        }
    }

    fn coefficient_modules(a: &QuadraticAlgebra) -> Vec<Bimodule<'_>> {
        vec![Bimodule::regular(a), Bimodule::graded_dual(a, Some(a.weight_bound().min(5))).unwrap()]
    }

    #[test]
    fn fundamental_formulas() {
        let algebras = [example(), catalog::random_algebra(11, q(), 2, 2, 6)];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for a in &algebras {
            let e = euler_cocycle(a);
            for module in coefficient_modules(a) {
                for variant in [Variant::Standard, Variant::Tilde] {
                    for p in 0..=3 {
                        for w in 0..=3 {
                            let f = random_cochain(&module, p, w, &mut rng).unwrap();
                            let lhs = cup_bracket(variant, &module, &e, &f).unwrap();
                            assert_eq!(lhs, b_cochain(&module, variant, &f).unwrap().neg(), "{variant:?} ({p},{w})");
                            let z = random_chain(&module, p, w, &mut rng).unwrap();
                            let lhs = cap_bracket(variant, &module, &e, &z).unwrap();
                            assert_eq!(lhs, b_chain(&module, variant, &z).unwrap().neg(), "{variant:?} ({p},{w})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn leibniz_and_associativity() {
        let a = example();
        let m = Bimodule::regular(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for variant in [Variant::Standard, Variant::Tilde] {
            let s: ProductSign = variant.into();
            for (p, w, qd, v) in [(1, 1, 1, 0), (0, 2, 2, 1), (2, 0, 1, 1), (1, 0, 2, 2)] {
                let f = random_cochain(&m, p, w, &mut rng).unwrap();
                let g = random_cochain(&m, qd, v, &mut rng).unwrap();
                let h = random_cochain(&m, 1, 1, &mut rng).unwrap();
                let lhs = b_cochain(&m, variant, &cup(s, &m, &f, &g).unwrap()).unwrap();
                let eps = match variant {
                    Variant::Standard => sign(q(), p),
                    Variant::Tilde => sign(q(), w),
                };
                let rhs = cup(s, &m, &b_cochain(&m, variant, &f).unwrap(), &g)
                    .unwrap()
                    .add(&cup(s, &m, &f, &b_cochain(&m, variant, &g).unwrap()).unwrap().scale(&eps));
                assert_eq!(lhs, rhs);
                let l = cup(s, &m, &cup(s, &m, &f, &g).unwrap(), &h).unwrap();
                let r = cup(s, &m, &f, &cup(s, &m, &g, &h).unwrap()).unwrap();
                assert_eq!(l, r);
            }
        }
    }

    #[test]
    fn cap_module_identities() {
        let a = example();
        let m = Bimodule::regular(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (p, w, qd, v) in [(1, 1, 3, 0), (2, 0, 3, 1), (1, 0, 2, 1), (0, 2, 2, 0)] {
            let f = random_cochain(&m, p, w, &mut rng).unwrap();
            let z = random_chain(&m, qd, v, &mut rng).unwrap();
            let s = ProductSign::Standard;
            let vs = Variant::Standard;
            let lhs = b_chain(&m, vs, &cap(CapSide::Left, s, &m, &f, &z).unwrap()).unwrap();
            let rhs = cap(CapSide::Left, s, &m, &b_cochain(&m, vs, &f).unwrap(), &z)
                .unwrap()
                .add(&cap(CapSide::Left, s, &m, &f, &b_chain(&m, vs, &z).unwrap()).unwrap().scale(&sign(q(), p)));
            assert_eq!(lhs, rhs);
            let lhs = b_chain(&m, vs, &cap(CapSide::Right, s, &m, &f, &z).unwrap()).unwrap();
            let rhs = cap(CapSide::Right, s, &m, &f, &b_chain(&m, vs, &z).unwrap())
                .unwrap()
                .add(&cap(CapSide::Right, s, &m, &b_cochain(&m, vs, &f).unwrap(), &z).unwrap().scale(&sign(q(), qd)));
            assert_eq!(lhs, rhs);
            // tilde associativity triple
            let t = ProductSign::Tilde;
            let g = random_cochain(&m, 1, 1, &mut rng).unwrap();
            let l = cap(CapSide::Left, t, &m, &f, &cap(CapSide::Left, t, &m, &g, &z).unwrap()).unwrap();
            let r = cap(CapSide::Left, t, &m, &cup(t, &m, &f, &g).unwrap(), &z).unwrap();
            assert_eq!(l, r);
            let l = cap(CapSide::Right, t, &m, &f, &cap(CapSide::Right, t, &m, &g, &z).unwrap()).unwrap();
            let r = cap(CapSide::Right, t, &m, &cup(t, &m, &g, &f).unwrap(), &z).unwrap();
            assert_eq!(l, r);
            let l = cap(CapSide::Left, t, &m, &f, &cap(CapSide::Right, t, &m, &g, &z).unwrap()).unwrap();
            let r = cap(CapSide::Right, t, &m, &g, &cap(CapSide::Left, t, &m, &f, &z).unwrap()).unwrap();
            assert_eq!(l, r);
        }
    }

    fn higher_totals(a: &QuadraticAlgebra, kind: Kind, max_p: i64) -> Vec<usize> {
        let m = Bimodule::regular(a);
        (0..=max_p)
            .map(|p| (0..=3).map(|w| higher_space(&m, kind, Variant::Standard, p, w).unwrap().dim()).sum())
            .collect()
    }

    #[test]
    fn example_higher_tables() {
        let a = example();
        assert_eq!(higher_totals(&a, Kind::Chain, 4), vec![1, 0, 2, 0, 0]);
        assert_eq!(higher_totals(&a, Kind::Cochain, 4), vec![1, 1, 3, 0, 0]);
    }

    #[test]
    fn partial_cap_is_identity_on_v() {
        let a = example();
        let m = Bimodule::regular(&a);
        let src = hk(&m, Kind::Chain, Variant::Standard, 1, 0).unwrap();
        let dst = hk(&m, Kind::Chain, Variant::Standard, 0, 1).unwrap();
        let d = higher_differential(&m, &src, &dst).unwrap();
        assert_eq!(d.rank(), 2);
        assert_eq!(d, LinearMap::identity(2, q()));
        let c0 = hk(&m, Kind::Cochain, Variant::Standard, 0, 0).unwrap();
        let c1 = hk(&m, Kind::Cochain, Variant::Standard, 1, 1).unwrap();
        let d = higher_differential(&m, &c0, &c1).unwrap();
        let image = c1.lift(&d.apply(&SparseVec::unit(0, q())));
        assert_eq!(c1.class_of(&image).unwrap(), c1.class_of(&euler_cocycle(&a).coords).unwrap());
    }

    #[test]
    fn connes_operators() {
        let f = q();
        let v = SparseVec::unit(1, f); // x⊗y
        let a2 = ant(f, 2, &v).unwrap();
        let s2 = sym(f, 2, &v).unwrap();
        assert_eq!(a2.add(&s2), v);
        let t = tau(f, 2, 2, &v);
        assert_eq!(t, SparseVec::unit(2, f).neg());
        assert_eq!(tau(f, 2, 2, &t), v);
        for p in 1..=4 {
            let mut rng = ChaCha8Rng::seed_from_u64(p as u64);
            let z = random_coords(f, pow(2, p), &mut rng);
            let mut cur = z.clone();
            for _ in 0..p {
                cur = tau(f, 2, p, &cur);
            }
            assert_eq!(cur, z);
            let g = gamma(f, 2, p, &z);
            assert!(g.sub(&tau(f, 2, p, &g)).is_zero());
        }
        assert!(matches!(ant(Field::Prime(2), 2, &v), Err(Error::Characteristic(_))));
    }

    #[test]
    fn connes_identities() {
        for a in [example(), catalog::random_algebra(3, q(), 2, 2, 6), catalog::symmetric(2, q(), 6)] {
            let m = Bimodule::regular(&a);
            assert_eq!(relations_antisymmetric_part(&a).unwrap(), hk2_weight0_cycles(&a).unwrap());
            let b01 = connes_small(&a, ConnesOp::Bk01).unwrap();
            assert_eq!(b01, LinearMap::identity(a.n(), q()));
            for p in 2..=3usize {
                let h0 = hk(&m, Kind::Chain, Variant::Standard, p as i64, 0).unwrap();
                let h1 = hk(&m, Kind::Chain, Variant::Standard, p as i64 - 1, 1).unwrap();
                let d = higher_differential(&m, &h0, &h1).unwrap();
                let b = connes_small(&a, ConnesOp::BkP1(p)).unwrap();
                let id = LinearMap::identity(h0.dim(), q()).scale(&q().from_i64(p as i64));
                assert_eq!(b.compose(&d).unwrap(), id);
            }
            let h11 = hk(&m, Kind::Chain, Variant::Standard, 1, 1).unwrap();
            let h02 = hk(&m, Kind::Chain, Variant::Standard, 0, 2).unwrap();
            let h20 = hk(&m, Kind::Chain, Variant::Standard, 2, 0).unwrap();
            let d12 = higher_differential(&m, &h11, &h02).unwrap();
            let d21 = higher_differential(&m, &h20, &h11).unwrap();
            let b02 = connes_small(&a, ConnesOp::Bk02).unwrap();
            let b11 = connes_small(&a, ConnesOp::Bk11).unwrap();
            let sum = b02.compose(&d12).unwrap().add(&d21.compose(&b11).unwrap());
            assert_eq!(sum, LinearMap::identity(h11.dim(), q()).scale(&q().from_i64(2)));
        }
    }
}
