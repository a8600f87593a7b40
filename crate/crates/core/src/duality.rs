//! Koszul duality at the (co)chain level: the identifications ψ_p, the
//! cochain isomorphism φ_A and the chain isomorphism θ_A.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Bimodule, CoeffKind, QuadraticAlgebra};
use crate::calculus::{
    cap, cup, higher_space, random_chain, random_cochain, CapSide, ProductSign,
};
use crate::error::{Error, Result};
use crate::koszul::{
    chain_differential, cochain_differential, cochain_values, hk, w_space, Chain, Cochain, Kind, Variant,
};
use crate::linalg::{Accum, LinearMap, SparseVec, Subspace};
use crate::tensor::{lift_form, TensorBasisIndex};

type MatCache = Mutex<HashMap<usize, Arc<LinearMap>>>;

/// A quadratic algebra together with its Koszul dual, both built to `bound`.
pub struct DualityContext<'a> {
    a: &'a QuadraticAlgebra,
    dual: QuadraticAlgebra,
    bound: usize,
    psi: MatCache,
    psi_dual: MatCache,
}

/// Matrix of (w ∈ W) ↦ (the form it induces on the algebra), with rows over
/// the algebra's normal words: entry (i, j) = w_j[word(e_i)].
fn pairing_matrix(w: &Subspace, alg: &QuadraticAlgebra, p: usize) -> Result<LinearMap> {
    let idx = TensorBasisIndex::new(alg.n(), p);
    let words = alg.basis_words(p)?;
    let field = alg.field();
    let cols = w
        .basis()
        .iter()
        .map(|b| SparseVec::from_entries(words.iter().enumerate().filter_map(|(i, word)| b.get(idx.rank(word)).map(|c| (i, c.clone())))))
        .collect();
    Ok(LinearMap::new(w.dim(), words.len(), field, cols))
}

fn cached_matrix(cache: &MatCache, p: usize, build: impl FnOnce() -> Result<LinearMap>) -> Result<Arc<LinearMap>> {
    if let Some(m) = cache.lock().expect("cache poisoned").get(&p) {
        return Ok(m.clone());
    }
    let m = Arc::new(build()?);
    Ok(cache.lock().expect("cache poisoned").entry(p).or_insert(m).clone())
}

impl<'a> DualityContext<'a> {
    pub fn new(a: &'a QuadraticAlgebra, bound: usize) -> DualityContext<'a> {
        DualityContext::with_dual(a, a.koszul_dual(bound), bound)
    }

    fn with_dual(a: &'a QuadraticAlgebra, dual: QuadraticAlgebra, bound: usize) -> DualityContext<'a> {
        DualityContext {
            a,
            dual,
            bound,
            psi: Mutex::new(HashMap::new()),
            psi_dual: Mutex::new(HashMap::new()),
        }
    }

    pub fn algebra(&self) -> &'a QuadraticAlgebra {
        self.a
    }

    pub fn dual(&self) -> &QuadraticAlgebra {
        &self.dual
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// The context for A^! and A^!! (whose relations coincide with R).
    pub fn reversed(&self) -> DualityContext<'_> {
        DualityContext::new(&self.dual, self.bound)
    }

    /// The graded dual of A^!, truncated at the context bound when A^! is infinite.
    pub fn dual_coefficients(&self) -> Result<Bimodule<'_>> {
        Bimodule::graded_dual(&self.dual, Some(self.bound))
    }

    fn check_weight(&self, p: usize) -> Result<()> {
        if !self.a.knows_weight(p) || !self.dual.knows_weight(p) {
            return Err(Error::Truncated {
                weight: p,
                bound: self.bound.min(self.a.weight_bound()),
            });
        }
        Ok(())
    }

    /// ψ_p: W^!_p → A_p^*.
    pub fn psi(&self, p: usize) -> Result<Arc<LinearMap>> {
        self.check_weight(p)?;
        cached_matrix(&self.psi, p, || pairing_matrix(&w_space(&self.dual, p), self.a, p))
    }

    /// ψ^!_p: W_p → A^{!*}_p.
    pub fn psi_dual(&self, p: usize) -> Result<Arc<LinearMap>> {
        self.check_weight(p)?;
        cached_matrix(&self.psi_dual, p, || pairing_matrix(&w_space(self.a, p), &self.dual, p))
    }

    /// The form x ↦ ⟨ψ_m(w'_k), f(x)⟩ on W_p, for an A-valued cochain f at (p, m)
    /// and the k-th basis vector w'_k of W^!_m.
    fn functional(&self, f: &Cochain, k: usize) -> Result<SparseVec> {
        let (p, m) = (f.p as usize, f.m as usize);
        let dw = w_space(self.a, p).dim();
        let psi = self.psi(m)?;
        let col = psi.column(k);
        let mut acc = Accum::default();
        for (idx, c) in f.coords.iter() {
            let (i, j) = (idx / dw, idx % dw);
            if let Some(x) = col.get(i) {
                acc.add(j, &(c * x));
            }
        }
        Ok(acc.finish())
    }

    fn check_cochain(&self, f: &Cochain) -> Result<()> {
        if f.coeff != CoeffKind::Regular {
            return Err(Error::Unsupported("φ is defined on A-valued cochains".into()));
        }
        self.check_weight(f.p as usize)?;
        self.check_weight(f.m as usize)
    }

    /// φ_A(f): W^!_m → A^!_p, fixed by ψ^{!*}_p ∘ φ_A(f) = f^* ∘ ψ_m. The form
    /// on W_p is lifted along its pivot words and read in A^!_p.
    pub fn phi(&self, f: &Cochain) -> Result<Cochain> {
        if f.p < 0 || f.m < 0 {
            return Ok(Cochain::zero(CoeffKind::Regular, f.m, f.p));
        }
        self.check_cochain(f)?;
        let (p, m) = (f.p as usize, f.m as usize);
        let wp = w_space(self.a, p);
        let dwd = w_space(&self.dual, m).dim();
        let mut values = Vec::with_capacity(dwd);
        for k in 0..dwd {
            let t = self.functional(f, k)?;
            values.push(self.dual.normal_form(&lift_form(&t, &wp), p)?);
        }
        Ok(Cochain::new(CoeffKind::Regular, f.m, f.p, crate::koszul::cochain_from_values(&values)))
    }

    /// φ_A(f) through the inverse of ψ^{!*}_p; agrees with `phi`.
    pub fn phi_via_inverse(&self, f: &Cochain) -> Result<Cochain> {
        if f.p < 0 || f.m < 0 {
            return Ok(Cochain::zero(CoeffKind::Regular, f.m, f.p));
        }
        self.check_cochain(f)?;
        let (p, m) = (f.p as usize, f.m as usize);
        let inv = self.psi_dual(p)?.transpose().inverse()?;
        let dwd = w_space(&self.dual, m).dim();
        let values = (0..dwd).map(|k| Ok(inv.apply(&self.functional(f, k)?))).collect::<Result<Vec<_>>>()?;
        Ok(Cochain::new(CoeffKind::Regular, f.m, f.p, crate::koszul::cochain_from_values(&values)))
    }

    /// θ_A(z)(w) = ψ_m^*(a)(w) ψ^!_p(x_1…x_p) for z = a ⊗ x_1…x_p at (p, m);
    /// the result is an A^{!*}-valued cochain of A^! at (m, p).
    pub fn theta(&self, z: &Chain) -> Result<Cochain> {
        if z.coeff != CoeffKind::Regular {
            return Err(Error::Unsupported("θ is defined on A-coefficient chains".into()));
        }
        if z.p < 0 || z.m < 0 {
            return Ok(Cochain::zero(CoeffKind::GradedDual, z.m, z.p));
        }
        let (p, m) = (z.p as usize, z.m as usize);
        let dw = w_space(self.a, p).dim();
        let psi = self.psi(m)?;
        let psi_d = self.psi_dual(p)?;
        let dwd = w_space(&self.dual, m).dim();
        let mut values = Vec::with_capacity(dwd);
        for k in 0..dwd {
            let col = psi.column(k);
            let mut acc = Accum::default();
            for (idx, c) in z.coords.iter() {
                let (i, j) = (idx / dw, idx % dw);
                if let Some(x) = col.get(i) {
                    acc.add_vec(&(c * x), psi_d.column(j));
                }
            }
            values.push(acc.finish());
        }
        Ok(Cochain::new(CoeffKind::GradedDual, z.m, z.p, crate::koszul::cochain_from_values(&values)))
    }

    /// θ'_A(F) = Σ_i e_i ⊗ ψ^{!−1}_p(F(ψ_m^{−1}(e_i^*))).
    pub fn theta_inverse(&self, big_f: &Cochain) -> Result<Chain> {
        if big_f.coeff != CoeffKind::GradedDual {
            return Err(Error::Unsupported("θ' is defined on A^{!*}-valued cochains".into()));
        }
        if big_f.p < 0 || big_f.m < 0 {
            return Ok(Chain::zero(CoeffKind::Regular, big_f.m, big_f.p));
        }
        let (m, p) = (big_f.p as usize, big_f.m as usize);
        let psi_inv = self.psi(m)?.inverse()?;
        let psi_d_inv = self.psi_dual(p)?.inverse()?;
        let dwd = w_space(&self.dual, m).dim();
        let dw = w_space(self.a, p).dim();
        let values = cochain_values(big_f, dwd);
        let mut acc = Accum::default();
        for i in 0..psi_inv.src_dim() {
            let mut fv = Accum::default();
            for (k, s) in psi_inv.column(i).iter() {
                fv.add_vec(s, &values[k]);
            }
            let w = psi_d_inv.apply(&fv.finish());
            acc.add_vec_offset(&self.a.field().one(), &w, |j| i * dw + j);
        }
        Ok(Chain::new(CoeffKind::Regular, p as i64, m as i64, acc.finish()))
    }
}

/// One row of a dimension comparison; `None` marks an uncertified entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimPair {
    pub p: usize,
    pub m: usize,
    pub left: Option<usize>,
    pub right: Option<usize>,
}

impl DimPair {
    pub fn agrees(&self) -> bool {
        match (self.left, self.right) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualityReport {
    /// HK^p(A)_m against H̃K^m(A^!)_p.
    pub cohomology: Vec<DimPair>,
    /// HK_p(A)_m against H̃K^m(A^!, A^{!*})_p.
    pub homology: Vec<DimPair>,
    /// HK_hi^p(A)_m against H̃K_hi^m(A^!)_p.
    pub higher_cohomology: Vec<DimPair>,
    /// HK^hi_p(A)_m against H̃K_hi^m(A^!, A^{!*})_p.
    pub higher_homology: Vec<DimPair>,
    pub trials: usize,
}

impl DualityReport {
    pub fn all_agree(&self) -> bool {
        [&self.cohomology, &self.homology, &self.higher_cohomology, &self.higher_homology]
            .iter()
            .all(|t| t.iter().all(DimPair::agrees))
    }
}

fn certified(r: Result<usize>) -> Result<Option<usize>> {
    match r {
        Ok(d) => Ok(Some(d)),
        Err(Error::NeedsHalo { .. }) | Err(Error::Truncated { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn mismatch(what: &str, detail: String) -> Error {
    Error::Invariant(format!("duality identity failed: {what} ({detail})"))
}

/// Dimension tables for biweights with p + m ≤ `max_total` (and each ≤ the
/// context bound), plus `trials` random identity checks.
pub fn duality_report(ctx: &DualityContext<'_>, max_total: usize, trials: usize, seed: u64) -> Result<DualityReport> {
    let a = ctx.algebra();
    let dual = ctx.dual();
    let ma = Bimodule::regular(a);
    let md = Bimodule::regular(dual);
    let mdd = ctx.dual_coefficients()?;
    let mut report = DualityReport {
        cohomology: vec![],
        homology: vec![],
        higher_cohomology: vec![],
        higher_homology: vec![],
        trials: 0,
    };
    for total in 0..=max_total {
        for p in 0..=total {
            let m = total - p;
            let (pi, mi) = (p as i64, m as i64);
            let row = |left: Option<usize>, right: Option<usize>| DimPair { p, m, left, right };
            report.cohomology.push(row(
                certified(hk(&ma, Kind::Cochain, Variant::Standard, pi, mi).map(|h| h.dim()))?,
                certified(hk(&md, Kind::Cochain, Variant::Tilde, mi, pi).map(|h| h.dim()))?,
            ));
            report.homology.push(row(
                certified(hk(&ma, Kind::Chain, Variant::Standard, pi, mi).map(|h| h.dim()))?,
                certified(hk(&mdd, Kind::Cochain, Variant::Tilde, mi, pi).map(|h| h.dim()))?,
            ));
            report.higher_cohomology.push(row(
                certified(higher_space(&ma, Kind::Cochain, Variant::Standard, pi, mi).map(|h| h.dim()))?,
                certified(higher_space(&md, Kind::Cochain, Variant::Tilde, mi, pi).map(|h| h.dim()))?,
            ));
            report.higher_homology.push(row(
                certified(higher_space(&ma, Kind::Chain, Variant::Standard, pi, mi).map(|h| h.dim()))?,
                certified(higher_space(&mdd, Kind::Cochain, Variant::Tilde, mi, pi).map(|h| h.dim()))?,
            ));
        }
    }
    if let Some(bad) = [&report.cohomology, &report.homology, &report.higher_cohomology, &report.higher_homology]
        .iter()
        .flat_map(|t| t.iter())
        .find(|r| !r.agrees())
    {
        return Err(mismatch("dimension tables", format!("{bad:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // keep random biweights where every map involved is within the bounds
    let top = ctx.bound().saturating_sub(2).min(max_total).max(1) as i64;
    for _ in 0..trials {
        let mut draw = || (rng.gen_range(0..=top.min(3)), rng.gen_range(0..=top.min(3)));
        let (p, m) = draw();
        let (q, n) = draw();
        let (r, s) = draw();
        verify_trial(ctx, &ma, &md, &mdd, (p, m), (q, n), (r + p, s), &mut rng)?;
        report.trials += 1;
    }
    Ok(report)
}

/// One random check of every chain-level duality identity, with f at (p, m),
/// g at (q, n) and z at (zq, zn).
pub fn check_trial(
    ctx: &DualityContext<'_>,
    f_at: (i64, i64),
    g_at: (i64, i64),
    z_at: (i64, i64),
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let ma = Bimodule::regular(ctx.algebra());
    let md = Bimodule::regular(ctx.dual());
    let mdd = ctx.dual_coefficients()?;
    verify_trial(ctx, &ma, &md, &mdd, f_at, g_at, z_at, rng)
}

#[allow(clippy::too_many_arguments)]
fn verify_trial(
    ctx: &DualityContext<'_>,
    ma: &Bimodule<'_>,
    md: &Bimodule<'_>,
    mdd: &Bimodule<'_>,
    (p, m): (i64, i64),
    (q, n): (i64, i64),
    (zq, zn): (i64, i64),
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let std = ProductSign::Standard;
    let tilde = ProductSign::Tilde;
    let f = random_cochain(ma, p, m, rng)?;
    let g = random_cochain(ma, q, n, rng)?;
    let z = random_chain(ma, zq, zn, rng)?;
    let desc = || format!("f at ({p},{m}) = {:?}, g at ({q},{n}) = {:?}, z at ({zq},{zn}) = {:?}", f.coords, g.coords, z.coords);
    let phi_f = ctx.phi(&f)?;
    let phi_g = ctx.phi(&g)?;
    if phi_f != ctx.phi_via_inverse(&f)? {
        return Err(mismatch("lifted φ differs from the inverse-matrix φ", desc()));
    }
    if ctx.phi(&cup(std, ma, &f, &g)?)? != cup(tilde, md, &phi_f, &phi_g)? {
        return Err(mismatch("φ(f⌣g) = φf ⌣̃ φg", desc()));
    }
    if ctx.phi(&cochain_differential(ma, Variant::Standard, &f)?)? != cochain_differential(md, Variant::Tilde, &phi_f)? {
        return Err(mismatch("φ∘b = b̃∘φ", desc()));
    }
    let back = ctx.reversed().phi(&phi_f)?;
    if back.coords != f.coords || (back.p, back.m) != (f.p, f.m) {
        return Err(mismatch("φ_{A^!}∘φ_A = id", desc()));
    }
    let theta_z = ctx.theta(&z)?;
    if ctx.theta_inverse(&theta_z)? != z {
        return Err(mismatch("θ'∘θ = id", desc()));
    }
    if ctx.theta(&chain_differential(ma, Variant::Standard, &z)?)? != cochain_differential(mdd, Variant::Tilde, &theta_z)? {
        return Err(mismatch("θ∘b = b̃∘θ", desc()));
    }
    if ctx.theta(&cap(CapSide::Left, std, ma, &f, &z)?)? != cup(tilde, mdd, &phi_f, &theta_z)? {
        return Err(mismatch("θ(f⌢z) = φf ⌣̃ θz", desc()));
    }
    if ctx.theta(&cap(CapSide::Right, std, ma, &f, &z)?)? != cup(tilde, mdd, &theta_z, &phi_f)? {
        return Err(mismatch("θ(z⌢f) = θz ⌣̃ φf", desc()));
    }
    Ok(())
}
