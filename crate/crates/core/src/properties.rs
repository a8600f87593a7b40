//! The self-test property suite: chain-level identities checked exactly on
//! random (co)chains over a family of algebras.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Bimodule, QuadraticAlgebra};
use crate::calculus::{
    cap, cap_bracket, connes_small, cup, cup_bracket, euler_cocycle, higher_differential, higher_space,
    hk2_weight0_cycles, random_chain, random_cochain, relations_antisymmetric_part, CapSide, ConnesOp, ProductSign,
};
use crate::catalog;
use crate::duality::{check_trial, DualityContext};
use crate::error::Result;
use crate::hochschild::{Bar, GradedOp};
use crate::koszul::{
    chain_differential, cochain_differential, hk, sign, space_dim, w_space, w_space_definitional, Chain, Cochain,
    Kind, Variant,
};
use crate::linalg::{LinearMap, SparseVec};
use crate::scalars::Field;

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub max_p: i64,
    pub max_m: i64,
    /// Random partners drawn per biweight for the multi-argument identities.
    pub trials: usize,
    pub seed: u64,
    /// Weight bound used when building the algebras.
    pub bound: usize,
}

impl Default for SuiteConfig {
    fn default() -> SuiteConfig {
        SuiteConfig {
            max_p: 4,
            max_m: 4,
            trials: 2,
            seed: 42,
            bound: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub algebra: String,
    pub check: String,
    pub cases: usize,
    /// First offending case, if any.
    pub failure: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }

    pub fn for_algebra<'s>(&'s self, name: &'s str) -> impl Iterator<Item = &'s CheckOutcome> + 's {
        self.outcomes.iter().filter(move |o| o.algebra == name)
    }
}

/// The example, S(V) for n = 2 and five seeded random 2-generator,
/// 2-relation algebras over each of ℚ and 𝔽_7.
pub fn standard_algebras(bound: usize) -> Vec<(String, QuadraticAlgebra)> {
    let mut out = vec![
        ("example".to_string(), catalog::example(bound)),
        ("S(V), n=2".to_string(), catalog::symmetric(2, Field::Rationals, bound)),
    ];
    for field in [Field::Rationals, Field::Prime(7)] {
        for seed in 1..=5u64 {
            out.push((format!("random seed {seed} over {field}"), catalog::random_algebra(seed, field, 2, 2, bound)));
        }
    }
    out
}

/// Collects the cases of one check, remembering the first failure.
struct Check {
    cases: usize,
    failure: Option<String>,
}

impl Check {
    fn new() -> Check {
        Check { cases: 0, failure: None }
    }

    fn case(&mut self, what: impl FnOnce() -> String, outcome: Result<bool>) {
        self.cases += 1;
        if self.failure.is_some() {
            return;
        }
        match outcome {
            Ok(true) => {}
            Ok(false) => self.failure = Some(what()),
            Err(e) => self.failure = Some(format!("{}: {e}", what())),
        }
    }
}

struct Runner<'r> {
    name: &'r str,
    outcomes: Vec<CheckOutcome>,
}

impl Runner<'_> {
    fn record(&mut self, check: &str, c: Check) {
        self.outcomes.push(CheckOutcome {
            algebra: self.name.to_string(),
            check: check.to_string(),
            cases: c.cases,
            failure: c.failure,
        });
    }
}

fn biweights(max_p: i64, max_m: i64) -> impl Iterator<Item = (i64, i64)> {
    (0..=max_p).flat_map(move |p| (0..=max_m).map(move |m| (p, m)))
}

pub fn run_suite(algebras: &[(String, QuadraticAlgebra)], cfg: &SuiteConfig) -> SuiteReport {
    let mut report = SuiteReport::default();
    for (i, (name, a)) in algebras.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
        report.outcomes.extend(check_algebra(name, a, cfg, &mut rng));
    }
    report
}

pub fn check_algebra(name: &str, a: &QuadraticAlgebra, cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Vec<CheckOutcome> {
    let mut r = Runner {
        name,
        outcomes: Vec::new(),
    };
    let (pp, mm) = (cfg.max_p, cfg.max_m);
    let field = a.field();
    let regular = Bimodule::regular(a);
    let trivial = Bimodule::trivial(a);
    let dual_coeffs = Bimodule::graded_dual(a, Some(a.weight_bound()));
    let mut modules = vec![("A", &regular)];
    if let Ok(d) = &dual_coeffs {
        modules.push(("A*", d));
    }

    // spaces
    let mut c = Check::new();
    for p in 0..=5usize {
        c.case(|| format!("W_{p}"), Ok(*w_space(a, p) == w_space_definitional(a, p)));
    }
    r.record("W_p incremental = definitional", c);

    let mut c = Check::new();
    let dual = a.koszul_dual(cfg.bound);
    let n = a.n();
    c.case(|| "dim R^⊥".into(), Ok(dual.relations().dim() == n * n - a.relations().dim()));
    let back = dual.koszul_dual(cfg.bound);
    c.case(|| "(R^⊥)^⊥".into(), Ok(back.relations() == a.relations()));
    r.record("Koszul dual relations", c);

    // b∘b = 0
    let mut c = Check::new();
    let variant_modules = modules.iter().copied().chain(std::iter::once(("k", &trivial)));
    for (mname, module) in variant_modules {
        for variant in [Variant::Standard, Variant::Tilde] {
            if mname == "k" && variant == Variant::Tilde {
                continue;
            }
            for (p, m) in biweights(pp, mm) {
                for kind in [Kind::Chain, Kind::Cochain] {
                    c.case(
                        || format!("{kind:?} {variant:?} with {mname} at ({p},{m})"),
                        squares_to_zero(module, kind, variant, p, m),
                    );
                }
            }
        }
    }
    r.record("b∘b = 0", c);

    // Leibniz
    let mut c = Check::new();
    for variant in [Variant::Standard, Variant::Tilde] {
        let s: ProductSign = variant.into();
        for (p, m) in biweights(pp, mm) {
            for (q, n) in biweights(pp - p, mm - m) {
                c.case(
                    || format!("{variant:?} f at ({p},{m}), g at ({q},{n})"),
                    (|| {
                        let f = random_cochain(&regular, p, m, rng)?;
                        let g = random_cochain(&regular, q, n, rng)?;
                        let lhs = cochain_differential(&regular, variant, &cup(s, &regular, &f, &g)?)?;
                        let eps = sign(field, if variant == Variant::Standard { p } else { m });
                        let rhs = cup(s, &regular, &cochain_differential(&regular, variant, &f)?, &g)?
                            .add(&cup(s, &regular, &f, &cochain_differential(&regular, variant, &g)?)?.scale(&eps));
                        Ok(lhs == rhs)
                    })(),
                );
            }
        }
    }
    r.record("Leibniz", c);

    // cap-module identities
    let mut c = Check::new();
    let (st, vs) = (ProductSign::Standard, Variant::Standard);
    for (p, m) in biweights(pp, mm) {
        for (q, n) in biweights(pp, mm - m) {
            if q < p {
                continue;
            }
            c.case(
                || format!("f at ({p},{m}), z at ({q},{n})"),
                (|| {
                    let f = random_cochain(&regular, p, m, rng)?;
                    let z = random_chain(&regular, q, n, rng)?;
                    let lhs = chain_differential(&regular, vs, &cap(CapSide::Left, st, &regular, &f, &z)?)?;
                    let rhs = cap(CapSide::Left, st, &regular, &cochain_differential(&regular, vs, &f)?, &z)?.add(
                        &cap(CapSide::Left, st, &regular, &f, &chain_differential(&regular, vs, &z)?)?
                            .scale(&sign(field, p)),
                    );
                    let left_ok = lhs == rhs;
                    let lhs = chain_differential(&regular, vs, &cap(CapSide::Right, st, &regular, &f, &z)?)?;
                    let rhs = cap(CapSide::Right, st, &regular, &f, &chain_differential(&regular, vs, &z)?)?.add(
                        &cap(CapSide::Right, st, &regular, &cochain_differential(&regular, vs, &f)?, &z)?
                            .scale(&sign(field, q)),
                    );
                    Ok(left_ok && lhs == rhs)
                })(),
            );
        }
    }
    r.record("cap-module identities", c);

    // cup associativity
    let mut c = Check::new();
    for s in [ProductSign::Standard, ProductSign::Tilde] {
        for (p, m) in biweights(pp, mm) {
            for _ in 0..cfg.trials {
                let (q, n) = (rng.gen_range(0..=pp - p), rng.gen_range(0..=mm - m));
                let (t, u) = (rng.gen_range(0..=pp - p - q), rng.gen_range(0..=mm - m - n));
                c.case(
                    || format!("{s:?} at ({p},{m}), ({q},{n}), ({t},{u})"),
                    (|| {
                        let f = random_cochain(&regular, p, m, rng)?;
                        let g = random_cochain(&regular, q, n, rng)?;
                        let h = random_cochain(&regular, t, u, rng)?;
                        let l = cup(s, &regular, &cup(s, &regular, &f, &g)?, &h)?;
                        let rr = cup(s, &regular, &f, &cup(s, &regular, &g, &h)?)?;
                        Ok(l == rr)
                    })(),
                );
            }
        }
    }
    r.record("cup associativity", c);

    // fundamental formulas
    let mut c = Check::new();
    let e = euler_cocycle(a);
    for (mname, module) in &modules {
        for variant in [Variant::Standard, Variant::Tilde] {
            for (p, m) in biweights(pp, mm) {
                c.case(
                    || format!("{variant:?} with {mname} at ({p},{m})"),
                    (|| {
                        let f = random_cochain(module, p, m, rng)?;
                        let z = random_chain(module, p, m, rng)?;
                        let cup_ok = cup_bracket(variant, module, &e, &f)? == cochain_differential(module, variant, &f)?.neg();
                        let cap_ok = cap_bracket(variant, module, &e, &z)? == chain_differential(module, variant, &z)?.neg();
                        Ok(cup_ok && cap_ok)
                    })(),
                );
            }
        }
    }
    r.record("fundamental formulas", c);

    // tilde cap associativity triple
    let mut c = Check::new();
    let t = ProductSign::Tilde;
    for (p, m) in biweights(pp, mm) {
        for _ in 0..cfg.trials {
            let (q, n) = (rng.gen_range(0..=pp - p), rng.gen_range(0..=mm - m));
            let zp = rng.gen_range(p + q..=pp);
            let zm = rng.gen_range(0..=mm - m - n);
            c.case(
                || format!("f at ({p},{m}), g at ({q},{n}), z at ({zp},{zm})"),
                (|| {
                    let f = random_cochain(&regular, p, m, rng)?;
                    let g = random_cochain(&regular, q, n, rng)?;
                    let z = random_chain(&regular, zp, zm, rng)?;
                    let l1 = cap(CapSide::Left, t, &regular, &f, &cap(CapSide::Left, t, &regular, &g, &z)?)?;
                    let r1 = cap(CapSide::Left, t, &regular, &cup(t, &regular, &f, &g)?, &z)?;
                    let l2 = cap(CapSide::Right, t, &regular, &f, &cap(CapSide::Right, t, &regular, &g, &z)?)?;
                    let r2 = cap(CapSide::Right, t, &regular, &cup(t, &regular, &g, &f)?, &z)?;
                    let l3 = cap(CapSide::Left, t, &regular, &f, &cap(CapSide::Right, t, &regular, &g, &z)?)?;
                    let r3 = cap(CapSide::Right, t, &regular, &g, &cap(CapSide::Left, t, &regular, &f, &z)?)?;
                    Ok(l1 == r1 && l2 == r2 && l3 == r3)
                })(),
            );
        }
    }
    r.record("tilde cap associativity", c);

    // duality
    let mut c = Check::new();
    let ctx = DualityContext::new(a, cfg.bound);
    for (p, m) in biweights(pp, mm) {
        for _ in 0..cfg.trials {
            let g_at = (rng.gen_range(0..=pp - p), rng.gen_range(0..=mm - m));
            let z_at = (rng.gen_range(p..=pp), rng.gen_range(0..=mm - m));
            c.case(
                || format!("f at ({p},{m}), g at {g_at:?}, z at {z_at:?}"),
                check_trial(&ctx, (p, m), g_at, z_at, rng).map(|_| true),
            );
        }
    }
    r.record("duality identities (φ, θ)", c);

    // small-weight higher statements
    let mut c = Check::new();
    c.case(
        || "∂⌢ on HK_1(A)_0".into(),
        (|| {
            let src = hk(&regular, Kind::Chain, Variant::Standard, 1, 0)?;
            let dst = hk(&regular, Kind::Chain, Variant::Standard, 0, 1)?;
            Ok(higher_differential(&regular, &src, &dst)? == LinearMap::identity(a.n(), field))
        })(),
    );
    for (p, m) in [(0, 1), (1, 0), (2, 0), (3, 0)] {
        c.case(
            || format!("HK^hi_{p}(A)_{m} = 0"),
            higher_space(&regular, Kind::Chain, Variant::Standard, p, m).map(|h| h.dim() == 0),
        );
    }
    r.record("higher homology at small weights", c);

    if field.characteristic() != 2 {
        let mut c = Check::new();
        c.case(|| "∂⌢∘B_K + B_K∘∂⌢ on HK_1(A)_1".into(), rg_weight_two(a));
        r.record("Rinehart–Goodwillie at weight 2", c);
        let mut c = Check::new();
        c.case(
            || "HK_2(A)_0".into(),
            (|| Ok(hk2_weight0_cycles(a)? == relations_antisymmetric_part(a)?))(),
        );
        r.record("HK_2(A)_0 = R ∩ ant(V⊗V)", c);
    }

    if let Ok(bar) = Bar::new(a) {
        if bar.total_dim() <= 8 {
            let mut c = Check::new();
            for p in 1..=3i64 {
                for w in 0..=(bar.top() as i64) * (p + 1) {
                    c.case(
                        || format!("bar b∘b, B∘B at degree {p} weight {w}"),
                        (|| {
                            let bb = bar.differential(Kind::Chain, p - 1, w)?.compose(&bar.differential(Kind::Chain, p, w)?)?;
                            let cb = bar
                                .graded_op(GradedOp::Connes, p, w)?
                                .compose(&bar.graded_op(GradedOp::Connes, p - 1, w)?)?;
                            Ok(bb.is_zero() && cb.is_zero())
                        })(),
                    );
                }
            }
            for (p, m) in biweights(3, bar.top() as i64) {
                c.case(
                    || format!("χ̃ chain map at ({p},{m})"),
                    (|| {
                        let z = random_chain(&regular, p, m, rng)?;
                        let lhs = bar
                            .differential(Kind::Chain, p, m + p)?
                            .apply(&bar.include_chain(p as usize, m as usize, &z.coords)?);
                        if p == 0 {
                            return Ok(lhs.is_zero());
                        }
                        let bz = chain_differential(&regular, vs, &z)?;
                        Ok(lhs == bar.include_chain((p - 1) as usize, (m + 1) as usize, &bz.coords)?)
                    })(),
                );
            }
            r.record("bar complex", c);
        }
    }
    r.outcomes
}

fn squares_to_zero(module: &Bimodule<'_>, kind: Kind, variant: Variant, p: i64, m: i64) -> Result<bool> {
    let d = space_dim(module, p, m)?;
    for i in 0..d {
        let v = SparseVec::unit(i, module.field());
        let ok = match kind {
            Kind::Chain => {
                let z = Chain::new(module.kind(), p, m, v);
                chain_differential(module, variant, &chain_differential(module, variant, &z)?)?.is_zero()
            }
            Kind::Cochain => {
                let f = Cochain::new(module.kind(), p, m, v);
                cochain_differential(module, variant, &cochain_differential(module, variant, &f)?)?.is_zero()
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn rg_weight_two(a: &QuadraticAlgebra) -> Result<bool> {
    let m = Bimodule::regular(a);
    let f = a.field();
    let h11 = hk(&m, Kind::Chain, Variant::Standard, 1, 1)?;
    let h02 = hk(&m, Kind::Chain, Variant::Standard, 0, 2)?;
    let h20 = hk(&m, Kind::Chain, Variant::Standard, 2, 0)?;
    let d12 = higher_differential(&m, &h11, &h02)?;
    let d21 = higher_differential(&m, &h20, &h11)?;
    let b02 = connes_small(a, ConnesOp::Bk02)?;
    let b11 = connes_small(a, ConnesOp::Bk11)?;
    let sum = b02.compose(&d12)?.add(&d21.compose(&b11)?);
    Ok(sum == LinearMap::identity(h11.dim(), f).scale(&f.from_i64(2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_standard_algebras() {
        let cfg = SuiteConfig::default();
        let algebras = standard_algebras(cfg.bound);
        let report = run_suite(&algebras, &cfg);
        let bad: Vec<_> = report.failures().collect();
        assert!(bad.is_empty(), "{bad:#?}");
        assert!(report.outcomes.iter().all(|o| o.cases > 0));
    }

    #[test]
    fn a_broken_identity_is_reported() {
        let mut c = Check::new();
        c.case(|| "first".into(), Ok(true));
        c.case(|| "second".into(), Ok(false));
        c.case(|| "third".into(), Ok(false));
        assert_eq!(c.cases, 3);
        assert_eq!(c.failure.as_deref(), Some("second"));
    }
}
