//! One function per subcommand; each returns the JSON report.

use std::thread;

use anyhow::{Context, Result};
use koszulkit_core::algebra::{Bimodule, CoeffKind, Presentation, QuadraticAlgebra};
use koszulkit_core::calculus::higher_space;
use koszulkit_core::duality::{duality_report, DimPair, DualityContext};
use koszulkit_core::hochschild::{Bar, HigherKind};
use koszulkit_core::koszul::{
    hk, koszulity, render_chain, render_cochain, render_w_vector, w_space, Kind, Variant,
};
use koszulkit_core::properties::{run_suite, standard_algebras, CheckOutcome, SuiteConfig};
use koszulkit_core::Error;
use serde_json::{json, Map, Value};

use crate::report::{algebra_summary, key, result, Table, SCHEMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coeff {
    Regular,
    Trivial,
    Dual,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub max_p: Option<usize>,
    pub max_weight: Option<usize>,
    pub coeff: Coeff,
    pub variant: Variant,
    pub seed: u64,
    pub trials: Option<usize>,
}

impl Settings {
    fn max_p(&self, default: usize) -> usize {
        self.max_p.unwrap_or(default)
    }

    fn max_weight(&self, default: usize) -> usize {
        self.max_weight.unwrap_or(default)
    }

    fn to_json(&self) -> Value {
        json!({
            "max_p": self.max_p,
            "max_weight": self.max_weight,
            "coeff": format!("{:?}", self.coeff),
            "variant": format!("{:?}", self.variant),
            "seed": self.seed,
            "trials": self.trials,
        })
    }
}

/// A computed report plus whether it records a failed self-check.
pub struct Outcome {
    pub report: Value,
    pub failed: bool,
}

fn base(command: &str, a: Option<&QuadraticAlgebra>, settings: &Settings) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("settings".into(), settings.to_json());
    if let Some(a) = a {
        m.insert("algebra".into(), algebra_summary(a));
    }
    m
}

fn done(m: Map<String, Value>) -> Outcome {
    Outcome {
        report: Value::Object(m),
        failed: false,
    }
}

fn uncertified(e: &Error) -> bool {
    matches!(e, Error::NeedsHalo { .. } | Error::Truncated { .. })
}

/// Certified value, `None` on a truncation boundary, error otherwise.
fn certify<T>(r: koszulkit_core::Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if uncertified(&e) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn module<'a>(a: &'a QuadraticAlgebra, c: Coeff) -> Result<Bimodule<'a>> {
    Ok(match c {
        Coeff::Regular => Bimodule::regular(a),
        Coeff::Trivial => Bimodule::trivial(a),
        Coeff::Dual => Bimodule::graded_dual(a, Some(a.weight_bound()))?,
    })
}

fn coeff_label(c: Coeff) -> &'static str {
    match c {
        Coeff::Regular => "A",
        Coeff::Trivial => "k",
        Coeff::Dual => "A*",
    }
}

/// Largest coefficient weight carrying anything, when finite.
fn finite_top(module: &Bimodule<'_>) -> Option<usize> {
    match module.kind() {
        CoeffKind::Trivial => Some(0),
        _ => module.algebra().top_weight(),
    }
}

type Cell = Option<(usize, Vec<String>)>;

/// Fills a bigraded table by running `cell` on every biweight, one thread per p.
fn bigraded(
    title: String,
    max_p: usize,
    max_m: usize,
    total_top: Option<usize>,
    cell: impl Fn(usize, usize) -> Result<Cell> + Sync,
) -> Result<(Value, Map<String, Value>)> {
    let top_m = total_top.map_or(max_m, |t| t.max(max_m));
    let rows: Vec<Result<Vec<Cell>>> = thread::scope(|s| {
        let handles: Vec<_> = (0..=max_p)
            .map(|p| {
                let cell = &cell;
                s.spawn(move || (0..=top_m).map(|m| cell(p, m)).collect::<Result<Vec<_>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut table = Table::new(title, max_p, max_m);
    let mut gens = Map::new();
    for (p, row) in rows.into_iter().enumerate() {
        let row = row?;
        for (m, c) in row.iter().enumerate() {
            if m <= max_m {
                table.set(p, m, c.as_ref().map(|(d, _)| *d));
                if let Some((_, reps)) = c {
                    if !reps.is_empty() {
                        gens.insert(key(p, m), json!(reps));
                    }
                }
            }
        }
        let total = total_top.and_then(|t| row[..=t].iter().map(|c| c.as_ref().map(|(d, _)| *d)).sum::<Option<usize>>());
        table.set_total(p, total);
    }
    Ok((table.into_value(), gens))
}

pub fn info(a: &QuadraticAlgebra, s: &Settings) -> Result<Outcome> {
    let mut m = base("info", Some(a), s);
    let n = a.n();
    let max_p = s.max_p(6);
    let w: Vec<usize> = (0..=max_p).map(|p| w_space(a, p).dim()).collect();
    m.insert(
        "results".into(),
        json!([
            result("dim V", n),
            result("dim R", a.relations().dim()),
            result("dim R^⊥", n * n - a.relations().dim()),
            result("finite-dimensional", a.is_finite()),
            result("dim A", a.total_dim().map_or(json!("?"), |d| json!(d))),
            result(format!("dim W_p for p = 0..{max_p}"), w.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")),
        ]),
    );
    Ok(done(m))
}

pub fn wspaces(a: &QuadraticAlgebra, s: &Settings) -> Result<Outcome> {
    let mut m = base("wspaces", Some(a), s);
    let max_p = s.max_p(6);
    let mut results = Vec::new();
    let mut gens = Map::new();
    for p in 0..=max_p {
        let w = w_space(a, p);
        results.push(result(format!("dim W_{p}"), w.dim()));
        let basis: Vec<String> = w.basis().iter().map(|v| render_w_vector(a, v, p)).collect();
        if !basis.is_empty() {
            gens.insert(format!("W_{p}"), json!(basis));
        }
    }
    m.insert("results".into(), json!(results));
    m.insert("generators".into(), json!({ "basis of W_p": gens }));
    Ok(done(m))
}

pub fn koszul_homology(a: &QuadraticAlgebra, s: &Settings, kind: Kind) -> Result<Outcome> {
    let name = match kind {
        Kind::Chain => "homology",
        Kind::Cochain => "cohomology",
    };
    let module = module(a, s.coeff)?;
    let (max_p, max_m) = (s.max_p(6), s.max_weight(6).min(a.weight_bound()));
    let variant = s.variant;
    let title = match kind {
        Kind::Chain => format!("HK_p(A, {})_m, {variant:?}", coeff_label(s.coeff)),
        Kind::Cochain => format!("HK^p(A, {})_m, {variant:?}", coeff_label(s.coeff)),
    };
    let (table, gens) = bigraded(title.clone(), max_p, max_m, finite_top(&module), |p, m| {
        let Some(h) = certify(hk(&module, kind, variant, p as i64, m as i64))? else {
            return Ok(None);
        };
        let reps = h
            .representatives()
            .iter()
            .map(|v| match kind {
                Kind::Chain => render_chain(&module, p as i64, m as i64, v),
                Kind::Cochain => render_cochain(&module, p as i64, m as i64, v),
            })
            .collect();
        Ok(Some((h.dim(), reps)))
    })?;
    let mut m = base(name, Some(a), s);
    m.insert("tables".into(), json!([table]));
    m.insert("generators".into(), json!({ format!("generators of {title}"): gens }));
    Ok(done(m))
}

pub fn higher(a: &QuadraticAlgebra, s: &Settings) -> Result<Outcome> {
    let module = module(a, s.coeff)?;
    let (max_p, max_m) = (s.max_p(4), s.max_weight(6).min(a.weight_bound()));
    let variant = s.variant;
    let mut tables = Vec::new();
    let mut all_gens = Map::new();
    for kind in [Kind::Chain, Kind::Cochain] {
        let title = match kind {
            Kind::Chain => format!("HK^hi_p(A, {})_m, {variant:?}", coeff_label(s.coeff)),
            Kind::Cochain => format!("HK_hi^p(A, {})_m, {variant:?}", coeff_label(s.coeff)),
        };
        let (table, gens) = bigraded(title.clone(), max_p, max_m, finite_top(&module), |p, m| {
            let Some(h) = certify(higher_space(&module, kind, variant, p as i64, m as i64))? else {
                return Ok(None);
            };
            let reps = (0..h.dim())
                .map(|i| match kind {
                    Kind::Chain => render_chain(&module, p as i64, m as i64, &h.cycle(i)),
                    Kind::Cochain => render_cochain(&module, p as i64, m as i64, &h.cycle(i)),
                })
                .collect();
            Ok(Some((h.dim(), reps)))
        })?;
        tables.push(table);
        all_gens.insert(format!("generators of {title}"), Value::Object(gens));
    }
    let mut m = base("higher", Some(a), s);
    m.insert("tables".into(), json!(tables));
    m.insert("generators".into(), Value::Object(all_gens));
    Ok(done(m))
}

pub fn dual(a: &QuadraticAlgebra, s: &Settings, output: Option<&std::path::Path>) -> Result<Outcome> {
    let pres = a.koszul_dual_presentation();
    let text = pres.to_text();
    if let Some(path) = output {
        std::fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let mut m = base("dual", Some(a), s);
    m.insert(
        "results".into(),
        json!([
            result("generators of A^!", pres.gens.join(" ")),
            result("dim R^⊥", pres.relations.dim()),
        ]),
    );
    m.insert("presentation".into(), json!(text));
    Ok(done(m))
}

fn pair_table(title: &str, rows: &[DimPair], max_total: usize) -> Value {
    let mut t = Table::new(title, max_total, max_total);
    for r in rows {
        let d = match (r.left, r.right) {
            (Some(x), Some(y)) if x == y => Some(x),
            _ => None,
        };
        t.set(r.p, r.m, d);
    }
    t.into_value()
}

fn dual_relations(ctx: &DualityContext<'_>) -> String {
    let d = ctx.dual();
    let rels: Vec<String> = d.relations().basis().iter().map(|r| d.presentation().render_tensor(r, 2)).collect();
    rels.join("; ")
}

pub fn duality_check(a: &QuadraticAlgebra, s: &Settings, max_total: usize) -> Result<Outcome> {
    let bound = max_total + 2;
    let ctx = DualityContext::new(a, bound);
    let trials = s.trials.unwrap_or(20);
    let rep = duality_report(&ctx, max_total, trials, s.seed)?;
    let mut m = base("duality-check", Some(a), s);
    m.insert(
        "tables".into(),
        json!([
            pair_table("HK^p(A)_m = H̃K^m(A^!)_p", &rep.cohomology, max_total),
            pair_table("HK_p(A)_m = H̃K^m(A^!, A^!*)_p", &rep.homology, max_total),
            pair_table("HK_hi^p(A)_m = H̃K_hi^m(A^!)_p", &rep.higher_cohomology, max_total),
            pair_table("HK^hi_p(A)_m = H̃K_hi^m(A^!, A^!*)_p", &rep.higher_homology, max_total),
        ]),
    );
    m.insert(
        "results".into(),
        json!([
            result("relations of A^!", dual_relations(&ctx)),
            result("dimension tables agree", rep.all_agree()),
            result("random identity trials passed", rep.trials),
        ]),
    );
    Ok(done(m))
}

fn joined(v: impl IntoIterator<Item = impl ToString>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn hochschild(a: &QuadraticAlgebra, s: &Settings, cap: usize, truncate: Option<usize>) -> Result<Outcome> {
    let bar = match truncate {
        Some(t) => Bar::truncated(a, t)?,
        None => Bar::new(a)?,
    }
    .with_cap(cap);
    let max_p = s.max_p(3);
    let mut results = Vec::new();
    let mut hh = Vec::new();
    let mut hc = Vec::new();
    for p in 0..=max_p {
        let h = bar.hh(Kind::Chain, p)?;
        let c = bar.hh(Kind::Cochain, p)?;
        results.push(result(
            format!("HH_{p} by total weight"),
            joined(h.graded_dims().iter().map(|(w, d)| format!("{w}:{d}"))),
        ));
        results.push(result(
            format!("HH^{p} by weight shift"),
            joined(c.graded_dims().iter().map(|(w, d)| format!("{w}:{d}"))),
        ));
        hh.push(h.dim());
        hc.push(c.dim());
    }
    results.insert(0, result(format!("dim HH_p, p = 0..{max_p}"), joined(&hh)));
    results.insert(1, result(format!("dim HH^p, p = 0..{max_p}"), joined(&hc)));
    if truncate.is_none() {
        for p in 0..=max_p {
            for (kind, name) in [(Kind::Chain, "H(χ̃)"), (Kind::Cochain, "H(χ*)")] {
                let c = bar.comparison(kind, p)?;
                results.push(result(
                    format!("{name}_{p}"),
                    format!(
                        "rank {}, source dim {}, target dim {}, injective {}, surjective {}",
                        c.rank(),
                        c.map.src_dim(),
                        c.map.dst_dim(),
                        c.is_injective(),
                        c.is_surjective()
                    ),
                ));
            }
        }
    }
    if max_p >= 1 {
        let upto = max_p - 1;
        if a.field().characteristic() == 0 {
            for p in 0..=upto {
                results.push(result(format!("Rinehart–Goodwillie on HH_{p}"), bar.rg_check(p)?.holds()));
            }
        }
        if a.field().characteristic() != 2 {
            for (kind, name) in [
                (HigherKind::Homology, "HH^hi_p"),
                (HigherKind::DeRham, "H_dR^p"),
                (HigherKind::Cohomology, "HH_hi^p"),
            ] {
                let dims = (0..=upto)
                    .map(|p| bar.higher_hochschild(kind, p).map(|h| h.dim()))
                    .collect::<koszulkit_core::Result<Vec<_>>>()?;
                results.push(result(format!("dim {name}, p = 0..{upto}"), joined(&dims)));
            }
        }
    }
    let mut m = base("hochschild", Some(a), s);
    m.insert("results".into(), json!(results));
    Ok(done(m))
}

pub fn koszulity_cmd(a: &QuadraticAlgebra, s: &Settings, max_degree: usize) -> Result<Outcome> {
    let rep = koszulity(a, max_degree)?;
    let mut results = vec![result("verdict", rep.verdict())];
    for (p, m, d) in &rep.failures {
        results.push(result(format!("dim H_{p}(K_ℓ) at coefficient weight {m}"), *d));
    }
    let mut m = base("koszulity", Some(a), s);
    m.insert("results".into(), json!(results));
    Ok(done(m))
}

fn check_json(o: &CheckOutcome) -> Value {
    json!({
        "algebra": o.algebra,
        "check": o.check,
        "cases": o.cases,
        "passed": o.passed(),
        "failure": o.failure,
    })
}

pub fn selftest(extra: Option<Presentation>, s: &Settings) -> Result<Outcome> {
    let mut cfg = SuiteConfig {
        seed: s.seed,
        ..SuiteConfig::default()
    };
    if let Some(t) = s.trials {
        cfg.trials = t;
    }
    if let Some(p) = s.max_p {
        cfg.max_p = p as i64;
    }
    if let Some(w) = s.max_weight {
        cfg.max_m = w as i64;
    }
    cfg.bound = cfg.bound.max((cfg.max_p + cfg.max_m) as usize + 2);
    let mut algebras = standard_algebras(cfg.bound);
    let mut m = base("selftest", None, s);
    if let Some(pres) = extra {
        let a = QuadraticAlgebra::new(pres, cfg.bound);
        m.insert("algebra".into(), algebra_summary(&a));
        algebras.push(("input".into(), a));
    }
    let report = run_suite(&algebras, &cfg);
    let passed = report.outcomes.iter().filter(|o| o.passed()).count();
    m.insert(
        "results".into(),
        json!([result("checks passed", format!("{passed} of {}", report.outcomes.len()))]),
    );
    m.insert("checks".into(), json!(report.outcomes.iter().map(check_json).collect::<Vec<_>>()));
    Ok(Outcome {
        report: Value::Object(m),
        failed: !report.all_passed(),
    })
}
