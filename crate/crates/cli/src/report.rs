//! JSON report assembly and the table rendering derived from it.

use std::fmt::Write;

use koszulkit_core::algebra::QuadraticAlgebra;
use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "1";

/// An entry that is either a certified dimension or unknown.
pub fn dim_value(d: Option<usize>) -> Value {
    match d {
        Some(d) => json!(d),
        None => json!("?"),
    }
}

pub fn key(p: impl std::fmt::Display, m: impl std::fmt::Display) -> String {
    format!("({p},{m})")
}

pub fn algebra_summary(a: &QuadraticAlgebra) -> Value {
    let pres = a.presentation();
    let relations: Vec<String> = a.relations().basis().iter().map(|r| pres.render_tensor(r, 2)).collect();
    let known = a.top_weight().unwrap_or(a.weight_bound());
    let dims: Vec<usize> = (0..=known).map(|m| a.dim(m).unwrap_or(0)).collect();
    json!({
        "field": a.field().to_string(),
        "generators": a.gens(),
        "relations": relations,
        "dims": dims,
        "top_weight": a.top_weight(),
        "weight_bound": a.weight_bound(),
    })
}

/// A bigraded table; missing keys render as blanks.
pub struct Table {
    pub title: String,
    pub max_p: usize,
    pub max_m: usize,
    pub entries: Map<String, Value>,
    pub totals: Map<String, Value>,
}

impl Table {
    pub fn new(title: impl Into<String>, max_p: usize, max_m: usize) -> Table {
        Table {
            title: title.into(),
            max_p,
            max_m,
            entries: Map::new(),
            totals: Map::new(),
        }
    }

    pub fn set(&mut self, p: usize, m: usize, d: Option<usize>) {
        self.entries.insert(key(p, m), dim_value(d));
    }

    pub fn set_total(&mut self, p: usize, d: Option<usize>) {
        self.totals.insert(key(p, "*"), dim_value(d));
    }

    pub fn into_value(self) -> Value {
        json!({
            "title": self.title,
            "max_p": self.max_p,
            "max_m": self.max_m,
            "entries": self.entries,
            "totals": self.totals,
        })
    }
}

pub fn result(label: impl Into<String>, value: impl Into<Value>) -> Value {
    json!({ "label": label.into(), "value": value.into() })
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

fn render_table(out: &mut String, t: &Value) {
    let title = t["title"].as_str().unwrap_or("");
    let max_p = t["max_p"].as_u64().unwrap_or(0);
    let max_m = t["max_m"].as_u64().unwrap_or(0);
    let _ = writeln!(out, "{title}");
    let cell = |p: u64, m: u64| t["entries"].get(key(p, m)).map(scalar_text).unwrap_or_default();
    let width = (0..=max_p)
        .flat_map(|p| (0..=max_m).map(move |m| (p, m)))
        .map(|(p, m)| cell(p, m).chars().count())
        .chain(std::iter::once(max_m.to_string().len()))
        .max()
        .unwrap_or(1);
    let _ = write!(out, "  p\\m |");
    for m in 0..=max_m {
        let _ = write!(out, " {m:>width$}");
    }
    out.push('\n');
    for p in 0..=max_p {
        let _ = write!(out, "  {p:>3} |");
        for m in 0..=max_m {
            let _ = write!(out, " {:>width$}", cell(p, m));
        }
        if let Some(total) = t["totals"].get(key(p, "*")) {
            let _ = write!(out, "   {} total {}", key(p, "*"), scalar_text(total));
        }
        out.push('\n');
    }
}

/// Human-readable rendering of a report; depends only on the JSON.
pub fn render(report: &Value) -> String {
    let mut out = String::new();
    if let Some(cmd) = report["command"].as_str() {
        let _ = writeln!(out, "koszulkit {cmd}");
    }
    let alg = &report["algebra"];
    if alg.is_object() {
        let gens: Vec<String> = alg["generators"].as_array().into_iter().flatten().map(scalar_text).collect();
        let rels: Vec<String> = alg["relations"].as_array().into_iter().flatten().map(scalar_text).collect();
        let dims: Vec<String> = alg["dims"].as_array().into_iter().flatten().map(scalar_text).collect();
        let _ = writeln!(out, "algebra over {}: generators {}", scalar_text(&alg["field"]), gens.join(" "));
        let _ = writeln!(out, "relations: {}", if rels.is_empty() { "none".into() } else { rels.join("; ") });
        let top = match &alg["top_weight"] {
            Value::Null => format!("infinite-dimensional, known to weight {}", scalar_text(&alg["weight_bound"])),
            v => format!("top weight {}", scalar_text(v)),
        };
        let _ = writeln!(out, "dim A_m: {} ({top})", dims.join(" "));
    }
    for t in report["tables"].as_array().into_iter().flatten() {
        out.push('\n');
        render_table(&mut out, t);
    }
    if let Some(results) = report["results"].as_array().filter(|r| !r.is_empty()) {
        out.push('\n');
        for r in results {
            let _ = writeln!(out, "{}: {}", scalar_text(&r["label"]), scalar_text(&r["value"]));
        }
    }
    if let Some(gens) = report["generators"].as_object().filter(|g| !g.is_empty()) {
        for (title, by_key) in gens {
            let _ = writeln!(out, "\n{title}");
            for (k, list) in by_key.as_object().into_iter().flatten() {
                for g in list.as_array().into_iter().flatten() {
                    let _ = writeln!(out, "  {k} {}", scalar_text(g));
                }
            }
        }
    }
    if let Some(checks) = report["checks"].as_array().filter(|c| !c.is_empty()) {
        out.push('\n');
        for c in checks {
            let status = if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
            let _ = write!(
                out,
                "{status} [{}] {} ({} cases)",
                scalar_text(&c["algebra"]),
                scalar_text(&c["check"]),
                scalar_text(&c["cases"])
            );
            if let Some(d) = c["failure"].as_str() {
                let _ = write!(out, ": {d}");
            }
            out.push('\n');
        }
    }
    if let Some(text) = report["presentation"].as_str() {
        let _ = write!(out, "\n{text}");
    }
    out
}
