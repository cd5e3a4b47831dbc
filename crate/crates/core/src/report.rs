//! Claim reports and CSV tables.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

/// Whether a passing report means the claim holds or that a counterexample
/// to it was exhibited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Holds,
    ViolationExhibited,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub claim: String,
    /// The mathematical statement being checked.
    pub anchor: String,
    pub pass: bool,
    pub polarity: Polarity,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub worst: Option<Value>,
    pub n_samples: usize,
    pub elapsed_ms: u64,
    pub tolerance: f64,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl VerificationReport {
    pub fn new(claim: &str, anchor: &str, polarity: Polarity) -> Self {
        Self {
            claim: claim.to_owned(),
            anchor: anchor.to_owned(),
            pass: false,
            polarity,
            min: None,
            max: None,
            worst: None,
            n_samples: 0,
            elapsed_ms: 0,
            tolerance: 0.0,
            extra: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra
            .insert(key.to_owned(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn stats(mut self, values: impl IntoIterator<Item = f64>) -> Self {
        let mut n = 0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            n += 1;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        self.n_samples = n;
        if n > 0 {
            self.min = Some(lo);
            self.max = Some(hi);
        }
        self
    }

    pub fn worst(mut self, sample: impl Serialize) -> Self {
        self.worst = serde_json::to_value(sample).ok();
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn verdict(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.elapsed_ms = start.elapsed().as_millis() as u64;
        self
    }

    /// Subject of the report (manifold, submersion...), if recorded.
    pub fn subject(&self) -> Option<&str> {
        self.extra.get("manifold").and_then(Value::as_str)
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |v| format!("{v:.3e}"));
        let name = match self.subject() {
            Some(s) => format!("{}[{s}]", self.claim),
            None => self.claim.clone(),
        };
        format!(
            "{} {name:<32} min {:>11} max {:>11} tol {:.1e} n {}{}",
            if self.pass { "PASS" } else { "FAIL" },
            fmt(self.min),
            fmt(self.max),
            self.tolerance,
            self.n_samples,
            if self.polarity == Polarity::ViolationExhibited {
                " (violation exhibited)"
            } else {
                ""
            },
        )
    }
}

/// A CSV table; missing values are written as empty fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| (*s).to_owned()).collect(),
            rows: Vec::new(),
        }
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn emit_csv<W: Write>(table: &Table, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", table.header.join(","))?;
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(|v| v.map(format_f64).unwrap_or_default()).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()
}

/// Table of report summaries, for suites without a natural grid.
pub fn summary_table(reports: &[VerificationReport]) -> (Vec<String>, Table) {
    let mut t = Table::new(&["pass", "min", "max", "tolerance", "n_samples"]);
    let mut names = Vec::new();
    for r in reports {
        names.push(r.claim.clone());
        t.rows.push(vec![
            Some(if r.pass { 1.0 } else { 0.0 }),
            r.min,
            r.max,
            Some(r.tolerance),
            Some(r.n_samples as f64),
        ]);
    }
    (names, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let digits = s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17);
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        emit_csv(&Table::new(&["a", "b"]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n");
    }

    #[test]
    fn extra_fields_are_flattened() {
        let r = VerificationReport::new("c", "a >= 0", Polarity::Holds)
            .stats([1.0, -2.0])
            .with("manifold", "S2")
            .verdict(true);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["manifold"], "S2");
        assert_eq!(v["min"], -2.0);
        assert_eq!(v["polarity"], "holds");
        assert_eq!(r.subject(), Some("S2"));
    }
}
