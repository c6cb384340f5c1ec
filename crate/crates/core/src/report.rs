//! Verification reports: JSON, CSV and plain text.

use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err(Error::Parse(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportContext {
    pub suite: String,
    pub p: u32,
    pub n: usize,
    /// Defining polynomial of the unramified extension.
    pub modulus: String,
    pub precision: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
    /// Conventions in force (character, constants).
    pub conventions: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NumericResidual {
    /// `None` for checks that do not depend on `α`.
    pub alpha: Option<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckRecord {
    pub check_id: String,
    pub inputs_digest: String,
    /// Exact residual, when the check has a symbolic form.
    pub symbolic_residual: Option<String>,
    pub numeric_residuals: Vec<NumericResidual>,
    pub tolerance: Option<f64>,
    /// Agreement with the brute-force shell sums, when consulted.
    pub oracle_agreement: Option<bool>,
    pub pass: bool,
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(check_id: impl Into<String>, inputs: &str) -> CheckRecord {
        CheckRecord {
            check_id: check_id.into(),
            inputs_digest: digest(inputs),
            symbolic_residual: None,
            numeric_residuals: Vec::new(),
            tolerance: None,
            oracle_agreement: None,
            pass: false,
            note: None,
        }
    }

    pub fn max_numeric(&self) -> f64 {
        self.numeric_residuals.iter().map(|r| r.value.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Timings {
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub context: ReportContext,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    /// Suite-specific data (normalization comparison, probes, …).
    pub extra: Value,
    pub timings: Timings,
}

/// 16 hex digits identifying the inputs of a check.
pub fn digest(inputs: &str) -> String {
    let mut h = DefaultHasher::new();
    inputs.hash(&mut h);
    format!("{:016x}", h.finish())
}

impl VerificationReport {
    pub fn new(context: ReportContext, checks: Vec<CheckRecord>, extra: Value, wall_ms: u64) -> VerificationReport {
        let passed = checks.iter().filter(|c| c.pass).count();
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
        VerificationReport { context, checks, summary, extra, timings: Timings { wall_ms } }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<VerificationReport> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One row per check; residuals are `alpha=value` joined by `;`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record([
            "check_id",
            "inputs_digest",
            "symbolic_residual",
            "numeric_residuals",
            "tolerance",
            "oracle_agreement",
            "pass",
        ])
        .map_err(err)?;
        for c in &self.checks {
            let residuals: Vec<String> =
                c.numeric_residuals
                    .iter()
                    .map(|r| match r.alpha {
                        Some(a) => format!("{a}={:e}", r.value),
                        None => format!("{:e}", r.value),
                    }).collect();
            w.write_record([
                c.check_id.clone(),
                c.inputs_digest.clone(),
                c.symbolic_residual.clone().unwrap_or_default(),
                residuals.join(";"),
                c.tolerance.map(|t| format!("{t:e}")).unwrap_or_default(),
                c.oracle_agreement.map(|b| b.to_string()).unwrap_or_default(),
                c.pass.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let c = &self.context;
        let mut out = String::new();
        let _ = writeln!(out, "suite {}  p = {}  n = {}  modulus {}", c.suite, c.p, c.n, c.modulus);
        let _ = writeln!(out, "precision {}  seed {}  alphas {:?}", c.precision, c.seed, c.alphas);
        for conv in &c.conventions {
            let _ = writeln!(out, "  {conv}");
        }
        for r in &self.checks {
            let sym = r.symbolic_residual.as_deref().unwrap_or("-");
            let oracle = match r.oracle_agreement {
                Some(true) => "oracle ok",
                Some(false) => "oracle MISMATCH",
                None => "",
            };
            let _ = writeln!(
                out,
                "{} {:<40} residual {:<8} max|num| {:.3e} {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.check_id,
                sym,
                r.max_numeric(),
                oracle
            );
            if let Some(note) = &r.note {
                let _ = writeln!(out, "     {note}");
            }
        }
        let s = &self.summary;
        let _ = writeln!(out, "{} checks, {} passed, {} failed ({} ms)", s.total, s.passed, s.failed, self.timings.wall_ms);
        out
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Text => Ok(self.to_text()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut a = CheckRecord::new("kelvin/unit_ball/0", "x");
        a.symbolic_residual = Some("0".into());
        a.numeric_residuals.push(NumericResidual { alpha: Some(0.5), value: 1e-17 });
        a.pass = true;
        let b = CheckRecord::new("kelvin/unit_ball/1", "y, with \"quotes\"");
        let ctx = ReportContext {
            suite: "kelvin".into(),
            p: 2,
            n: 2,
            modulus: "x^2 + x + 1".into(),
            precision: 16,
            alphas: vec![0.5],
            seed: 1,
            conventions: vec![],
        };
        VerificationReport::new(ctx, vec![a, b], Value::Null, 3)
    }

    #[test]
    fn summary_and_round_trip() {
        let r = sample();
        assert_eq!(r.summary, Summary { total: 2, passed: 1, failed: 1 });
        assert!(!r.all_pass());
        assert_eq!(VerificationReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn csv_rows() {
        let csv = sample().to_csv().unwrap();
        let mut rd = csv::Reader::from_reader(csv.as_bytes());
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][6], "true");
        assert_eq!(&rows[1][2], "");
        assert!(sample().to_text().contains("1 failed"));
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest("abc"), digest("abc"));
        assert_ne!(digest("abc"), digest("abd"));
    }
}
