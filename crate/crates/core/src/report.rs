//! Line-delimited JSON reports and the reproduction tables.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use crate::basis::{enumerate_scd_paths, fmt_two_j, scd_degeneracy, strong_labels};
use crate::{Error, Result};

/// Provenance for checks that exist only to run the others.
pub const PLUMBING: &str = "plumbing";

/// Largest `n` accepted by [`table_degeneracies`].
pub const TABLE_MAX_N: usize = 64;

/// Strong-model degeneracies `n_J` for `n ≤ 6` as `(n, 2J, n_J)`.
pub const REFERENCE_TABLE: [(usize, usize, u64); 15] = [
    (1, 1, 1),
    (2, 0, 1),
    (2, 2, 1),
    (3, 1, 2),
    (3, 3, 1),
    (4, 0, 2),
    (4, 2, 3),
    (4, 4, 1),
    (5, 1, 5),
    (5, 3, 4),
    (5, 5, 1),
    (6, 0, 5),
    (6, 2, 9),
    (6, 4, 5),
    (6, 6, 1),
];

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub check: String,
    pub pass: bool,
    pub worst_deviation: f64,
    pub metrics: BTreeMap<String, f64>,
    pub details: Value,
    pub provenance: String,
}

impl Report {
    pub fn new(check: impl Into<String>, provenance: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            pass: true,
            worst_deviation: 0.0,
            metrics: BTreeMap::new(),
            details: Value::Null,
            provenance: provenance.into(),
        }
    }

    pub fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    /// Sets the deviation and derives `pass` from the tolerance.
    pub fn judged(mut self, worst_deviation: f64, tol: f64) -> Self {
        self.worst_deviation = worst_deviation;
        self.pass = worst_deviation <= tol;
        self.metrics.insert("tol".into(), tol);
        self
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    /// One JSON object per line.
    pub fn write_line<W: Write + ?Sized>(&self, out: &mut W) -> Result<()> {
        serde_json::to_writer(&mut *out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyCell {
    pub n: usize,
    #[serde(rename = "twoJ")]
    pub two_j: usize,
    #[serde(rename = "J")]
    pub j: String,
    pub n_j: String,
}

fn reference(n: usize, two_j: usize) -> Option<u64> {
    REFERENCE_TABLE.iter().find(|&&(rn, rj, _)| rn == n && rj == two_j).map(|r| r.2)
}

/// Full triangle of strong-model degeneracies for `n ≤ max_n`, compared cell
/// by cell with the reference table where it has entries.
pub fn table_degeneracies(max_n: usize) -> Result<(Report, Vec<DegeneracyCell>)> {
    if max_n == 0 || max_n > TABLE_MAX_N {
        return Err(Error::InvalidInput(format!("max_n must be in 1..={TABLE_MAX_N}, got {max_n}")));
    }
    let mut cells = Vec::new();
    let mut mismatches = Vec::new();
    let mut compared = 0usize;
    for n in 1..=max_n {
        for two_j in strong_labels(n) {
            let nj = scd_degeneracy(n, two_j)?;
            if let Some(want) = reference(n, two_j) {
                compared += 1;
                if nj != BigUint::from(want) {
                    mismatches.push(json!({"n": n, "twoJ": two_j, "got": nj.to_string(), "want": want}));
                }
            }
            cells.push(DegeneracyCell { n, two_j, j: fmt_two_j(two_j), n_j: nj.to_string() });
        }
    }
    let report = Report::new("table_degeneracies", "strong collective decoherence DFS dimensions")
        .metric("max_n", max_n as f64)
        .metric("cells", cells.len() as f64)
        .metric("compared", compared as f64)
        .metric("mismatches", mismatches.len() as f64)
        .with_pass(mismatches.is_empty())
        .details(json!({"mismatches": mismatches}));
    let report = Report { worst_deviation: mismatches.len() as f64, ..report };
    Ok((report, cells))
}

/// Closed-form degeneracies against explicit path enumeration for every
/// `n ≤ max_n` and admissible `2J`.
pub fn degeneracy_oracle(max_n: usize) -> Result<Report> {
    let mut mismatches = Vec::new();
    let mut checked = 0usize;
    for n in 1..=max_n {
        for two_j in strong_labels(n) {
            let formula = scd_degeneracy(n, two_j)?;
            let count = enumerate_scd_paths(n, two_j)?.len();
            checked += 1;
            if formula != BigUint::from(count) {
                mismatches.push(json!({"n": n, "twoJ": two_j, "formula": formula.to_string(), "paths": count}));
            }
        }
    }
    Ok(Report::new("degeneracy_oracle", PLUMBING)
        .metric("max_n", max_n as f64)
        .metric("checked", checked as f64)
        .with_pass(mismatches.is_empty())
        .details(json!({"mismatches": mismatches})))
}

/// `log₂ x` for an arbitrarily large positive integer.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).iter_u64_digits().next().unwrap_or(0);
    (top as f64).log2() + shift as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct EfficiencyPoint {
    pub n: usize,
    pub k: f64,
    pub rate: f64,
    pub asymptote: f64,
    pub gap: f64,
}

/// Encoding rate `k/n`, `k = log₂ n_{J=0}`, against `1 − 1.5·log₂n / n`.
pub fn efficiency_curve(ns: &[usize]) -> Result<(Report, Vec<EfficiencyPoint>)> {
    if let Some(&bad) = ns.iter().find(|&&n| n == 0 || n % 2 == 1) {
        return Err(Error::InvalidInput(format!("efficiency needs even n ≥ 2, got {bad}")));
    }
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let k = log2_big(&scd_degeneracy(n, 0)?);
        let rate = k / n as f64;
        let asymptote = 1.0 - 1.5 * (n as f64).log2() / n as f64;
        points.push(EfficiencyPoint { n, k, rate, asymptote, gap: (rate - asymptote).abs() });
    }
    let worst = points.iter().map(|p| p.gap).fold(0.0, f64::max);
    let shrinking = points.windows(2).all(|w| w[1].gap < w[0].gap);
    let report = Report::new("efficiency_curve", "exchange gate is asymptotically universal")
        .judged(worst, 0.08)
        .metric("monotone", if shrinking { 1.0 } else { 0.0 });
    let pass = report.pass && shrinking;
    Ok((report.with_pass(pass), points))
}

/// Rows as CSV with a header line.
pub fn write_csv<W: Write + ?Sized>(out: &mut W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        writeln!(out, "{}", r.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(cells: &[DegeneracyCell], n: usize, two_j: usize) -> String {
        cells.iter().find(|c| c.n == n && c.two_j == two_j).unwrap().n_j.clone()
    }

    #[test]
    fn table_matches_reference() {
        let (r, cells) = table_degeneracies(6).unwrap();
        assert!(r.pass);
        assert_eq!(r.metrics["compared"], 15.0);
        assert_eq!(cell(&cells, 6, 0), "5");
        assert_eq!(cell(&cells, 1, 1), "1");
    }

    #[test]
    fn twelve_qubit_singlets() {
        let (_, cells) = table_degeneracies(12).unwrap();
        assert_eq!(cell(&cells, 12, 0), "132");
    }

    #[test]
    fn table_bounds() {
        assert!(table_degeneracies(65).is_err());
        assert!(table_degeneracies(64).is_ok());
    }

    #[test]
    fn oracle_agrees() {
        assert!(degeneracy_oracle(10).unwrap().pass);
    }

    #[test]
    fn efficiency_at_twenty() {
        let (_, pts) = efficiency_curve(&[20]).unwrap();
        assert!((pts[0].k - 16796f64.log2()).abs() < 1e-12);
        assert!((pts[0].rate - 0.7018).abs() < 1e-4);
        assert!((pts[0].asymptote - 0.6759).abs() < 1e-4);
    }

    #[test]
    fn efficiency_single_singlet() {
        let (_, pts) = efficiency_curve(&[2]).unwrap();
        assert_eq!(pts[0].k, 0.0);
        assert!(efficiency_curve(&[3]).is_err());
    }

    #[test]
    fn efficiency_gaps_shrink() {
        let (r, _) = efficiency_curve(&[10, 20, 40, 60]).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn log2_of_huge() {
        let x = BigUint::from(1u8) << 300usize;
        assert!((log2_big(&x) - 300.0).abs() < 1e-12);
        assert!((log2_big(&BigUint::from(16796u32)) - 16796f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn report_lines_are_json() {
        let mut buf = Vec::new();
        Report::new("x", PLUMBING).metric("a", 1.0).write_line(&mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["provenance"], "plumbing");
        assert_eq!(buf.last(), Some(&b'\n'));
    }
}
