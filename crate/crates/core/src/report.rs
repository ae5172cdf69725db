//! Verification reports: per-sample margins, fitted constants and verdicts,
//! with deterministic CSV/JSON/SVG rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// How a failing report affects the run's exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Mathematical identity or derived inequality: failure is a hard error.
    Hard,
    /// Bound with calibrated constants: failure is a warning.
    Soft,
    /// Reported only, never asserted.
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Which part of a calibrate-then-validate protocol a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Sample of a plain check (no constants fitted).
    Check,
    Calibration,
    Validation,
}

/// One evaluated sample: coordinates, both sides of the inequality and the
/// margin (nonnegative when the sample passes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub coords: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub split: Split,
    /// Margin is below the numerical noise floor of the check.
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub severity: Severity,
    pub verdict: Verdict,
    pub coord_names: Vec<String>,
    pub margins: Vec<Margin>,
    pub constants: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(check: impl Into<String>, severity: Severity, coord_names: &[&str]) -> Self {
        Self {
            check: check.into(),
            severity,
            verdict: Verdict::Inconclusive,
            coord_names: coord_names.iter().map(|s| s.to_string()).collect(),
            margins: Vec::new(),
            constants: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Record a sample of an inequality `lhs ≤ rhs`.
    pub fn push_le(&mut self, coords: Vec<f64>, lhs: f64, rhs: f64, split: Split) {
        self.margins.push(Margin {
            coords,
            lhs,
            rhs,
            margin: rhs - lhs,
            split,
            inconclusive: false,
        });
    }

    /// Record a sample of an identity `|lhs - rhs| ≤ tol`.
    pub fn push_eq(&mut self, coords: Vec<f64>, lhs: f64, rhs: f64, tol: f64) {
        self.margins.push(Margin {
            coords,
            lhs,
            rhs,
            margin: tol - (lhs - rhs).abs(),
            split: Split::Check,
            inconclusive: false,
        });
    }

    pub fn push(&mut self, margin: Margin) {
        self.margins.push(margin);
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn asserted(&self) -> impl Iterator<Item = &Margin> {
        self.margins
            .iter()
            .filter(|m| m.split != Split::Calibration && !m.inconclusive)
    }

    /// Set the verdict from the asserted margins: pass iff every validation
    /// or check margin is nonnegative (NaN counts as failure).
    pub fn finish(mut self) -> Self {
        let mut any = false;
        let mut ok = true;
        for m in self.asserted() {
            any = true;
            if !(m.margin >= 0.0) {
                ok = false;
            }
        }
        self.verdict = match (any, ok) {
            (_, false) => Verdict::Fail,
            (true, true) => Verdict::Pass,
            (false, true) => Verdict::Inconclusive,
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Smallest asserted margin.
    pub fn min_margin(&self) -> f64 {
        self.asserted()
            .map(|m| m.margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|lhs - rhs|` over the asserted samples (for identity checks).
    pub fn max_discrepancy(&self) -> f64 {
        self.asserted()
            .map(|m| (m.lhs - m.rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Margin quantiles (0, 0.25, 0.5, 0.75, 1) over asserted samples.
    pub fn margin_quantiles(&self) -> [f64; 5] {
        let mut v: Vec<f64> = self.asserted().map(|m| m.margin).collect();
        if v.is_empty() {
            return [f64::NAN; 5];
        }
        v.sort_by(f64::total_cmp);
        let at = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
        [at(0.0), at(0.25), at(0.5), at(0.75), at(1.0)]
    }

    pub fn inconclusive_count(&self) -> usize {
        self.margins.iter().filter(|m| m.inconclusive).count()
    }

    /// Short JSON summary without the per-sample table.
    pub fn summary(&self) -> serde_json::Value {
        let q = self.margin_quantiles();
        serde_json::json!({
            "check": self.check,
            "severity": self.severity,
            "verdict": self.verdict,
            "samples": self.margins.len(),
            "inconclusive": self.inconclusive_count(),
            "min_margin": finite_or_null(self.min_margin()),
            "margin_quantiles": q.iter().map(|&x| finite_or_null(x)).collect::<Vec<_>>(),
            "constants": self.constants.iter().map(|(k, v)| (k.clone(), finite_or_null(*v))).collect::<BTreeMap<_, _>>(),
            "notes": self.notes,
        })
    }

    /// Per-sample CSV: coordinates, lhs, rhs, margin, split, inconclusive.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for name in &self.coord_names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str("lhs,rhs,margin,split,inconclusive\n");
        for m in &self.margins {
            for c in &m.coords {
                let _ = write!(out, "{},", fmt_num(*c));
            }
            let split = match m.split {
                Split::Check => "check",
                Split::Calibration => "calibration",
                Split::Validation => "validation",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_num(m.lhs),
                fmt_num(m.rhs),
                fmt_num(m.margin),
                split,
                m.inconclusive
            );
        }
        out
    }
}

pub(crate) fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::Null
    }
}

/// Shortest round-trip formatting; stable across runs.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:e}")
    }
}

/// Plain CSV table with a header row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Minimal SVG scatter plot of margins against the first coordinate, one
/// dot per sample, red when the margin is negative.
pub fn margin_svg(report: &BoundReport) -> String {
    let (w, h, pad) = (640.0, 360.0, 40.0);
    let pts: Vec<(f64, f64, bool)> = report
        .margins
        .iter()
        .filter(|m| m.margin.is_finite() && !m.coords.is_empty() && m.coords[0].is_finite())
        .map(|m| (m.coords[0], m.margin, m.margin < 0.0))
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(
        out,
        "<text x=\"{pad}\" y=\"20\" font-family=\"monospace\" font-size=\"12\">{} margin vs {}</text>",
        escape(&report.check),
        escape(report.coord_names.first().map(String::as_str).unwrap_or("sample"))
    );
    if !pts.is_empty() {
        let (x0, x1) = bounds(pts.iter().map(|p| p.0));
        let (y0, y1) = bounds(pts.iter().map(|p| p.1).chain(std::iter::once(0.0)));
        let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
        let _ = writeln!(
            out,
            "<line x1=\"{pad}\" y1=\"{y:.2}\" x2=\"{x2}\" y2=\"{y:.2}\" stroke=\"#888\"/>",
            y = sy(0.0),
            x2 = w - pad
        );
        for (x, y, bad) in pts {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{}\"/>",
                sx(x),
                sy(y),
                if bad { "#c00" } else { "#236" }
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_ignores_calibration_and_inconclusive_samples() {
        let mut r = BoundReport::new("demo", Severity::Soft, &["r"]);
        r.push_le(vec![1.0], 2.0, 1.0, Split::Calibration);
        r.push_le(vec![2.0], 0.5, 1.0, Split::Validation);
        r.push(Margin {
            coords: vec![3.0],
            lhs: 1.0,
            rhs: 0.0,
            margin: -1.0,
            split: Split::Validation,
            inconclusive: true,
        });
        let r = r.finish();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.min_margin(), 0.5);
    }

    #[test]
    fn nan_margin_fails() {
        let mut r = BoundReport::new("demo", Severity::Hard, &["r"]);
        r.push_eq(vec![0.0], f64::NAN, 0.0, 1e-8);
        assert_eq!(r.finish().verdict, Verdict::Fail);
    }

    #[test]
    fn csv_is_stable() {
        let mut r = BoundReport::new("demo", Severity::Hard, &["r", "t"]);
        r.push_le(vec![0.5, 1.0], 1.0, 2.0, Split::Check);
        assert_eq!(
            r.to_csv(),
            "r,t,lhs,rhs,margin,split,inconclusive\n5e-1,1e0,1e0,2e0,1e0,check,false\n"
        );
    }
}
