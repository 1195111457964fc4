//! Results of grid scans: one row per grid point and a pass/fail summary against a cap.

use alloc::string::String;
use alloc::vec::Vec;

/// One grid point of a scan. `norm` is the quantity being estimated, `bound` the comparison
/// quantity and `ratio` their quotient as defined by the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub t: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    pub norm: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// How the ratios are judged against the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapRule {
    /// `max / min <= cap` (two-sided comparability).
    Spread,
    /// `max <= cap` (one-sided bound).
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSummary {
    pub min: f64,
    pub max: f64,
    pub cap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    pub rule: CapRule,
    pub rows: Vec<EstimateRow>,
    pub summary: EstimateSummary,
    /// Further named diagnostics (for example the spread of the ratios).
    pub extras: Vec<(String, f64)>,
}

impl EstimateReport {
    /// Summarizes `rows`. A report fails if any ratio is not a positive finite number, or if the
    /// grid is empty.
    pub fn new(name: impl Into<String>, rule: CapRule, cap: f64, rows: Vec<EstimateRow>) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sane = !rows.is_empty();
        for r in &rows {
            if !(r.ratio.is_finite() && r.ratio > 0.0) {
                sane = false;
            }
            min = min.min(r.ratio);
            max = max.max(r.ratio);
        }
        let pass = sane
            && match rule {
                CapRule::Spread => max / min <= cap,
                CapRule::Max => max <= cap,
            };
        let mut extras = Vec::new();
        if !rows.is_empty() {
            extras.push((String::from("spread"), max / min));
        }
        Self { name: name.into(), rule, rows, summary: EstimateSummary { min, max, cap, pass }, extras }
    }

    pub fn with_extra(mut self, key: impl Into<String>, value: f64) -> Self {
        self.extras.push((key.into(), value));
        self
    }

    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extras.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn pass(&self) -> bool {
        self.summary.pass
    }
}
