//! File formats: estimate reports (CSV and JSON), expansions (JSON) and sampled functions (CSV).

use std::io::{Read, Write};

use jpk_core::spectral::{Coeffs, Expansion};
use jpk_core::{EstimateReport, JacobiParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};
use crate::format::fmt_f64;

/// JSON number for finite values, `null` otherwise.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// CSV with columns `theta,phi,norm,bound,ratio`, preceded by `t` for time-dependent scans.
pub fn write_report_csv<W: Write>(report: &EstimateReport, out: W) -> CliResult<()> {
    let with_t = report.rows.iter().any(|r| r.t.is_some());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    if with_t {
        w.write_record(["t", "theta", "phi", "norm", "bound", "ratio"])?;
    } else {
        w.write_record(["theta", "phi", "norm", "bound", "ratio"])?;
    }
    for r in &report.rows {
        let mut rec = Vec::with_capacity(6);
        if with_t {
            rec.push(r.t.map(fmt_f64).unwrap_or_default());
        }
        rec.extend([r.theta, r.phi, r.norm, r.bound, r.ratio].map(fmt_f64));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_json(report: &EstimateReport) -> Value {
    let s = &report.summary;
    json!({ "min": num(s.min), "max": num(s.max), "cap": num(s.cap), "pass": s.pass })
}

/// `{name, summary: {min, max, cap, pass}, extras: {...}, rows: [...]}`.
pub fn report_json(report: &EstimateReport) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            if let Some(t) = r.t {
                m.insert("t".into(), num(t));
            }
            for (k, v) in [("theta", r.theta), ("phi", r.phi), ("norm", r.norm), ("bound", r.bound), ("ratio", r.ratio)] {
                m.insert(k.into(), num(v));
            }
            Value::Object(m)
        })
        .collect();
    let extras: Map<String, Value> = report.extras.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    json!({ "name": report.name, "summary": summary_json(report), "extras": extras, "rows": rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffValue {
    Real(f64),
    Complex([f64; 2]),
}

/// `{alpha, beta, n_max, coeffs}`; complex coefficients are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionFile {
    alpha: f64,
    beta: f64,
    n_max: usize,
    coeffs: Vec<CoeffValue>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    dropped_mode: bool,
}

pub fn read_expansion<R: Read>(input: R) -> CliResult<Expansion> {
    let file: ExpansionFile = serde_json::from_reader(input)?;
    if file.coeffs.len() != file.n_max + 1 {
        return Err(CliError::usage(format!("expansion has n_max = {} but {} coefficients", file.n_max, file.coeffs.len())));
    }
    let params = JacobiParams::new(file.alpha, file.beta)?;
    if file.coeffs.iter().all(|c| matches!(c, CoeffValue::Real(_))) {
        let c = file.coeffs.iter().map(|c| if let CoeffValue::Real(x) = c { *x } else { unreachable!() }).collect();
        Ok(Expansion::new(params, c)?)
    } else {
        let c = file
            .coeffs
            .iter()
            .map(|c| match *c {
                CoeffValue::Real(x) => Complex64::new(x, 0.0),
                CoeffValue::Complex([re, im]) => Complex64::new(re, im),
            })
            .collect();
        Ok(Expansion::new_complex(params, c)?)
    }
}

/// Serialized with two-space indentation and a trailing newline.
pub fn expansion_json(e: &Expansion, dropped_mode: bool) -> String {
    let coeffs = match e.coeffs() {
        Coeffs::Real(c) => c.iter().map(|&x| CoeffValue::Real(x)).collect(),
        Coeffs::Complex(c) => c.iter().map(|z| CoeffValue::Complex([z.re, z.im])).collect(),
    };
    let file = ExpansionFile { alpha: e.params().alpha(), beta: e.params().beta(), n_max: e.n_max(), coeffs, dropped_mode };
    let mut s = serde_json::to_string_pretty(&file).expect("expansion serializes");
    s.push('\n');
    s
}

/// Samples `(theta, f(theta))` read from CSV with a header row, evaluated by piecewise-linear
/// interpolation and constant beyond the first and last sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    theta: Vec<f64>,
    value: Vec<f64>,
}

impl SampledFunction {
    pub fn new(mut samples: Vec<(f64, f64)>) -> CliResult<Self> {
        if samples.is_empty() {
            return Err(CliError::usage("no samples"));
        }
        if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(CliError::usage("samples must be finite"));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(CliError::usage("repeated theta in samples"));
        }
        Ok(Self { theta: samples.iter().map(|s| s.0).collect(), value: samples.iter().map(|s| s.1).collect() })
    }

    pub fn read<R: Read>(input: R) -> CliResult<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(CliError::usage(format!("expected 2 columns (theta, f), found {}", rec.len())));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|_| CliError::usage(format!("cannot read '{s}' as a number")));
            samples.push((parse(&rec[0])?, parse(&rec[1])?));
        }
        Self::new(samples)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.theta.len();
        if theta <= self.theta[0] {
            return self.value[0];
        }
        if theta >= self.theta[n - 1] {
            return self.value[n - 1];
        }
        let i = self.theta.partition_point(|&x| x <= theta);
        let (x0, x1) = (self.theta[i - 1], self.theta[i]);
        let s = (theta - x0) / (x1 - x0);
        self.value[i - 1] + s * (self.value[i] - self.value[i - 1])
    }
}

/// Two-column CSV `name_x,name_y`.
pub fn write_columns<W: Write>(out: W, header: [&str; 2], rows: &[(f64, f64)]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for &(a, b) in rows {
        w.write_record([fmt_f64(a), fmt_f64(b)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_round_trip() {
        let p = JacobiParams::new(0.5, -0.25).unwrap();
        let e = Expansion::new(p, vec![1.0, -0.5, 1e-20]).unwrap();
        let s = expansion_json(&e, false);
        assert!(!s.contains("dropped_mode"));
        assert_eq!(read_expansion(s.as_bytes()).unwrap(), e);
        let e = Expansion::new_complex(p, vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0)]).unwrap();
        assert_eq!(read_expansion(expansion_json(&e, true).as_bytes()).unwrap(), e);
        assert!(read_expansion(r#"{"alpha":0,"beta":0,"n_max":2,"coeffs":[1]}"#.as_bytes()).is_err());
        assert!(read_expansion(r#"{"alpha":-2,"beta":0,"n_max":0,"coeffs":[1]}"#.as_bytes()).is_err());
    }

    #[test]
    fn linear_interpolation() {
        let f = SampledFunction::read("theta,f\n1,3\n0,1\n2,3\n".as_bytes()).unwrap();
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(f.eval(-1.0), 1.0);
        assert_eq!(f.eval(1.5), 3.0);
        assert_eq!(f.eval(5.0), 3.0);
        assert!(SampledFunction::read("theta,f\n1,2,3\n".as_bytes()).is_err());
    }
}
