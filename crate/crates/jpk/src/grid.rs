//! Values and grids given on the command line: numbers, multiples of `pi`, lists and ranges.

use std::f64::consts::PI;

use crate::error::{CliError, CliResult};

fn parse_term(s: &str) -> CliResult<f64> {
    let bad = || CliError::usage(format!("cannot read a number from '{s}'"));
    if let Some(pos) = s.find("pi") {
        let coef = match s[..pos].trim_end_matches('*') {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let rest = &s[pos + 2..];
        let den = match rest.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        Ok(coef * PI / den)
    } else {
        s.parse::<f64>().map_err(|_| bad())
    }
}

/// A number or a sum of terms such as `pi`, `3pi/4`, `pi-0.01`, `0.5*pi`.
pub fn parse_value(s: &str) -> CliResult<f64> {
    let s = s.trim();
    if s.is_empty() {
        return Err(CliError::usage("empty value"));
    }
    let bytes = s.as_bytes();
    let mut start = 0;
    let mut total = 0.0;
    for i in 1..=bytes.len() {
        let split = i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'/' | b'*'));
        if split {
            total += parse_term(&s[start..i])?;
            start = i;
        }
    }
    if !total.is_finite() {
        return Err(CliError::usage(format!("'{s}' is not finite")));
    }
    Ok(total)
}

/// `a:b:n` (n equispaced points), `log:a:b:n` (n log-spaced points) or a comma list.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    let count = |c: &str| c.trim().parse::<usize>().map_err(|_| CliError::usage(format!("bad point count in '{s}'")));
    match parts.as_slice() {
        [one] => one.split(',').filter(|x| !x.trim().is_empty()).map(parse_value).collect(),
        [a, b, n] => Ok(linspace(parse_value(a)?, parse_value(b)?, count(n)?)),
        ["log", a, b, n] => {
            let (a, b) = (parse_value(a)?, parse_value(b)?);
            if !(a > 0.0 && b > 0.0) {
                return Err(CliError::usage(format!("log grid needs positive ends in '{s}'")));
            }
            Ok(linspace(a.ln(), b.ln(), count(n)?).into_iter().map(f64::exp).collect())
        }
        _ => Err(CliError::usage(format!("cannot read a grid from '{s}'"))),
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}
