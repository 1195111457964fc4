//! Optional JSON configuration file. Values given on the command line win over the file, and
//! the file wins over built-in defaults.

use std::path::Path;

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub method: Option<String>,
    pub format: Option<String>,
    pub tol: Option<f64>,
    pub near_tol: Option<f64>,
    pub cap: Option<f64>,
    pub seed: Option<u64>,
    pub triples: Option<usize>,
    pub t: Option<String>,
    pub theta: Option<String>,
    pub phi: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("malformed config: {e}")))
    }
}

/// First of `flag`, `file` that is set.
pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Like [`pick`], falling back to `default`.
pub fn pick_or<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`pick`] for a required value.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> CliResult<T> {
    flag.or(file).ok_or_else(|| CliError::usage(format!("missing --{name}")))
}

pub fn check_tolerance(name: &str, tol: f64) -> CliResult<f64> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(CliError::usage(format!("{name} must be positive (got {tol})")))
    }
}

pub fn check_cap(cap: f64) -> CliResult<f64> {
    if cap >= 1.0 {
        Ok(cap)
    } else {
        Err(CliError::usage(format!("cap must be at least 1 (got {cap})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let c = FileConfig::parse(r#"{"alpha": 0.5, "cap": 20, "theta": "0:pi:5"}"#).unwrap();
        assert_eq!(pick_or(Some(0.25), c.alpha, 0.0), 0.25);
        assert_eq!(pick_or(None, c.cap, 50.0), 20.0);
        assert_eq!(pick_or(None, c.tol, 1e-6), 1e-6);
        assert_eq!(require(None, c.theta.clone(), "theta").unwrap(), "0:pi:5");
        assert!(require::<f64>(None, c.beta, "beta").is_err());
        assert!(FileConfig::parse(r#"{"alfa": 1}"#).is_err());
    }

    #[test]
    fn checks() {
        assert!(check_tolerance("tol", 0.0).is_err());
        assert!(check_cap(0.5).is_err());
        assert_eq!(check_cap(1.0).unwrap(), 1.0);
    }
}
