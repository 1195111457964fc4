use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("alpha must exceed -1 (got {0})")]
    AlphaOutOfRange(f64),
    #[error("beta must exceed -1 (got {0})")]
    BetaOutOfRange(f64),
    #[error("argument {name} = {value} outside its domain")]
    Domain { name: &'static str, value: f64 },
    #[error("polynomial index {n} exceeds basis size {n_max}")]
    Index { n: usize, n_max: usize },
    #[error("derivative order {order} not supported by {what} (max {max})")]
    UnsupportedOrder {
        what: &'static str,
        order: u32,
        max: u32,
    },
    #[error("Gauss-Jacobi node {index} did not converge")]
    NodeConvergence { index: usize },
    #[error("Pi_alpha has a pole at alpha = -1/2")]
    Pole,
    #[error("measure kind mismatch: {0}")]
    KindMismatch(&'static str),
    #[error("series truncation needs {needed} terms (cap {cap})")]
    Truncation { needed: usize, cap: usize },
    #[error("F4 series converges too slowly (rho = {rho})")]
    SlowConvergence { rho: f64 },
    #[error("quadrature did not converge in {method}: {sub_integral} (estimate {estimate}, change {change})")]
    Quadrature {
        method: &'static str,
        sub_integral: &'static str,
        estimate: f64,
        change: f64,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
}
