//! The eigenfunction expansion `H_t = sum_n exp(-t |n + lambda/2|) P_n(theta) P_n(phi)`,
//! differentiated term by term.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::{self, JacobiParams};

use super::Deriv;

/// Hard cap on the number of retained terms.
pub const SERIES_CAP: usize = 100_000;

/// Relative size of the neglected tail, measured against the leading term scale.
const TAIL_TOL: f64 = 1e-17;

/// Exponent of the crude polynomial bound on the `n`-th term.
fn growth_exponent(params: &JacobiParams, deriv: Deriv) -> f64 {
    2.0 * (params.lambda() + 1.0) + 3.0 * (deriv.theta + deriv.phi) as f64 + deriv.t as f64 + 1.0
}

/// Smallest `N` with `n^p exp(-t n) <= tol` for all `n >= N`.
pub fn truncation_index(params: &JacobiParams, t: f64, deriv: Deriv) -> Result<usize> {
    if !(t > 0.0) {
        return Err(Error::Domain { name: "t", value: t });
    }
    let p = growth_exponent(params, deriv);
    let ln_tol = TAIL_TOL.ln() - params.mu_total().ln().max(0.0);
    let ok = |n: f64| p * n.ln() - t * n <= ln_tol;
    // past the maximum of n^p e^{-tn}
    let mut lo = (p / t).max(1.0);
    if ok(lo) {
        return Ok(lo.ceil() as usize + 1);
    }
    let mut hi = 2.0 * lo;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    while hi - lo > 1.0 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let n = hi.ceil() as usize + 1;
    if n > SERIES_CAP {
        return Err(Error::Truncation { needed: n, cap: SERIES_CAP });
    }
    Ok(n)
}

/// Cached `theta`- and `phi`-derivative sweeps for repeated series evaluation at one point.
#[derive(Debug, Clone)]
pub struct SeriesSweep {
    eigen: Vec<f64>,
    theta_table: Vec<Vec<f64>>,
    phi_table: Vec<Vec<f64>>,
    params: JacobiParams,
}

impl SeriesSweep {
    /// Sweeps of length `n_terms` with derivative orders up to `theta_order`, `phi_order`.
    pub fn new(params: &JacobiParams, theta: f64, phi: f64, n_terms: usize, theta_order: u32, phi_order: u32) -> Result<Self> {
        let n_max = n_terms.max(1) - 1;
        let theta_table = jacobi::deriv_sweep(params, theta, n_max, theta_order)?;
        let phi_table = jacobi::deriv_sweep(params, phi, n_max, phi_order)?;
        let eigen = (0..=n_max).map(|n| params.eigen_root(n)).collect();
        Ok(Self { eigen, theta_table, phi_table, params: *params })
    }

    pub fn len(&self) -> usize {
        self.eigen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigen.is_empty()
    }

    /// `d_t^M d_theta^N d_phi^L H_t` using the first `n_terms` terms.
    pub fn eval_terms(&self, t: f64, deriv: Deriv, n_terms: usize) -> f64 {
        let a = &self.theta_table[deriv.theta as usize];
        let b = &self.phi_table[deriv.phi as usize];
        let m = deriv.t as i32;
        let n = n_terms.min(self.eigen.len());
        let mut acc = 0.0;
        for k in (0..n).rev() {
            let e = self.eigen[k];
            let mut term = (-t * e).exp() * a[k] * b[k];
            if m > 0 {
                term *= (-e).powi(m);
            }
            acc += term;
        }
        acc
    }

    /// Several derivatives at once, each with its own truncation, sharing the exponentials.
    pub fn eval_many(&self, t: f64, derivs: &[Deriv], out: &mut [f64]) -> Result<()> {
        let mut counts = Vec::with_capacity(derivs.len());
        for d in derivs {
            let n = truncation_index(&self.params, t, *d)?;
            if n > self.eigen.len() {
                return Err(Error::Truncation { needed: n, cap: self.eigen.len() });
            }
            counts.push(n);
        }
        let n_all = counts.iter().copied().max().unwrap_or(0);
        out.iter_mut().for_each(|x| *x = 0.0);
        for k in (0..n_all).rev() {
            let e = self.eigen[k];
            let decay = (-t * e).exp();
            for (i, d) in derivs.iter().enumerate() {
                if k < counts[i] {
                    let mut term = decay * self.theta_table[d.theta as usize][k] * self.phi_table[d.phi as usize][k];
                    if d.t > 0 {
                        term *= (-e).powi(d.t as i32);
                    }
                    out[i] += term;
                }
            }
        }
        Ok(())
    }

    /// As [`Self::eval_terms`] with the truncation chosen for `t`.
    pub fn eval(&self, t: f64, deriv: Deriv) -> Result<f64> {
        let n = truncation_index(&self.params, t, deriv)?;
        if n > self.eigen.len() {
            return Err(Error::Truncation { needed: n, cap: self.eigen.len() });
        }
        Ok(self.eval_terms(t, deriv, n))
    }
}

/// `H_t` (not the auxiliary kernel) and its derivatives from the eigenfunction series.
pub fn kernel_series(params: &JacobiParams, t: f64, theta: f64, phi: f64, deriv: Deriv) -> Result<f64> {
    let n = truncation_index(params, t, deriv)?;
    let sweep = SeriesSweep::new(params, theta, phi, n, deriv.theta, deriv.phi)?;
    Ok(sweep.eval_terms(t, deriv, n))
}
