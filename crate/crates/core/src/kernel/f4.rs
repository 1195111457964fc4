//! The auxiliary kernel through Appell's `F4`:
//! `H_t = c_ab sinh(t/2) / cosh(t/2)^{lambda+1} F4((lambda+1)/2, (lambda+2)/2; alpha+1, beta+1; x, y)`
//! with `x = (sin(theta/2) sin(phi/2) / cosh(t/2))^2`, `y = (cos(theta/2) cos(phi/2) / cosh(t/2))^2`.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;

/// Largest `sqrt(x) + sqrt(y)` accepted; beyond it the double series needs too many terms.
pub const F4_RHO_MAX: f64 = 1.0 - 5e-4;

const F4_TOL: f64 = 1e-16;

/// `sqrt(x) + sqrt(y) = cos((theta - phi)/2) / cosh(t/2)`.
pub fn f4_rho(t: f64, theta: f64, phi: f64) -> f64 {
    (0.5 * (theta - phi)).cos().abs() / (0.5 * t).cosh()
}

/// `F4(a, b; c1, c2; x, y)` for nonnegative arguments with `sqrt(x) + sqrt(y) < 1` and positive
/// parameters; all terms are positive.
pub fn appell_f4(a: f64, b: f64, c1: f64, c2: f64, x: f64, y: f64) -> Result<f64> {
    // sum rows in the smaller variable
    let (c1, c2, x, y) = if x <= y { (c1, c2, x, y) } else { (c2, c1, y, x) };
    let rho = x.sqrt() + y.sqrt();
    if !(rho < 1.0) {
        return Err(Error::SlowConvergence { rho });
    }
    let r_limit = x / (1.0 - y.sqrt()).powi(2);
    // rows are `x^m` times a Gauss series that grows like `(1 - sqrt(y))^{-2m}`; both factors
    // leave the floating-point range long before the product does, so the row prefactor is kept
    // as a logarithm and the inner sum is rescaled on the fly
    let ln_x = x.ln();
    let mut ln_start = 0.0;
    let mut total = 0.0;
    let mut prev_row = f64::INFINITY;
    let mut m = 0usize;
    loop {
        let mf = m as f64;
        let mut term = 1.0;
        let mut row = 0.0;
        let mut ln_scale = ln_start;
        let mut n = 0usize;
        loop {
            row += term;
            let nf = n as f64;
            let ratio = (a + mf + nf) * (b + mf + nf) / ((c2 + nf) * (nf + 1.0)) * y;
            term *= ratio;
            if term > 1e200 {
                term *= 1e-200;
                row *= 1e-200;
                ln_scale += 200.0 * core::f64::consts::LN_10;
            }
            let r = ratio.max(y);
            if r < 1.0 && term <= F4_TOL * (1.0 - r) * (total * (-ln_scale).exp() + row) {
                break;
            }
            if term == 0.0 {
                break;
            }
            n += 1;
            if n > 50_000_000 {
                return Err(Error::SlowConvergence { rho });
            }
        }
        let row = row * ln_scale.exp();
        total += row;
        if x == 0.0 {
            break;
        }
        // row sums grow towards the ratio x / (1 - sqrt(y))^2 from below
        let r = (row / prev_row).max(r_limit);
        if m > 2 && r < 1.0 && row * r <= F4_TOL * (1.0 - r) * total {
            break;
        }
        prev_row = row;
        ln_start += ((a + mf) * (b + mf) / ((c1 + mf) * (mf + 1.0))).ln() + ln_x;
        m += 1;
    }
    Ok(total)
}

/// The auxiliary kernel `H_t` (unsigned exponent) by the `F4` closed form.
pub fn h_script_f4(params: &JacobiParams, t: f64, theta: f64, phi: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain { name: "t", value: t });
    }
    let rho = f4_rho(t, theta, phi);
    if rho > F4_RHO_MAX {
        return Err(Error::SlowConvergence { rho });
    }
    let ch = (0.5 * t).cosh();
    let x = ((0.5 * theta).sin() * (0.5 * phi).sin() / ch).powi(2);
    let y = ((0.5 * theta).cos() * (0.5 * phi).cos() / ch).powi(2);
    let lam = params.lambda();
    let f4 = appell_f4(0.5 * (lam + 1.0), 0.5 * (lam + 2.0), params.alpha() + 1.0, params.beta() + 1.0, x, y)?;
    Ok(params.c_ab() * (0.5 * t).sinh() * ch.powf(-(lam + 1.0)) * f4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_variable_reduces_to_gauss() {
        // F4(a,b;c,c';0,y) = 2F1(a,b;c';y); with a = c' it is (1-y)^{-b}
        let got = appell_f4(1.5, 0.7, 2.0, 1.5, 0.0, 0.6).unwrap();
        assert!((got - 0.4f64.powf(-0.7)).abs() < 1e-13 * got);
        let got = appell_f4(1.5, 0.7, 1.5, 2.0, 0.6, 0.0).unwrap();
        assert!((got - 0.4f64.powf(-0.7)).abs() < 1e-13 * got);
    }

    #[test]
    fn zero_arguments() {
        assert_eq!(appell_f4(1.0, 2.0, 0.5, 0.5, 0.0, 0.0).unwrap(), 1.0);
        assert!(appell_f4(1.0, 2.0, 0.5, 0.5, 0.3, 0.3).is_err());
    }
}
