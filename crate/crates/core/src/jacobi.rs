//! Jacobi trigonometric polynomials `P_n^{alpha,beta}(theta)`, orthonormal in `L^2(dmu)` with
//! `dmu(theta) = (sin theta/2)^{2 alpha + 1} (cos theta/2)^{2 beta + 1} dtheta` on `[0, pi]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::{self, Rule};
use crate::special;

/// Highest `theta`-derivative order served by [`trig_poly_deriv`] and the derivative sweeps.
pub const MAX_THETA_ORDER: u32 = 4;

/// Validated type parameters `alpha, beta > -1` with `lambda = alpha + beta + 1` and the
/// normalizing constant `c_ab`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
    lambda: f64,
    c_ab: f64,
    mu_total: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        if !(beta > -1.0) || !beta.is_finite() {
            return Err(Error::BetaOutOfRange(beta));
        }
        let lambda = alpha + beta + 1.0;
        let mu_total = special::beta(alpha + 1.0, beta + 1.0);
        let c_ab = 1.0 / (lambda.exp2() * mu_total);
        Ok(Self { alpha, beta, lambda, c_ab, mu_total })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `alpha + beta + 1`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `Gamma(alpha+beta+2) / (2^{alpha+beta+1} Gamma(alpha+1) Gamma(beta+1))`.
    pub fn c_ab(&self) -> f64 {
        self.c_ab
    }

    /// `mu([0, pi]) = B(alpha+1, beta+1)`.
    pub fn mu_total(&self) -> f64 {
        self.mu_total
    }

    /// `|n + lambda/2|`, the square root of the `n`-th eigenvalue of the Jacobi operator.
    pub fn eigen_root(&self, n: usize) -> f64 {
        (n as f64 + 0.5 * self.lambda).abs()
    }

    /// Parameters `(alpha + j, beta + j)`, the family met when differentiating in `theta`.
    pub fn shifted(&self, j: u32) -> Self {
        Self::new(self.alpha + j as f64, self.beta + j as f64).expect("shift keeps parameters admissible")
    }
}

/// Normalizing constants `h_n` for `n <= n_max`: `P_n(theta) = P_n^{(alpha,beta)}(cos theta) / h_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    params: JacobiParams,
    n_max: usize,
    norm_constants: Vec<f64>,
}

impl OrthonormalBasis {
    pub fn new(params: JacobiParams, n_max: usize) -> Self {
        let (a, b, l) = (params.alpha, params.beta, params.lambda);
        let norm_constants = (0..=n_max)
            .map(|n| {
                if n == 0 {
                    return params.mu_total.sqrt();
                }
                let nf = n as f64;
                let ln_h2 = special::ln_gamma(nf + a + 1.0) + special::ln_gamma(nf + b + 1.0)
                    - (2.0 * nf + l).ln()
                    - special::ln_gamma(nf + l)
                    - special::ln_gamma(nf + 1.0);
                (0.5 * ln_h2).exp()
            })
            .collect();
        Self { params, n_max, norm_constants }
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn norm_constants(&self) -> &[f64] {
        &self.norm_constants
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::Index { n, n_max: self.n_max });
        }
        Ok(())
    }
}

/// Gauss rule against `dmu` on `[0, pi]`, nodes ascending in `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaQuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Highest degree in `cos theta` integrated exactly.
    pub degree: usize,
}

impl ThetaQuadRule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Classical Jacobi polynomial `P_n^{(alpha,beta)}(x)` by forward recurrence.
pub fn classical_jacobi_eval(params: &JacobiParams, n: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain { name: "x", value: x });
    }
    let (a, b) = (params.alpha, params.beta);
    if n == 0 {
        return Ok(1.0);
    }
    let mut p_prev = 1.0;
    let mut p = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c1 = 2.0 * k * (k + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let next = (c2 * p - c3 * p_prev) / c1;
        p_prev = p;
        p = next;
    }
    Ok(p)
}

/// Values `P_0(theta), ..., P_{n_max}(theta)` of the `L^2(dmu)`-orthonormal family, by the
/// orthonormal three-term recurrence (stable for large `n`).
pub fn orthonormal_sweep(params: &JacobiParams, theta: f64, n_max: usize) -> Vec<f64> {
    let (diag, off) = quad::jacobi_matrix(n_max + 1, params.alpha, params.beta);
    let x = theta.cos();
    let mut out = Vec::with_capacity(n_max + 1);
    let mut p_prev = 0.0;
    let mut p = 1.0 / params.mu_total.sqrt();
    out.push(p);
    for k in 0..n_max {
        let next = ((x - diag[k]) * p - off[k] * p_prev) / off[k + 1];
        p_prev = p;
        p = next;
        out.push(p);
    }
    out
}

/// `theta`-derivatives of all orthonormal polynomials up to degree `n_max` at one point.
///
/// `table[k][n] = d^k/dtheta^k P_n(theta)` for `k <= order`. Built from the lowering identity
/// `d/dtheta P_n^{a,b} = -(1/2) sqrt(n (n + a + b + 1)) sin(theta) P_{n-1}^{a+1,b+1}` and
/// Leibniz' rule.
pub fn deriv_sweep(params: &JacobiParams, theta: f64, n_max: usize, order: u32) -> Result<Vec<Vec<f64>>> {
    if order > MAX_THETA_ORDER {
        return Err(Error::UnsupportedOrder { what: "theta derivative", order, max: MAX_THETA_ORDER });
    }
    let kmax = order as usize;
    let sin_d: Vec<f64> = (0..=kmax).map(|i| (theta + i as f64 * 0.5 * PI).sin()).collect();
    // tables[j][k][n] = D^k P_n^{(alpha+j, beta+j)}, only j + k <= kmax needed
    let mut tables: Vec<Vec<Vec<f64>>> = (0..=kmax)
        .map(|j| {
            let mut v = vec![Vec::new(); kmax - j + 1];
            v[0] = orthonormal_sweep(&params.shifted(j as u32), theta, n_max);
            v
        })
        .collect();
    for k in 1..=kmax {
        for j in (0..=kmax - k).rev() {
            let lam = params.lambda + 2.0 * j as f64;
            let mut row = vec![0.0; n_max + 1];
            for n in 1..=n_max {
                let nf = n as f64;
                let c = -0.5 * (nf * (nf + lam)).sqrt();
                let mut acc = 0.0;
                let mut binom = 1.0;
                for i in 0..k {
                    acc += binom * sin_d[i] * tables[j + 1][k - 1 - i][n - 1];
                    binom = binom * (k - 1 - i) as f64 / (i + 1) as f64;
                }
                row[n] = c * acc;
            }
            tables[j][k] = row;
        }
    }
    Ok(core::mem::take(&mut tables[0]))
}

pub fn trig_poly_eval(basis: &OrthonormalBasis, n: usize, theta: f64) -> Result<f64> {
    basis.check(n)?;
    Ok(classical_jacobi_eval(&basis.params, n, theta.cos())? / basis.norm_constants[n])
}

/// `d^order/dtheta^order P_n(theta)` for `order <= 4`.
pub fn trig_poly_deriv(basis: &OrthonormalBasis, n: usize, theta: f64, order: u32) -> Result<f64> {
    basis.check(n)?;
    if order == 0 {
        return trig_poly_eval(basis, n, theta);
    }
    let table = deriv_sweep(&basis.params, theta, n, order)?;
    Ok(table[order as usize][n])
}

pub fn mu_density(params: &JacobiParams, theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    let c = (0.5 * theta).cos();
    s.powf(2.0 * params.alpha + 1.0) * c.powf(2.0 * params.beta + 1.0)
}

pub fn mu_total(params: &JacobiParams) -> f64 {
    params.mu_total
}

/// `int_0^y s^a (1-s)^b ds` for `y <= 1/2`, via a Gauss-Jacobi rule in `s / y`.
fn lower_incomplete_beta(a: f64, b: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let rule = quad::gauss_jacobi(24, 0.0, a).expect("Gauss-Jacobi rule for admissible exponents");
    // s = y (1 + x) / 2, weight (1 + x)^a
    let scale = y.powf(a + 1.0) * 0.5.powf(a + 1.0);
    scale * rule.integrate(|x| (1.0 - 0.5 * y * (1.0 + x)).powf(b))
}

/// `mu([0, x])` for `x in [0, pi]`: the regularized-free incomplete Beta integral at `sin^2(x/2)`.
fn mu_cdf(params: &JacobiParams, x: f64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    let y = (0.5 * x).sin().powi(2);
    if y <= 0.5 {
        lower_incomplete_beta(a, b, y)
    } else {
        let yc = (0.5 * x).cos().powi(2);
        params.mu_total - lower_incomplete_beta(b, a, yc)
    }
}

/// `mu((theta - r, theta + r) ∩ [0, pi])`.
pub fn mu_ball(params: &JacobiParams, theta: f64, r: f64) -> f64 {
    let lo = (theta - r).max(0.0);
    let hi = (theta + r).min(PI);
    if !(hi > lo) {
        return 0.0;
    }
    let len = hi - lo;
    if lo > len && PI - hi > len {
        // Short interior interval: the density is smooth there.
        let rule = quad::gauss_legendre(24).mapped(lo, hi);
        return rule.integrate(|t| mu_density(params, t));
    }
    (mu_cdf(params, hi) - mu_cdf(params, lo)).max(0.0)
}

/// Two-sided comparator for the ball measure:
/// `|theta - phi| (theta + phi)^{2 alpha + 1} (2 pi - theta - phi)^{2 beta + 1}`.
pub fn ball_surrogate(params: &JacobiParams, theta: f64, phi: f64) -> f64 {
    (theta - phi).abs()
        * (theta + phi).powf(2.0 * params.alpha + 1.0)
        * (2.0 * PI - theta - phi).powf(2.0 * params.beta + 1.0)
}

/// Gauss-Jacobi rule in `x = cos theta`, rescaled to integrate against `dmu`.
pub fn theta_quad_rule(params: &JacobiParams, n_nodes: usize) -> Result<ThetaQuadRule> {
    if n_nodes == 0 {
        return Err(Error::Invalid("quadrature needs at least one node".into()));
    }
    let Rule { nodes, weights } = quad::gauss_jacobi(n_nodes, params.alpha, params.beta)?;
    let scale = (-params.lambda).exp2();
    // ascending x is descending theta
    let thetas = nodes.iter().rev().map(|&x| x.acos()).collect();
    let w = weights.iter().rev().map(|&w| w * scale).collect();
    Ok(ThetaQuadRule { nodes: thetas, weights: w, degree: 2 * n_nodes - 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_inadmissible_parameters() {
        assert_eq!(JacobiParams::new(-1.5, 0.0), Err(Error::AlphaOutOfRange(-1.5)));
        assert!(JacobiParams::new(0.0, -1.0).is_err());
        assert!(JacobiParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn c_ab_normalization() {
        for &(a, b) in &[(0.5, 0.5), (-0.75, 0.5), (-0.9, -0.6), (2.0, -0.25)] {
            let q = p(a, b);
            let got = q.c_ab() * q.lambda().exp2() * q.mu_total();
            assert!((got - 1.0).abs() < 1e-14);
        }
        assert!((p(-0.5, -0.5).c_ab() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_reduction() {
        let basis = OrthonormalBasis::new(p(-0.5, -0.5), 5);
        let t = PI / 5.0;
        assert!((trig_poly_eval(&basis, 0, t).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
        let want = (2.0 / PI).sqrt() * (3.0 * t).cos();
        assert!((trig_poly_eval(&basis, 3, t).unwrap() - want).abs() < 1e-14);
        let sweep = orthonormal_sweep(basis.params(), t, 5);
        assert!((sweep[3] - want).abs() < 1e-14);
        let d = trig_poly_deriv(&basis, 2, PI / 3.0, 1).unwrap();
        assert!((d + 2.0 * (2.0 / PI).sqrt() * (2.0 * PI / 3.0).sin()).abs() < 1e-14);
        // fourth derivative of sqrt(2/pi) cos(5 theta)
        let basis = OrthonormalBasis::new(p(-0.5, -0.5), 5);
        let d4 = trig_poly_deriv(&basis, 5, 0.4, 4).unwrap();
        assert!((d4 - 625.0 * (2.0 / PI).sqrt() * 2.0f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn orders_above_four_rejected() {
        let basis = OrthonormalBasis::new(p(0.0, 0.0), 3);
        assert!(matches!(trig_poly_deriv(&basis, 2, 1.0, 5), Err(Error::UnsupportedOrder { .. })));
        assert!(matches!(trig_poly_eval(&basis, 4, 1.0), Err(Error::Index { n: 4, n_max: 3 })));
        assert_eq!(trig_poly_deriv(&basis, 0, 1.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn small_classical_values() {
        assert_eq!(classical_jacobi_eval(&p(0.0, 0.0), 1, 0.5).unwrap(), 0.5);
        assert_eq!(classical_jacobi_eval(&p(0.3, 0.1), 0, 0.2).unwrap(), 1.0);
        assert!(classical_jacobi_eval(&p(0.3, 0.1), 2, 1.2).is_err());
    }

    #[test]
    fn densities_and_totals() {
        assert!((mu_density(&p(-0.5, -0.5), 1.0) - 1.0).abs() < 1e-15);
        assert!((mu_density(&p(0.0, 0.0), PI / 2.0) - 0.5).abs() < 1e-15);
        assert!((mu_total(&p(-0.5, -0.5)) - PI).abs() < 1e-14);
        assert!((mu_total(&p(0.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ball_measure_cases() {
        let q = p(0.0, 0.0);
        assert_eq!(mu_ball(&q, 1.0, 0.0), 0.0);
        assert!((mu_ball(&q, PI / 2.0, PI) - 1.0).abs() < 1e-14);
        assert!((mu_ball(&q, PI / 2.0, 0.1) - 0.1f64.sin()).abs() < 1e-14);
        let q = p(-0.8, 1.5);
        assert!((mu_ball(&q, 1.0, 4.0) - q.mu_total()).abs() < 1e-13);
    }

    #[test]
    fn theta_rule_total_mass() {
        let rule = theta_quad_rule(&p(-0.5, -0.5), 8).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - PI).abs() < 1e-13);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rule.degree, 15);
    }
}
