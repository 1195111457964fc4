//! Spectral application of the semigroup, Riesz transforms, square functions and multipliers
//! to finite Fourier-Jacobi expansions `f = sum_n c_n P_n`.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cz::MultiplierSpec;
use crate::error::{Error, Result};
use crate::jacobi::{self, JacobiParams, OrthonormalBasis};
use crate::special;

/// Coefficients of an expansion; complex coefficients only arise from complex multipliers.
#[derive(Debug, Clone, PartialEq)]
pub enum Coeffs {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Coeffs {
    pub fn len(&self) -> usize {
        match self {
            Coeffs::Real(c) => c.len(),
            Coeffs::Complex(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, n: usize) -> Complex64 {
        match self {
            Coeffs::Real(c) => Complex64::new(c[n], 0.0),
            Coeffs::Complex(c) => c[n],
        }
    }
}

/// `sum_{n <= n_max} c_n P_n` for one parameter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    basis: OrthonormalBasis,
    coeffs: Coeffs,
}

fn check_coeffs<T>(c: &[T], finite: impl Fn(&T) -> bool) -> Result<()> {
    if c.is_empty() {
        return Err(Error::Invalid("an expansion needs at least one coefficient".into()));
    }
    if let Some(n) = c.iter().position(|x| !finite(x)) {
        return Err(Error::Invalid(alloc::format!("coefficient {n} is not finite")));
    }
    Ok(())
}

impl Expansion {
    pub fn new(params: JacobiParams, coeffs: Vec<f64>) -> Result<Self> {
        check_coeffs(&coeffs, |x| x.is_finite())?;
        Ok(Self { basis: OrthonormalBasis::new(params, coeffs.len() - 1), coeffs: Coeffs::Real(coeffs) })
    }

    pub fn new_complex(params: JacobiParams, coeffs: Vec<Complex64>) -> Result<Self> {
        check_coeffs(&coeffs, |x| x.is_finite())?;
        Ok(Self { basis: OrthonormalBasis::new(params, coeffs.len() - 1), coeffs: Coeffs::Complex(coeffs) })
    }

    /// The basis vector `e_n` in an expansion of length `n_max + 1`.
    pub fn unit(params: JacobiParams, n_max: usize, n: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::Index { n, n_max });
        }
        let mut c = alloc::vec![0.0; n_max + 1];
        c[n] = 1.0;
        Self::new(params, c)
    }

    pub fn params(&self) -> &JacobiParams {
        self.basis.params()
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn n_max(&self) -> usize {
        self.basis.n_max()
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    /// The real coefficients, or `None` for a complex expansion.
    pub fn real_coeffs(&self) -> Option<&[f64]> {
        match &self.coeffs {
            Coeffs::Real(c) => Some(c),
            Coeffs::Complex(_) => None,
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self.coeffs, Coeffs::Real(_))
    }

    /// `sum_n |c_n|^2`, the squared `L^2(dmu)` norm.
    pub fn norm_sq(&self) -> f64 {
        match &self.coeffs {
            Coeffs::Real(c) => c.iter().map(|x| x * x).sum(),
            Coeffs::Complex(c) => c.iter().map(|x| x.norm_sqr()).sum(),
        }
    }

    /// `f(theta)` for a real expansion.
    pub fn synthesize(&self, theta: f64) -> Result<f64> {
        match &self.coeffs {
            Coeffs::Real(c) => {
                check_theta(theta)?;
                let p = jacobi::orthonormal_sweep(self.params(), theta, self.n_max());
                Ok(c.iter().zip(&p).map(|(a, b)| a * b).sum())
            }
            Coeffs::Complex(_) => Err(Error::KindMismatch("real synthesis of a complex expansion")),
        }
    }

    /// `f(theta)` for any expansion.
    pub fn synthesize_complex(&self, theta: f64) -> Result<Complex64> {
        check_theta(theta)?;
        let p = jacobi::orthonormal_sweep(self.params(), theta, self.n_max());
        Ok((0..=self.n_max()).map(|n| self.coeffs.get(n) * p[n]).sum())
    }

    fn scaled(&self, factor: impl Fn(usize) -> f64) -> Self {
        let coeffs = match &self.coeffs {
            Coeffs::Real(c) => Coeffs::Real(c.iter().enumerate().map(|(n, x)| x * factor(n)).collect()),
            Coeffs::Complex(c) => Coeffs::Complex(c.iter().enumerate().map(|(n, x)| x * factor(n)).collect()),
        };
        Self { basis: self.basis.clone(), coeffs }
    }

    /// `c_n -> exp(-t |n + lambda/2|) c_n`.
    pub fn semigroup_apply(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain { name: "t", value: t });
        }
        let p = *self.params();
        Ok(self.scaled(|n| (-t * p.eigen_root(n)).exp()))
    }

    /// `R_N f = sum_{n >= 1} |n + lambda/2|^{-N} c_n d^N P_n`, as a pointwise evaluator.
    pub fn riesz_apply(&self, order: u32) -> Result<DerivativeSeries> {
        if !(1..=2).contains(&order) {
            return Err(Error::UnsupportedOrder { what: "Riesz transform", order, max: 2 });
        }
        let p = *self.params();
        let weights = (0..=self.n_max())
            .map(|n| if n == 0 { Complex64::new(0.0, 0.0) } else { self.coeffs.get(n) * p.eigen_root(n).powi(-(order as i32)) })
            .collect();
        Ok(DerivativeSeries { params: p, order, weights, real: self.is_real() })
    }

    /// `g_{M,N}(f)(theta) = (int_0^inf |d_theta^N d_t^M e^{-t sqrt(J)} f(theta)|^2 t^{2M+2N-1} dt)^{1/2}`
    /// at each point, with the `t`-integrals of the cross terms in closed form:
    /// `int_0^inf exp(-t (a_n + a_m)) t^{K-1} dt = Gamma(K) / (a_n + a_m)^K`, `K = 2M + 2N`.
    pub fn g_function(&self, m: u32, n: u32, thetas: &[f64]) -> Result<Vec<f64>> {
        if !(1..=2).contains(&(m + n)) {
            return Err(Error::UnsupportedOrder { what: "square function (M + N)", order: m + n, max: 2 });
        }
        let p = *self.params();
        let k = 2 * (m + n);
        let gamma_k = special::gamma(k as f64);
        let a: Vec<f64> = (0..=self.n_max()).map(|j| p.eigen_root(j)).collect();
        let mut out = Vec::with_capacity(thetas.len());
        for &theta in thetas {
            check_theta(theta)?;
            let table = jacobi::deriv_sweep(&p, theta, self.n_max(), n)?;
            let d: Vec<Complex64> = (0..=self.n_max())
                .map(|j| self.coeffs.get(j) * (-a[j]).powi(m as i32) * table[n as usize][j])
                .collect();
            let mut acc = 0.0;
            for i in 0..d.len() {
                if d[i] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d.len() {
                    if d[j] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    acc += (d[i] * d[j].conj()).re * gamma_k / (a[i] + a[j]).powi(k as i32);
                }
            }
            out.push(acc.max(0.0).sqrt());
        }
        Ok(out)
    }

    /// `c_n -> m(|n + lambda/2|) c_n`. For Laplace-type multipliers `m(0) := 0`; when
    /// `lambda = 0` the bottom mode is therefore dropped and flagged.
    pub fn multiplier_apply(&self, spec: &MultiplierSpec) -> Result<MultiplierOutput> {
        let p = *self.params();
        let mult: Vec<Complex64> = (0..=self.n_max()).map(|n| spec.multiplier(p.eigen_root(n))).collect::<Result<_>>()?;
        let dropped_mode = matches!(spec, MultiplierSpec::Laplace(_)) && p.eigen_root(0) == 0.0;
        let real_multiplier = mult.iter().all(|z| z.im == 0.0);
        let coeffs = match (&self.coeffs, real_multiplier) {
            (Coeffs::Real(c), true) => Coeffs::Real(c.iter().zip(&mult).map(|(x, z)| x * z.re).collect()),
            _ => Coeffs::Complex((0..=self.n_max()).map(|n| self.coeffs.get(n) * mult[n]).collect()),
        };
        Ok(MultiplierOutput { expansion: Self { basis: self.basis.clone(), coeffs }, dropped_mode })
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=core::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain { name: "theta", value: theta });
    }
    Ok(())
}

/// Coefficients `c_n = int f P_n dmu` for `n <= n_max` by the Gauss rule with `n_nodes` nodes
/// (`n_nodes > n_max` makes the rule exact on the span of `P_0, ..., P_{n_max}`).
pub fn analyze<F: FnMut(f64) -> f64>(params: JacobiParams, n_max: usize, n_nodes: usize, mut f: F) -> Result<Expansion> {
    if n_nodes <= n_max {
        return Err(Error::Invalid(alloc::format!("{n_nodes} nodes cannot resolve degree {n_max}")));
    }
    let rule = jacobi::theta_quad_rule(&params, n_nodes)?;
    let mut c = alloc::vec![0.0; n_max + 1];
    for (&theta, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = w * f(theta);
        let p = jacobi::orthonormal_sweep(&params, theta, n_max);
        for (cn, pn) in c.iter_mut().zip(&p) {
            *cn += v * pn;
        }
    }
    Expansion::new(params, c)
}

/// Default number of nodes for [`analyze`].
pub fn default_nodes(n_max: usize) -> usize {
    (2 * n_max + 2).max(64)
}

/// `theta -> sum_n w_n d^N P_n(theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSeries {
    params: JacobiParams,
    order: u32,
    weights: Vec<Complex64>,
    real: bool,
}

impl DerivativeSeries {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn eval_complex(&self, theta: f64) -> Result<Complex64> {
        check_theta(theta)?;
        let table = jacobi::deriv_sweep(&self.params, theta, self.weights.len() - 1, self.order)?;
        Ok(self.weights.iter().zip(&table[self.order as usize]).map(|(w, d)| w * d).sum())
    }

    /// Value for a real input expansion.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        if !self.real {
            return Err(Error::KindMismatch("real evaluation of a complex transform"));
        }
        Ok(self.eval_complex(theta)?.re)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierOutput {
    pub expansion: Expansion,
    /// The zero eigenvalue was present and its mode set to zero.
    pub dropped_mode: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cz::{LaplaceProfile, StieltjesMeasure};
    use core::f64::consts::PI;

    fn cheb() -> JacobiParams {
        JacobiParams::new(-0.5, -0.5).unwrap()
    }

    #[test]
    fn analysis_examples() {
        let p = JacobiParams::new(0.5, -0.75).unwrap();
        let e = analyze(p, 6, 64, |th| jacobi::orthonormal_sweep(&p, th, 3)[3]).unwrap();
        for (n, c) in e.real_coeffs().unwrap().iter().enumerate() {
            assert!((c - if n == 3 { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
        let e = analyze(p, 4, 64, |_| 1.0).unwrap();
        assert!((e.real_coeffs().unwrap()[0] - p.mu_total().sqrt()).abs() < 1e-12);
        let e = analyze(cheb(), 5, 64, |th| (2.0 * th).cos()).unwrap();
        let c = e.real_coeffs().unwrap();
        assert!((c[2] - (PI / 2.0).sqrt()).abs() < 1e-12);
        assert!(c.iter().enumerate().all(|(n, x)| n == 2 || x.abs() < 1e-12));
        assert!((e.synthesize(0.3).unwrap() - 0.6f64.cos()).abs() < 1e-12);
        assert!(analyze(p, 4, 4, |_| 1.0).is_err());
    }

    #[test]
    fn semigroup_and_riesz_examples() {
        let p = JacobiParams::new(0.2, 0.7).unwrap();
        let e = Expansion::new(p, alloc::vec![0.5, -1.0, 2.0, 0.25]).unwrap();
        assert_eq!(e.semigroup_apply(0.0).unwrap(), e);
        let a = e.semigroup_apply(0.3).unwrap().semigroup_apply(0.7).unwrap();
        let b = e.semigroup_apply(1.0).unwrap();
        for (x, y) in a.real_coeffs().unwrap().iter().zip(b.real_coeffs().unwrap()) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * y.abs());
        }
        let r = Expansion::unit(p, 3, 0).unwrap().riesz_apply(1).unwrap();
        assert_eq!(r.eval(1.0).unwrap(), 0.0);
        let r = Expansion::unit(cheb(), 3, 1).unwrap().riesz_apply(1).unwrap();
        assert!((r.eval(0.5).unwrap() + (2.0 / PI).sqrt() * 0.5f64.sin()).abs() < 1e-14);
        assert!(e.riesz_apply(3).is_err());
    }

    #[test]
    fn g_function_of_basis_vectors() {
        for (a, b) in [(0.5, 0.5), (-0.5, -0.5), (-0.75, -0.25)] {
            let p = JacobiParams::new(a, b).unwrap();
            let thetas = [0.2, 1.0, 2.9];
            for n in 0..=5 {
                let g = Expansion::unit(p, 5, n).unwrap().g_function(1, 0, &thetas).unwrap();
                for (th, v) in thetas.iter().zip(&g) {
                    let want = if p.eigen_root(n) == 0.0 { 0.0 } else { 0.5 * jacobi::orthonormal_sweep(&p, *th, n)[n].abs() };
                    assert!((v - want).abs() < 1e-12, "{a} {b} {n} {th}");
                }
            }
        }
    }

    #[test]
    fn multipliers() {
        let p = JacobiParams::new(0.0, 0.0).unwrap();
        let e = Expansion::new(p, alloc::vec![1.0, 2.0, -3.0]).unwrap();
        let out = e.multiplier_apply(&MultiplierSpec::Laplace(LaplaceProfile::Constant(1.0))).unwrap();
        assert!(!out.dropped_mode);
        for (x, y) in out.expansion.real_coeffs().unwrap().iter().zip(e.real_coeffs().unwrap()) {
            assert!((x - y).abs() < 1e-14);
        }
        let nu = StieltjesMeasure::new(alloc::vec![(1.0, 0.8)]).unwrap();
        let out = e.multiplier_apply(&MultiplierSpec::Stieltjes(nu)).unwrap();
        assert_eq!(out.expansion, e.semigroup_apply(0.8).unwrap());

        let p = JacobiParams::new(0.5, -0.5).unwrap();
        let e = Expansion::unit(p, 2, 1).unwrap();
        let out = e.multiplier_apply(&MultiplierSpec::Laplace(LaplaceProfile::ImaginaryPower { gamma: 0.5 })).unwrap();
        let c = out.expansion.coeffs().get(1);
        assert!((c - Complex64::from_polar(1.0, 0.5 * 1.5f64.ln())).norm() < 1e-12);
        assert!(out.expansion.synthesize(1.0).is_err());

        let p = JacobiParams::new(-0.5, -0.5).unwrap();
        let e = Expansion::new(p, alloc::vec![1.0, 1.0]).unwrap();
        let out = e.multiplier_apply(&MultiplierSpec::Laplace(LaplaceProfile::Constant(1.0))).unwrap();
        assert!(out.dropped_mode);
        assert_eq!(out.expansion.real_coeffs().unwrap()[0], 0.0);
    }
}
