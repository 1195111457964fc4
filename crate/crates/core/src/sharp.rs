//! Two-sided estimates of the kernel by elementary comparators, and scans of the ratios.
//!
//! For `0 < t <= 1` the kernel is comparable with
//! `(t^2 + theta^2 + phi^2)^{-alpha-1/2} (t^2 + (pi-theta)^2 + (pi-phi)^2)^{-beta-1/2} t / (t^2 + (theta-phi)^2)`,
//! for `t >= 1` with `exp(-t |lambda| / 2)` (and `exp(-t lambda / 2)` for the auxiliary kernel).

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::kernel::{Kernel, KernelQuery};
use crate::report::{CapRule, EstimateReport, EstimateRow};

/// Kernel whose comparator is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// The Jacobi-Poisson kernel `H_t`.
    H,
    /// The auxiliary kernel with unsigned exponent.
    Script,
}

/// Both regimes of the comparator at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparatorValue {
    pub z_short: f64,
    pub z_long_h: f64,
    pub z_long_script: f64,
}

impl ComparatorValue {
    pub fn new(params: &JacobiParams, t: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain { name: "t", value: t });
        }
        let (a, b, lam) = (params.alpha(), params.beta(), params.lambda());
        let t2 = t * t;
        let near0 = t2 + theta * theta + phi * phi;
        let near_pi = t2 + (PI - theta).powi(2) + (PI - phi).powi(2);
        let z_short = near0.powf(-a - 0.5) * near_pi.powf(-b - 0.5) * t / (t2 + (theta - phi).powi(2));
        Ok(Self { z_short, z_long_h: (-0.5 * t * lam.abs()).exp(), z_long_script: (-0.5 * t * lam).exp() })
    }

    /// The comparator in force at `t`: short-time for `t <= 1`, long-time beyond.
    pub fn at(&self, t: f64, which: Which) -> f64 {
        match (t <= 1.0, which) {
            (true, _) => self.z_short,
            (false, Which::H) => self.z_long_h,
            (false, Which::Script) => self.z_long_script,
        }
    }
}

pub fn comparator(params: &JacobiParams, t: f64, theta: f64, phi: f64, which: Which) -> Result<f64> {
    Ok(ComparatorValue::new(params, t, theta, phi)?.at(t, which))
}

/// Default cap on `max / min` of the ratios.
pub const SHARP_CAP: f64 = 50.0;

/// Kernel value and ratio to the comparator at one point. At `t = 1` the second entry is the
/// ratio to the long-time comparator.
pub fn ratio_point(kernel: &Kernel, t: f64, theta: f64, phi: f64, which: Which) -> Result<(EstimateRow, Option<f64>)> {
    let q = KernelQuery::new(t, theta, phi);
    let value = match which {
        Which::H => kernel.eval(&q)?,
        Which::Script => kernel.eval_script(&q)?,
    };
    let c = ComparatorValue::new(kernel.params(), t, theta, phi)?;
    let bound = c.at(t, which);
    let long = if t == 1.0 { Some(value / c.at(1.0 + f64::EPSILON, which)) } else { None };
    Ok((EstimateRow { t: Some(t), theta, phi, norm: value, bound, ratio: value / bound }, long))
}

/// Assembles a ratio report from evaluated points (in grid order).
pub fn ratio_report(points: Vec<(EstimateRow, Option<f64>)>, which: Which, cap: f64) -> EstimateReport {
    let long: Vec<f64> = points.iter().filter_map(|p| p.1).collect();
    let rows = points.into_iter().map(|p| p.0).collect();
    let name = match which {
        Which::H => "sharp",
        Which::Script => "sharp-auxiliary",
    };
    let mut report = EstimateReport::new(name, CapRule::Spread, cap, rows);
    if !long.is_empty() {
        let lo = long.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = long.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        report = report.with_extra("t1_long_ratio_min", lo).with_extra("t1_long_ratio_max", hi);
    }
    report
}

/// Ratio of the kernel to its comparator over the product grid (points in `t`-major order);
/// passes when `max / min <= cap`.
pub fn ratio_scan(kernel: &Kernel, t_grid: &[f64], theta_grid: &[f64], phi_grid: &[f64], which: Which, cap: f64) -> Result<EstimateReport> {
    let mut points = Vec::with_capacity(t_grid.len() * theta_grid.len() * phi_grid.len());
    for &t in t_grid {
        for &th in theta_grid {
            for &ph in phi_grid {
                points.push(ratio_point(kernel, t, th, ph, which)?);
            }
        }
    }
    Ok(ratio_report(points, which, cap))
}

/// Log-linear fit of `|exp(t |lambda| / 2) H_t - 2^lambda c_ab|` against `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LongTimeFit {
    /// `-slope` of the fitted line.
    pub rate: f64,
    pub intercept: f64,
    /// `min(alpha + beta + 2, 1)`, the decay rate of the first nonconstant mode.
    pub predicted_rate: f64,
    /// Required rate: `(1 - tolerance) * predicted_rate / 2`.
    pub required_rate: f64,
    pub pass: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Fits the decay at `(theta, phi)` over `t_grid`; passes when the fitted rate is at least
/// `(1 - tolerance)` times half the predicted rate.
pub fn long_time_fit(kernel: &Kernel, theta: f64, phi: f64, t_grid: &[f64], tolerance: f64) -> Result<LongTimeFit> {
    if t_grid.len() < 2 {
        return Err(Error::Invalid(String::from("long-time fit needs at least two t values")));
    }
    let p = kernel.params();
    let lam = p.lambda();
    let limit = lam.exp2() * p.c_ab();
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let h = kernel.eval(&KernelQuery::new(t, theta, phi))?;
        let dev = ((0.5 * t * lam.abs()).exp() * h - limit).abs();
        if !(dev > 0.0) {
            return Err(Error::Invalid(String::from("deviation vanished; choose another point")));
        }
        samples.push((t, dev.ln()));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let predicted_rate = (p.alpha() + p.beta() + 2.0).min(1.0);
    let required_rate = (1.0 - tolerance) * 0.5 * predicted_rate;
    Ok(LongTimeFit {
        rate: -slope,
        intercept: my - slope * mx,
        predicted_rate,
        required_rate,
        pass: -slope >= required_rate,
        samples: samples.into_iter().map(|(t, l)| (t, l.exp())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::closed_form_chebyshev;

    #[test]
    fn comparator_examples() {
        let p = JacobiParams::new(0.3, 1.2).unwrap();
        let z = comparator(&p, 1.0, PI / 2.0, PI / 2.0, Which::H).unwrap();
        let e = (1.0 + PI * PI / 2.0).powf(-0.8) * (1.0 + PI * PI / 2.0).powf(-1.7);
        assert!((z - e).abs() < 1e-15 * e);
        let lam = p.lambda();
        assert_eq!(comparator(&p, 5.0, 1.0, 2.0, Which::H).unwrap(), (-2.5 * lam).exp());
        assert_eq!(comparator(&p, 5.0, 1.0, 2.0, Which::Script).unwrap(), (-2.5 * lam).exp());
        let p = JacobiParams::new(-0.75, -0.75).unwrap();
        assert!((comparator(&p, 10.0, 1.0, 2.0, Which::H).unwrap() - (-2.5f64).exp()).abs() < 1e-15);
        assert!((comparator(&p, 10.0, 1.0, 2.0, Which::Script).unwrap() - 2.5f64.exp()).abs() < 1e-12);
        let c = ComparatorValue::new(&p, 3.0, 0.0, 1.0).unwrap();
        assert!(c.z_long_h <= c.z_long_script);
    }

    #[test]
    fn single_point_scan() {
        let p = JacobiParams::new(-0.5, -0.5).unwrap();
        let k = Kernel::new(&p).unwrap();
        let r = ratio_scan(&k, &[0.5], &[0.0], &[PI], Which::H, SHARP_CAP).unwrap();
        assert_eq!(r.rows.len(), 1);
        let z = comparator(&p, 0.5, 0.0, PI, Which::H).unwrap();
        assert!((r.rows[0].ratio - closed_form_chebyshev(0.5, 0.0, PI) / z).abs() < 1e-12 * r.rows[0].ratio);
        assert!(r.pass());
    }

    #[test]
    fn chebyshev_long_time_ratio_tends_to_one_over_pi() {
        let p = JacobiParams::new(-0.5, -0.5).unwrap();
        let k = Kernel::new(&p).unwrap();
        let r = ratio_scan(&k, &[5.0, 10.0, 20.0], &[1.0], &[2.0], Which::H, SHARP_CAP).unwrap();
        assert!((r.rows[2].ratio - 1.0 / PI).abs() < 1e-8);
        let fit = long_time_fit(&k, 1.0, 2.0, &[5.0, 8.0, 11.0, 14.0, 17.0, 20.0], 0.2).unwrap();
        assert!((fit.rate - 1.0).abs() < 1e-3, "{}", fit.rate);
        assert!(fit.pass);
    }

    #[test]
    fn t1_records_both_regimes() {
        let p = JacobiParams::new(0.5, 0.0).unwrap();
        let k = Kernel::new(&p).unwrap();
        let r = ratio_scan(&k, &[0.5, 1.0], &[1.0], &[1.5], Which::H, SHARP_CAP).unwrap();
        assert!(r.extra("t1_long_ratio_min").is_some());
        let r = ratio_scan(&k, &[0.5], &[1.0], &[1.5], Which::Script, SHARP_CAP).unwrap();
        assert!(r.extra("t1_long_ratio_min").is_none());
        assert_eq!(r.name, "sharp-auxiliary");
        assert!(ratio_scan(&k, &[], &[1.0], &[1.0], Which::H, SHARP_CAP).map(|r| !r.pass()).unwrap());
    }
}
