//! `H_t(theta, phi)` and its derivatives as functions of `t` at a fixed off-diagonal point.
//!
//! The kernels of the maximal operator, Riesz transforms, square functions and Laplace-type
//! multipliers are norms or integrals over `t in (0, inf)` of `d_t^M d_theta^N d_phi^L H_t`.
//! A [`TProfile`] stores these derivatives on composite Gauss-Legendre panels:
//!
//! * `[0, t0]` with `t0 = min(SERIES_FROM, |theta - phi| / 2)`, by the integral representation.
//!   As a function of complex `t` the kernel is analytic except on the imaginary axis from
//!   `±i |theta - phi|` outwards, so the node count follows from the Bernstein ellipse;
//! * geometric panels up to [`SERIES_FROM`], again by the integral representation;
//! * geometric panels up to `t_end`, by the eigenfunction series, where `t_end` makes the
//!   slowest mode negligible.
//!
//! Between nodes the profile is evaluated by barycentric interpolation.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::kernel::{jph_correction, Deriv, Kernel, SeriesSweep};
use crate::quad;

/// Number of stored derivative orders.
pub const NORD: usize = 15;

/// Every `(M, N, L)` with `M + N + L <= 3` and `L <= 1`, except `(3, 0, 0)`.
pub const PROFILE_ORDERS: [Deriv; NORD] = [
    Deriv::new(0, 0, 0),
    Deriv::new(0, 1, 0),
    Deriv::new(0, 0, 1),
    Deriv::new(0, 2, 0),
    Deriv::new(0, 1, 1),
    Deriv::new(0, 3, 0),
    Deriv::new(0, 2, 1),
    Deriv::new(1, 0, 0),
    Deriv::new(1, 1, 0),
    Deriv::new(1, 0, 1),
    Deriv::new(1, 2, 0),
    Deriv::new(1, 1, 1),
    Deriv::new(2, 0, 0),
    Deriv::new(2, 1, 0),
    Deriv::new(2, 0, 1),
];

/// Position of `d` in [`PROFILE_ORDERS`].
pub fn order_index(d: Deriv) -> Option<usize> {
    PROFILE_ORDERS.iter().position(|x| *x == d)
}

/// Below this `t` the integral representation is used, above it the series.
pub const SERIES_FROM: f64 = 0.05;
/// Largest `t` considered.
pub const T_END_MAX: f64 = 1e8;
const PANEL_NODES: usize = 16;
/// `-ln` of the relative size at which the slowest mode is dropped.
const DECAY_LOG: f64 = 45.0;

/// Panel boundaries of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    /// Boundaries `0 = b_0 < b_1 < ... < b_k = t_end`.
    pub breaks: Vec<f64>,
    /// Node count of the first panel.
    pub first_nodes: usize,
}

fn bernstein_rho(a: f64, b: f64, d: f64) -> f64 {
    let z = (Complex64::new(-(a + b), 2.0 * d)) / (b - a);
    let w = (z * z - 1.0).sqrt();
    (z + w).norm().max((z - w).norm())
}

fn geometric(a: f64, b: f64, out: &mut Vec<f64>) {
    let k = ((b / a).log2().ceil() as usize).max(1);
    for j in 1..=k {
        out.push(if j == k { b } else { a * (b / a).powf(j as f64 / k as f64) });
    }
}

impl Layout {
    /// Layout for a point at distance `distance = |theta - phi| > 0`, reaching at least `t_max`.
    pub fn new(params: &JacobiParams, distance: f64, t_max: f64) -> Result<Self> {
        if !(distance > 0.0) {
            return Err(Error::Domain { name: "|theta - phi|", value: distance });
        }
        let lam = params.lambda();
        let slowest = if lam != 0.0 { 0.5 * lam.abs() } else { (1.0 + 0.5 * lam).abs() };
        let t_end = (DECAY_LOG / slowest).clamp(64.0, T_END_MAX).max(t_max);
        let t0 = SERIES_FROM.min(0.5 * distance);
        let rho = bernstein_rho(0.0, t0, distance);
        // interpolation error decays like rho^{-n} (quadrature like rho^{-2n})
        let first_nodes = ((16.0 * core::f64::consts::LN_10 / rho.ln()).ceil() as usize + 1).clamp(8, 40);
        let mut breaks = vec![0.0, t0];
        if t0 < SERIES_FROM {
            geometric(t0, SERIES_FROM, &mut breaks);
        }
        geometric(SERIES_FROM, t_end, &mut breaks);
        Ok(Self { breaks, first_nodes })
    }

    pub fn t_end(&self) -> f64 {
        *self.breaks.last().expect("nonempty layout")
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Panel {
    a: f64,
    b: f64,
    t: Vec<f64>,
    w: Vec<f64>,
    /// barycentric weights of the nodes
    bary: Vec<f64>,
    values: Vec<[f64; NORD]>,
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let mut w: Vec<f64> = (0..x.len())
        .map(|j| 1.0 / (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product::<f64>())
        .collect();
    let m = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    w.iter_mut().for_each(|v| *v /= m);
    w
}

impl Panel {
    fn interpolate(&self, t: f64, out: &mut [f64; NORD]) {
        let mut den = 0.0;
        let mut num = [0.0; NORD];
        for j in 0..self.t.len() {
            let dx = t - self.t[j];
            if dx == 0.0 {
                *out = self.values[j];
                return;
            }
            let c = self.bary[j] / dx;
            den += c;
            for o in 0..NORD {
                num[o] += c * self.values[j][o];
            }
        }
        for o in 0..NORD {
            out[o] = num[o] / den;
        }
    }
}

/// All [`PROFILE_ORDERS`] of `H_t(theta, phi)` along a [`Layout`].
#[derive(Debug, Clone, PartialEq)]
pub struct TProfile {
    theta: f64,
    phi: f64,
    panels: Vec<Panel>,
}

impl TProfile {
    pub fn build(kernel: &Kernel, theta: f64, phi: f64, layout: &Layout) -> Result<Self> {
        let params = kernel.params();
        let ctx = kernel.integral();
        let breaks = &layout.breaks;
        let first = quad::gauss_legendre(layout.first_nodes);
        let rest = quad::gauss_legendre(PANEL_NODES);
        let bary_first = barycentric_weights(&first.nodes);
        let bary_rest = barycentric_weights(&rest.nodes);
        let series_start = breaks.iter().position(|&b| b >= SERIES_FROM).unwrap_or(breaks.len() - 1);
        let n_terms = PROFILE_ORDERS
            .iter()
            .map(|d| crate::kernel::truncation_index(params, breaks[series_start], *d))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(1);
        let sweep = SeriesSweep::new(params, theta, phi, n_terms, 3, 1)?;
        let mut panels = Vec::with_capacity(breaks.len() - 1);
        let mut verified = false;
        for k in 0..breaks.len() - 1 {
            let (a, b) = (breaks[k], breaks[k + 1]);
            let (rule, bary) = if k == 0 { (&first, &bary_first) } else { (&rest, &bary_rest) };
            let mapped = rule.mapped(a, b);
            let mut values = Vec::with_capacity(mapped.len());
            for (j, &t) in mapped.nodes.iter().enumerate() {
                let mut v = [0.0; NORD];
                if b <= SERIES_FROM * (1.0 + 1e-12) {
                    let check = !verified && k == 0 && j == mapped.len() / 2;
                    verified |= check;
                    let s = ctx.h_script(t, theta, phi, &PROFILE_ORDERS, check)?;
                    for o in 0..NORD {
                        let d = PROFILE_ORDERS[o];
                        v[o] = s[o] + if d.theta + d.phi == 0 { jph_correction(params, t, d.t) } else { 0.0 };
                    }
                } else {
                    sweep.eval_many(t, &PROFILE_ORDERS, &mut v)?;
                }
                values.push(v);
            }
            panels.push(Panel { a, b, t: mapped.nodes, w: mapped.weights, bary: bary.clone(), values });
        }
        Ok(Self { theta, phi, panels })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn t_end(&self) -> f64 {
        self.panels.last().map_or(0.0, |p| p.b)
    }

    fn panel_of(&self, t: f64) -> &Panel {
        let k = self.panels.partition_point(|p| p.b < t);
        &self.panels[k.min(self.panels.len() - 1)]
    }

    /// All orders at `t in [0, t_end]`.
    pub fn values_at(&self, t: f64) -> [f64; NORD] {
        let mut out = [0.0; NORD];
        self.panel_of(t).interpolate(t, &mut out);
        out
    }

    pub fn value(&self, order: usize, t: f64) -> f64 {
        self.values_at(t)[order]
    }

    /// `int_0^{t_end} f(t, values(t)) dt` on the native nodes.
    pub fn integrate<F: FnMut(f64, &[f64; NORD]) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for p in &self.panels {
            for j in 0..p.t.len() {
                acc += p.w[j] * f(p.t[j], &p.values[j]);
            }
        }
        acc
    }

    /// `int_0^{t_end} weight(t) values(t)[order] dt` for a piecewise smooth weight with jumps
    /// at `breakpoints`. With `grade_at_zero` the first panel is subdivided dyadically toward
    /// `t = 0` (for weights such as `t^{-i gamma}`).
    pub fn integrate_weighted<W: Fn(f64) -> Complex64>(&self, weight: W, order: usize, breakpoints: &[f64], grade_at_zero: bool) -> Complex64 {
        let rule = quad::gauss_legendre(PANEL_NODES);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut buf = [0.0; NORD];
        for (k, p) in self.panels.iter().enumerate() {
            let mut cuts = vec![p.a];
            if k == 0 && grade_at_zero {
                let mut x = p.b * 1e-18;
                while x < 0.5 * p.b {
                    cuts.push(x);
                    x *= 2.0;
                }
            }
            cuts.extend(breakpoints.iter().copied().filter(|&x| x > p.a && x < p.b));
            cuts.push(p.b);
            cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite cut points"));
            if cuts.len() == 2 {
                for j in 0..p.t.len() {
                    acc += weight(p.t[j]) * (p.w[j] * p.values[j][order]);
                }
                continue;
            }
            for c in cuts.windows(2) {
                if k == 0 && grade_at_zero && c[0] == 0.0 {
                    // |int_0^eps| <= eps sup|values|, below double precision of the total
                    continue;
                }
                if c[1] <= c[0] {
                    continue;
                }
                let m = rule.mapped(c[0], c[1]);
                for j in 0..m.len() {
                    p.interpolate(m.nodes[j], &mut buf);
                    acc += weight(m.nodes[j]) * (m.weights[j] * buf[order]);
                }
            }
        }
        acc
    }

    /// `sup |values(t)[order]|` over a logarithmic grid in `[t_lo, t_hi]` with `per_decade`
    /// points per decade, then refined by golden-section search around the largest grid value.
    /// Returns `(grid maximum, refined maximum, argmax)`.
    pub fn sup_abs(&self, order: usize, t_lo: f64, t_hi: f64, per_decade: usize) -> (f64, f64, f64) {
        let t_hi = t_hi.min(self.t_end());
        let n = (((t_hi / t_lo).log10() * per_decade as f64).ceil() as usize).max(1);
        let step = (t_hi / t_lo).ln() / n as f64;
        let f = |t: f64| self.value(order, t).abs();
        let mut best = (f64::NEG_INFINITY, 0usize);
        for i in 0..=n {
            let v = f(t_lo * (step * i as f64).exp());
            if v > best.0 {
                best = (v, i);
            }
        }
        let grid_max = best.0;
        let lo_i = best.1.saturating_sub(1);
        let hi_i = (best.1 + 1).min(n);
        let (mut a, mut b) = (step * lo_i as f64, step * hi_i as f64);
        let g = |s: f64| f(t_lo * s.exp());
        let r = 0.5 * (5.0f64.sqrt() - 1.0);
        let mut x1 = b - r * (b - a);
        let mut x2 = a + r * (b - a);
        let (mut f1, mut f2) = (g(x1), g(x2));
        for _ in 0..80 {
            if (b - a) <= 1e-13 * (1.0 + a.abs()) {
                break;
            }
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = g(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = g(x1);
            }
        }
        let (s_best, v_best) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
        if v_best > grid_max {
            (grid_max, v_best, t_lo * s_best.exp())
        } else {
            (grid_max, grid_max, t_lo * (step * best.1 as f64).exp())
        }
    }

    /// `self - other` node by node; both profiles must share one layout.
    pub fn difference(&self, other: &TProfile) -> Result<TProfile> {
        if self.panels.len() != other.panels.len()
            || self.panels.iter().zip(&other.panels).any(|(p, q)| p.a != q.a || p.b != q.b || p.t.len() != q.t.len())
        {
            return Err(Error::KindMismatch("profiles on different layouts"));
        }
        let mut out = self.clone();
        for (p, q) in out.panels.iter_mut().zip(&other.panels) {
            for (v, w) in p.values.iter_mut().zip(&q.values) {
                for o in 0..NORD {
                    v[o] -= w[o];
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{closed_form_chebyshev, KernelQuery, Method};

    #[test]
    fn order_table() {
        assert_eq!(order_index(Deriv::ZERO), Some(0));
        assert_eq!(order_index(Deriv::new(3, 0, 0)), None);
        for (i, d) in PROFILE_ORDERS.iter().enumerate() {
            assert!(d.total() <= 3 && d.phi <= 1);
            assert_eq!(order_index(*d), Some(i));
        }
    }

    #[test]
    fn layout_panels() {
        let p = JacobiParams::new(0.5, 0.5).unwrap();
        let l = Layout::new(&p, 1.0, 0.0).unwrap();
        assert_eq!(l.breaks[1], SERIES_FROM);
        assert!(l.t_end() >= 64.0);
        for w in l.breaks.windows(2) {
            assert!(w[1] > w[0] && w[1] <= 2.0 * w[0] * (1.0 + 1e-12) || w[0] == 0.0);
        }
        let l = Layout::new(&p, 0.01, 200.0).unwrap();
        assert_eq!(l.breaks[1], 0.005);
        assert_eq!(l.t_end(), 200.0);
        assert!(Layout::new(&p, 0.0, 0.0).is_err());
    }

    #[test]
    fn chebyshev_profile_interpolates() {
        let p = JacobiParams::new(-0.5, -0.5).unwrap();
        let k = Kernel::new(&p).unwrap();
        let (th, ph) = (1.0, 1.3);
        let prof = TProfile::build(&k, th, ph, &Layout::new(&p, 0.3, 0.0).unwrap()).unwrap();
        for &t in &[1e-4, 0.003, 0.02, 0.07, 0.3, 2.0, 30.0] {
            let exact = closed_form_chebyshev(t, th, ph);
            assert!((prof.value(0, t) - exact).abs() < 1e-12 * (1.0 + exact.abs()), "t={t}: {} vs {exact}", prof.value(0, t));
        }
        // int_0^inf d_t H dt = H_inf - H_0+ = 1/pi off the diagonal
        let total = prof.integrate(|_, v| v[7]);
        assert!((total - 1.0 / core::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn profile_matches_pointwise_kernel() {
        for &(a, b) in &[(-0.75, 0.5), (-0.9, -0.9)] {
            let p = JacobiParams::new(a, b).unwrap();
            let k = Kernel::new(&p).unwrap();
            let (th, ph) = (0.7, 2.0);
            let prof = TProfile::build(&k, th, ph, &Layout::new(&p, 1.3, 0.0).unwrap()).unwrap();
            for &t in &[0.01, 0.04, 0.3, 3.0] {
                let v = prof.values_at(t);
                for (o, d) in PROFILE_ORDERS.iter().enumerate() {
                    let m = if t < SERIES_FROM { Method::Integral } else { Method::Series };
                    let q = KernelQuery::new(t, th, ph).with_deriv(*d).with_method(m);
                    let e = k.eval(&q).unwrap();
                    assert!((v[o] - e).abs() < 1e-9 * (1.0 + e.abs()), "{a} {b} t={t} {d:?}: {} vs {e}", v[o]);
                }
            }
        }
    }

    #[test]
    fn weighted_integration_with_breakpoints() {
        let p = JacobiParams::new(0.0, 0.0).unwrap();
        let k = Kernel::new(&p).unwrap();
        let prof = TProfile::build(&k, 0.4, 1.9, &Layout::new(&p, 1.5, 0.0).unwrap()).unwrap();
        // int_a^b d_t H = H_b - H_a
        let (a, b) = (0.13, 2.7);
        let w = |t: f64| Complex64::new(if t > a && t < b { 1.0 } else { 0.0 }, 0.0);
        let got = prof.integrate_weighted(w, 7, &[a, b], true).re;
        let expect = prof.value(0, b) - prof.value(0, a);
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn sup_and_difference() {
        let p = JacobiParams::new(-0.5, -0.5).unwrap();
        let k = Kernel::new(&p).unwrap();
        let l = Layout::new(&p, 0.5, 0.0).unwrap();
        let prof = TProfile::build(&k, 1.0, 2.0, &l).unwrap();
        let (grid, refined, arg) = prof.sup_abs(0, 1e-4, 50.0, 64);
        assert!(refined >= grid && refined < grid * 1.001);
        assert!((closed_form_chebyshev(arg, 1.0, 2.0) - refined).abs() < 1e-12);
        let other = TProfile::build(&k, 1.1, 2.0, &l).unwrap();
        let d = prof.difference(&other).unwrap();
        let t = 0.8;
        let e = closed_form_chebyshev(t, 1.0, 2.0) - closed_form_chebyshev(t, 1.1, 2.0);
        assert!((d.value(0, t) - e).abs() < 1e-13);
        let l2 = Layout::new(&p, 0.05, 0.0).unwrap();
        let far = TProfile::build(&k, 1.0, 1.05, &l2).unwrap();
        assert!(prof.difference(&far).is_err());
    }
}
