//! The measures `dPi_alpha` on `[-1, 1]`.
//!
//! For `alpha > -1/2`, `dPi_alpha(u) = C_alpha (1 - u^2)^{alpha - 1/2} du` is a probability
//! measure; at `alpha = -1/2` it degenerates to two atoms of mass `1/2` at `±1`; below `-1/2`
//! the density is not integrable and integrals are taken against the profile `|Pi_alpha(u)| du`
//! of the odd primitive `Pi_alpha(u) = C_alpha int_0^u (1 - w^2)^{alpha - 1/2} dw`.
//!
//! Node sets carry `1 - u` next to `u`, so integrands that peak at `u = 1` never see the
//! cancellation of forming `1 - u` themselves.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, Rule};
use crate::special;

/// Nodes per panel of the composite rules.
pub const PANEL_NODES: usize = 16;
/// Ratio between consecutive panels of a geometrically graded mesh.
pub const GRADE_RATIO: f64 = 0.2;
/// Deepest refinement level of the graded families.
pub const MAX_LEVEL: usize = 26;

const DEFAULT_NODES: usize = 64;
const MAX_NODES: usize = 2048;
const DOUBLING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    /// `alpha > -1/2`: probability density.
    Density,
    /// `alpha = -1/2`: atoms of mass `1/2` at `±1`.
    Atomic,
    /// `alpha < -1/2`: integrals against `|Pi_alpha(u)| du`.
    Profile,
}

impl MeasureKind {
    pub fn of(alpha: f64) -> Self {
        if alpha > -0.5 {
            MeasureKind::Density
        } else if alpha == -0.5 {
            MeasureKind::Atomic
        } else {
            MeasureKind::Profile
        }
    }
}

/// Quadrature nodes on `[-1, 1]` with the complements `1 - u` stored separately.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeSet {
    pub u: Vec<f64>,
    pub cu: Vec<f64>,
    pub w: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    fn push(&mut self, u: f64, cu: f64, w: f64) {
        self.u.push(u);
        self.cu.push(cu);
        self.w.push(w);
    }

    /// The two half-atoms of `dPi_{-1/2}`.
    pub fn atomic() -> Self {
        NodeSet { u: alloc::vec![-1.0, 1.0], cu: alloc::vec![2.0, 0.0], w: alloc::vec![0.5, 0.5] }
    }

    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.len() {
            acc += self.w[i] * f(self.u[i], self.cu[i]);
        }
        acc
    }
}

/// A measure `dPi_alpha` together with its working quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PiMeasure {
    pub alpha: f64,
    pub kind: MeasureKind,
    /// Density: Gauss-Jacobi rule; Atomic: the two atoms; Profile: composite rule for `|Pi_alpha| du`.
    pub rule: NodeSet,
}

impl PiMeasure {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let kind = MeasureKind::of(alpha);
        let rule = match kind {
            MeasureKind::Density => density_rule(alpha, DEFAULT_NODES)?,
            MeasureKind::Atomic => NodeSet::atomic(),
            MeasureKind::Profile => profile_rule(alpha, PANEL_NODES)?,
        };
        Ok(Self { alpha, kind, rule })
    }
}

/// `C_alpha = Gamma(alpha + 1) / (sqrt(pi) Gamma(alpha + 1/2))`; zero at `alpha = -1/2`,
/// negative on `(-1, -1/2)`.
pub fn c_alpha(alpha: f64) -> f64 {
    special::gamma(alpha + 1.0) * special::rgamma(alpha + 0.5) / PI.sqrt()
}

/// Continued tail integral: `int_u^1 (1 - w^2)^{alpha - 1/2} dw = (1 - u)^{alpha + 1/2} J(u)`
/// with `J` analytic in `alpha != -1/2`, computed with a Gauss-Jacobi rule for `x^{alpha + 1/2}`.
struct TailIntegral {
    se: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TailIntegral {
    fn new(alpha: f64) -> Result<Self> {
        let se = alpha - 0.5;
        let (nodes, weights) = unit_jacobi(20, se + 1.0)?;
        Ok(Self { se, nodes, weights })
    }

    /// `J` at `1 - u = c`.
    fn eval(&self, c: f64) -> f64 {
        let se = self.se;
        let g0 = 2.0f64.powf(se);
        // int_0^1 x^se (g(x) - g(0)) dx with g(x) = (2 - c x)^se, written against x^{se+1}
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let diff = g0 * (se * (-0.5 * c * x).ln_1p()).exp_m1();
            acc += w * diff / x;
        }
        acc + g0 / (se + 1.0)
    }
}

/// Gauss-Jacobi rule on `[0, 1]` for the weight `x^e`.
fn unit_jacobi(n: usize, e: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let Rule { nodes, weights } = quad::gauss_jacobi(n, 0.0, e)?;
    let scale = 0.5f64.powf(e + 1.0);
    Ok((
        nodes.iter().map(|&x| 0.5 * (1.0 + x)).collect(),
        weights.iter().map(|&w| w * scale).collect(),
    ))
}

/// `Pi_alpha(u)`, the odd primitive of the `dPi_alpha` density; negative for `u > 0` when
/// `alpha < -1/2`.
pub fn pi_cdf(alpha: f64, u: f64) -> Result<f64> {
    if alpha == -0.5 {
        return Err(Error::Pole);
    }
    if !(alpha > -1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if !(u.abs() < 1.0) {
        return Err(Error::Domain { name: "u", value: u });
    }
    let tail = TailIntegral::new(alpha)?;
    Ok(PiCdf { alpha, c: c_alpha(alpha), tail, gl: quad::gauss_legendre(20) }.eval(u, 1.0 - u.abs()))
}

/// `|Pi_alpha(u)|`.
pub fn pi_profile(alpha: f64, u: f64) -> Result<f64> {
    pi_cdf(alpha, u).map(f64::abs)
}

/// Ratio `|Pi_alpha(u)| / (|u| (1 - |u|)^{alpha + 1/2})`, bounded above and below on `(-1, 1)`
/// when `alpha < -1/2`.
pub fn profile_comparability(alpha: f64, u: f64) -> Result<f64> {
    let p = pi_profile(alpha, u)?;
    Ok(p / (u.abs() * (1.0 - u.abs()).powf(alpha + 0.5)))
}

/// Evaluator of `Pi_alpha` with its auxiliary rules built once.
struct PiCdf {
    alpha: f64,
    c: f64,
    tail: TailIntegral,
    gl: Rule,
}

impl PiCdf {
    fn new(alpha: f64) -> Result<Self> {
        Ok(Self { alpha, c: c_alpha(alpha), tail: TailIntegral::new(alpha)?, gl: quad::gauss_legendre(20) })
    }

    /// `Pi_alpha(u)` given `s = 1 - |u|` accurately.
    fn eval(&self, u: f64, s: f64) -> f64 {
        let se = self.alpha - 0.5;
        let a = u.abs();
        let v = if a <= 0.5 {
            let half = 0.5 * a;
            self.c * half * self.gl.integrate(|x| {
                let w = half * (1.0 + x);
                ((1.0 - w) * (1.0 + w)).powf(se)
            })
        } else {
            0.5 - self.c * s.powf(self.alpha + 0.5) * self.tail.eval(s)
        };
        if u < 0.0 {
            -v
        } else {
            v
        }
    }

    /// `C_alpha J` at `s = 1 - |u|`; for `alpha < -1/2` it is positive and
    /// `|Pi_alpha(u)| = s^{alpha + 1/2} C_alpha J - 1/2`.
    fn singular_factor(&self, s: f64) -> f64 {
        self.c * self.tail.eval(s)
    }
}

/// Gauss-Jacobi rule for `dPi_alpha`, `alpha > -1/2`, on the whole interval.
fn density_rule(alpha: f64, n: usize) -> Result<NodeSet> {
    let e = alpha - 0.5;
    let Rule { nodes, weights } = quad::gauss_jacobi(n, e, e)?;
    let c = c_alpha(alpha);
    let mut set = NodeSet::default();
    for (&x, &w) in nodes.iter().zip(&weights) {
        set.push(x, 1.0 - x, c * w);
    }
    Ok(set)
}

/// Geometry of a side of `[-1, 1]` measured by `s = 1 - |u|`.
#[derive(Clone, Copy)]
enum Side {
    Plus,
    Minus,
}

impl Side {
    fn node(self, s: f64) -> (f64, f64) {
        match self {
            Side::Plus => (1.0 - s, s),
            Side::Minus => (s - 1.0, 2.0 - s),
        }
    }
}

/// Builder of composite rules for the three weights used by the kernel integrals.
struct Builder {
    alpha: f64,
    c: f64,
    gl: Rule,
    cdf: Option<PiCdf>,
}

/// Which weight a composite rule integrates against.
#[derive(Clone, Copy, PartialEq)]
enum Weight {
    /// `dPi_alpha`, `alpha > -1/2`.
    Density,
    /// `sgn(u) |Pi_alpha(u)| du = -Pi_alpha(u) du`, `alpha < -1/2`.
    SignedProfile,
    /// `|Pi_alpha(u)| du`, `alpha < -1/2`.
    Profile,
    /// `C_alpha (1-u)^{alpha+1/2} (1+u)^{alpha-1/2} du` on `(0, 1]`, any `alpha`.
    HalfReduced,
}

impl Builder {
    fn new(alpha: f64, n: usize, needs_cdf: bool) -> Result<Self> {
        let cdf = if needs_cdf { Some(PiCdf::new(alpha)?) } else { None };
        Ok(Self { alpha, c: c_alpha(alpha), gl: quad::gauss_legendre(n), cdf })
    }

    fn endpoint_exponent(&self, weight: Weight) -> f64 {
        match weight {
            Weight::Density => self.alpha - 0.5,
            _ => self.alpha + 0.5,
        }
    }

    /// Full weight at a node away from the endpoints.
    fn weight_at(&self, weight: Weight, side: Side, s: f64) -> f64 {
        let (u, _) = side.node(s);
        match weight {
            Weight::Density => self.c * (s * (2.0 - s)).powf(self.alpha - 0.5),
            Weight::Profile | Weight::SignedProfile => {
                let p = self.cdf.as_ref().expect("profile builder").eval(u, s);
                if weight == Weight::Profile {
                    p.abs()
                } else {
                    -p
                }
            }
            Weight::HalfReduced => self.c * s.powf(self.alpha + 0.5) * (2.0 - s).powf(self.alpha - 0.5),
        }
    }

    fn sign(weight: Weight, side: Side) -> f64 {
        match (weight, side) {
            (Weight::SignedProfile, Side::Minus) => -1.0,
            _ => 1.0,
        }
    }

    fn interior_panel(&self, set: &mut NodeSet, weight: Weight, side: Side, lo: f64, hi: f64) {
        let half = 0.5 * (hi - lo);
        for (&x, &w) in self.gl.nodes.iter().zip(&self.gl.weights) {
            let s = lo + half * (1.0 + x);
            let (u, cu) = side.node(s);
            set.push(u, cu, half * w * self.weight_at(weight, side, s));
        }
    }

    /// Panel `[0, len]` in `s` touching the endpoint.
    fn endpoint_panel(&self, set: &mut NodeSet, weight: Weight, side: Side, len: f64, gj: &(Vec<f64>, Vec<f64>)) {
        let e = self.endpoint_exponent(weight);
        let scale = len.powf(e + 1.0);
        let sign = Self::sign(weight, side);
        for (&y, &w) in gj.0.iter().zip(&gj.1) {
            let s = len * y;
            let (u, cu) = side.node(s);
            let smooth = match weight {
                Weight::Density => self.c * (2.0 - s).powf(e),
                Weight::Profile | Weight::SignedProfile => {
                    self.cdf.as_ref().expect("profile builder").singular_factor(s).abs()
                }
                Weight::HalfReduced => self.c * (2.0 - s).powf(self.alpha - 0.5),
            };
            set.push(u, cu, sign * scale * w * smooth);
        }
        if matches!(weight, Weight::Profile | Weight::SignedProfile) {
            // the bounded part -1/2 of |Pi_alpha| = s^{alpha+1/2} |C J| - 1/2
            let half = 0.5 * len;
            for (&x, &w) in self.gl.nodes.iter().zip(&self.gl.weights) {
                let s = half * (1.0 + x);
                let (u, cu) = side.node(s);
                set.push(u, cu, -0.5 * sign * half * w);
            }
        }
    }

    /// Rule at refinement `level`: `level` geometric panels between `s = 1/2` and the endpoint
    /// panel `[0, r^level / 2]` on the `u = 1` side, a fixed two-panel split on the other.
    fn build(&self, weight: Weight, level: usize, gj: &(Vec<f64>, Vec<f64>)) -> NodeSet {
        let mut set = NodeSet::default();
        if weight != Weight::HalfReduced {
            self.endpoint_panel(&mut set, weight, Side::Minus, 0.5, gj);
            self.interior_panel(&mut set, weight, Side::Minus, 0.5, 1.0);
        }
        self.interior_panel(&mut set, weight, Side::Plus, 0.5, 1.0);
        let mut hi = 0.5;
        for _ in 0..level {
            let lo = hi * GRADE_RATIO;
            self.interior_panel(&mut set, weight, Side::Plus, lo, hi);
            hi = lo;
        }
        self.endpoint_panel(&mut set, weight, Side::Plus, hi, gj);
        set
    }
}

/// Composite rule for `|Pi_alpha(u)| du`, `alpha < -1/2`.
fn profile_rule(alpha: f64, n: usize) -> Result<NodeSet> {
    if !(alpha > -1.0 && alpha < -0.5) {
        return Err(Error::KindMismatch("profile integrals need -1 < alpha < -1/2"));
    }
    let b = Builder::new(alpha, n, true)?;
    let gj = unit_jacobi(n, alpha + 0.5)?;
    Ok(b.build(Weight::Profile, 0, &gj))
}

/// `int f dPi_alpha` for the density and atomic kinds, doubling the Gauss-Jacobi rule until
/// two successive results agree to `1e-10` relatively.
pub fn pi_integrate<F: Fn(f64) -> f64>(measure: &PiMeasure, f: F) -> Result<f64> {
    match measure.kind {
        MeasureKind::Atomic => Ok(0.5 * (f(-1.0) + f(1.0))),
        MeasureKind::Profile => Err(Error::KindMismatch("pi_integrate needs alpha >= -1/2; use pi_profile_integrate")),
        MeasureKind::Density => {
            let mut prev = measure.rule.integrate(|u, _| f(u));
            let mut n = measure.rule.len();
            let mut change = f64::INFINITY;
            while n < MAX_NODES {
                n *= 2;
                let rule = density_rule(measure.alpha, n)?;
                let next = rule.integrate(|u, _| f(u));
                let scale = rule.integrate(|u, _| f(u).abs());
                change = (next - prev).abs();
                if change <= DOUBLING_TOL * scale {
                    return Ok(next);
                }
                prev = next;
            }
            Err(Error::Quadrature { method: "pi_integrate", sub_integral: "Gauss-Jacobi doubling", estimate: prev, change })
        }
    }
}

/// `int_{-1}^{1} f(u) |Pi_alpha(u)| du` for `-1 < alpha < -1/2`.
pub fn pi_profile_integrate<F: Fn(f64) -> f64>(alpha: f64, f: F) -> Result<f64> {
    let mut n = PANEL_NODES;
    let mut prev = profile_rule(alpha, n)?.integrate(|u, _| f(u));
    let mut change = f64::INFINITY;
    while n < 256 {
        n *= 2;
        let rule = profile_rule(alpha, n)?;
        let next = rule.integrate(|u, _| f(u));
        let scale = rule.integrate(|u, _| f(u).abs());
        change = (next - prev).abs();
        if change <= DOUBLING_TOL * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature { method: "pi_profile_integrate", sub_integral: "composite profile rule", estimate: prev, change })
}

/// Level index for a peak of width `h` (in `1 - u`) at `u = 1`.
pub fn level_for_scale(h: f64) -> usize {
    if !(h < 1.0) {
        return 0;
    }
    if !(h > 0.0) {
        return MAX_LEVEL;
    }
    // endpoint panel length r^level / 2 <= 2 h
    let lvl = ((4.0 * h).ln() / GRADE_RATIO.ln()).ceil();
    (lvl.max(0.0) as usize).min(MAX_LEVEL)
}

/// Composite rules for all refinement levels of one weight, built once per parameter value.
#[derive(Debug, Clone)]
pub struct GradedFamily {
    levels: Vec<NodeSet>,
}

impl GradedFamily {
    fn build(alpha: f64, weight: Weight, n: usize) -> Result<Self> {
        let needs_cdf = matches!(weight, Weight::Profile | Weight::SignedProfile);
        let b = Builder::new(alpha, n, needs_cdf)?;
        let gj = unit_jacobi(n, b.endpoint_exponent(weight))?;
        let levels = (0..=MAX_LEVEL).map(|l| b.build(weight, l, &gj)).collect();
        Ok(Self { levels })
    }

    /// Rules for `dPi_alpha`, `alpha > -1/2`.
    pub fn density(alpha: f64, n: usize) -> Result<Self> {
        Self::build(alpha, Weight::Density, n)
    }

    /// Rules for the signed weight `-Pi_alpha(u) du = sgn(u) |Pi_alpha(u)| du`, `alpha < -1/2`.
    pub fn signed_profile(alpha: f64, n: usize) -> Result<Self> {
        Self::build(alpha, Weight::SignedProfile, n)
    }

    /// Rules on `(0, 1]` for `C_alpha (1-u)^{alpha+1/2} (1+u)^{alpha-1/2} du`, i.e. `dPi_alpha`
    /// applied to integrands divided by `1 - u`.
    pub fn half_reduced(alpha: f64, n: usize) -> Result<Self> {
        Self::build(alpha, Weight::HalfReduced, n)
    }

    pub fn level(&self, level: usize) -> &NodeSet {
        &self.levels[level.min(MAX_LEVEL)]
    }

    pub fn for_scale(&self, h: f64) -> &NodeSet {
        self.level(level_for_scale(h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        assert!((pi_cdf(0.5, 0.8).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(pi_cdf(0.3, 0.0).unwrap(), 0.0);
        assert_eq!(pi_cdf(-0.5, 0.3), Err(Error::Pole));
        assert!(pi_cdf(-0.75, 0.5).unwrap() < 0.0);
        // odd
        let a = pi_cdf(1.3, 0.77).unwrap();
        assert!((a + pi_cdf(1.3, -0.77).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn both_branches_of_cdf_agree_at_the_switch() {
        for &alpha in &[-0.9, -0.6, 0.1, 2.5] {
            let c = PiCdf::new(alpha).unwrap();
            let lo = c.eval(0.5, 0.5);
            let s: f64 = 0.5;
            let hi = 0.5 - c.c * s.powf(alpha + 0.5) * c.tail.eval(s);
            assert!((lo - hi).abs() < 1e-13 * lo.abs().max(1.0), "alpha={alpha}: {lo} vs {hi}");
        }
    }

    #[test]
    fn density_probability_and_atoms() {
        for &alpha in &[-0.49, -0.25, 0.0, 0.5, 2.5] {
            let m = PiMeasure::new(alpha).unwrap();
            assert!((pi_integrate(&m, |_| 1.0).unwrap() - 1.0).abs() < 1e-12, "alpha={alpha}");
        }
        let m = PiMeasure::new(-0.5).unwrap();
        assert_eq!(m.kind, MeasureKind::Atomic);
        assert_eq!(pi_integrate(&m, |u| u * u).unwrap(), 1.0);
        let m = PiMeasure::new(-0.7).unwrap();
        assert!(pi_integrate(&m, |_| 1.0).is_err());
    }

    #[test]
    fn profile_integrals_of_odd_functions_vanish() {
        let v = pi_profile_integrate(-0.75, |u| u).unwrap();
        assert!(v.abs() < 1e-14);
        assert!(pi_profile_integrate(0.2, |_| 1.0).is_err());
    }

    #[test]
    fn graded_rules_reproduce_plain_integrals() {
        let alpha = 0.3;
        let fam = GradedFamily::density(alpha, PANEL_NODES).unwrap();
        let m = PiMeasure::new(alpha).unwrap();
        let want = pi_integrate(&m, |u| (2.0 * u).cos()).unwrap();
        for lvl in [0, 3, 11, MAX_LEVEL] {
            let got = fam.level(lvl).integrate(|u, _| (2.0 * u).cos());
            assert!((got - want).abs() < 1e-13, "level {lvl}");
        }
        let alpha = -0.8;
        let fam = GradedFamily::signed_profile(alpha, PANEL_NODES).unwrap();
        let want = pi_profile_integrate(alpha, |u| u.abs() * (1.0 + u * u)).unwrap();
        for lvl in [0, 5, 20] {
            let got = fam.level(lvl).integrate(|u, _| u * (1.0 + u * u));
            assert!((got - want).abs() < 1e-12, "level {lvl}: {got} vs {want}");
        }
    }

    #[test]
    fn half_reduced_vanishes_at_the_atomic_value() {
        let fam = GradedFamily::half_reduced(-0.5, PANEL_NODES).unwrap();
        assert!(fam.level(4).w.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn scale_levels() {
        assert_eq!(level_for_scale(2.0), 0);
        assert_eq!(level_for_scale(0.25), 0);
        assert!(level_for_scale(1e-6) >= 7);
        assert_eq!(level_for_scale(0.0), MAX_LEVEL);
    }
}
