//! Quadrature primitives: Gauss-Jacobi rules (Golub-Welsch with Newton polishing),
//! Gauss-Legendre panels and a globally adaptive Gauss-Kronrod integrator.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::special;

/// Nodes and weights of an interpolatory rule: `sum w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Affine image of a rule on `[-1, 1]` onto `[a, b]` (unweighted rules only).
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        }
    }
}

/// Recurrence coefficients of the monic-orthonormal Jacobi matrix for the weight
/// `(1-x)^a (1+x)^b` on `[-1, 1]`: diagonal `d_k`, `k < n`, and off-diagonal `e_k`
/// (coupling `k-1` and `k`), `1 <= k <= n`.
pub fn jacobi_matrix(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n + 1);
    off.push(0.0);
    let ab = a + b;
    for k in 0..n {
        let kf = k as f64;
        let d = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        diag.push(d);
    }
    for k in 1..=n {
        let kf = k as f64;
        let e = if k == 1 {
            (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))).sqrt()
        } else {
            let s = 2.0 * kf + ab;
            (4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
        };
        off.push(e);
    }
    (diag, off)
}

/// Implicit QL on a symmetric tridiagonal matrix; returns eigenvalues and the first
/// component of each normalized eigenvector.
fn tridiagonal_eigen(mut d: Vec<f64>, sub: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&sub[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::NodeConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Orthonormal (unit total-mass) polynomial values `p_0..p_{n-1}` at `x` plus `p_n` and `p_n'`.
fn orthonormal_tail(x: f64, diag: &[f64], off: &[f64]) -> (f64, f64, f64) {
    let n = diag.len();
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut dp_prev, mut dp) = (0.0, 0.0);
    let mut sum_sq = 0.0;
    for k in 0..n {
        sum_sq += p * p;
        let p_next = ((x - diag[k]) * p - off[k] * p_prev) / off[k + 1];
        let dp_next = ((x - diag[k]) * dp + p - off[k] * dp_prev) / off[k + 1];
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (sum_sq, p, dp)
}

/// `n`-point Gauss-Jacobi rule on `[-1, 1]` for the weight `(1-x)^a (1+x)^b`, nodes ascending.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Result<Rule> {
    if !(a > -1.0) {
        return Err(Error::Domain { name: "jacobi exponent a", value: a });
    }
    if !(b > -1.0) {
        return Err(Error::Domain { name: "jacobi exponent b", value: b });
    }
    if n == 0 {
        return Ok(Rule::default());
    }
    let (diag, off) = jacobi_matrix(n, a, b);
    let (mut nodes, _) = tridiagonal_eigen(diag.clone(), &off[1..n])?;
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mass = (a + b + 1.0).exp2() * special::beta(a + 1.0, b + 1.0);
    let mut weights = Vec::with_capacity(n);
    for (index, x) in nodes.iter_mut().enumerate() {
        let mut converged = false;
        for _ in 0..20 {
            let (_, p, dp) = orthonormal_tail(*x, &diag, &off);
            let step = p / dp;
            *x -= step;
            // nodes lie in [-1, 1]: absolute round-off level is the attainable accuracy
            if step.abs() <= 4.0 * f64::EPSILON {
                converged = true;
                break;
            }
        }
        if !converged || !(x.abs() < 1.0) {
            return Err(Error::NodeConvergence { index });
        }
        let (sum_sq, _, _) = orthonormal_tail(*x, &diag, &off);
        weights.push(mass / sum_sq);
    }
    Ok(Rule { nodes, weights })
}

pub fn gauss_legendre(n: usize) -> Rule {
    gauss_jacobi(n, 0.0, 0.0).expect("Legendre nodes always converge")
}

// Kronrod 15 / Gauss 7 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if pieces.len() >= max_intervals {
            return Err(Error::Quadrature {
                method: "adaptive Gauss-Kronrod",
                sub_integral: "interval bisection",
                estimate: total,
                change: err,
            });
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        for k in 0..16 {
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            let got = rule.integrate(|x| x.powi(k));
            assert!((got - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn chebyshev_first_kind_rule_is_equal_weight() {
        let n = 12;
        let rule = gauss_jacobi(n, -0.5, -0.5).unwrap();
        for (i, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let expected = -((2 * i + 1) as f64 * PI / (2 * n) as f64).cos();
            assert!((x - expected).abs() < 1e-14);
            assert!((w - PI / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_rule_total_mass_and_moment() {
        let (a, b) = (0.7, -0.85);
        let rule = gauss_jacobi(20, a, b).unwrap();
        let mass = (a + b + 1.0).exp2() * special::beta(a + 1.0, b + 1.0);
        assert!((rule.integrate(|_| 1.0) - mass).abs() < 1e-13 * mass);
        // int (1+x) w = 2^{a+b+2} B(a+1, b+2)
        let m1 = (a + b + 2.0).exp2() * special::beta(a + 1.0, b + 2.0);
        assert!((rule.integrate(|x| 1.0 + x) - m1).abs() < 1e-13 * m1);
    }

    #[test]
    fn extreme_exponents_and_lambda_zero_case() {
        for &(a, b) in &[(-0.999, 0.0), (0.5, -0.5), (-0.25, -0.75), (6.0, -0.9)] {
            let rule = gauss_jacobi(40, a, b).unwrap();
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(rule.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(gauss_jacobi(4, -1.0, 0.0).is_err());
        assert!(gauss_jacobi(0, 0.0, 0.0).unwrap().is_empty());
    }

    #[test]
    fn adaptive_handles_integrable_endpoint_singularity() {
        let got = adaptive_gk(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 1e-12, 2000).unwrap();
        assert!((got - 2.0).abs() < 1e-9);
        let got = adaptive_gk(|x: f64| x.sin(), 0.0, PI, 1e-14, 1e-14, 100).unwrap();
        assert!((got - 2.0).abs() < 1e-13);
    }
}
