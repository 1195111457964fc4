//! Closed-form partial derivatives of
//! `Psi(t, theta, phi, u, v) = c_ab sinh(t/2) / (cosh(t/2) - 1 + q)^{alpha + beta + 2}`.
//!
//! The denominator base `f = cosh(t/2) - 1 + q` is kept in the cancellation-free form
//! `2 sinh^2(t/4) + 2 sin^2((theta - phi)/4) + (1-u) S S' + (1-v) C C'` with
//! `S = sin(theta/2)`, `S' = sin(phi/2)`, `C = cos(theta/2)`, `C' = cos(phi/2)`.
//! Every partial derivative of `f` is affine in `1-u` and `1-v`, and derivatives of `f^{-p}`
//! follow from the multivariate Faa di Bruno formula summed over set partitions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;

/// Orders of differentiation in `(t, theta, phi, u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PsiDeriv {
    pub t: u8,
    pub theta: u8,
    pub phi: u8,
    pub u: u8,
    pub v: u8,
}

impl PsiDeriv {
    pub const ZERO: PsiDeriv = PsiDeriv { t: 0, theta: 0, phi: 0, u: 0, v: 0 };

    pub fn new(t: u8, theta: u8, phi: u8, u: u8, v: u8) -> Self {
        Self { t, theta, phi, u, v }
    }

    fn as_array(self) -> [u8; 5] {
        [self.t, self.theta, self.phi, self.u, self.v]
    }

    pub fn total(self) -> u32 {
        self.as_array().iter().map(|&k| k as u32).sum()
    }
}

/// Highest total order in `(t, theta, phi)`.
pub const MAX_TPHI_ORDER: u32 = 3;

/// One Faa di Bruno term: `coef * g^{(k)}(f) * prod blocks`.
#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    k: usize,
    blocks: Vec<usize>,
}

/// Whether a block multi-index has a structurally vanishing `f`-partial.
fn block_vanishes(b: [u8; 5]) -> bool {
    let [mt, n, l, mu, mv] = b;
    if mt > 0 && (n + l + mu + mv) > 0 {
        return true;
    }
    mu > 1 || mv > 1 || (mu > 0 && mv > 0)
}

/// Set partitions of `0..len` as restricted growth strings.
fn set_partitions(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if len == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut a = vec![0usize; len];
    loop {
        out.push(a.clone());
        // next restricted growth string
        let mut i = len - 1;
        loop {
            let max_prefix = a[..i].iter().copied().max().unwrap_or(0);
            if i > 0 && a[i] <= max_prefix {
                a[i] += 1;
                for x in a.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
            if i == 0 {
                return out;
            }
            i -= 1;
        }
    }
}

/// Evaluator for a fixed list of requested derivative orders at one `(t, theta, phi)`.
#[derive(Debug, Clone)]
pub struct PsiEngine {
    c_ab: f64,
    p: f64,
    requested: Vec<PsiDeriv>,
    g_terms: Vec<Vec<Term>>,
    /// for every requested order: list of (weight index into g_orders, binomial (1/2)^j, parity j)
    combos: Vec<Vec<(usize, f64, usize)>>,
    blocks: Vec<[u8; 5]>,
    max_k: usize,
    // point-dependent data
    block_coef: Vec<[f64; 3]>,
    f0: f64,
    b_coef: f64,
    c_coef: f64,
    sh: [f64; 2],
}

impl PsiEngine {
    pub fn new(params: &JacobiParams, requested: &[PsiDeriv]) -> Result<Self> {
        for d in requested {
            let tp = d.t as u32 + d.theta as u32 + d.phi as u32;
            if tp > MAX_TPHI_ORDER {
                return Err(Error::UnsupportedOrder { what: "Psi (t, theta, phi)", order: tp, max: MAX_TPHI_ORDER });
            }
            if d.u > 1 || d.v > 1 {
                return Err(Error::UnsupportedOrder { what: "Psi (u, v)", order: d.u.max(d.v) as u32, max: 1 });
            }
        }
        let mut g_orders: Vec<PsiDeriv> = Vec::new();
        let mut combos = Vec::with_capacity(requested.len());
        for d in requested {
            let mut combo = Vec::new();
            let mut binom = 1.0;
            for j in 0..=d.t as usize {
                let g = PsiDeriv { t: d.t - j as u8, ..*d };
                let idx = match g_orders.iter().position(|x| *x == g) {
                    Some(i) => i,
                    None => {
                        g_orders.push(g);
                        g_orders.len() - 1
                    }
                };
                combo.push((idx, binom * 0.5f64.powi(j as i32), j % 2));
                binom = binom * (d.t as usize - j) as f64 / (j + 1) as f64;
            }
            combos.push(combo);
        }
        let mut blocks: Vec<[u8; 5]> = Vec::new();
        let mut g_terms = Vec::with_capacity(g_orders.len());
        let mut max_k = 0;
        for g in &g_orders {
            let arr = g.as_array();
            let mut slots = Vec::new();
            for (var, &k) in arr.iter().enumerate() {
                for _ in 0..k {
                    slots.push(var);
                }
            }
            let mut terms: Vec<(usize, Vec<usize>, f64)> = Vec::new();
            for part in set_partitions(slots.len()) {
                let nblocks = part.iter().copied().max().map_or(0, |m| m + 1);
                let mut bl = vec![[0u8; 5]; nblocks];
                for (pos, &b) in part.iter().enumerate() {
                    bl[b][slots[pos]] += 1;
                }
                if bl.iter().any(|b| block_vanishes(*b)) {
                    continue;
                }
                let mut ids: Vec<usize> = bl
                    .iter()
                    .map(|b| match blocks.iter().position(|x| x == b) {
                        Some(i) => i,
                        None => {
                            blocks.push(*b);
                            blocks.len() - 1
                        }
                    })
                    .collect();
                ids.sort_unstable();
                match terms.iter_mut().find(|(k, v, _)| *k == nblocks && *v == ids) {
                    Some(t) => t.2 += 1.0,
                    None => terms.push((nblocks, ids, 1.0)),
                }
                max_k = max_k.max(nblocks);
            }
            g_terms.push(terms.into_iter().map(|(k, blocks, coef)| Term { coef, k, blocks }).collect());
        }
        let nb = blocks.len();
        assert!(nb <= 32 && g_orders.len() <= 64, "derivative plan exceeds the evaluator buffers");
        Ok(Self {
            c_ab: params.c_ab(),
            p: params.lambda() + 1.0,
            requested: requested.to_vec(),
            g_terms,
            combos,
            blocks,
            max_k,
            block_coef: vec![[0.0; 3]; nb],
            f0: 0.0,
            b_coef: 0.0,
            c_coef: 0.0,
            sh: [0.0; 2],
        })
    }

    pub fn requested(&self) -> &[PsiDeriv] {
        &self.requested
    }

    /// Fix `(t, theta, phi)`.
    pub fn set_point(&mut self, t: f64, theta: f64, phi: f64) {
        let half = |k: u8| 0.5f64.powi(k as i32);
        let ds = |x: f64, k: u8| half(k) * (0.5 * x + k as f64 * FRAC_PI_2).sin();
        let dc = |x: f64, k: u8| half(k) * (0.5 * x + k as f64 * FRAC_PI_2).cos();
        let d = theta - phi;
        let (sh, ch) = ((0.5 * t).sinh(), (0.5 * t).cosh());
        self.sh = [sh, ch];
        self.f0 = 2.0 * (0.25 * t).sinh().powi(2) + 2.0 * (0.25 * d).sin().powi(2);
        self.b_coef = (0.5 * theta).sin() * (0.5 * phi).sin();
        self.c_coef = (0.5 * theta).cos() * (0.5 * phi).cos();
        for (i, b) in self.blocks.iter().enumerate() {
            let [mt, n, l, mu, mv] = *b;
            self.block_coef[i] = if mt > 0 {
                [half(mt) * if mt % 2 == 0 { ch } else { sh }, 0.0, 0.0]
            } else if mu > 0 {
                [-ds(theta, n) * ds(phi, l), 0.0, 0.0]
            } else if mv > 0 {
                [-dc(theta, n) * dc(phi, l), 0.0, 0.0]
            } else {
                let k = n + l;
                let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
                let a = sign * half(k) * (0.5 * d + k as f64 * FRAC_PI_2).cos();
                [a, ds(theta, n) * ds(phi, l), dc(theta, n) * dc(phi, l)]
            };
        }
    }

    /// The base `f = cosh(t/2) - 1 + q` at `(1-u, 1-v)`.
    #[inline]
    pub fn base(&self, cu: f64, cv: f64) -> f64 {
        self.f0 + cu * self.b_coef + cv * self.c_coef
    }

    /// Coefficients `(f0, B, C)` with `f = f0 + (1-u) B + (1-v) C`.
    pub fn base_coefficients(&self) -> (f64, f64, f64) {
        (self.f0, self.b_coef, self.c_coef)
    }

    /// Requested derivatives at `(1-u, 1-v)`, written into `out`.
    pub fn eval(&self, cu: f64, cv: f64, out: &mut [f64]) {
        let f = self.base(cu, cv);
        let mut gk = [0.0f64; 8];
        gk[0] = f.powf(-self.p);
        let inv = 1.0 / f;
        for k in 1..=self.max_k {
            gk[k] = gk[k - 1] * (-self.p - (k - 1) as f64) * inv;
        }
        let mut bv = [0.0f64; 32];
        for (i, c) in self.block_coef.iter().enumerate() {
            bv[i] = c[0] + cu * c[1] + cv * c[2];
        }
        let mut gv = [0.0f64; 64];
        for (gi, terms) in self.g_terms.iter().enumerate() {
            let mut acc = 0.0;
            for term in terms {
                let mut prod = term.coef * gk[term.k];
                for &b in &term.blocks {
                    prod *= bv[b];
                }
                acc += prod;
            }
            gv[gi] = acc;
        }
        for (o, combo) in out.iter_mut().zip(&self.combos) {
            let mut acc = 0.0;
            for &(gi, w, parity) in combo {
                acc += w * self.sh[parity] * gv[gi];
            }
            *o = self.c_ab * acc;
        }
    }
}

/// Arguments `(theta, phi, u, v)` of `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QArgs {
    pub theta: f64,
    pub phi: f64,
    pub u: f64,
    pub v: f64,
}

/// `q = 1 - u sin(theta/2) sin(phi/2) - v cos(theta/2) cos(phi/2)` and its partials.
pub fn q_eval(args: QArgs, du: u32, dv: u32, dtheta: u32, dphi: u32) -> Result<f64> {
    for (o, name) in [(du, "q in u"), (dv, "q in v"), (dtheta, "q in theta"), (dphi, "q in phi")] {
        if o > 2 {
            return Err(Error::UnsupportedOrder { what: name, order: o, max: 2 });
        }
    }
    if du >= 2 || dv >= 2 || (du == 1 && dv == 1) {
        return Ok(0.0);
    }
    let ds = |x: f64, k: u32| 0.5f64.powi(k as i32) * (0.5 * x + k as f64 * FRAC_PI_2).sin();
    let dc = |x: f64, k: u32| 0.5f64.powi(k as i32) * (0.5 * x + k as f64 * FRAC_PI_2).cos();
    let QArgs { theta, phi, u, v } = args;
    if du == 1 {
        return Ok(-ds(theta, dtheta) * ds(phi, dphi));
    }
    if dv == 1 {
        return Ok(-dc(theta, dtheta) * dc(phi, dphi));
    }
    if dtheta + dphi == 0 {
        let d = theta - phi;
        return Ok(2.0 * (0.25 * d).sin().powi(2) + (1.0 - u) * ds(theta, 0) * ds(phi, 0) + (1.0 - v) * dc(theta, 0) * dc(phi, 0));
    }
    Ok(-u * ds(theta, dtheta) * ds(phi, dphi) - v * dc(theta, dtheta) * dc(phi, dphi))
}

/// A single partial derivative of `Psi` at `(t, theta, phi, u, v)`.
pub fn psi_eval(params: &JacobiParams, t: f64, args: QArgs, deriv: PsiDeriv) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain { name: "t", value: t });
    }
    let mut engine = PsiEngine::new(params, &[deriv])?;
    engine.set_point(t, args.theta, args.phi);
    let mut out = [0.0];
    engine.eval(1.0 - args.u, 1.0 - args.v, &mut out);
    Ok(out[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..=5).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn q_examples() {
        let a = |theta, phi, u, v| QArgs { theta, phi, u, v };
        assert!(q_eval(a(0.7, 0.7, 1.0, 1.0), 0, 0, 0, 0).unwrap().abs() < 1e-17);
        assert!((q_eval(a(0.0, PI, 0.3, -0.4), 0, 0, 0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((q_eval(a(PI / 2.0, PI / 2.0, 0.0, 0.0), 0, 0, 0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(q_eval(a(1.0, 2.0, 0.1, 0.2), 1, 1, 0, 0).unwrap(), 0.0);
        assert!(q_eval(a(1.0, 2.0, 0.1, 0.2), 0, 0, 3, 0).is_err());
    }

    #[test]
    fn psi_chebyshev_value() {
        let params = JacobiParams::new(-0.5, -0.5).unwrap();
        // theta = phi = pi/2 and u = v = 0.7/... choose u = v so that q = 0.3
        let args = QArgs { theta: PI / 2.0, phi: PI / 2.0, u: 0.7, v: 0.7 };
        let got = psi_eval(&params, 1.0, args, PsiDeriv::ZERO).unwrap();
        let want = (0.5f64).sinh() / ((0.5f64).cosh() - 0.7) / PI;
        assert!((got - want).abs() < 1e-15 * want);
        let d = psi_eval(&params, 1.0, QArgs { theta: 0.0, ..args }, PsiDeriv::new(0, 0, 0, 1, 0)).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let params = JacobiParams::new(0.5, 0.0).unwrap();
        let base = QArgs { theta: 1.0, phi: 2.0, u: 0.3, v: -0.2 };
        let t = 0.4;
        let h = 1e-5;
        let f = |t: f64, a: QArgs, d: PsiDeriv| psi_eval(&params, t, a, d).unwrap();
        let cases: [(PsiDeriv, PsiDeriv, u8); 5] = [
            (PsiDeriv::new(1, 0, 0, 0, 0), PsiDeriv::ZERO, 0),
            (PsiDeriv::new(1, 2, 0, 1, 0), PsiDeriv::new(0, 2, 0, 1, 0), 0),
            (PsiDeriv::new(0, 1, 1, 0, 1), PsiDeriv::new(0, 0, 1, 0, 1), 1),
            (PsiDeriv::new(1, 1, 1, 1, 0), PsiDeriv::new(1, 1, 0, 1, 0), 2),
            (PsiDeriv::new(0, 0, 0, 1, 1), PsiDeriv::new(0, 0, 0, 0, 1), 3),
        ];
        for (full, lower, var) in cases {
            let exact = f(t, base, full);
            let fd = match var {
                0 => (f(t + h, base, lower) - f(t - h, base, lower)) / (2.0 * h),
                1 => (f(t, QArgs { theta: base.theta + h, ..base }, lower) - f(t, QArgs { theta: base.theta - h, ..base }, lower)) / (2.0 * h),
                2 => (f(t, QArgs { phi: base.phi + h, ..base }, lower) - f(t, QArgs { phi: base.phi - h, ..base }, lower)) / (2.0 * h),
                _ => (f(t, QArgs { u: base.u + h, ..base }, lower) - f(t, QArgs { u: base.u - h, ..base }, lower)) / (2.0 * h),
            };
            assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1e-3), "{full:?}: {exact} vs {fd}");
        }
    }

    #[test]
    fn order_caps() {
        let params = JacobiParams::new(0.0, 0.0).unwrap();
        assert!(PsiEngine::new(&params, &[PsiDeriv::new(2, 1, 1, 0, 0)]).is_err());
        assert!(PsiEngine::new(&params, &[PsiDeriv::new(0, 0, 0, 2, 0)]).is_err());
    }
}
