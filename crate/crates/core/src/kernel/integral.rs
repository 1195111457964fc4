//! Double-integral representations of the auxiliary kernel against the measures `dPi`.
//!
//! Per variable the integrand and measure are
//! * `alpha > -1/2`: `Psi dPi_alpha(u)`,
//! * `alpha = -1/2`: `Psi` at the atoms `±1`,
//! * `alpha < -1/2`: `-d_u Psi Pi_alpha(u) du` plus `Psi` at the atoms,
//!
//! and the kernel is the sum over the products of these one-dimensional pieces. The symmetrized
//! form over `(0, 1]^2` is evaluated separately as an independent check.
//!
//! Both are computed with tensor rules graded toward `u = v = 1`, where the integrand peaks on
//! the scale `(cosh(t/2) - cos((theta - phi)/2)) / (sin(theta/2) sin(phi/2))` (and the analogue
//! with cosines in `v`). The inner `v`-rule is re-graded for every outer `u` node.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::pi_measure::{GradedFamily, MeasureKind, NodeSet, PANEL_NODES};

use super::psi::{PsiDeriv, PsiEngine};
use super::Deriv;

/// Highest total `(t, theta, phi)` order served by the integral representation.
pub const MAX_INTEGRAL_ORDER: u32 = 3;

const CHECK_NODES: usize = 24;
const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
enum VarRule {
    Graded(GradedFamily),
    Atomic(NodeSet),
}

impl VarRule {
    fn nodes(&self, h: f64) -> &NodeSet {
        match self {
            VarRule::Graded(fam) => fam.for_scale(h),
            VarRule::Atomic(set) => set,
        }
    }
}

/// One factor of the product structure: `d^k` in the variable against `rule`.
#[derive(Debug, Clone)]
struct VarTerm {
    k: u8,
    rule: VarRule,
}

#[derive(Debug, Clone)]
struct RuleSet {
    u_terms: Vec<VarTerm>,
    v_terms: Vec<VarTerm>,
    half_u: GradedFamily,
    half_v: GradedFamily,
}

fn var_terms(a: f64, n: usize) -> Result<Vec<VarTerm>> {
    Ok(match MeasureKind::of(a) {
        MeasureKind::Density => vec![VarTerm { k: 0, rule: VarRule::Graded(GradedFamily::density(a, n)?) }],
        MeasureKind::Atomic => vec![VarTerm { k: 0, rule: VarRule::Atomic(NodeSet::atomic()) }],
        MeasureKind::Profile => vec![
            VarTerm { k: 1, rule: VarRule::Graded(GradedFamily::signed_profile(a, n)?) },
            VarTerm { k: 0, rule: VarRule::Atomic(NodeSet::atomic()) },
        ],
    })
}

impl RuleSet {
    fn new(params: &JacobiParams, n: usize) -> Result<Self> {
        Ok(Self {
            u_terms: var_terms(params.alpha(), n)?,
            v_terms: var_terms(params.beta(), n)?,
            half_u: GradedFamily::half_reduced(params.alpha(), n)?,
            half_v: GradedFamily::half_reduced(params.beta(), n)?,
        })
    }
}

/// Quadrature rules for the integral representations of one parameter pair, built once.
#[derive(Debug, Clone)]
pub struct IntegralContext {
    params: JacobiParams,
    main: RuleSet,
    check: RuleSet,
}

fn peak_scale(f0: f64, coef: f64) -> f64 {
    if coef > 0.0 {
        f0 / coef
    } else {
        f64::INFINITY
    }
}

/// Values and absolute sums of a batch of integrals.
struct Sums {
    value: Vec<f64>,
    abs: Vec<f64>,
}

fn verify(method: &'static str, sub_integral: &'static str, a: &Sums, b: &Sums) -> Result<()> {
    for i in 0..a.value.len() {
        let change = (a.value[i] - b.value[i]).abs();
        let scale = b.value[i].abs().max(1e-4 * b.abs[i]);
        if !(change <= VERIFY_TOL * scale) {
            return Err(Error::Quadrature { method, sub_integral, estimate: b.value[i], change });
        }
    }
    Ok(())
}

impl IntegralContext {
    pub fn new(params: &JacobiParams) -> Result<Self> {
        Ok(Self { params: *params, main: RuleSet::new(params, PANEL_NODES)?, check: RuleSet::new(params, CHECK_NODES)? })
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    /// Integral of every requested derivative for one product term.
    fn pair_integral(&self, engine: &PsiEngine, tu: &VarTerm, tv: &VarTerm) -> Sums {
        let nout = engine.requested().len();
        let (f0, b, c) = engine.base_coefficients();
        let u_nodes = tu.rule.nodes(peak_scale(f0, b));
        let mut value = vec![0.0; nout];
        let mut abs = vec![0.0; nout];
        let mut inner = vec![0.0; nout];
        let mut inner_abs = vec![0.0; nout];
        let mut buf = vec![0.0; nout];
        for i in 0..u_nodes.len() {
            let cu = u_nodes.cu[i];
            let wu = u_nodes.w[i];
            if wu == 0.0 {
                continue;
            }
            let v_nodes = tv.rule.nodes(peak_scale(f0 + cu * b, c));
            inner.iter_mut().for_each(|x| *x = 0.0);
            inner_abs.iter_mut().for_each(|x| *x = 0.0);
            for j in 0..v_nodes.len() {
                engine.eval(cu, v_nodes.cu[j], &mut buf);
                let wv = v_nodes.w[j];
                for o in 0..nout {
                    let x = wv * buf[o];
                    inner[o] += x;
                    inner_abs[o] += x.abs();
                }
            }
            for o in 0..nout {
                value[o] += wu * inner[o];
                abs[o] += wu.abs() * inner_abs[o];
            }
        }
        Sums { value, abs }
    }

    fn integral_with(&self, rules: &RuleSet, t: f64, theta: f64, phi: f64, orders: &[Deriv]) -> Result<(Sums, Vec<f64>)> {
        let nout = orders.len();
        let mut total = Sums { value: vec![0.0; nout], abs: vec![0.0; nout] };
        let mut parts = Vec::new();
        for tu in &rules.u_terms {
            for tv in &rules.v_terms {
                let req: Vec<PsiDeriv> = orders
                    .iter()
                    .map(|d| PsiDeriv::new(d.t as u8, d.theta as u8, d.phi as u8, tu.k, tv.k))
                    .collect();
                let mut engine = PsiEngine::new(&self.params, &req)?;
                engine.set_point(t, theta, phi);
                let s = self.pair_integral(&engine, tu, tv);
                parts.push(s.value[0]);
                for o in 0..nout {
                    total.value[o] += s.value[o];
                    total.abs[o] += s.abs[o];
                }
            }
        }
        Ok((total, parts))
    }

    fn check_orders(&self, t: f64, orders: &[Deriv]) -> Result<()> {
        if !(t > 0.0) {
            return Err(Error::Domain { name: "t", value: t });
        }
        for d in orders {
            if d.total() > MAX_INTEGRAL_ORDER {
                return Err(Error::UnsupportedOrder { what: "integral representation", order: d.total(), max: MAX_INTEGRAL_ORDER });
            }
        }
        Ok(())
    }

    /// Derivatives of the auxiliary kernel for all `orders` at once. With `verify`, the result
    /// is recomputed on finer panels and a discrepancy above `1e-8` is reported as an error.
    pub fn h_script(&self, t: f64, theta: f64, phi: f64, orders: &[Deriv], verify_result: bool) -> Result<Vec<f64>> {
        self.check_orders(t, orders)?;
        let (main, _) = self.integral_with(&self.main, t, theta, phi, orders)?;
        if verify_result {
            let (fine, _) = self.integral_with(&self.check, t, theta, phi, orders)?;
            verify("integral representation", "product of dPi integrals", &main, &fine)?;
            return Ok(fine.value);
        }
        Ok(main.value)
    }

    /// The separate double integrals whose sum is the kernel (one per product of
    /// one-dimensional pieces, `u`-pieces outermost). Each is nonnegative.
    pub fn h_script_parts(&self, t: f64, theta: f64, phi: f64) -> Result<Vec<f64>> {
        self.check_orders(t, &[Deriv::ZERO])?;
        Ok(self.integral_with(&self.main, t, theta, phi, &[Deriv::ZERO])?.1)
    }

    fn general_with(&self, rules: &RuleSet, t: f64, theta: f64, phi: f64) -> (f64, f64) {
        let p = self.params.lambda() + 1.0;
        let pre = self.params.c_ab() * (0.5 * t).sinh();
        let f0 = 2.0 * (0.25 * t).sinh().powi(2) + 2.0 * (0.25 * (theta - phi)).sin().powi(2);
        let b = (0.5 * theta).sin() * (0.5 * phi).sin();
        let c = (0.5 * theta).cos() * (0.5 * phi).cos();
        let big = |x: f64| x.powf(-p);
        // F(x + d) - F(x) without cancellation
        let delta = |x: f64, d: f64| x.powf(-p) * (-p * (d / x).ln_1p()).exp_m1();
        // corner values f(xi, eta) for xi, eta = ±1 (index 0: +1, index 1: -1)
        let corner = [[f0, f0 + 2.0 * c], [f0 + 2.0 * b, f0 + 2.0 * b + 2.0 * c]];
        let sign = [1.0, -1.0];

        let psi_e11 = 0.25 * corner.iter().flatten().map(|&x| big(x)).sum::<f64>();
        let mut abs = psi_e11.abs();

        let one_d = |fam: &GradedFamily, coef: f64, axis: usize| -> (f64, f64) {
            let nodes = fam.for_scale(peak_scale(f0, coef));
            let mut acc = 0.0;
            let mut acc_abs = 0.0;
            for i in 0..nodes.len() {
                let s = nodes.cu[i];
                let mut g = 0.0;
                for xi in 0..2 {
                    for eta in 0..2 {
                        let d = sign[if axis == 0 { xi } else { eta }] * s * coef;
                        g += delta(corner[xi][eta], d);
                    }
                }
                let x = nodes.w[i] * 0.25 * g / s;
                acc += x;
                acc_abs += x.abs();
            }
            (acc, acc_abs)
        };
        let (iu, iu_abs) = one_d(&rules.half_u, b, 0);
        let (iv, iv_abs) = one_d(&rules.half_v, c, 1);
        abs += 2.0 * (iu_abs + iv_abs);

        let u_nodes = rules.half_u.for_scale(peak_scale(f0, b));
        // the differences carry peaks at both (f0 + s_u B) / C and f0 / C; geometric panels above
        // the finer of the two resolve the coarser one as well
        let v_nodes = rules.half_v.for_scale(peak_scale(f0, c));
        let mut i2 = 0.0;
        let mut i2_abs = 0.0;
        for i in 0..u_nodes.len() {
            let su = u_nodes.cu[i];
            let wu = u_nodes.w[i];
            if wu == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for j in 0..v_nodes.len() {
                let sv = v_nodes.cu[j];
                let mut g = 0.0;
                for xi in 0..2 {
                    let a = sign[xi] * su * b;
                    for eta in 0..2 {
                        let bb = sign[eta] * sv * c;
                        let x = corner[xi][eta];
                        g += delta(x + a, bb) - delta(x, bb);
                    }
                }
                inner += v_nodes.w[j] * 0.25 * g / (su * sv);
            }
            i2 += wu * inner;
            i2_abs += (wu * inner).abs();
        }
        abs += 4.0 * i2_abs;
        let value = 4.0 * i2 + 2.0 * iu + 2.0 * iv + psi_e11;
        (pre * value, pre * abs)
    }

    /// The auxiliary kernel from the symmetrized four-term representation over `(0, 1]^2`.
    pub fn h_script_general(&self, t: f64, theta: f64, phi: f64, verify_result: bool) -> Result<f64> {
        self.check_orders(t, &[Deriv::ZERO])?;
        let (v, a) = self.general_with(&self.main, t, theta, phi);
        if verify_result {
            let (w, b) = self.general_with(&self.check, t, theta, phi);
            verify(
                "symmetrized representation",
                "(0,1]^2 difference integrals",
                &Sums { value: vec![v], abs: vec![a] },
                &Sums { value: vec![w], abs: vec![b] },
            )?;
            return Ok(w);
        }
        Ok(v)
    }
}
