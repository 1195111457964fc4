//! The Jacobi-Poisson kernel `H_t(theta, phi)` and the auxiliary kernel with unsigned exponent.
//!
//! Three independent routes are available: the eigenfunction series (which yields `H_t`
//! directly), the Appell `F4` closed form and the double-integral representations (which yield
//! the auxiliary kernel, turned into `H_t` by adding an explicit `sinh` correction when
//! `alpha + beta < -1`).

mod f4;
mod integral;
mod psi;
mod series;

use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;

pub use f4::{appell_f4, f4_rho, h_script_f4, F4_RHO_MAX};
pub use integral::{IntegralContext, MAX_INTEGRAL_ORDER};
pub use psi::{psi_eval, q_eval, PsiDeriv, PsiEngine, QArgs, MAX_TPHI_ORDER};
pub use series::{kernel_series, truncation_index, SeriesSweep, SERIES_CAP};

/// `t` at and above which the automatic policy uses the series.
pub const AUTO_SERIES_T: f64 = 0.2;
/// Below [`AUTO_SERIES_T`], the `F4` route is preferred while `f4_rho <= AUTO_F4_RHO`.
pub const AUTO_F4_RHO: f64 = 0.9;
/// Highest total derivative order of a query.
pub const MAX_QUERY_ORDER: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Series,
    F4,
    Integral,
    General,
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::F4 => "f4",
            Method::Integral => "integral",
            Method::General => "general",
            Method::Auto => "auto",
        }
    }
}

impl core::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Method::Series),
            "f4" => Ok(Method::F4),
            "integral" => Ok(Method::Integral),
            "general" => Ok(Method::General),
            "auto" => Ok(Method::Auto),
            other => Err(Error::Invalid(alloc::format!("unknown method '{other}'"))),
        }
    }
}

/// Orders of differentiation `(M, N, L)` in `(t, theta, phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Deriv {
    pub t: u32,
    pub theta: u32,
    pub phi: u32,
}

impl Deriv {
    pub const ZERO: Deriv = Deriv { t: 0, theta: 0, phi: 0 };

    pub const fn new(t: u32, theta: u32, phi: u32) -> Self {
        Self { t, theta, phi }
    }

    pub fn total(self) -> u32 {
        self.t + self.theta + self.phi
    }

    pub fn is_zero(self) -> bool {
        self.total() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub t: f64,
    pub theta: f64,
    pub phi: f64,
    pub deriv: Deriv,
    pub method: Method,
}

impl KernelQuery {
    pub fn new(t: f64, theta: f64, phi: f64) -> Self {
        Self { t, theta, phi, deriv: Deriv::ZERO, method: Method::Auto }
    }

    pub fn with_deriv(mut self, deriv: Deriv) -> Self {
        self.deriv = deriv;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Domain { name: "t", value: self.t });
        }
        for (name, x) in [("theta", self.theta), ("phi", self.phi)] {
            if !(0.0..=PI).contains(&x) {
                return Err(Error::Domain { name, value: x });
            }
        }
        if self.deriv.total() > MAX_QUERY_ORDER {
            return Err(Error::UnsupportedOrder { what: "kernel query", order: self.deriv.total(), max: MAX_QUERY_ORDER });
        }
        if matches!(self.method, Method::F4 | Method::General) && !self.deriv.is_zero() {
            return Err(Error::UnsupportedOrder { what: if self.method == Method::F4 { "F4 route" } else { "symmetrized route" }, order: self.deriv.total(), max: 0 });
        }
        Ok(())
    }

    /// The concrete method used for `Auto`.
    pub fn resolved_method(&self) -> Method {
        match self.method {
            Method::Auto => {
                if self.t >= AUTO_SERIES_T {
                    Method::Series
                } else if self.deriv.is_zero() && f4_rho(self.t, self.theta, self.phi) <= AUTO_F4_RHO {
                    Method::F4
                } else {
                    Method::Integral
                }
            }
            m => m,
        }
    }
}

/// `H_t - (auxiliary kernel)`: `2^{lambda+1} c_ab sinh(lambda t / 2)` when `alpha + beta < -1`,
/// zero otherwise, differentiated `m` times in `t`.
pub fn jph_correction(params: &JacobiParams, t: f64, m: u32) -> f64 {
    let lam = params.lambda();
    if !(lam < 0.0) {
        return 0.0;
    }
    let x = 0.5 * lam * t;
    let hyper = if m.is_multiple_of(2) { x.sinh() } else { x.cosh() };
    (lam + 1.0).exp2() * params.c_ab() * (0.5 * lam).powi(m as i32) * hyper
}

/// Closed form of `H_t` for `alpha = beta = -1/2`:
/// `(1/pi) [1 + S(theta - phi) + S(theta + phi)]`, `S(x) = (r cos x - r^2) / (1 - 2 r cos x + r^2)`,
/// `r = exp(-t)`.
pub fn closed_form_chebyshev(t: f64, theta: f64, phi: f64) -> f64 {
    let r = (-t).exp();
    let one_minus_r = -(-t).exp_m1();
    let s = |x: f64| {
        let h = 2.0 * (0.5 * x).sin().powi(2);
        r * (one_minus_r - h) / (one_minus_r * one_minus_r + 2.0 * r * h)
    };
    (1.0 + s(theta - phi) + s(theta + phi)) / PI
}

/// `H_t` evaluator owning the quadrature rules of the integral routes.
#[derive(Debug, Clone)]
pub struct Kernel {
    params: JacobiParams,
    integral: IntegralContext,
}

impl Kernel {
    pub fn new(params: &JacobiParams) -> Result<Self> {
        Ok(Self { params: *params, integral: IntegralContext::new(params)? })
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    pub fn integral(&self) -> &IntegralContext {
        &self.integral
    }

    /// The auxiliary kernel (unsigned exponent) and its derivatives.
    pub fn eval_script(&self, query: &KernelQuery) -> Result<f64> {
        query.validate()?;
        let q = query;
        match q.resolved_method() {
            Method::Series => Ok(kernel_series(&self.params, q.t, q.theta, q.phi, q.deriv)? - correction(&self.params, q)),
            m => script_by(&self.params, Some(&self.integral), m, q),
        }
    }

    /// `H_t(theta, phi)` and its derivatives.
    pub fn eval(&self, query: &KernelQuery) -> Result<f64> {
        query.validate()?;
        let q = query;
        match q.resolved_method() {
            Method::Series => kernel_series(&self.params, q.t, q.theta, q.phi, q.deriv),
            m => Ok(script_by(&self.params, Some(&self.integral), m, q)? + correction(&self.params, q)),
        }
    }
}

fn correction(params: &JacobiParams, q: &KernelQuery) -> f64 {
    if q.deriv.theta + q.deriv.phi > 0 {
        0.0
    } else {
        jph_correction(params, q.t, q.deriv.t)
    }
}

fn script_by(params: &JacobiParams, ctx: Option<&IntegralContext>, method: Method, q: &KernelQuery) -> Result<f64> {
    let owned;
    let ctx = match (method, ctx) {
        (Method::Integral | Method::General, None) => {
            owned = IntegralContext::new(params)?;
            &owned
        }
        (_, Some(c)) => c,
        (_, None) => {
            owned = IntegralContext::new(params)?;
            &owned
        }
    };
    match method {
        Method::F4 => h_script_f4(params, q.t, q.theta, q.phi),
        Method::Integral => Ok(ctx.h_script(q.t, q.theta, q.phi, &[q.deriv], true)?[0]),
        Method::General => ctx.h_script_general(q.t, q.theta, q.phi, true),
        Method::Series | Method::Auto => unreachable!("resolved before dispatch"),
    }
}

/// `H_t(theta, phi)` (or a derivative) for a single query.
pub fn kernel_eval(params: &JacobiParams, query: &KernelQuery) -> Result<f64> {
    query.validate()?;
    let q = query;
    match q.resolved_method() {
        Method::Series => kernel_series(params, q.t, q.theta, q.phi, q.deriv),
        Method::F4 => Ok(h_script_f4(params, q.t, q.theta, q.phi)? + correction(params, q)),
        m => Ok(script_by(params, None, m, q)? + correction(params, q)),
    }
}

/// The auxiliary kernel by the integral representation for the parameter regime at hand.
pub fn h_script_integral(params: &JacobiParams, t: f64, theta: f64, phi: f64, deriv: Deriv) -> Result<f64> {
    Ok(IntegralContext::new(params)?.h_script(t, theta, phi, &[deriv], true)?[0])
}

/// The auxiliary kernel by the symmetrized representation over `(0, 1]^2`.
pub fn h_script_general(params: &JacobiParams, t: f64, theta: f64, phi: f64) -> Result<f64> {
    IntegralContext::new(params)?.h_script_general(t, theta, phi, true)
}
