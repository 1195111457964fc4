//! Kernels of the operators built from the Poisson semigroup, viewed as Calderon-Zygmund
//! kernels with values in a Banach space of functions of `t`:
//!
//! * (I) maximal operator: `{H_t(theta, phi)}_{t > 0}` with the sup norm,
//! * (II) Riesz transforms: `(1/Gamma(N)) int_0^inf d_theta^N H_t t^{N-1} dt`,
//! * (III) square functions: `{d_theta^N d_t^M H_t}` in `L^2(t^{2M+2N-1} dt)`,
//! * (IVa) Laplace-type multipliers: `-int_0^inf phi(t) d_t H_t dt`,
//! * (IVb) Laplace-Stieltjes-type multipliers: `sum_j w_j H_{t_j}`,
//!
//! with scans of the growth bound `|K| <~ 1 / mu(B(theta, |theta - phi|))`, the gradient bound
//! `|d_theta K| + |d_phi K| <~ 1 / (|theta - phi| mu(B))` and the smoothness bound on
//! differences `K(theta, phi) - K(theta', phi)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::{self, JacobiParams};
use crate::kernel::{truncation_index, Deriv, Kernel, KernelQuery};
use crate::quad;
use crate::report::{CapRule, EstimateReport, EstimateRow};
use crate::special;
use crate::tprofile::{order_index, Layout, TProfile};

/// Bounded profile `phi(t)` of a Laplace-type multiplier `m(z) = z int_0^inf exp(-t z) phi(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplaceProfile {
    Constant(f64),
    /// `1` on `[a, b]`, `0` elsewhere.
    Indicator { a: f64, b: f64 },
    /// `t^{-i gamma} / Gamma(1 - i gamma)`, giving `m(z) = z^{i gamma}`.
    ImaginaryPower { gamma: f64 },
}

const LAPLACE_S_MIN: f64 = -45.0;
const LAPLACE_S_MAX: f64 = 4.5;
const LAPLACE_PANEL: f64 = 0.5;

impl LaplaceProfile {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LaplaceProfile::Constant(c) if !c.is_finite() => Err(Error::Invalid(format!("profile constant {c} is not finite"))),
            LaplaceProfile::Indicator { a, b } if !(a >= 0.0 && b > a && b.is_finite()) => {
                Err(Error::Invalid(format!("indicator profile needs 0 <= a < b < inf (got {a}, {b})")))
            }
            LaplaceProfile::ImaginaryPower { gamma } if !gamma.is_finite() => Err(Error::Invalid(format!("gamma {gamma} is not finite"))),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match *self {
            LaplaceProfile::Constant(c) => Complex64::new(c, 0.0),
            LaplaceProfile::Indicator { a, b } => Complex64::new(if t >= a && t <= b { 1.0 } else { 0.0 }, 0.0),
            LaplaceProfile::ImaginaryPower { gamma } => {
                let z = Complex64::new(1.0, -gamma);
                Complex64::from_polar(1.0, -gamma * t.ln()) / special::gamma_complex(z)
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            LaplaceProfile::Indicator { a, b } => vec![a, b],
            _ => Vec::new(),
        }
    }

    fn oscillates_at_zero(&self) -> bool {
        matches!(self, LaplaceProfile::ImaginaryPower { gamma } if *gamma != 0.0)
    }

    /// `m(z) = z int_0^inf exp(-t z) phi(t) dt` for `z > 0` by Gauss-Legendre panels in
    /// `s = ln(z t)`; `m(0) := 0`.
    pub fn multiplier(&self, z: f64) -> Result<Complex64> {
        if !(z >= 0.0) || !z.is_finite() {
            return Err(Error::Domain { name: "z", value: z });
        }
        if z == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut cuts: Vec<f64> = Vec::new();
        let n = ((LAPLACE_S_MAX - LAPLACE_S_MIN) / LAPLACE_PANEL).round() as usize;
        for i in 0..=n {
            cuts.push(LAPLACE_S_MIN + i as f64 * LAPLACE_PANEL);
        }
        for b in self.breakpoints() {
            if b > 0.0 {
                let s = (z * b).ln();
                if s > LAPLACE_S_MIN && s < LAPLACE_S_MAX {
                    cuts.push(s);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
        let rule = quad::gauss_legendre(16);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in cuts.windows(2) {
            if c[1] <= c[0] {
                continue;
            }
            let m = rule.mapped(c[0], c[1]);
            for j in 0..m.len() {
                let s = m.nodes[j];
                let e = s.exp();
                acc += self.eval(e / z) * (m.weights[j] * e * (-e).exp());
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for LaplaceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaplaceProfile::Constant(c) => write!(f, "const{c}"),
            LaplaceProfile::Indicator { a, b } => write!(f, "indicator:{a},{b}"),
            LaplaceProfile::ImaginaryPower { gamma } => write!(f, "imag:{gamma}"),
        }
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("cannot read {what} from '{s}'")))
}

impl FromStr for LaplaceProfile {
    type Err = Error;

    /// `const<c>`, `indicator:<a>,<b>` or `imag:<gamma>`.
    fn from_str(s: &str) -> Result<Self> {
        let p = if let Some(rest) = s.strip_prefix("indicator:") {
            let (a, b) = rest.split_once(',').ok_or_else(|| Error::Invalid(format!("indicator profile needs a,b (got '{s}')")))?;
            LaplaceProfile::Indicator { a: parse_f64(a, "indicator start")?, b: parse_f64(b, "indicator end")? }
        } else if let Some(rest) = s.strip_prefix("imag:") {
            LaplaceProfile::ImaginaryPower { gamma: parse_f64(rest, "gamma")? }
        } else if let Some(rest) = s.strip_prefix("const") {
            LaplaceProfile::Constant(parse_f64(rest.trim_start_matches(':'), "constant")?)
        } else {
            return Err(Error::Invalid(format!("unknown Laplace profile '{s}'")));
        };
        p.validate()?;
        Ok(p)
    }
}

/// Finite signed measure `sum_j w_j delta_{t_j}` on `(0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesMeasure {
    atoms: Vec<(f64, f64)>,
}

impl StieltjesMeasure {
    /// Atoms as `(weight, position)` pairs; positions must be positive.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Invalid(String::from("a Stieltjes measure needs at least one atom")));
        }
        for &(w, t) in &atoms {
            if !(t > 0.0 && t.is_finite()) || !w.is_finite() {
                return Err(Error::Invalid(format!("atom weight {w} at {t} is not admissible")));
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `m(z) = sum_j w_j exp(-t_j z)`.
    pub fn multiplier(&self, z: f64) -> f64 {
        self.atoms.iter().map(|&(w, t)| w * (-t * z).exp()).sum()
    }
}

impl fmt::Display for StieltjesMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(|(w, t)| format!("{w}@{t}")).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl FromStr for StieltjesMeasure {
    type Err = Error;

    /// `w@t;w@t;...`, or a bare `t` for a unit atom.
    fn from_str(s: &str) -> Result<Self> {
        let mut atoms = Vec::new();
        for part in s.split(';').filter(|p| !p.trim().is_empty()) {
            match part.split_once('@') {
                Some((w, t)) => atoms.push((parse_f64(w, "atom weight")?, parse_f64(t, "atom position")?)),
                None => atoms.push((1.0, parse_f64(part, "atom position")?)),
            }
        }
        Self::new(atoms)
    }
}

/// Multiplier of Laplace or Laplace-Stieltjes transform type.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierSpec {
    Laplace(LaplaceProfile),
    Stieltjes(StieltjesMeasure),
}

impl MultiplierSpec {
    /// `m(z)` with `m(0) := 0` for the Laplace type and `m(0) = sum_j w_j` for atoms.
    pub fn multiplier(&self, z: f64) -> Result<Complex64> {
        match self {
            MultiplierSpec::Laplace(p) => p.multiplier(z),
            MultiplierSpec::Stieltjes(m) => Ok(Complex64::new(m.multiplier(z), 0.0)),
        }
    }
}

/// The kernels (I)-(IVb).
#[derive(Debug, Clone, PartialEq)]
pub enum KernelId {
    Maximal,
    Riesz(u32),
    Square { m: u32, n: u32 },
    Laplace(LaplaceProfile),
    Stieltjes(StieltjesMeasure),
}

impl KernelId {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelId::Riesz(n) if !(1..=2).contains(n) => Err(Error::UnsupportedOrder { what: "Riesz kernel", order: *n, max: 2 }),
            KernelId::Square { m, n } if !(1..=2).contains(&(m + n)) => {
                Err(Error::UnsupportedOrder { what: "square function kernel (M + N)", order: m + n, max: 2 })
            }
            KernelId::Laplace(p) => p.validate(),
            _ => Ok(()),
        }
    }

    /// Order of `H_t` whose `t`-norm or `t`-integral is the kernel.
    fn base_order(&self) -> Deriv {
        match *self {
            KernelId::Maximal | KernelId::Stieltjes(_) => Deriv::ZERO,
            KernelId::Riesz(n) => Deriv::new(0, n, 0),
            KernelId::Square { m, n } => Deriv::new(m, n, 0),
            KernelId::Laplace(_) => Deriv::new(1, 0, 0),
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelId::Maximal => write!(f, "maximal"),
            KernelId::Riesz(n) => write!(f, "riesz{n}"),
            KernelId::Square { m, n } => write!(f, "square:{m},{n}"),
            KernelId::Laplace(p) => write!(f, "laplace:{p}"),
            KernelId::Stieltjes(m) => write!(f, "stieltjes:{m}"),
        }
    }
}

impl FromStr for KernelId {
    type Err = Error;

    /// `maximal`, `riesz1`, `riesz2`, `square:M,N`, `laplace:<profile>`, `stieltjes:<atoms>`.
    fn from_str(s: &str) -> Result<Self> {
        let id = match s {
            "maximal" => KernelId::Maximal,
            "riesz1" | "riesz" => KernelId::Riesz(1),
            "riesz2" => KernelId::Riesz(2),
            _ => {
                if let Some(rest) = s.strip_prefix("square:") {
                    let (m, n) = rest.split_once(',').ok_or_else(|| Error::Invalid(format!("square kernel needs M,N (got '{s}')")))?;
                    let m = m.trim().parse().map_err(|_| Error::Invalid(format!("bad M in '{s}'")))?;
                    let n = n.trim().parse().map_err(|_| Error::Invalid(format!("bad N in '{s}'")))?;
                    KernelId::Square { m, n }
                } else if let Some(rest) = s.strip_prefix("laplace:") {
                    KernelId::Laplace(rest.parse()?)
                } else if let Some(rest) = s.strip_prefix("stieltjes:") {
                    KernelId::Stieltjes(rest.parse()?)
                } else {
                    return Err(Error::Invalid(format!("unknown kernel '{s}'")));
                }
            }
        };
        id.validate()?;
        Ok(id)
    }
}

/// Which derivative of the kernel is normed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Base,
    DTheta,
    DPhi,
}

impl Variant {
    fn shift(self, d: Deriv) -> Deriv {
        match self {
            Variant::Base => d,
            Variant::DTheta => Deriv::new(d.t, d.theta + 1, d.phi),
            Variant::DPhi => Deriv::new(d.t, d.theta, d.phi + 1),
        }
    }
}

/// Range and density of the `t`-grid of the maximal kernel.
pub const SUP_T_MIN: f64 = 1e-4;
pub const SUP_T_MAX: f64 = 50.0;
pub const SUP_PER_DECADE: usize = 64;

/// Grid and refined values of `sup_t |H_t|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximalNorm {
    pub grid: f64,
    pub refined: f64,
    pub argmax: f64,
}

/// Norms of a kernel and of its two first-order derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelNorms {
    pub base: f64,
    pub d_theta: f64,
    pub d_phi: f64,
}

/// Kernel evaluator for one parameter pair.
#[derive(Debug, Clone)]
pub struct CzEvaluator {
    kernel: Kernel,
}

fn check_point(theta: f64, phi: f64) -> Result<()> {
    for (name, x) in [("theta", theta), ("phi", phi)] {
        if !(0.0..=PI).contains(&x) {
            return Err(Error::Domain { name, value: x });
        }
    }
    if theta == phi {
        return Err(Error::Domain { name: "|theta - phi|", value: 0.0 });
    }
    Ok(())
}

impl CzEvaluator {
    pub fn new(params: &JacobiParams) -> Result<Self> {
        Ok(Self { kernel: Kernel::new(params)? })
    }

    pub fn from_kernel(kernel: Kernel) -> Self {
        Self { kernel }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn params(&self) -> &JacobiParams {
        self.kernel.params()
    }

    /// `t`-profile of `H_t(theta, phi)` on the layout for distance `distance`.
    pub fn profile(&self, theta: f64, phi: f64, distance: f64) -> Result<TProfile> {
        check_point(theta, phi)?;
        TProfile::build(&self.kernel, theta, phi, &Layout::new(self.params(), distance, 0.0)?)
    }

    /// `sup_t |d H_t|` for the order of `variant`; for the undifferentiated kernel with
    /// `lambda = 0` the limit `1 / mu_total` at `t = inf` is included.
    fn maximal_from(&self, prof: &TProfile, variant: Variant, is_difference: bool) -> MaximalNorm {
        let o = order_index(variant.shift(Deriv::ZERO)).expect("first order is stored");
        let (grid, refined, argmax) = prof.sup_abs(o, SUP_T_MIN, SUP_T_MAX, SUP_PER_DECADE);
        let limit = if variant == Variant::Base && !is_difference && self.params().lambda() == 0.0 {
            1.0 / self.params().mu_total()
        } else {
            0.0
        };
        if limit > refined {
            MaximalNorm { grid: grid.max(limit), refined: limit, argmax: f64::INFINITY }
        } else {
            MaximalNorm { grid, refined, argmax }
        }
    }

    /// Norm of `variant` of the kernel `id` from a profile (or a difference of profiles).
    pub fn norm_from_profile(&self, id: &KernelId, prof: &TProfile, variant: Variant, is_difference: bool) -> Result<f64> {
        let d = variant.shift(id.base_order());
        let o = order_index(d).ok_or(Error::UnsupportedOrder { what: "t-profile", order: d.total(), max: 3 })?;
        Ok(match id {
            KernelId::Maximal => self.maximal_from(prof, variant, is_difference).refined,
            KernelId::Riesz(n) => {
                let g = special::gamma(*n as f64);
                (prof.integrate(|t, v| v[o] * t.powi(*n as i32 - 1)) / g).abs()
            }
            KernelId::Square { m, n } => {
                let k = (2 * (m + n) - 1) as i32;
                prof.integrate(|t, v| v[o] * v[o] * t.powi(k)).sqrt()
            }
            KernelId::Laplace(p) => (-prof.integrate_weighted(|t| p.eval(t), o, &p.breakpoints(), p.oscillates_at_zero())).norm(),
            KernelId::Stieltjes(m) => {
                let mut acc = 0.0;
                for &(w, t) in m.atoms() {
                    if t > prof.t_end() {
                        return Err(Error::Domain { name: "atom beyond profile", value: t });
                    }
                    acc += w * prof.value(o, t);
                }
                acc.abs()
            }
        })
    }

    /// Value of the Laplace-Stieltjes kernel (or a derivative) by direct kernel evaluation.
    fn stieltjes_value(&self, m: &StieltjesMeasure, theta: f64, phi: f64, d: Deriv) -> Result<f64> {
        let mut acc = 0.0;
        for &(w, t) in m.atoms() {
            acc += w * self.kernel.eval(&KernelQuery::new(t, theta, phi).with_deriv(d))?;
        }
        Ok(acc)
    }

    /// Norms of each kernel in `ids` and of its first derivatives at `(theta, phi)`, sharing
    /// one `t`-profile.
    pub fn point_norms(&self, ids: &[KernelId], theta: f64, phi: f64) -> Result<Vec<KernelNorms>> {
        check_point(theta, phi)?;
        let needs_profile = ids.iter().any(|id| !matches!(id, KernelId::Stieltjes(_)));
        let prof = if needs_profile { Some(self.profile(theta, phi, (theta - phi).abs())?) } else { None };
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            id.validate()?;
            let norms = match id {
                KernelId::Stieltjes(m) => KernelNorms {
                    base: self.stieltjes_value(m, theta, phi, Deriv::ZERO)?.abs(),
                    d_theta: self.stieltjes_value(m, theta, phi, Deriv::new(0, 1, 0))?.abs(),
                    d_phi: self.stieltjes_value(m, theta, phi, Deriv::new(0, 0, 1))?.abs(),
                },
                _ => {
                    let p = prof.as_ref().expect("profile built");
                    KernelNorms {
                        base: self.norm_from_profile(id, p, Variant::Base, false)?,
                        d_theta: self.norm_from_profile(id, p, Variant::DTheta, false)?,
                        d_phi: self.norm_from_profile(id, p, Variant::DPhi, false)?,
                    }
                }
            };
            out.push(norms);
        }
        Ok(out)
    }

    /// `|K(theta, phi) - K(theta2, phi)|` for each kernel, on a common `t`-grid.
    pub fn difference_norms(&self, ids: &[KernelId], theta: f64, theta2: f64, phi: f64) -> Result<Vec<f64>> {
        check_point(theta, phi)?;
        check_point(theta2, phi)?;
        let distance = (theta - phi).abs().min((theta2 - phi).abs());
        let needs_profile = ids.iter().any(|id| !matches!(id, KernelId::Stieltjes(_)));
        let diff = if needs_profile {
            let layout = Layout::new(self.params(), distance, 0.0)?;
            let a = TProfile::build(&self.kernel, theta, phi, &layout)?;
            let b = TProfile::build(&self.kernel, theta2, phi, &layout)?;
            Some(a.difference(&b)?)
        } else {
            None
        };
        ids.iter()
            .map(|id| match id {
                KernelId::Stieltjes(m) => {
                    Ok((self.stieltjes_value(m, theta, phi, Deriv::ZERO)? - self.stieltjes_value(m, theta2, phi, Deriv::ZERO)?).abs())
                }
                _ => self.norm_from_profile(id, diff.as_ref().expect("profile built"), Variant::Base, true),
            })
            .collect()
    }

    /// `mu(B(theta, |theta - phi|))`.
    pub fn ball(&self, theta: f64, phi: f64) -> f64 {
        jacobi::mu_ball(self.params(), theta, (theta - phi).abs())
    }

    /// Growth and gradient rows at one point for each kernel.
    pub fn estimate_rows(&self, ids: &[KernelId], theta: f64, phi: f64) -> Result<Vec<(EstimateRow, EstimateRow)>> {
        let norms = self.point_norms(ids, theta, phi)?;
        let ball = self.ball(theta, phi);
        let dist = (theta - phi).abs();
        Ok(norms
            .into_iter()
            .map(|n| {
                let growth = EstimateRow { t: None, theta, phi, norm: n.base, bound: 1.0 / ball, ratio: n.base * ball };
                let g = n.d_theta + n.d_phi;
                let gradient = EstimateRow { t: None, theta, phi, norm: g, bound: 1.0 / (dist * ball), ratio: g * dist * ball };
                (growth, gradient)
            })
            .collect())
    }

    /// Smoothness rows for the triple `(theta, theta2, phi)` with `|theta - phi| > 2 |theta - theta2|`:
    /// ratio `|K(theta, phi) - K(theta2, phi)| |theta - phi| mu(B(theta, |theta - phi|)) / |theta - theta2|`.
    pub fn smoothness_rows(&self, ids: &[KernelId], theta: f64, theta2: f64, phi: f64) -> Result<Vec<EstimateRow>> {
        if !admissible_triple(theta, theta2, phi) {
            return Err(Error::Invalid(format!("triple ({theta}, {theta2}, {phi}) violates |theta - phi| > 2 |theta - theta'|")));
        }
        let diffs = self.difference_norms(ids, theta, theta2, phi)?;
        let dist = (theta - phi).abs();
        let h = (theta - theta2).abs();
        let ball = self.ball(theta, phi);
        Ok(diffs
            .into_iter()
            .map(|d| EstimateRow { t: None, theta, phi, norm: d, bound: h / (dist * ball), ratio: d * dist * ball / h })
            .collect())
    }
}

/// `|theta - phi| > 2 |theta - theta2| > 0`, all in `[0, pi]`.
pub fn admissible_triple(theta: f64, theta2: f64, phi: f64) -> bool {
    let inside = |x: f64| (0.0..=PI).contains(&x);
    inside(theta) && inside(theta2) && inside(phi) && theta != theta2 && (theta - phi).abs() > 2.0 * (theta - theta2).abs()
}

/// `n x n` interior grid `theta_i = (i + 1) pi / (n + 1)` without the diagonal.
pub fn off_diagonal_grid(n: usize) -> Vec<(f64, f64)> {
    let x: Vec<f64> = (1..=n).map(|i| PI * i as f64 / (n + 1) as f64).collect();
    let mut out = Vec::with_capacity(n * n);
    for (i, &a) in x.iter().enumerate() {
        for (j, &b) in x.iter().enumerate() {
            if i != j {
                out.push((a, b));
            }
        }
    }
    out
}

/// Default cap of the growth, gradient and smoothness ratios.
pub const CZ_CAP: f64 = 1e3;

fn scan_report(kind: &str, id: &KernelId, rows: Vec<EstimateRow>, cap: f64) -> EstimateReport {
    EstimateReport::new(format!("{kind}:{id}"), CapRule::Max, cap, rows)
}

pub fn growth_report(id: &KernelId, rows: Vec<EstimateRow>, cap: f64) -> EstimateReport {
    scan_report("growth", id, rows, cap)
}

pub fn gradient_report(id: &KernelId, rows: Vec<EstimateRow>, cap: f64) -> EstimateReport {
    scan_report("gradient", id, rows, cap)
}

pub fn smoothness_report(id: &KernelId, rows: Vec<EstimateRow>, cap: f64) -> EstimateReport {
    scan_report("smoothness", id, rows, cap)
}

/// Growth ratios `|K| mu(B(theta, |theta - phi|))` over `grid`.
pub fn growth_check(ev: &CzEvaluator, id: &KernelId, grid: &[(f64, f64)], cap: f64) -> Result<EstimateReport> {
    let rows = grid.iter().map(|&(th, ph)| Ok(ev.estimate_rows(core::slice::from_ref(id), th, ph)?[0].0)).collect::<Result<Vec<_>>>()?;
    Ok(growth_report(id, rows, cap))
}

/// Gradient ratios `(|d_theta K| + |d_phi K|) |theta - phi| mu(B)` over `grid`.
pub fn gradient_check(ev: &CzEvaluator, id: &KernelId, grid: &[(f64, f64)], cap: f64) -> Result<EstimateReport> {
    let rows = grid.iter().map(|&(th, ph)| Ok(ev.estimate_rows(core::slice::from_ref(id), th, ph)?[0].1)).collect::<Result<Vec<_>>>()?;
    Ok(gradient_report(id, rows, cap))
}

/// Smoothness ratios over admissible triples `(theta, theta2, phi)`.
pub fn smoothness_check(ev: &CzEvaluator, id: &KernelId, triples: &[(f64, f64, f64)], cap: f64) -> Result<EstimateReport> {
    let rows = triples
        .iter()
        .map(|&(a, b, c)| Ok(ev.smoothness_rows(core::slice::from_ref(id), a, b, c)?[0]))
        .collect::<Result<Vec<_>>>()?;
    Ok(smoothness_report(id, rows, cap))
}

pub fn maximal_kernel_norm(params: &JacobiParams, theta: f64, phi: f64) -> Result<MaximalNorm> {
    let ev = CzEvaluator::new(params)?;
    let prof = ev.profile(theta, phi, (theta - phi).abs())?;
    Ok(ev.maximal_from(&prof, Variant::Base, false))
}

/// `R_N(theta, phi) = (1/Gamma(N)) int_0^inf d_theta^N H_t(theta, phi) t^{N-1} dt`.
pub fn riesz_kernel(params: &JacobiParams, order: u32, theta: f64, phi: f64) -> Result<f64> {
    let id = KernelId::Riesz(order);
    id.validate()?;
    let ev = CzEvaluator::new(params)?;
    let prof = ev.profile(theta, phi, (theta - phi).abs())?;
    let o = order_index(Deriv::new(0, order, 0)).expect("stored order");
    Ok(prof.integrate(|t, v| v[o] * t.powi(order as i32 - 1)) / special::gamma(order as f64))
}

/// `(int_0^inf |d_theta^N d_t^M H_t|^2 t^{2M+2N-1} dt)^{1/2}`.
pub fn square_fn_kernel_norm(params: &JacobiParams, m: u32, n: u32, theta: f64, phi: f64) -> Result<f64> {
    let id = KernelId::Square { m, n };
    id.validate()?;
    let ev = CzEvaluator::new(params)?;
    let prof = ev.profile(theta, phi, (theta - phi).abs())?;
    ev.norm_from_profile(&id, &prof, Variant::Base, false)
}

/// `K_phi(theta, phi) = -int_0^inf phi(t) d_t H_t dt`.
pub fn laplace_multiplier_kernel(params: &JacobiParams, profile: &LaplaceProfile, theta: f64, phi: f64) -> Result<Complex64> {
    profile.validate()?;
    let ev = CzEvaluator::new(params)?;
    let prof = ev.profile(theta, phi, (theta - phi).abs())?;
    let o = order_index(Deriv::new(1, 0, 0)).expect("stored order");
    Ok(-prof.integrate_weighted(|t| profile.eval(t), o, &profile.breakpoints(), profile.oscillates_at_zero()))
}

/// `K_nu(theta, phi) = sum_j w_j H_{t_j}(theta, phi)`.
pub fn stieltjes_multiplier_kernel(params: &JacobiParams, measure: &StieltjesMeasure, theta: f64, phi: f64) -> Result<f64> {
    let ev = CzEvaluator::new(params)?;
    ev.stieltjes_value(measure, theta, phi, Deriv::ZERO)
}

/// Composite rule for `int_0^pi g(phi) dmu(phi)` with panels graded geometrically around
/// `theta` from half-width `h`, and Gauss-Jacobi panels absorbing the density at both ends.
/// Returns nodes and weights including the density.
pub fn graded_phi_rule(params: &JacobiParams, theta: f64, h: f64, panel_nodes: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(h > 0.0 && 4.0 * h <= theta.min(PI - theta)) {
        return Err(Error::Domain { name: "grading half-width", value: h });
    }
    let (a, b) = (params.alpha(), params.beta());
    let gl = quad::gauss_legendre(panel_nodes);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let push_gl = |lo: f64, hi: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>| {
        let m = gl.mapped(lo, hi);
        for j in 0..m.len() {
            nodes.push(m.nodes[j]);
            weights.push(m.weights[j] * jacobi::mu_density(params, m.nodes[j]));
        }
    };
    let levels = |room: f64| {
        let mut k = 0;
        while h * 2f64.powi(k + 1) <= 0.5 * room {
            k += 1;
        }
        k
    };
    let kl = levels(theta);
    let kr = levels(PI - theta);
    // left end: [0, l] with weight phi^{2 alpha + 1}
    let l = theta - h * 2f64.powi(kl);
    let gj = quad::gauss_jacobi(24, 0.0, 2.0 * a + 1.0)?;
    let scale = (0.5 * l).powf(2.0 * a + 2.0);
    for j in 0..gj.len() {
        let x = 0.5 * l * (1.0 + gj.nodes[j]);
        let g = ((0.5 * x).sin() / x).powf(2.0 * a + 1.0) * (0.5 * x).cos().powf(2.0 * b + 1.0);
        nodes.push(x);
        weights.push(gj.weights[j] * scale * g);
    }
    for k in (0..kl).rev() {
        push_gl(theta - h * 2f64.powi(k + 1), theta - h * 2f64.powi(k), &mut nodes, &mut weights);
    }
    push_gl(theta - h, theta + h, &mut nodes, &mut weights);
    for k in 0..kr {
        push_gl(theta + h * 2f64.powi(k), theta + h * 2f64.powi(k + 1), &mut nodes, &mut weights);
    }
    let r = theta + h * 2f64.powi(kr);
    // right end: [r, pi] with weight (pi - phi)^{2 beta + 1}
    let len = PI - r;
    let gj = quad::gauss_jacobi(24, 2.0 * b + 1.0, 0.0)?;
    let scale = (0.5 * len).powf(2.0 * b + 2.0);
    for j in 0..gj.len() {
        let x = r + 0.5 * len * (1.0 + gj.nodes[j]);
        let y = PI - x;
        let g = (0.5 * x).sin().powf(2.0 * a + 1.0) * ((0.5 * y).sin() / y).powf(2.0 * b + 1.0);
        nodes.push(x);
        weights.push(gj.weights[j] * scale * g);
    }
    Ok((nodes, weights))
}

/// Discretization of the Riesz pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszPairingRule {
    /// Below this `t` the kernel comes from the integral representation, above from the series.
    pub series_from: f64,
    /// Gauss-Legendre nodes per doubling `t`-panel of the series part.
    pub t_panel_nodes: usize,
    /// Gauss-Legendre nodes per `phi`-panel of the series part.
    pub phi_panel_nodes: usize,
    /// Gauss-Legendre nodes in `t` on `(0, series_from)`.
    pub small_t_nodes: usize,
    /// Gauss-Legendre nodes per `phi`-panel below `series_from`.
    pub small_phi_nodes: usize,
}

impl Default for RieszPairingRule {
    fn default() -> Self {
        Self { series_from: 0.01, t_panel_nodes: 8, phi_panel_nodes: 8, small_t_nodes: 3, small_phi_nodes: 8 }
    }
}

/// `<R_N(theta, .), P_n>_{dmu}` for `n = 0..=n_max` and `N = 1, 2` by integrating the kernel:
/// `t` outer, `phi` inner on a rule graded around `theta` at the scale of `t`.
/// Returns `[values for N = 1, values for N = 2]`.
pub fn riesz_kernel_pairing(kernel: &Kernel, theta: f64, n_max: usize) -> Result<[Vec<f64>; 2]> {
    riesz_kernel_pairing_with(kernel, theta, n_max, &RieszPairingRule::default())
}

pub fn riesz_kernel_pairing_with(kernel: &Kernel, theta: f64, n_max: usize, rule: &RieszPairingRule) -> Result<[Vec<f64>; 2]> {
    let params = *kernel.params();
    let orders = [Deriv::new(0, 1, 0), Deriv::new(0, 2, 0)];
    let lam = params.lambda();
    let slowest = (1.0 + 0.5 * lam).abs();
    let t_end = 45.0 / slowest;
    let mut out = [vec![0.0; n_max + 1], vec![0.0; n_max + 1]];

    // series part: t in [series_from, t_end] on doubling panels
    let mut t_nodes = Vec::new();
    let mut t_weights = Vec::new();
    let gl = quad::gauss_legendre(rule.t_panel_nodes);
    let mut a = rule.series_from;
    while a < t_end {
        let b = (2.0 * a).min(t_end);
        let m = gl.mapped(a, b);
        t_nodes.extend_from_slice(&m.nodes);
        t_weights.extend_from_slice(&m.weights);
        a = b;
    }
    let counts: Vec<[usize; 2]> = t_nodes
        .iter()
        .map(|&t| Ok([truncation_index(&params, t, orders[0])?, truncation_index(&params, t, orders[1])?]))
        .collect::<Result<_>>()?;
    let n_terms = counts.iter().map(|c| c[0].max(c[1])).max().unwrap_or(1).max(n_max + 1);
    let theta_tab = jacobi::deriv_sweep(&params, theta, n_terms - 1, 2)?;
    let (phis, wphi) = graded_phi_rule(&params, theta, 0.25 * rule.series_from, rule.phi_panel_nodes)?;
    // F_N(t_j) paired with P_n, accumulated over phi nodes
    let mut pair = vec![[vec![0.0; n_max + 1], vec![0.0; n_max + 1]]; t_nodes.len()];
    for (i, &ph) in phis.iter().enumerate() {
        let p = jacobi::orthonormal_sweep(&params, ph, n_terms - 1);
        for (j, &t) in t_nodes.iter().enumerate() {
            // exp(-t |k + lambda/2|) = exp(-t (k + lambda/2)) for k >= 1; the k = 0 mode is
            // constant in theta
            let q = (-t).exp();
            let mut decay = (-t * (1.0 + 0.5 * lam)).exp();
            let mut s = [0.0; 2];
            for k in 1..counts[j][0].max(counts[j][1]) {
                let c = decay * p[k];
                if k < counts[j][0] {
                    s[0] += c * theta_tab[1][k];
                }
                if k < counts[j][1] {
                    s[1] += c * theta_tab[2][k];
                }
                decay *= q;
            }
            for o in 0..2 {
                let w = wphi[i] * s[o];
                for n in 0..=n_max {
                    pair[j][o][n] += w * p[n];
                }
            }
        }
    }
    for (j, &t) in t_nodes.iter().enumerate() {
        for o in 0..2 {
            let tw = t_weights[j] * if o == 0 { 1.0 } else { t };
            for n in 0..=n_max {
                out[o][n] += tw * pair[j][o][n];
            }
        }
    }

    // integral part: t in (0, series_from)
    let ctx = kernel.integral();
    let small = quad::gauss_legendre(rule.small_t_nodes).mapped(0.0, rule.series_from);
    for j in 0..small.len() {
        let t = small.nodes[j];
        let (phis, wphi) = graded_phi_rule(&params, theta, 0.25 * t, rule.small_phi_nodes)?;
        let mut acc = [vec![0.0; n_max + 1], vec![0.0; n_max + 1]];
        for (i, &ph) in phis.iter().enumerate() {
            let v = ctx.h_script(t, theta, ph, &orders, false)?;
            let p = jacobi::orthonormal_sweep(&params, ph, n_max);
            for o in 0..2 {
                for n in 0..=n_max {
                    acc[o][n] += wphi[i] * v[o] * p[n];
                }
            }
        }
        for o in 0..2 {
            let tw = small.weights[j] * if o == 0 { 1.0 } else { t };
            for n in 0..=n_max {
                out[o][n] += tw * acc[o][n];
            }
        }
    }
    Ok(out)
}

/// Kernel route against the spectral value `|n + lambda/2|^{-N} d^N P_n(theta)` for `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszCheckRow {
    pub order: u32,
    pub n: usize,
    pub theta: f64,
    pub kernel_route: f64,
    pub spectral_route: f64,
}

impl RieszCheckRow {
    /// Difference relative to `max(|spectral|, scale)`, with `scale` the size of `d^N P_n` on
    /// the grid (guards against zeros of the derivative).
    pub fn rel_diff(&self, scale: f64) -> f64 {
        (self.kernel_route - self.spectral_route).abs() / self.spectral_route.abs().max(scale)
    }
}

pub fn riesz_spectral_check(kernel: &Kernel, theta: f64, n_max: usize) -> Result<Vec<RieszCheckRow>> {
    let params = kernel.params();
    let pair = riesz_kernel_pairing(kernel, theta, n_max)?;
    let d = jacobi::deriv_sweep(params, theta, n_max, 2)?;
    let mut rows = Vec::new();
    for order in 1..=2u32 {
        for n in 1..=n_max {
            let spectral = params.eigen_root(n).powi(-(order as i32)) * d[order as usize][n];
            rows.push(RieszCheckRow { order, n, theta, kernel_route: pair[order as usize - 1][n], spectral_route: spectral });
        }
    }
    Ok(rows)
}

impl fmt::Display for MaximalNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "grid {} refined {} at t = {}", self.grid, self.refined, self.argmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{closed_form_chebyshev, Method};
    use alloc::string::ToString;

    fn chebyshev() -> JacobiParams {
        JacobiParams::new(-0.5, -0.5).unwrap()
    }

    /// Abel sum of `sum_{n >= 1} sin(n x)`.
    fn sine_sum(x: f64) -> f64 {
        0.5 / (0.5 * x).tan()
    }

    #[test]
    fn parsing_round_trips() {
        for s in ["maximal", "riesz1", "riesz2", "square:1,0", "square:0,2", "laplace:indicator:0.5,2", "laplace:imag:1.5", "stieltjes:1@0.5;-2@1"] {
            let id: KernelId = s.parse().unwrap();
            assert_eq!(id.to_string().parse::<KernelId>().unwrap(), id, "{s}");
        }
        assert!("riesz3".parse::<KernelId>().is_err());
        assert!("square:2,1".parse::<KernelId>().is_err());
        assert!("laplace:indicator:2,1".parse::<KernelId>().is_err());
        assert!("stieltjes:1@-1".parse::<KernelId>().is_err());
    }

    #[test]
    fn laplace_multipliers() {
        let p = LaplaceProfile::Indicator { a: 0.5, b: 2.0 };
        for z in [0.01, 0.3, 1.0, 4.0, 30.0] {
            let want = (-0.5 * z).exp() - (-2.0 * z).exp();
            assert!((p.multiplier(z).unwrap().re - want).abs() < 1e-13, "{z}");
        }
        let p = LaplaceProfile::ImaginaryPower { gamma: 1.3 };
        for z in [0.05, 0.5, 1.0, 7.5, 40.0] {
            let want = Complex64::from_polar(1.0, 1.3 * z.ln());
            assert!((p.multiplier(z).unwrap() - want).norm() < 1e-12, "{z}");
        }
        assert_eq!(LaplaceProfile::Constant(1.0).multiplier(0.0).unwrap(), Complex64::new(0.0, 0.0));
        assert!((LaplaceProfile::Constant(2.0).multiplier(3.0).unwrap().re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_riesz_kernels() {
        let p = chebyshev();
        for (th, ph) in [(0.7, 2.0), (2.5, 1.1), (0.3, 0.5)] {
            let want = -(sine_sum(th + ph) + sine_sum(th - ph)) / PI;
            let got = riesz_kernel(&p, 1, th, ph).unwrap();
            assert!((got - want).abs() < 1e-9, "{th} {ph}: {got} vs {want}");
            let got = riesz_kernel(&p, 2, th, ph).unwrap();
            assert!((got - 1.0 / PI).abs() < 1e-9, "{th} {ph}: {got}");
        }
    }

    #[test]
    fn chebyshev_maximal_and_laplace_kernels() {
        let p = chebyshev();
        let (th, ph) = (1.0, 1.4);
        let m = maximal_kernel_norm(&p, th, ph).unwrap();
        let mut best: f64 = 0.0;
        for i in 0..=200_000 {
            let t = 1e-4 * (5e5f64).powf(i as f64 / 200_000.0);
            best = best.max(closed_form_chebyshev(t, th, ph).abs());
        }
        assert!((m.refined - best).abs() < 1e-8 * best, "{} vs {best}", m.refined);
        assert!(m.refined >= m.grid);

        let prof = LaplaceProfile::Indicator { a: 0.25, b: 3.0 };
        let got = laplace_multiplier_kernel(&p, &prof, th, ph).unwrap();
        let want = closed_form_chebyshev(0.25, th, ph) - closed_form_chebyshev(3.0, th, ph);
        assert!((got.re - want).abs() < 1e-10 && got.im == 0.0, "{got} vs {want}");

        let nu: StieltjesMeasure = "2@0.5;-1@1.5".parse().unwrap();
        let got = stieltjes_multiplier_kernel(&p, &nu, th, ph).unwrap();
        let want = 2.0 * closed_form_chebyshev(0.5, th, ph) - closed_form_chebyshev(1.5, th, ph);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn square_function_norm_matches_direct_quadrature() {
        let p = JacobiParams::new(0.5, -0.25).unwrap();
        let k = Kernel::new(&p).unwrap();
        let (th, ph) = (1.2, 2.0);
        let f = |t: f64| {
            let method = if t < 0.05 { Method::Integral } else { Method::Series };
            let q = KernelQuery::new(t, th, ph).with_deriv(Deriv::new(1, 1, 0)).with_method(method);
            let v = k.eval(&q).unwrap();
            v * v * t.powi(3)
        };
        let direct = quad::adaptive_gk(f, 1e-9, 1.0, 0.0, 1e-12, 500).unwrap() + quad::adaptive_gk(f, 1.0, 200.0, 0.0, 1e-12, 500).unwrap();
        let got = square_fn_kernel_norm(&p, 1, 1, th, ph).unwrap();
        assert!((got - direct.sqrt()).abs() < 1e-8 * got, "{got} vs {}", direct.sqrt());
    }

    #[test]
    fn phi_rule_integrates_the_measure() {
        for (a, b) in [(-0.5, -0.5), (0.5, 2.0), (-0.9, 0.3)] {
            let p = JacobiParams::new(a, b).unwrap();
            for (th, h) in [(0.4, 1e-4), (2.8, 0.01), (1.6, 0.3)] {
                let (x, w) = graded_phi_rule(&p, th, h, 16).unwrap();
                let total: f64 = w.iter().sum();
                assert!((total - p.mu_total()).abs() < 1e-13 * p.mu_total(), "{a} {b} {th}");
                let mut gram = 0.0;
                for (xi, wi) in x.iter().zip(&w) {
                    let s = jacobi::orthonormal_sweep(&p, *xi, 3);
                    gram += wi * s[3] * s[3];
                }
                assert!((gram - 1.0).abs() < 1e-12, "{a} {b} {th} {gram}");
            }
            assert!(graded_phi_rule(&p, 0.1, 0.05, 8).is_err());
        }
    }

    #[test]
    fn riesz_pairing_reproduces_the_spectral_transform() {
        let p = JacobiParams::new(0.5, -0.25).unwrap();
        let k = Kernel::new(&p).unwrap();
        let rows = riesz_spectral_check(&k, 1.0, 4).unwrap();
        for r in rows {
            assert!(r.rel_diff(1.0) < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn scans_on_a_small_grid() {
        let p = JacobiParams::new(0.5, 0.5).unwrap();
        let ev = CzEvaluator::new(&p).unwrap();
        let grid = off_diagonal_grid(3);
        assert_eq!(grid.len(), 6);
        let ids: [KernelId; 2] = [KernelId::Maximal, KernelId::Riesz(1)];
        for id in &ids {
            assert!(growth_check(&ev, id, &grid, CZ_CAP).unwrap().pass());
            assert!(gradient_check(&ev, id, &grid, CZ_CAP).unwrap().pass());
        }
        let triples = [(1.0, 1.1, 2.0), (2.5, 2.3, 0.5)];
        assert!(smoothness_check(&ev, &KernelId::Square { m: 1, n: 0 }, &triples, CZ_CAP).unwrap().pass());
        assert!(!admissible_triple(1.0, 1.3, 1.5));
        assert!(ev.smoothness_rows(&ids, 1.0, 1.3, 1.5).is_err());
    }
}
