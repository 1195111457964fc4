use std::f64::consts::PI;

use jpk_core::cz::{self, LaplaceProfile, MultiplierSpec, StieltjesMeasure};
use jpk_core::jacobi::{self, theta_quad_rule, trig_poly_deriv, trig_poly_eval};
use jpk_core::spectral::{analyze, Expansion};
use jpk_core::{quad, special, Deriv, JacobiParams, Kernel, KernelQuery, Method, OrthonormalBasis};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = JacobiParams> {
    (-0.95f64..2.5, -0.95f64..2.5).prop_map(|(a, b)| JacobiParams::new(a, b).unwrap())
}

fn angle() -> impl Strategy<Value = f64> {
    0.0f64..=PI
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_constants(p in params()) {
        let closed = special::gamma(p.alpha() + 1.0) * special::gamma(p.beta() + 1.0) / special::gamma(p.lambda() + 1.0);
        prop_assert!(rel(p.mu_total(), closed) < 1e-10);
        prop_assert!(p.c_ab() > 0.0);
        prop_assert!((p.c_ab() * p.lambda().exp2() * p.mu_total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_matrix_is_identity(p in params()) {
        let rule = theta_quad_rule(&p, 64).unwrap();
        let mut gram = vec![[0.0f64; 31]; 31];
        for (&th, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = jacobi::orthonormal_sweep(&p, th, 30);
            for n in 0..=30 {
                for m in 0..=30 {
                    gram[n][m] += w * v[n] * v[m];
                }
            }
        }
        for n in 0..=30 {
            for m in 0..=30 {
                let want = if n == m { 1.0 } else { 0.0 };
                prop_assert!((gram[n][m] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn first_derivative_matches_central_difference(p in params(), n in 0usize..=10, th in 0.01f64..PI - 0.01) {
        let basis = OrthonormalBasis::new(p, 10);
        let h = 1e-5;
        let fd = (trig_poly_eval(&basis, n, th + h).unwrap() - trig_poly_eval(&basis, n, th - h).unwrap()) / (2.0 * h);
        let d = trig_poly_deriv(&basis, n, th, 1).unwrap();
        let scale = (0..=n).map(|k| trig_poly_eval(&basis, k, th).unwrap().abs()).fold(1.0, f64::max);
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(scale), "{d} vs {fd}");
    }

    #[test]
    fn ball_measure_is_comparable_with_its_surrogate(p in params(), th in angle(), ph in angle()) {
        prop_assume!((th - ph).abs() > 1e-6);
        let r = jacobi::mu_ball(&p, th, (th - ph).abs()) / jacobi::ball_surrogate(&p, th, ph);
        prop_assert!(r.is_finite() && r > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_symmetric_and_positive(p in params(), t in 0.05f64..5.0, th in angle(), ph in angle()) {
        let k = Kernel::new(&p).unwrap();
        let a = k.eval(&KernelQuery::new(t, th, ph)).unwrap();
        let b = k.eval(&KernelQuery::new(t, ph, th)).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!(k.eval_script(&KernelQuery::new(t, th, ph)).unwrap() > 0.0);
    }

    #[test]
    fn series_and_integral_representations_agree(p in params(), t in 0.1f64..1.0, th in angle(), ph in angle()) {
        prop_assume!((th - ph).abs() > 0.05);
        let k = Kernel::new(&p).unwrap();
        let s = k.eval(&KernelQuery::new(t, th, ph).with_method(Method::Series)).unwrap();
        let i = k.eval(&KernelQuery::new(t, th, ph).with_method(Method::Integral)).unwrap();
        prop_assert!(rel(i, s) < 1e-8, "{i} vs {s}");
        let s = k.eval(&KernelQuery::new(t, th, ph).with_deriv(Deriv::new(1, 1, 0)).with_method(Method::Series)).unwrap();
        let i = k.eval(&KernelQuery::new(t, th, ph).with_deriv(Deriv::new(1, 1, 0)).with_method(Method::Integral)).unwrap();
        prop_assert!((i - s).abs() < 1e-8 * s.abs().max(1.0), "{i} vs {s}");
    }

    #[test]
    fn mass_identity(p in params(), t in 0.5f64..5.0, th in angle()) {
        let k = Kernel::new(&p).unwrap();
        let rule = theta_quad_rule(&p, 96).unwrap();
        let mut mass = 0.0;
        for (&ph, &w) in rule.nodes.iter().zip(&rule.weights) {
            mass += w * k.eval(&KernelQuery::new(t, th, ph)).unwrap();
        }
        prop_assert!((mass - (-0.5 * t * p.lambda().abs()).exp()).abs() < 1e-8);
    }

    #[test]
    fn semigroup_identity(p in params(), s in 0.3f64..1.0, t in 0.3f64..1.0, th in angle(), ph in angle()) {
        let k = Kernel::new(&p).unwrap();
        let rule = theta_quad_rule(&p, 96).unwrap();
        let mut acc = 0.0;
        for (&psi, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * k.eval(&KernelQuery::new(s, th, psi)).unwrap() * k.eval(&KernelQuery::new(t, psi, ph)).unwrap();
        }
        let direct = k.eval(&KernelQuery::new(s + t, th, ph)).unwrap();
        prop_assert!(rel(acc, direct) < 1e-6);
    }

    #[test]
    fn analysis_inverts_synthesis(p in params(), c in proptest::collection::vec(-2.0f64..2.0, 1..12)) {
        let e = Expansion::new(p, c.clone()).unwrap();
        let back = analyze(p, c.len() - 1, c.len() + 4, |th| e.synthesize(th).unwrap()).unwrap();
        for (x, y) in back.real_coeffs().unwrap().iter().zip(&c) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn imaginary_powers_preserve_the_norm(p in params(), gamma in -3.0f64..3.0, c in proptest::collection::vec(-2.0f64..2.0, 1..12)) {
        prop_assume!(p.eigen_root(0) > 0.0);
        let e = Expansion::new(p, c).unwrap();
        let out = e.multiplier_apply(&MultiplierSpec::Laplace(LaplaceProfile::ImaginaryPower { gamma })).unwrap();
        prop_assert!(!out.dropped_mode);
        prop_assert!((out.expansion.norm_sq() - e.norm_sq()).abs() < 1e-12 * e.norm_sq().max(1.0));
    }

    #[test]
    fn semigroup_contracts_monotonically(p in params(), t in 0.0f64..3.0, dt in 0.01f64..1.0, c in proptest::collection::vec(-2.0f64..2.0, 1..12)) {
        prop_assume!(p.lambda() != 0.0 && c.iter().any(|x| *x != 0.0));
        let e = Expansion::new(p, c).unwrap();
        let a = e.semigroup_apply(t).unwrap().norm_sq();
        let b = e.semigroup_apply(t + dt).unwrap().norm_sq();
        prop_assert!(b < a && a <= e.norm_sq());
    }

    #[test]
    fn point_mass_multiplier_is_the_semigroup(p in params(), t0 in 0.01f64..5.0, c in proptest::collection::vec(-2.0f64..2.0, 1..12)) {
        let e = Expansion::new(p, c).unwrap();
        let nu = StieltjesMeasure::new(vec![(1.0, t0)]).unwrap();
        let out = e.multiplier_apply(&MultiplierSpec::Stieltjes(nu)).unwrap();
        prop_assert_eq!(out.expansion, e.semigroup_apply(t0).unwrap());
    }

    #[test]
    fn indicator_multiplier_closed_form(a in 0.0f64..3.0, len in 0.01f64..3.0, z in 0.001f64..50.0) {
        let b = a + len;
        let m = LaplaceProfile::Indicator { a, b }.multiplier(z).unwrap();
        prop_assert!((m.re - ((-a * z).exp() - (-b * z).exp())).abs() < 1e-12);
    }
}

#[test]
fn g_function_cross_terms_against_t_quadrature() {
    let p = JacobiParams::new(0.3, -0.4).unwrap();
    let e = Expansion::new(p, vec![0.0, 1.0, 1.0]).unwrap();
    for th in [0.3, 1.7, 2.9] {
        let g = e.g_function(1, 0, &[th]).unwrap()[0];
        let v = jacobi::orthonormal_sweep(&p, th, 2);
        let (a1, a2) = (p.eigen_root(1), p.eigen_root(2));
        let f = |t: f64| {
            let d = -a1 * (-t * a1).exp() * v[1] - a2 * (-t * a2).exp() * v[2];
            d * d * t
        };
        let q = quad::adaptive_gk(f, 0.0, 80.0, 0.0, 1e-13, 500).unwrap();
        assert!((g - q.sqrt()).abs() < 1e-8, "{g} vs {}", q.sqrt());
    }
}

/// Applying the operators through their kernels (quadrature in `phi`) against the spectral route.
#[test]
fn kernel_and_spectral_routes_agree() {
    for (a, b) in [(0.5, -0.75), (-0.75, -0.75), (0.0, 0.0)] {
        let p = JacobiParams::new(a, b).unwrap();
        let k = Kernel::new(&p).unwrap();
        let rule = theta_quad_rule(&p, 80).unwrap();
        let f = Expansion::new(p, vec![0.3, -1.0, 0.5, 0.25, -0.1]).unwrap();
        let fv: Vec<f64> = rule.nodes.iter().map(|&ph| f.synthesize(ph).unwrap()).collect();
        let pair = |theta: f64, kern: &dyn Fn(f64, f64) -> f64| -> f64 {
            rule.nodes.iter().zip(&rule.weights).zip(&fv).map(|((&ph, &w), &v)| w * kern(theta, ph) * v).sum()
        };
        let h = |t: f64, th: f64, ph: f64| k.eval(&KernelQuery::new(t, th, ph)).unwrap();
        for th in [0.4, 1.3, 2.6] {
            // semigroup
            let spectral = f.semigroup_apply(0.7).unwrap().synthesize(th).unwrap();
            let kernel = pair(th, &|x, y| h(0.7, x, y));
            assert!((kernel - spectral).abs() < 1e-7, "semigroup {a} {b}: {kernel} vs {spectral}");
            // Laplace-Stieltjes: nu = 2 delta_{0.5} - delta_{1.5}
            let nu = StieltjesMeasure::new(vec![(2.0, 0.5), (-1.0, 1.5)]).unwrap();
            let spectral = f.multiplier_apply(&MultiplierSpec::Stieltjes(nu.clone())).unwrap().expansion.synthesize(th).unwrap();
            let kernel = pair(th, &|x, y| cz::stieltjes_multiplier_kernel(&p, &nu, x, y).unwrap());
            assert!(rel(kernel, spectral) < 1e-5, "stieltjes {a} {b}: {kernel} vs {spectral}");
        }
        // Laplace with an indicator profile (each kernel value needs a full t-profile)
        let coarse = theta_quad_rule(&p, 40).unwrap();
        let prof = LaplaceProfile::Indicator { a: 0.5, b: 2.0 };
        let th = 1.3;
        let spectral = f.multiplier_apply(&MultiplierSpec::Laplace(prof)).unwrap().expansion.synthesize(th).unwrap();
        let kernel: f64 = coarse
            .nodes
            .iter()
            .zip(&coarse.weights)
            .map(|(&ph, &w)| w * cz::laplace_multiplier_kernel(&p, &prof, th, ph).unwrap().re * f.synthesize(ph).unwrap())
            .sum();
        assert!(rel(kernel, spectral) < 1e-5, "laplace {a} {b}: {kernel} vs {spectral}");
    }
}

#[test]
fn scan_summary_is_invariant_under_relabeling() {
    let p = JacobiParams::new(0.5, 0.0).unwrap();
    let ev = cz::CzEvaluator::new(&p).unwrap();
    let grid = cz::off_diagonal_grid(4);
    let mut relabeled = grid.clone();
    relabeled.reverse();
    let id = cz::KernelId::Riesz(1);
    let a = cz::gradient_check(&ev, &id, &grid, cz::CZ_CAP).unwrap();
    let b = cz::gradient_check(&ev, &id, &relabeled, cz::CZ_CAP).unwrap();
    assert_eq!(a.summary, b.summary);
}
