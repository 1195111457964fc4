//! Gamma-family special functions.
//!
//! Every Gamma, log-Gamma and Beta value in the crate goes through this module, so the
//! numbers have one provenance. Real arguments are delegated to `libm`; the complex Gamma
//! function uses a Lanczos approximation.

#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;
use num_complex::Complex64;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln |Gamma(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `1 / Gamma(x)`, which is entire; zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        return 0.0;
    }
    1.0 / gamma(x)
}

pub fn beta(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 && a + b > 100.0 {
        return ln_beta(a, b).exp();
    }
    gamma(a) * gamma(b) * rgamma(a + b)
}

/// `ln B(a, b)` for positive arguments.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Rising factorial `(a)_n`.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function of a complex argument.
pub fn gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi / ((pi * z).sin() * gamma_complex(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_half_integers() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-15);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn rgamma_vanishes_at_poles() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!(rgamma(-0.5) < 0.0);
        assert!((rgamma(1e-9) - 1e-9).abs() < 1e-17);
    }

    #[test]
    fn beta_matches_gamma_ratio() {
        assert!((beta(0.5, 0.5) - PI).abs() < 1e-14);
        assert!((beta(1.0, 1.0) - 1.0).abs() < 1e-15);
        let b = beta(60.0, 70.0);
        assert!((b.ln() - ln_beta(60.0, 70.0)).abs() < 1e-12);
    }

    #[test]
    fn complex_gamma_agrees_with_real_axis_and_reflection() {
        for &x in &[0.3, 1.0, 2.5, 7.25, -0.4, -1.7] {
            let g = gamma_complex(Complex64::new(x, 0.0));
            assert!((g.re - gamma(x)).abs() < 1e-13 * gamma(x).abs().max(1.0), "x={x}");
            assert!(g.im.abs() < 1e-13);
        }
        // |Gamma(i y)|^2 = pi / (y sinh(pi y))
        let y = 0.8;
        let g = gamma_complex(Complex64::new(0.0, y));
        assert!((g.norm_sqr() - PI / (y * (PI * y).sinh())).abs() < 1e-13);
    }

    #[test]
    fn pochhammer_small_cases() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(3.0, 3), 60.0);
        assert!((pochhammer(0.5, 2) - 0.75).abs() < 1e-16);
    }
}
