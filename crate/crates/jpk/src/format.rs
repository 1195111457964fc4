//! Float formatting shared by every output: shortest decimal that reads back to the same `f64`.

/// Shortest round-trip representation; `NaN`, `inf` and `-inf` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        ryu::Buffer::new().format_finite(x).to_string()
    }
}

/// `x` rounded to `digits` significant digits, then printed as [`fmt_f64`].
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() || x == 0.0 {
        return fmt_f64(x);
    }
    let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, x).parse().expect("formatted float parses");
    fmt_f64(rounded)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_rounding() {
        for x in [0.1, 1.0, -2.5e-7, 1e300, 123456789.125, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_sig(std::f64::consts::PI, 15), "3.14159265358979");
        assert_eq!(fmt_sig(-1.0 / 3.0, 3), "-0.333");
    }
}
