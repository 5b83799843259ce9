//! Full-precision text formatting for CSV output.

/// Formats `v` like C's `%.17g`: 17 significant digits, trailing zeros
/// trimmed, switching to exponent form for extreme magnitudes. 17 digits are
/// enough for `f64::from_str` to recover the exact bits.
pub(crate) fn g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // Decimal exponent from the normalized e-form.
    let e_form = format!("{:.16e}", v);
    let (mantissa, exp) = e_form.split_once('e').expect("e-form always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");

    if (-4..17).contains(&exp) {
        // Fixed form with 16−exp fractional digits (17 significant total).
        let frac = (16 - exp).max(0) as usize;
        let s = format!("{v:.frac$}");
        trim_zeros(&s)
    } else {
        let m = trim_zeros(mantissa);
        format!("{}e{}{:02}", m, if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// Drops trailing fractional zeros (and a bare trailing point).
fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::g17;

    #[test]
    fn matches_c_g_conversions() {
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(250.0), "250");
        assert_eq!(g17(-1.5), "-1.5");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(g17(1.23e21), "1.23e+21");
    }

    #[test]
    fn output_parses_back_to_identical_bits() {
        for &v in &[
            0.1,
            -3.3333333333333335,
            1e300,
            -2.2250738585072014e-308,
            987654321.123456789,
            f64::MIN_POSITIVE,
        ] {
            let back: f64 = g17(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "value {v}");
        }
    }
}
