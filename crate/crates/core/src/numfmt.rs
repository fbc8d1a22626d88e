//! Locale-independent number formatting for CSV and JSON output.

/// Significant digits used for all printed numbers.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` like C's `%.12g`: at most 12 significant digits, trailing
/// zeros trimmed, scientific notation only for very large or small magnitudes.
pub fn fmt_sig(x: f64) -> String {
    fmt_sig_n(x, SIG_DIGITS)
}

/// `%.{digits}g` formatting.
pub fn fmt_sig_n(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// Rounds to 12 significant digits, for JSON output through serde.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    fmt_sig(x).parse().unwrap_or(x)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(fmt_sig(0.0721), "0.0721");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig(0.0001), "0.0001");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
    }

    #[test]
    fn rounding_is_stable() {
        let x = 0.1 + 0.2;
        assert_eq!(round_sig(x), 0.3);
        assert_eq!(round_sig(round_sig(x)), round_sig(x));
    }
}
