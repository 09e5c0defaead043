//! Fixed-precision float formatting shared by the JSON and CSV writers.

/// Formats `x` like C's `%.17g`: 17 significant digits, trailing zeros
/// dropped, exponent notation outside `[1e-5, 1e17)`.
pub fn g17(x: f64) -> String {
    g(x, 17)
}

/// `%.{digits}g` formatting.
pub fn g(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
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
    fn matches_printf() {
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(std::f64::consts::FRAC_1_SQRT_2), "0.70710678118654757");
        assert_eq!(g17(-2.5e-7), "-2.4999999999999999e-07");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g(0.123456, 3), "0.123");
        assert_eq!(g(0.0, 17), "0");
    }

    #[test]
    fn round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, 6.02e23, -7.5] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
