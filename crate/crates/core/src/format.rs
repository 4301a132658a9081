//! Decimal output with twelve significant digits.

/// Formats `x` with 12 significant digits, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-6..=15).contains(&exp) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_num;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(4.0), "4");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(123456.789), "123456.789");
        assert_eq!(fmt_num(1e-12), "1.00000000000e-12");
    }
}
