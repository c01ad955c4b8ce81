//! Stable number rendering for CSV and JSON output.
//!
//! Every number is rounded to 12 significant digits and printed in the
//! shortest `%g`-style form; infinities are the strings `inf` / `-inf`.

use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        return format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to 12 significant digits as a JSON value; non-finite values
/// become strings.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        let rounded: f64 = fmt_num(x).parse().expect("formatted number parses");
        serde_json::Number::from_f64(rounded)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    } else {
        Value::String(fmt_num(x))
    }
}
