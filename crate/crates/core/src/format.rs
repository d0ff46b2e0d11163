//! Fixed-precision number formatting shared by the CSV and JSON outputs.
//!
//! Numbers are written with 9 significant digits in the style of C's `%.9g`:
//! fixed notation for decimal exponents in [-4, 9), scientific otherwise,
//! trailing zeros removed. Re-formatting a parsed value reproduces the same
//! text.

/// Significant digits carried by every serialized number.
pub const SIGNIFICANT_DIGITS: usize = 9;

pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

/// Rounds `x` to the value its 9-significant-digit text parses back to.
pub fn round_sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
