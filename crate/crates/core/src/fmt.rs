//! Deterministic number formatting for output files.

/// Shortest representation that parses back to the same `f64`.
pub fn round_trip(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

/// `x` rounded to six significant digits, without trailing zeros.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let s = format!("{x:.5e}");
    let rounded: f64 = s.parse().expect("formatted float parses");
    format!("{rounded}")
}
