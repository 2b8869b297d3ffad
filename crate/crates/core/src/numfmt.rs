//! Fixed-point rendering of floats at a given number of significant digits.
//!
//! Used for the trace CSV and the CLI reports so that output is compact,
//! plot-friendly, and byte-identical across runs.

/// Renders `x` with `digits` significant digits in plain fixed-point
/// notation, trimming trailing zeros (`-5.000000000` becomes `-5`).
pub fn format_sig(x: f64, digits: u32) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - exponent).clamp(0, 18) as usize;
    let rendered = format!("{x:.decimals$}");
    if rendered.contains('.') {
        let trimmed = rendered.trim_end_matches('0').trim_end_matches('.');
        if trimmed == "-0" {
            "0".to_string()
        } else {
            trimmed.to_string()
        }
    } else {
        rendered
    }
}

/// Rounds `x` to `digits` significant digits by rendering and re-parsing.
pub fn round_sig(x: f64, digits: u32) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format_sig(x, digits).parse().unwrap_or(x)
}
