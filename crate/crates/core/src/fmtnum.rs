//! Report number formatting.
//!
//! Probabilities render as 4-significant-digit scientific notation with a
//! capital `E` (`2.114E-4`); percent changes as signed fixed two-decimal
//! strings (`+403.78`). Both shapes are stable across platforms and are part
//! of the report file format, so they live here rather than in the CLI.

use alloc::format;
use alloc::string::String;

/// Format a probability to 4 significant digits, e.g. `2.114E-4`.
pub fn format_sci4(value: f64) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    let mut s = format!("{value:.3e}");
    if let Some(pos) = s.find('e') {
        s.replace_range(pos..=pos, "E");
    }
    s
}

/// Format a percent change with sign and two decimals, e.g. `+403.78`.
pub fn format_pct(value: f64) -> String {
    if !value.is_finite() {
        return format!("{value}");
    }
    format!("{value:+.2}")
}
