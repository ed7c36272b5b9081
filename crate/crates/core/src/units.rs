//! Duration constants and parsing. All durations are minutes.

use crate::error::{ModelError, Result};

pub const HOUR: f64 = 60.0;
pub const DAY: f64 = 1440.0;
pub const WEEK: f64 = 7.0 * DAY;
/// 30 days.
pub const MONTH: f64 = 30.0 * DAY;
/// Twelve 30-day months (360 days). This is the year length under which the
/// yield table for periodic checkpointing is reproduced.
pub const YEAR: f64 = 12.0 * MONTH;

/// Parses `1d`, `1w`, `1mo`, `1y`, `90m`, `2h` or a bare number of minutes.
pub fn parse_minutes(text: &str) -> Result<f64> {
    let s = text.trim();
    let split = s.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(s.len());
    let (num, suffix) = s.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| ModelError::Duration(text.to_string()))?;
    let scale = match suffix.to_ascii_lowercase().as_str() {
        "" | "m" | "min" => 1.0,
        "h" => HOUR,
        "d" => DAY,
        "w" => WEEK,
        "mo" => MONTH,
        "y" => YEAR,
        _ => return Err(ModelError::Duration(text.to_string())),
    };
    let minutes = value * scale;
    if !minutes.is_finite() {
        return Err(ModelError::Duration(text.to_string()));
    }
    Ok(minutes)
}

/// Short human label for one of the canonical MTBF values, falling back to
/// minutes.
pub fn label_minutes(minutes: f64) -> String {
    for (unit, name) in [(YEAR, "y"), (MONTH, "mo"), (WEEK, "w"), (DAY, "d")] {
        let ratio = minutes / unit;
        if ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9 {
            return format!("{}{}", ratio.round() as u64, name);
        }
    }
    format!("{minutes}m")
}
