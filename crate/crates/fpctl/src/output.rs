//! Deterministic text encodings of the results.
//!
//! Floats in CSV are written with 17 significant digits in scientific notation
//! (`.` decimal separator, no locale), which round-trips every `f64`. JSON uses
//! the shortest representation that parses back to the same value.

use serde::Serialize;

/// `x` with 17 significant digits; `nan`, `inf` and `-inf` for non-finite values.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Renders a header and rows as CSV.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
