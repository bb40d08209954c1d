//! Minimal CSV writer: `#`-prefixed metadata lines, a header row, then
//! comma-separated values with `.` decimals.

use std::fmt::Write;

/// Renders a table. Floats are written with Rust's shortest round-trip format.
pub fn render(metadata: &[(String, String)], header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k}: {v}");
    }
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

fn format_value(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}
