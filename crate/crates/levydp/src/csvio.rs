//! Minimal RFC-4180 CSV writing.

use std::io::Write;

/// Quotes a field when it contains a comma, quote, or line break;
/// embedded quotes are doubled.
pub fn escape_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Writes one CSV record terminated by CRLF.
pub fn write_record<W: Write, S: AsRef<str>>(w: &mut W, fields: &[S]) -> std::io::Result<()> {
    let line: Vec<String> = fields.iter().map(|f| escape_field(f.as_ref())).collect();
    write!(w, "{}\r\n", line.join(","))
}

/// Formats a float with `.` as the decimal separator (shortest
/// round-trip representation).
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
