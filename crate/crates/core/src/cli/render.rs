//! Byte-stable text renderings of reports: JSON, CSV and aligned tables.

use serde::Serialize;
use serde_json::Value;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        // folds -0.0 into 0.0
        return format!("{:.16e}", 0.0f64);
    }
    format!("{v:.16e}")
}

/// Serializes `value` as indented JSON. Arrays of scalars stay on one line;
/// arrays holding objects or arrays put one element per line.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_f64(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            let nested = items.iter().any(|x| x.is_array() || x.is_object());
            if !nested || items.is_empty() {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_value(out, x, level);
                }
                out.push(']');
            } else {
                write_block(out, '[', ']', items.iter().map(|x| (None, x)), level);
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
            } else {
                write_block(out, '{', '}', map.iter().map(|(k, x)| (Some(k), x)), level);
            }
        }
    }
}

fn write_block<'a>(
    out: &mut String,
    open: char,
    close: char,
    entries: impl Iterator<Item = (Option<&'a String>, &'a Value)>,
    level: usize,
) {
    out.push(open);
    let mut first = true;
    for (key, x) in entries {
        out.push_str(if first { "\n" } else { ",\n" });
        first = false;
        indent(out, level + 1);
        if let Some(k) = key {
            out.push_str(&Value::String(k.clone()).to_string());
            out.push_str(": ");
        }
        write_value(out, x, level + 1);
    }
    out.push('\n');
    indent(out, level);
    out.push(close);
}

/// Comma-separated rows with LF line endings; fields are quoted only when needed.
pub fn to_csv(header: &[String], rows: &[Vec<String>]) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is built from UTF-8 fields"))
}

/// Left-aligned first column, right-aligned remaining columns.
pub fn to_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let mut s = parts.join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(header);
    for r in rows {
        out.push_str(&line(r));
    }
    out
}
