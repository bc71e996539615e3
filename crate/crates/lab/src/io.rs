//! Tables, CSV and JSON writers, and path files.
//!
//! Floats are written as `{:.16e}` (17 significant digits) everywhere, so a
//! file read back and written again is byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use holderlab_core::fbm::FbmPath;
use holderlab_core::GridFunction;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::LabError;

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A named table whose cells are JSON scalars: integers, floats or null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Float cell, or null when the value is not finite.
pub fn float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn int(v: u64) -> Value {
    Value::from(v)
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (_, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => fmt_float(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Pretty JSON with sorted keys (the default `serde_json` map) and fixed
/// float formatting.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_json(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_json(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Number(n) if n.is_f64() => out.push_str(&fmt_float(n.as_f64().unwrap())),
        Value::Array(items) if !items.is_empty() => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_json(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, depth + 1);
                let _ = write!(out, "{}: ", Value::String(k.clone()));
                write_json(out, item, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let io = |source| LabError::Io { path: path.to_owned(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}

/// `t,value` rows.
pub fn write_path_csv<W: Write>(path: &FbmPath, mut w: W) -> io::Result<()> {
    writeln!(w, "t,value")?;
    for (i, v) in path.values.iter().enumerate() {
        writeln!(w, "{},{}", fmt_float(path.time(i)), fmt_float(*v))?;
    }
    Ok(())
}

/// Values of a `t,value` file.
pub fn read_path_csv<R: Read>(r: R) -> io::Result<Vec<f64>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = BufReader::new(r).lines();
    match lines.next().transpose()? {
        Some(h) if h.trim() == "t,value" => {}
        other => return Err(bad(format!("expected header `t,value`, found {other:?}"))),
    }
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let v = line
            .split(',')
            .nth(1)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| bad(format!("line {}: cannot parse `{line}`", i + 2)))?;
        values.push(v);
    }
    Ok(values)
}

/// Little-endian `u64` sample count followed by the `f64` samples.
pub fn write_path_binary<W: Write>(values: &[f64], mut w: W) -> io::Result<()> {
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_path_binary<R: Read>(mut r: R) -> io::Result<Vec<f64>> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let len = u64::from_le_bytes(word);
    let mut values = Vec::with_capacity(len.min(1 << 28) as usize);
    for _ in 0..len {
        r.read_exact(&mut word)?;
        values.push(f64::from_le_bytes(word));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "trailing bytes after the samples"));
    }
    Ok(values)
}

/// `x,value` rows of a grid function.
pub fn write_grid_csv<W: Write>(g: &GridFunction, mut w: W) -> io::Result<()> {
    writeln!(w, "x,value")?;
    let h = g.step();
    for (i, v) in g.values.iter().enumerate() {
        writeln!(w, "{},{}", fmt_float((g.offset + i as u64) as f64 * h), fmt_float(*v))?;
    }
    Ok(())
}
