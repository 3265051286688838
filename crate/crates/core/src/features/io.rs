//! Feature CSV interchange.
//!
//! Header row is the full index map plus `source_id` and `label`; one
//! utterance per row. Values are printed in scientific notation with 9
//! significant digits, which keeps the file byte-stable across runs.

use super::{index_map, Is10Vector, IS10_DIM};
use std::io::{self, BufRead, Write};

/// Formats one value the way the CSV contract pins it.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn write_header(mut w: impl Write) -> io::Result<()> {
    let mut cols: Vec<&str> = index_map().iter().map(String::as_str).collect();
    cols.push("source_id");
    cols.push("label");
    writeln!(w, "{}", cols.join(","))
}

pub fn write_row(
    mut w: impl Write,
    vector: &Is10Vector,
    source_id: &str,
    label: Option<&str>,
) -> io::Result<()> {
    debug_assert_eq!(vector.len(), IS10_DIM);
    let mut line = String::with_capacity(IS10_DIM * 16);
    for v in &vector.values {
        line.push_str(&format_value(*v));
        line.push(',');
    }
    line.push_str(source_id);
    line.push(',');
    line.push_str(label.unwrap_or(""));
    writeln!(w, "{line}")
}

/// Parsed feature rows: vectors plus their source ids and labels.
pub struct FeatureTable {
    pub rows: Vec<(Is10Vector, String, Option<String>)>,
}

pub fn read_csv(r: impl BufRead) -> io::Result<FeatureTable> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "empty feature file"))?;
    let expected = IS10_DIM + 2;
    if header.split(',').count() != expected {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("expected {expected} columns"),
        ));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("row has {} columns, expected {expected}", fields.len()),
            ));
        }
        let values = fields[..IS10_DIM]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        let source_id = fields[IS10_DIM].to_string();
        let label = match fields[IS10_DIM + 1] {
            "" => None,
            s => Some(s.to_string()),
        };
        rows.push((Is10Vector { values }, source_id, label));
    }
    Ok(FeatureTable { rows })
}
