//! Field files: one JSON header line, then raw little-endian `f64` samples,
//! x-fastest, one component block after another.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BoxGrid;
use crate::error::{Error, Result};

pub const FIELD_SCHEMA: &str = "field/1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    n: usize,
    #[serde(rename = "box")]
    box_len: f64,
    components: usize,
    names: Vec<String>,
}

/// Decoded field file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub grid: BoxGrid,
    pub names: Vec<String>,
    pub comps: Vec<Vec<f64>>,
}

pub fn write_fields<W: Write>(mut w: W, grid: &BoxGrid, names: &[&str], comps: &[&[f64]]) -> Result<()> {
    if names.len() != comps.len() {
        return Err(Error::FieldFormat(format!("{} names for {} components", names.len(), comps.len())));
    }
    if let Some(bad) = comps.iter().find(|c| c.len() != grid.len()) {
        return Err(Error::GridMismatch(format!("component of length {} on {} points", bad.len(), grid.len())));
    }
    let header = Header {
        schema: FIELD_SCHEMA.to_string(),
        n: grid.n,
        box_len: grid.box_len,
        components: comps.len(),
        names: names.iter().map(|s| s.to_string()).collect(),
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::FieldFormat(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(8 * grid.len());
    for c in comps {
        buf.clear();
        for v in c.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fields<R: BufRead>(mut r: R) -> Result<FieldFile> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::FieldFormat(format!("bad header: {e}")))?;
    if header.schema != FIELD_SCHEMA {
        return Err(Error::FieldFormat(format!("unknown schema {:?}", header.schema)));
    }
    if header.names.len() != header.components {
        return Err(Error::FieldFormat("names do not match the component count".into()));
    }
    let grid = BoxGrid::new(header.n, header.box_len)?;
    let mut comps = Vec::with_capacity(header.components);
    let mut bytes = vec![0u8; 8 * grid.len()];
    for _ in 0..header.components {
        r.read_exact(&mut bytes)
            .map_err(|e| Error::FieldFormat(format!("truncated payload: {e}")))?;
        comps.push(
            bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of eight bytes")))
                .collect(),
        );
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::FieldFormat("trailing bytes after the last component".into()));
    }
    Ok(FieldFile {
        grid,
        names: header.names,
        comps,
    })
}

pub fn write_field_file(path: &Path, grid: &BoxGrid, names: &[&str], comps: &[&[f64]]) -> Result<()> {
    write_fields(BufWriter::new(File::create(path)?), grid, names, comps)
}

pub fn read_field_file(path: &Path) -> Result<FieldFile> {
    read_fields(BufReader::new(File::open(path)?))
}
