//! File formats written by the harness.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{RootedSpanningTree, WeightedGraph};
use crate::loops::{GeodesicClass, UnbasedLoop};

/// Float with 17 significant digits; non-finite values become empty cells.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// JSON array of vertex names, `[]` for the trivial class.
pub fn word_json(g: &WeightedGraph, word: &[usize]) -> String {
    let names: Vec<&str> = word.iter().map(|&x| g.name(x)).collect();
    serde_json::to_string(&names).expect("string arrays serialize")
}

pub fn class_json(g: &WeightedGraph, class: &GeodesicClass) -> String {
    word_json(g, class.word())
}

#[derive(Serialize)]
struct DumpLine<'a> {
    tree: BTreeMap<String, String>,
    loops: Vec<Vec<&'a str>>,
}

/// One JSON line `{"tree": {...}, "loops": [[...], ...]}` per replica.
pub fn write_ensemble_line<W: Write>(
    out: &mut W,
    g: &WeightedGraph,
    tree: &RootedSpanningTree,
    loops: &[UnbasedLoop],
) -> Result<()> {
    let line = DumpLine {
        tree: tree.to_named(g),
        loops: loops.iter().map(|l| l.word().iter().map(|&x| g.name(x)).collect()).collect(),
    };
    serde_json::to_writer(&mut *out, &line)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes rows of string cells under `header`.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Same as [`write_csv`] into a string.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 cells is utf-8"))
}
