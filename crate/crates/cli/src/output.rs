//! Artifact files and the manifest.

use crate::{CliError, Resolved};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A table written as CSV and, for numeric tables, as a gnuplot `.dat`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: bool,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            plot: true,
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table {
            name: name.to_string(),
            header,
            rows: Vec::new(),
            plot: true,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))
    }

    fn dat_bytes(&self) -> Vec<u8> {
        let mut s = format!("# {}\n", self.header.join(" "));
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::render).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s.into_bytes()
    }
}

/// Everything a study produces.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub report: serde_json::Value,
    pub tables: Vec<Table>,
    /// Extra JSON documents (e.g. trajectory sidecars).
    pub json: Vec<(String, serde_json::Value)>,
    pub binaries: Vec<(String, Vec<u8>)>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    study: &'static str,
    seed: u64,
    config: &'a crate::RunConfig,
    files: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn json_bytes(v: &impl Serialize) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("reports serialize");
    b.push(b'\n');
    b
}

/// Writes the artifacts selected by `output.formats` and `manifest.json`.
pub fn write_all(dir: &Path, r: &Resolved, arts: &Artifacts) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let out = &r.config.output;
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    if out.wants("json") {
        files.push(("report.json".into(), json_bytes(&arts.report)));
        for (name, v) in &arts.json {
            files.push((name.clone(), json_bytes(v)));
        }
    }
    for t in &arts.tables {
        if out.wants("csv") {
            files.push((format!("{}.csv", t.name), t.csv_bytes()?));
        }
        if out.wants("dat") && t.plot {
            files.push((format!("{}.dat", t.name), t.dat_bytes()));
        }
    }
    if out.wants("bin") {
        files.extend(arts.binaries.iter().cloned());
    }
    let mut hashes = BTreeMap::new();
    for (name, bytes) in &files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        hashes.insert(name.clone(), sha256_hex(bytes));
    }
    let mut config = r.config.clone();
    config.seed = Some(r.seed);
    let manifest = Manifest {
        tool: "nsclab",
        version: env!("CARGO_PKG_VERSION"),
        study: r.study.name().as_str(),
        seed: r.seed,
        config: &config,
        files: hashes,
    };
    fs::write(dir.join("manifest.json"), json_bytes(&manifest))?;
    Ok(())
}
