//! CSV rows and the JSON summary written by every subcommand.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value as Json};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64.
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone)]
struct Row {
    cells: Vec<Cell>,
    /// `None` for rows that carry data but no check.
    pass: Option<bool>,
    duration: Option<f64>,
}

/// Rows of one experiment plus the summary fields that end up in JSON.
#[derive(Debug)]
pub struct Report {
    experiment: &'static str,
    input_digest: String,
    columns: Vec<&'static str>,
    rows: Vec<Row>,
    record_timing: bool,
    pub summary: Map<String, Json>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(experiment: &'static str, input_digest: String, columns: &[&'static str], record_timing: bool) -> Self {
        Self {
            experiment,
            input_digest,
            columns: columns.to_vec(),
            rows: Vec::new(),
            record_timing,
            summary: Map::new(),
            warnings: Vec::new(),
        }
    }

    /// Appends a row; `started` is when work on the row began.
    pub fn push(&mut self, cells: Vec<Cell>, pass: Option<bool>, started: Instant) {
        assert_eq!(cells.len(), self.columns.len(), "row width does not match the {} header", self.experiment);
        let duration = self.record_timing.then(|| started.elapsed().as_secs_f64());
        self.rows.push(Row { cells, pass, duration });
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        if !self.warnings.contains(&message) {
            self.warnings.push(message);
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("serializable summary"));
    }

    pub fn checks(&self) -> usize {
        self.rows.iter().filter(|r| r.pass.is_some()).count()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(false)).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn header(&self) -> Vec<&'static str> {
        let mut h = vec!["experiment", "input_digest"];
        h.extend(&self.columns);
        h.extend(["pass", "duration_s"]);
        h
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![self.experiment.to_string(), self.input_digest.clone()];
            rec.extend(row.cells.iter().map(Cell::render));
            rec.push(Cell::from(row.pass).render());
            rec.push(Cell::from(row.duration).render());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn to_json(&self, parameters: Json, seed: u64, degree_cap: u64) -> String {
        let mut doc = json!({
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "input_digest": self.input_digest,
            "seed": seed,
            "degree_cap": degree_cap,
            "parameters": parameters,
            "columns": self.header(),
            "rows": self.rows.len(),
            "checks": self.checks(),
            "failed": self.failures(),
            "pass": self.passed(),
            "warnings": self.warnings,
            "summary": Json::Object(self.summary.clone()),
        });
        if self.record_timing {
            let total: f64 = self.rows.iter().filter_map(|r| r.duration).sum();
            doc["duration_s"] = json!(total);
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable report");
        s.push('\n');
        s
    }

    /// Writes `<experiment>.csv` and `<experiment>.json` into `dir`.
    pub fn write_to(&self, dir: &Path, parameters: Json, seed: u64, degree_cap: u64) -> CliResult<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&csv_path, self.to_csv()).map_err(|source| CliError::Write { path: csv_path.clone(), source })?;
        std::fs::write(&json_path, self.to_json(parameters, seed, degree_cap))
            .map_err(|source| CliError::Write { path: json_path.clone(), source })?;
        Ok((csv_path, json_path))
    }
}

/// SHA-256 over the experiment name, its parameters and the bytes of every input file.
pub fn input_digest(experiment: &str, parameters: &Json, seed: u64, degree_cap: u64, inputs: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    h.update(experiment.as_bytes());
    h.update([0]);
    h.update(parameters.to_string().as_bytes());
    h.update([0]);
    h.update(seed.to_le_bytes());
    h.update(degree_cap.to_le_bytes());
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -2.5e-17] {
            let s = Cell::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout_and_pass_accounting() {
        let mut r = Report::new("demo", "abc".into(), &["x", "note"], false);
        let now = Instant::now();
        r.push(vec![0.5.into(), "a,b".into()], Some(true), now);
        r.push(vec![Cell::Empty, "plain".into()], None, now);
        r.push(vec![1.0.into(), Cell::Empty], Some(false), now);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "experiment,input_digest,x,note,pass,duration_s");
        assert_eq!(lines[1], "demo,abc,5.0000000000000000e-1,\"a,b\",true,");
        assert_eq!(lines[2], "demo,abc,,plain,,");
        assert_eq!((r.checks(), r.failures(), r.passed()), (2, 1, false));
    }

    #[test]
    fn json_has_schema_and_no_timing_by_default() {
        let r = Report::new("demo", "abc".into(), &["x"], false);
        let doc: Json = serde_json::from_str(&r.to_json(json!({"k": 1}), 7, 10)).unwrap();
        assert_eq!(doc["schema_version"], SCHEMA_VERSION);
        assert_eq!(doc["seed"], 7);
        assert!(doc.get("duration_s").is_none());
    }

    #[test]
    fn digest_depends_on_inputs() {
        let p = json!({"a": 1});
        let a = input_digest("x", &p, 0, 1, &[b"one".to_vec()]);
        let b = input_digest("x", &p, 0, 1, &[b"two".to_vec()]);
        assert_ne!(a, b);
        assert_eq!(a, input_digest("x", &p, 0, 1, &[b"one".to_vec()]));
        assert_eq!(a.len(), 64);
    }
}
