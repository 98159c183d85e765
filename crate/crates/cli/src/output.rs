use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::CliError;

/// One CSV table, written once all rows are known.
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Collects the tables and manifest entries of one run.
pub struct Artifacts {
    out_dir: PathBuf,
    subcommand: String,
    seed: u64,
    params: Vec<(String, String)>,
    tables: Vec<Table>,
    started: Instant,
}

impl Artifacts {
    pub fn new(out_dir: &Path, subcommand: &str, seed: u64) -> Self {
        Self {
            out_dir: out_dir.to_path_buf(),
            subcommand: subcommand.to_string(),
            seed,
            params: Vec::new(),
            tables: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn write(self) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(&self.out_dir)?;
        let mut paths = Vec::new();
        for table in &self.tables {
            let path = self.out_dir.join(&table.name);
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_path(&path)?;
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            paths.push(path);
        }
        let mut manifest = String::new();
        manifest.push_str(&format!("subcommand={}\n", self.subcommand));
        for (k, v) in &self.params {
            manifest.push_str(&format!("param.{k}={v}\n"));
        }
        manifest.push_str(&format!("seed={}\n", self.seed));
        for t in &self.tables {
            manifest.push_str(&format!("output={}\n", t.name));
        }
        manifest.push_str(&format!("version={}\n", env!("CARGO_PKG_VERSION")));
        manifest.push_str(&format!(
            "wall_time_s={:.3}\n",
            self.started.elapsed().as_secs_f64()
        ));
        let path = self.out_dir.join("manifest.txt");
        fs::write(&path, manifest)?;
        paths.push(path);
        Ok(paths)
    }
}
