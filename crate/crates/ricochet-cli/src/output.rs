//! CSV tables and the run manifest.
//!
//! Tables are UTF-8, LF line endings, one header row, floats rendered as
//! shortest round-trip decimals (Rust's default `{}` for f64), so identical
//! configurations produce byte-identical files.

use std::fmt::Arguments;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::Common;

pub struct CsvTable {
    writer: BufWriter<File>,
}

impl CsvTable {
    pub fn create(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self {
            writer: BufWriter::new(File::create(path)?),
        })
    }

    pub fn header(&mut self, columns: &str) -> std::io::Result<()> {
        writeln!(self.writer, "{columns}")
    }

    pub fn row(&mut self, row: Arguments<'_>) -> std::io::Result<()> {
        self.writer.write_fmt(row)?;
        self.writer.write_all(b"\n")
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.writer.flush()
    }

    /// Hand the underlying writer to a streaming producer (the engine's
    /// collision sink appends its own rows).
    pub fn into_writer(self) -> BufWriter<File> {
        self.writer
    }
}

/// Record of one CLI run, written as `manifest.json` next to the outputs.
/// Re-running the recorded configuration under the same artifact version
/// reproduces every CSV byte for byte (the manifest itself carries wall
/// time, so it is not byte-stable).
#[derive(Serialize)]
pub struct Manifest {
    artifact_version: &'static str,
    subcommand: String,
    mu: String,
    nu: String,
    seed: u64,
    force: bool,
    workers: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    args: Vec<(String, String)>,
    outputs: Vec<String>,
    duration_seconds: f64,
    counters: Counters,
}

#[derive(Serialize, Default)]
struct Counters {
    bullets: u64,
    collisions: u64,
    triple_collision_aborts: u64,
}

impl Manifest {
    pub fn new(subcommand: &str, common: &Common) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            mu: common.mu.clone(),
            nu: common.nu.clone(),
            seed: common.seed,
            force: common.force,
            workers: common.workers,
            args: Vec::new(),
            outputs: Vec::new(),
            duration_seconds: 0.0,
            counters: Counters::default(),
        }
    }

    pub fn arg(mut self, name: &str, value: impl ToString) -> Self {
        self.args.push((name.to_string(), value.to_string()));
        self
    }

    pub fn arg_opt(self, name: &str, value: Option<impl ToString>) -> Self {
        match value {
            Some(v) => self.arg(name, v),
            None => self,
        }
    }

    pub fn outputs(mut self, outputs: Vec<String>) -> Self {
        self.outputs = outputs;
        self
    }

    pub fn counters(mut self, bullets: u64, collisions: u64, aborts: u64) -> Self {
        self.counters = Counters {
            bullets,
            collisions,
            triple_collision_aborts: aborts,
        };
        self
    }

    pub fn duration(mut self, elapsed: Duration) -> Self {
        self.duration_seconds = elapsed.as_secs_f64();
        self
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut file = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        file.flush()?;
        Ok(path)
    }
}
