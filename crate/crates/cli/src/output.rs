//! Artifact writing with embedded provenance.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// What produced an artifact: the resolved configuration, its hash, the
/// seed and, for data-driven commands, the digest of the input file.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: &'static str,
    pub canonical: String,
    pub config_sha256: String,
    pub seed: u64,
    pub dataset_sha256: Option<String>,
}

impl Provenance {
    pub fn new(command: &'static str, cfg: &RunConfig, dataset: Option<&[u8]>) -> Self {
        Self {
            command,
            canonical: cfg.canonical(),
            config_sha256: cfg.hash(),
            seed: cfg.seed,
            dataset_sha256: dataset.map(|b| hex::encode(Sha256::digest(b))),
        }
    }

    /// Header lines, each prefixed with `prefix`.
    pub fn lines(&self, prefix: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{prefix}condcop {}", self.command);
        let _ = writeln!(s, "{prefix}config_sha256 {}", self.config_sha256);
        let _ = writeln!(s, "{prefix}seed {}", self.seed);
        if let Some(d) = &self.dataset_sha256 {
            let _ = writeln!(s, "{prefix}dataset_sha256 {d}");
        }
        for line in self.canonical.lines() {
            let _ = writeln!(s, "{prefix}config {line}");
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let config: serde_json::Map<String, Value> = self
            .canonical
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
            .collect();
        json!({
            "command": self.command,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "dataset_sha256": self.dataset_sha256,
            "config": config,
        })
    }
}

/// Shortest round-tripping representation; `NaN` for missing values.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

/// A CSV table with a provenance comment header.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, prov: &Provenance) -> String {
        let mut s = prov.lines("# ");
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Fixed-width rendering for the terminal.
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut s = line(&self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&line(r));
            s.push('\n');
        }
        s
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Pretty JSON with the provenance block under `"provenance"`.
pub fn write_json<T: Serialize>(path: &Path, payload: &T, prov: &Provenance) -> CliResult<()> {
    let mut value = serde_json::to_value(payload)
        .map_err(|e| CliError::Data(format!("cannot serialize output: {e}")))?;
    if let Value::Object(map) = &mut value {
        map.insert("provenance".into(), prov.to_json());
    }
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Data(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// Creates the output directory and returns the path of `name` inside it.
pub fn out_file(dir: &Path, name: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(dir.join(name))
}
