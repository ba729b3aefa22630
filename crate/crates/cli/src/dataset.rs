//! Cluster data files: comma-separated `y1,y2,d1,d2,x` with a header line.

use std::path::Path;

use condcop::Observation;

use crate::error::{CliError, CliResult};

const COLUMNS: [&str; 5] = ["y1", "y2", "d1", "d2", "x"];

fn indicator(s: &str, line: u64, col: &str) -> CliResult<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(CliError::Data(format!(
            "line {line}: {col} must be 0 or 1, got `{other}`"
        ))),
    }
}

fn number(s: &str, line: u64, col: &str) -> CliResult<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Data(format!("line {line}: {col} is not a finite number: `{s}`")))
}

/// Parses dataset text. Extra columns are ignored; `#` starts a comment line.
pub fn parse_dataset(text: &str) -> CliResult<Vec<Observation>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::Data(format!("unreadable header: {e}")))?
        .clone();
    let mut idx = [0usize; 5];
    for (k, name) in COLUMNS.iter().enumerate() {
        idx[k] = header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| CliError::Data(format!("header lacks column `{name}`")))?;
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Data(format!("line {line}: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        let y1 = number(field(0), line, "y1")?;
        let y2 = number(field(1), line, "y2")?;
        let d1 = indicator(field(2), line, "d1")?;
        let d2 = indicator(field(3), line, "d2")?;
        let x = number(field(4), line, "x")?;
        let obs = Observation::new(y1, y2, d1, d2, x)
            .map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
        out.push(obs);
    }
    if out.is_empty() {
        return Err(CliError::Data("dataset has no rows".into()));
    }
    Ok(out)
}

pub fn read_dataset(path: &Path) -> CliResult<Vec<Observation>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_dataset(&text)
}

/// Dataset text; floats use the shortest representation that parses back exactly.
pub fn format_dataset(data: &[Observation]) -> String {
    let mut s = String::from("y1,y2,d1,d2,x\n");
    for o in data {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            o.y1, o.y2, o.d1 as u8, o.d2 as u8, o.x
        ));
    }
    s
}

pub fn write_dataset(path: &Path, data: &[Observation]) -> CliResult<()> {
    std::fs::write(path, format_dataset(data)).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}
