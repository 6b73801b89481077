use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{HarnessError, Result, RunRecord};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

#[derive(Serialize)]
struct CsvRow {
    d: usize,
    strategy: String,
    policy: String,
    backend: String,
    shots: Option<u64>,
    accepted: Option<u64>,
    post_rate: f64,
    sso: f64,
    seed: u64,
    wall_ms: f64,
}

impl From<&RunRecord> for CsvRow {
    fn from(r: &RunRecord) -> Self {
        CsvRow {
            d: r.d,
            strategy: r.strategy.to_string(),
            policy: r.policy.to_string(),
            backend: r.backend.to_string(),
            shots: r.shots,
            accepted: r.accepted,
            post_rate: r.post_rate,
            sso: r.sso,
            seed: r.seed,
            wall_ms: (r.wall_ms * 1e3).round() / 1e3,
        }
    }
}

fn write_csv<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(CsvRow::from(r))?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Columns `d,strategy,policy,backend,shots,accepted,post_rate,sso,seed,wall_ms`;
/// exact runs leave `shots` and `accepted` empty.
pub fn to_csv_string(records: &[RunRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn emit(records: &[RunRecord], format: Format, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(HarnessError::Config("no records to write".into()));
    }
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    match format {
        Format::Csv => write_csv(records, file),
        Format::Json => {
            serde_json::to_writer_pretty(&file, records)?;
            Ok(())
        }
    }
}
