use std::io::Write;

use gindex_core::check::Check;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Plot-ready rows for sweep commands.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub config: RunConfig,
    pub results: Value,
    pub checks: Vec<Check>,
    pub duration_ms: u64,
    pub version: &'static str,
}

fn encode_json(record: &ResultRecord) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(record).map_err(|e| CliError::Encode(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn encode_csv(record: &ResultRecord, table: Option<&Table>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let enc = |e: csv::Error| CliError::Encode(e.to_string());
    match table {
        Some(t) => {
            w.write_record(&t.headers).map_err(enc)?;
            for row in &t.rows {
                w.write_record(row).map_err(enc)?;
            }
        }
        None => {
            w.write_record(["name", "measured", "tolerance", "pass"]).map_err(enc)?;
            for c in &record.checks {
                w.write_record([
                    c.name.clone(),
                    format!("{:e}", c.measured),
                    format!("{:e}", c.tolerance),
                    c.pass.to_string(),
                ])
                .map_err(enc)?;
            }
        }
    }
    w.into_inner().map_err(|e| CliError::Encode(e.to_string()))
}

pub fn emit(record: &ResultRecord, table: Option<&Table>) -> Result<(), CliError> {
    let bytes = match record.config.format {
        Format::Json => encode_json(record)?,
        Format::Csv => encode_csv(record, table)?,
    };
    match record.config.output_path() {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|source| CliError::Write {
                    path: parent.to_owned(),
                    source,
                })?;
            }
            std::fs::write(&path, bytes).map_err(|source| CliError::Write { path, source })
        }
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            }),
    }
}
