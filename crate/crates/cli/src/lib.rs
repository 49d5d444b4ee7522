//! Configuration-driven front end: runs verification tasks and writes
//! deterministic JSON reports and tables.

pub mod config;
pub mod run;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{ConfigError, MeasureConfig, Resolved, RunConfig};
pub use run::{run, Bundle, Entry, Report, Status, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes `report.json`, the tables (`<name>.csv` or `tables.json`) and the
/// JSON artifacts into `dir`. Returns the written paths in order.
pub fn emit_tables(bundle: &Bundle, format: Format, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut write = |name: String, contents: String| -> std::io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };
    write("report.json".into(), bundle.report.to_json())?;
    match format {
        Format::Json => {
            let value = serde_json::to_value(&bundle.tables).map_err(std::io::Error::other)?;
            write(
                "tables.json".into(),
                serde_json::to_string_pretty(&value).map_err(std::io::Error::other)? + "\n",
            )?;
        }
        Format::Csv => {
            for (name, table) in &bundle.tables {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.header).map_err(std::io::Error::other)?;
                for row in &table.rows {
                    w.write_record(row).map_err(std::io::Error::other)?;
                }
                let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
                write(
                    format!("{name}.csv"),
                    String::from_utf8(bytes).map_err(std::io::Error::other)?,
                )?;
            }
        }
    }
    for (name, value) in &bundle.artifacts {
        write(
            format!("{name}.json"),
            serde_json::to_string_pretty(value).map_err(std::io::Error::other)? + "\n",
        )?;
    }
    Ok(written)
}
