use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::run::ReportRow;
use crate::CliError;

#[derive(Serialize)]
struct JsonReport<'a> {
    library: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    rows: &'a [ReportRow],
}

/// Writes `rows` in column order of [`ReportRow`]. JSON output also carries
/// the configuration and library version.
pub fn write_report<W: Write>(
    rows: &[ReportRow],
    format: Format,
    config: &ExperimentConfig,
    mut w: W,
) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::EmptyReport);
    }
    match format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            for r in rows {
                csv.serialize(r)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            let report = JsonReport {
                library: "hifie",
                version: hifie::VERSION,
                config,
                rows,
            };
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the report to `path`, creating parent directories.
pub fn emit_report(rows: &[ReportRow], format: Format, config: &ExperimentConfig, path: &Path) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::EmptyReport);
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_report(rows, format, config, BufWriter::new(File::create(path)?))
}
