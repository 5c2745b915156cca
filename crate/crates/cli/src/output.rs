use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::args::{Command, Format};
use crate::error::{CliError, CliResult};

const CONFIG_PREFIX: &str = "# config: ";

/// Provenance header of every report.
#[derive(Debug, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: Command,
}

impl Meta {
    pub fn new(config: &Command) -> Self {
        Meta {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed(),
            config: config.clone(),
        }
    }
}

#[derive(Serialize)]
struct JsonReport<'a, T: Serialize> {
    meta: &'a Meta,
    report: &'a T,
}

/// Renders `report` in `format`, with the metadata as leading `#` lines for
/// CSV and as a `meta` object for JSON.
pub fn render<T, F>(meta: &Meta, format: Format, report: &T, csv: F) -> CliResult<Vec<u8>>
where
    T: Serialize,
    F: FnOnce(&mut Vec<u8>) -> plateau_core::Result<()>,
{
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            writeln!(buf, "# {} {}", meta.tool, meta.version)?;
            match meta.seed {
                Some(s) => writeln!(buf, "# seed: {s}")?,
                None => writeln!(buf, "# seed: none")?,
            }
            writeln!(buf, "{CONFIG_PREFIX}{}", serde_json::to_string(&meta.config)?)?;
            csv(&mut buf)?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &JsonReport { meta, report })?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::file(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Recovers the embedded configuration from a CSV or JSON report.
pub fn read_config(text: &str) -> CliResult<Command> {
    if text.trim_start().starts_with('{') {
        #[derive(Deserialize)]
        struct Wrapped {
            meta: Meta,
        }
        let w: Wrapped = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("line {}: {e}", e.line())))?;
        return Ok(w.meta.config);
    }
    let (line_no, line) = text
        .lines()
        .enumerate()
        .find(|(_, l)| l.starts_with(CONFIG_PREFIX))
        .ok_or_else(|| CliError::Input("no embedded configuration found".into()))?;
    serde_json::from_str(&line[CONFIG_PREFIX.len()..])
        .map_err(|e| CliError::Input(format!("line {}: {e}", line_no + 1)))
}
