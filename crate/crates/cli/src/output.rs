//! CSV and JSON artifacts. CSV files open with one `#` metadata line; JSON
//! carries the same metadata under `meta` and the rows under `rows`.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::Format;
use crate::error::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config_sha256: String,
}

impl Meta {
    pub fn new(command: &'static str, seed: Option<u64>, config_sha256: String) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config_sha256,
        }
    }

    fn comment(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# {} {} command={} seed={} config_sha256={}",
            self.tool, self.version, self.command, seed, self.config_sha256
        )
    }
}

#[derive(Serialize)]
struct Document<'a, R: Serialize> {
    meta: &'a Meta,
    rows: &'a [R],
}

/// Write `rows` to `path`, or to stdout when `path` is `None`.
pub fn write_rows<R: Serialize>(path: Option<&Path>, format: Format, meta: &Meta, rows: &[R]) -> CliResult<()> {
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => {
            writeln!(sink, "{}", meta.comment())?;
            let mut w = csv::Writer::from_writer(&mut sink);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &Document { meta, rows })?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}
