use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A command result: a JSON document plus its CSV table.
pub struct Report<J, R> {
    pub json: J,
    pub rows: Vec<R>,
}

impl<J: Serialize, R: Serialize> Report<J, R> {
    pub fn emit(&self, format: Format) -> Result<(), Failure> {
        match self.write(format) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|e| Failure::input(e.to_string())),
        }
    }

    fn write(&self, format: Format) -> std::io::Result<()> {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.json)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut out);
                for r in &self.rows {
                    w.serialize(r).map_err(std::io::Error::other)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}
