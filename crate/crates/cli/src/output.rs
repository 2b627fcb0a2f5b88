use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

/// A command's result in every format it supports.
pub struct Output {
    json: String,
    csv: Option<(Vec<String>, Vec<Vec<String>>)>,
    pretty: String,
}

impl Output {
    pub fn new<T: Serialize>(value: &T, pretty: String) -> Self {
        Self {
            json: serde_json::to_string_pretty(value).expect("plain data serializes"),
            csv: None,
            pretty,
        }
    }

    pub fn with_csv(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.csv = Some((header.iter().map(|s| s.to_string()).collect(), rows));
        self
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> Result<(), String> {
        match format {
            Format::Json => io_result(writeln!(out, "{}", self.json)),
            Format::Pretty => io_result(write!(out, "{}", self.pretty)),
            Format::Csv => {
                let (header, rows) = self
                    .csv
                    .as_ref()
                    .ok_or_else(|| "this command has no CSV form; use --format json".to_string())?;
                write_csv(out, header, rows)
            }
        }
    }
}

/// A reader that went away (`| head`) is not an error.
fn io_result(r: io::Result<()>) -> Result<(), String> {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.to_string()),
        _ => Ok(()),
    }
}

pub fn write_csv(out: impl Write, header: &[String], rows: &[Vec<String>]) -> Result<(), String> {
    let mut w = csv::Writer::from_writer(out);
    let mut go = || -> csv::Result<()> {
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    };
    match go() {
        Err(e) => match e.into_kind() {
            csv::ErrorKind::Io(io) => io_result(Err(io)),
            kind => Err(format!("{kind:?}")),
        },
        Ok(()) => Ok(()),
    }
}

/// Shortest round-trip decimal, as in the JSON output.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
    }
}
