use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::commands::CliError;

/// Destination for the main artifact: a file, or stdout.
pub fn open(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn io_error(path: &Path, err: io::Error) -> CliError {
    CliError::Io(format!("{}: {err}", path.display()))
}

fn write_error(out: Option<&Path>, err: impl std::fmt::Display) -> CliError {
    let target = out.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
    CliError::Io(format!("{target}: {err}"))
}

/// `<out>.summary.json` next to the output file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".summary.json");
    out.with_file_name(name)
}

/// Writes rows with the shortest round-trip float formatting and LF endings.
pub fn write_csv(out: Option<&Path>, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(open(out)?);
    writer.write_record(header).map_err(|e| write_error(out, e))?;
    for row in rows {
        writer.write_record(&row).map_err(|e| write_error(out, e))?;
    }
    writer.flush().map_err(|e| write_error(out, e))
}

pub fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| write_error(out, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| write_error(out, e))
}

/// Prints the summary on stdout, or on stderr when stdout carries the data,
/// and stores it next to the output file when there is one.
pub fn emit_summary<T: Serialize>(out: Option<&Path>, summary: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    match out {
        Some(path) => {
            print(&text)?;
            let side = sidecar_path(path);
            std::fs::write(&side, format!("{text}\n")).map_err(|e| io_error(&side, e))
        }
        None => {
            eprintln!("{text}");
            Ok(())
        }
    }
}

/// Prints to stdout; a closed pipe is not an error.
pub fn print(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

pub fn float(x: f64) -> String {
    format!("{x}")
}
