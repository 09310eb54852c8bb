use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Full-precision JSON.
    Json,
    /// Full-precision CSV with a header row.
    Csv,
    /// Aligned columns, reals rounded to 4 decimals.
    Table,
}

/// Where and how a command writes its main result.
pub struct Sink {
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Sink {
    /// `json` is written for the JSON format; `rows` feed CSV and table output.
    pub fn emit<J: Serialize, R: Serialize>(&self, json: &J, rows: &[R]) -> Result<(), CliError> {
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(json)? + "\n",
            Format::Csv => csv_text(rows)?,
            Format::Table => table_text(&csv_text(rows)?)?,
        };
        write_text(self.out.as_deref(), &text)
    }
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => File::create(p)
            .and_then(|mut f| f.write_all(text.as_bytes()))
            .map_err(|e| CliError::Io(p.to_path_buf(), e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
        }
    }
}

pub fn csv_text<R: Serialize>(rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn round_cell(cell: &str) -> String {
    let looks_real = cell.contains(['.', 'e', 'E']) && !cell.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E');
    match cell.parse::<f64>() {
        Ok(v) if looks_real => format!("{v:.4}"),
        _ => cell.to_string(),
    }
}

/// Re-renders CSV as whitespace-aligned columns.
fn table_text(csv_src: &str) -> Result<String, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv_src.as_bytes());
    let mut grid: Vec<Vec<String>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        grid.push(
            rec.iter()
                .map(|c| if i == 0 { c.to_string() } else { round_cell(c) })
                .collect(),
        );
    }
    let cols = grid.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|j| grid.iter().filter_map(|r| r.get(j)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &grid {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    Ok(out)
}
