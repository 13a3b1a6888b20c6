//! Output formatting shared by the subcommands.
//!
//! CSV numbers use Rust's shortest round-trip decimal representation, so
//! re-parsing an emitted field with `str::parse::<f64>` recovers the exact
//! bits that were written. The stdout table mirrors the same strings, padded
//! into aligned columns.

use std::fs;
use std::path::Path;

use crate::config::CliError;

/// Shortest decimal string that parses back to exactly `value`.
pub fn number(value: f64) -> String {
    format!("{value}")
}

/// Keeps free-text CSV fields single-celled: commas become semicolons and
/// newlines become spaces.
pub fn sanitize(detail: &str) -> String {
    detail.replace(',', ";").replace(['\n', '\r'], " ")
}

/// One CSV line from preformatted fields.
pub fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}

/// A complete CSV document with a header row.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&csv_line(row));
        out.push('\n');
    }
    out
}

/// The same rows as an aligned plain-text table.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let columns = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        debug_assert_eq!(row.len(), columns);
        for (width, cell) in widths.iter_mut().zip(row) {
            *width = (*width).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut emit = |cells: &[String]| {
        let mut line = String::new();
        for (index, cell) in cells.iter().enumerate() {
            if index > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            if index + 1 < columns {
                for _ in cell.len()..widths[index] {
                    line.push(' ');
                }
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };
    emit(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    for row in rows {
        emit(row);
    }
    out
}

/// Writes a file, mapping failures to the config exit code.
pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|err| CliError::Config(format!("cannot write {}: {err}", path.display())))
}
