//! CSV tables and their metadata sidecars.
//!
//! Floats are written with 17 significant digits in exponent form so the
//! text round-trips exactly and does not depend on locale. Missing values
//! are empty cells.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Missing,
    Text(String),
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Missing => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, w: W) -> io::Result<()> {
        if let Some((i, r)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != self.columns.len()) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("row {i} has {} cells, header has {}", r.len(), self.columns.len()),
            ));
        }
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::render))?;
        }
        out.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Sidecar describing how a table was produced, in the config grammar.
pub fn meta_text(cfg: &RunConfig, table: &Table) -> String {
    let mut s = String::new();
    s.push_str(&format!("# {} {}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
    if let Some(fig) = cfg.scenario.figure() {
        s.push_str(&format!("# figure: {fig}\n"));
    }
    s.push_str(&format!("# columns: {}\n", table.columns.join(",")));
    s.push_str(&format!("# rows: {}\n", table.rows.len()));
    s.push_str(&cfg.to_settings_text());
    s
}

/// Write `table` to `path` and the sidecar next to it. Nothing is written
/// until the table is complete.
pub fn emit(path: &Path, cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    let write = |p: &Path, f: &dyn Fn(&mut BufWriter<File>) -> io::Result<()>| -> Result<(), CliError> {
        let file = File::create(p).map_err(|e| CliError::io(p.display(), e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(p.display(), e))
    };
    write(path, &|w| table.write_to(w))?;
    let meta = meta_path(path);
    write(&meta, &|w| w.write_all(meta_text(cfg, table).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, -7.38905609893065, 1e-300, std::f64::consts::PI] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(!s.contains(','));
        }
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["omega_m_t", "density", "kappa_over_omega"]);
        assert_eq!(t.to_csv_string(), "omega_m_t,density,kappa_over_omega\r\n");
    }

    #[test]
    fn one_row_and_missing_cells() {
        let mut t = Table::new(&["a", "b", "flag"]);
        t.push(vec![Cell::Num(0.5), Cell::Missing, Cell::text("VP")]);
        assert_eq!(t.to_csv_string(), "a,b,flag\r\n5.0000000000000000e-1,,VP\r\n");
    }

    #[test]
    fn ragged_rows_rejected() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Num(1.0)]);
        assert!(t.write_to(Vec::new()).is_err());
    }

    #[test]
    fn text_is_quoted_when_needed() {
        let mut t = Table::new(&["id"]);
        t.push(vec![Cell::text("a,\"b\"")]);
        assert_eq!(t.to_csv_string(), "id\r\n\"a,\"\"b\"\"\"\r\n");
    }
}
