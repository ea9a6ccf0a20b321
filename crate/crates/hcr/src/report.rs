//! Report tables and the files they are written to.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use hcr_core::mlp::TrainTrace;

use crate::error::{HcrError, Result};
use crate::harness::EvalReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Count(usize),
    Number(f64),
    Text(String),
}

impl Cell {
    pub fn as_number(&self) -> Option<f64> {
        match *self {
            Cell::Count(n) => Some(n as f64),
            Cell::Number(v) => Some(v),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Count(n) => n.to_string(),
            Cell::Number(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    /// One cell per table column.
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn new(id: &str, title: &str, columns: &[&str], rows: Vec<TableRow>) -> Self {
        Table {
            id: id.to_string(),
            title: title.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn cell(&self, row: &str, column: &str) -> Option<&Cell> {
        let col = self.columns.iter().position(|c| c == column)?;
        self.row(row)?.cells.get(col)
    }

    /// Aligned plain-text rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut grid = vec![std::iter::once(String::new()).chain(self.columns.iter().cloned()).collect::<Vec<_>>()];
        for row in &self.rows {
            let cells = row.cells.iter().map(|c| match c {
                Cell::Number(v) => format!("{v:.2}"),
                other => other.render(),
            });
            grid.push(std::iter::once(row.label.clone()).chain(cells).collect());
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|i| grid.iter().map(|r| r.get(i).map_or(0, String::len)).max().unwrap_or(0))
            .collect();
        let mut out = format!("{}\n", self.title);
        for r in &grid {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// CSV with one line per table cell: `table_id,row,column,value`.
pub fn tables_to_csv(tables: &[Table]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["table_id", "row", "column", "value"]).expect("writing to memory");
    for table in tables {
        for row in &table.rows {
            for (column, cell) in table.columns.iter().zip(&row.cells) {
                writer.write_record([&table.id, &row.label, column, &cell.render()]).expect("writing to memory");
            }
        }
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("input is utf-8")
}

/// Training log with columns `iteration,mse,mu,accepted`; the last two
/// are empty for backpropagation.
pub fn trace_to_csv(trace: &TrainTrace) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["iteration", "mse", "mu", "accepted"]).expect("writing to memory");
    for r in &trace.records {
        let mu = r.mu.map(|m| m.to_string()).unwrap_or_default();
        let accepted = r.accepted.map(|a| a.to_string()).unwrap_or_default();
        writer.write_record([r.iteration.to_string(), r.mse.to_string(), mu, accepted]).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("input is utf-8")
}

pub fn report_to_json(report: &EvalReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    text
}

/// Writes `report.json` and `tables.csv` into `dir`, creating it if needed.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HcrError::io(dir, e))?;
    let json = dir.join("report.json");
    fs::write(&json, report_to_json(report)).map_err(|e| HcrError::io(&json, e))?;
    let csv = dir.join("tables.csv");
    fs::write(&csv, tables_to_csv(&report.tables)).map_err(|e| HcrError::io(&csv, e))
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).map_err(|e| HcrError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HcrError::Json { path: path.to_path_buf(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        Table::new(
            "t",
            "Title",
            &["count", "percent", "note"],
            vec![TableRow {
                label: "row, one".into(),
                cells: vec![Cell::Count(3), Cell::Number(87.5), Cell::Text("not implemented".into())],
            }],
        )
    }

    #[test]
    fn csv_has_one_line_per_cell() {
        let csv = tables_to_csv(&[sample()]);
        assert_eq!(
            csv,
            "table_id,row,column,value\nt,\"row, one\",count,3\nt,\"row, one\",percent,87.5\nt,\"row, one\",note,not implemented\n"
        );
    }

    #[test]
    fn lookup_and_json_round_trip() {
        let t = sample();
        assert_eq!(t.cell("row, one", "percent"), Some(&Cell::Number(87.5)));
        assert_eq!(t.cell("row, one", "missing"), None);
        let back: Table = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(t.to_text().contains("87.50"));
    }
}
