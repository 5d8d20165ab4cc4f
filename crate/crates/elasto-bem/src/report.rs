//! Report rows, pass/fail checks and the files written under the output
//! directory.

use std::path::Path;

use serde::Serialize;

/// Column order of `report.csv`.
pub const COLUMNS: [&str; 9] = [
    "task",
    "check",
    "level",
    "h",
    "value",
    "reference",
    "abs_err",
    "rel_err",
    "rate",
];

/// One line of the report. Empty cells are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub task: String,
    pub check: String,
    pub level: Option<usize>,
    pub h: Option<f64>,
    pub value: f64,
    pub reference: Option<f64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub rate: Option<f64>,
}

impl Row {
    pub fn new(task: &str, check: &str, value: f64) -> Self {
        Row {
            task: task.into(),
            check: check.into(),
            level: None,
            h: None,
            value,
            reference: None,
            abs_err: None,
            rel_err: None,
            rate: None,
        }
    }

    pub fn at(mut self, level: usize, h: f64) -> Self {
        self.level = Some(level);
        self.h = Some(h);
        self
    }

    /// Sets the reference and both errors.
    pub fn against(mut self, reference: f64) -> Self {
        let abs = (self.value - reference).abs();
        self.reference = Some(reference);
        self.abs_err = Some(abs);
        self.rel_err = Some(if reference != 0.0 { abs / reference.abs() } else { abs });
        self
    }

    /// An error measure that is already relative; the reference is zero.
    pub fn error(mut self, abs: f64, rel: f64) -> Self {
        self.reference = Some(0.0);
        self.abs_err = Some(abs);
        self.rel_err = Some(rel);
        self
    }
}

/// A named pass/fail decision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn row(&mut self, row: Row) {
        self.rows.push(row);
    }

    /// Records `value <= limit`.
    pub fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: value <= limit,
            detail: format!("{value:.3e} <= {limit:.3e}"),
        });
    }

    /// Records `value >= limit`.
    pub fn at_least(&mut self, name: &str, value: f64, limit: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: value >= limit,
            detail: format!("{value:.3e} >= {limit:.3e}"),
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        let text = String::from_utf8(bytes).expect("csv is utf-8");
        // serde only writes the header with the first row
        if self.rows.is_empty() {
            return Ok(COLUMNS.join(",") + "\n");
        }
        Ok(text)
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let text = self.to_csv().map_err(std::io::Error::other)?;
        std::fs::write(path, text)
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}

/// Observed order between two refinement levels.
pub fn rate(err_coarse: f64, err_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (err_coarse / err_fine).ln() / (h_coarse / h_fine).ln()
}

/// Fills the `rate` column of consecutive rows that share a check name.
pub fn fill_rates(rows: &mut [Row]) {
    for i in 0..rows.len() {
        let prev = (0..i).rev().find(|&j| rows[j].check == rows[i].check && rows[j].task == rows[i].task);
        if let Some(j) = prev {
            let (a, b) = (&rows[j], &rows[i]);
            if let (Some(ea), Some(eb), Some(ha), Some(hb)) = (a.rel_err, b.rel_err, a.h, b.h) {
                rows[i].rate = Some(rate(ea, eb, ha, hb));
            }
        }
    }
}
