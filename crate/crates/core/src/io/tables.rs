use serde::{Deserialize, Serialize};

use crate::stats::DistributionSummary;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "n", "mean", "stdev", "min", "q1", "median", "q3", "max", "whisker_low", "whisker_high",
];

pub(crate) fn summary_cells(s: &DistributionSummary) -> Vec<String> {
    let mut cells = vec![s.n.to_string()];
    cells.extend(
        [s.mean, s.stdev, s.min, s.q1, s.median, s.q3, s.max, s.whisker_low, s.whisker_high]
            .map(fmt_float),
    );
    cells
}

/// In-memory table written as UTF-8 CSV with LF line endings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width matches the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 cells")
    }
}

/// Five-number summary of one box, plus the mean and sample count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotRecord {
    pub label: String,
    pub series: String,
    pub n: usize,
    pub min: f64,
    pub whisker_low: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_high: f64,
    pub max: f64,
    pub mean: f64,
}

impl BoxplotRecord {
    pub fn new(label: impl Into<String>, series: impl Into<String>, s: &DistributionSummary) -> Self {
        Self {
            label: label.into(),
            series: series.into(),
            n: s.n,
            min: s.min,
            whisker_low: s.whisker_low,
            q1: s.q1,
            median: s.median,
            q3: s.q3,
            whisker_high: s.whisker_high,
            max: s.max,
            mean: s.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotFigure {
    pub figure: String,
    pub records: Vec<BoxplotRecord>,
}

/// JSON array of figures, records kept in input order.
pub fn emit_boxplot_data(figures: &[BoxplotFigure]) -> String {
    let mut s = serde_json::to_string_pretty(figures).expect("plot data serializes");
    s.push('\n');
    s
}
