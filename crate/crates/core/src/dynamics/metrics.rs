use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::CellState;
use crate::error::{Error, Result};

/// Population readout taken at a step boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: u64,
    pub n_nodes: usize,
    pub n_normal: usize,
    pub n_proliferative: usize,
    pub n_inflamed: usize,
    pub n_quiescent: usize,
    pub n_metastatic: usize,
    pub n_dead: usize,
    /// Nodes grown during this step.
    pub n_added: usize,
    /// `None` while no cell is inflamed.
    pub dead_inflamed_ratio: Option<f64>,
    pub density: f64,
    pub p_redirect: f64,
}

impl StepMetrics {
    pub fn count(&self, state: CellState) -> usize {
        match state {
            CellState::Normal => self.n_normal,
            CellState::Proliferative => self.n_proliferative,
            CellState::Inflamed => self.n_inflamed,
            CellState::Quiescent => self.n_quiescent,
            CellState::Metastatic => self.n_metastatic,
            CellState::Dead => self.n_dead,
        }
    }

    pub fn state_total(&self) -> usize {
        CellState::ALL.iter().map(|&s| self.count(s)).sum()
    }
}

pub fn dead_inflamed_ratio(dead: usize, inflamed: usize) -> Option<f64> {
    (inflamed > 0).then(|| dead as f64 / inflamed as f64)
}

pub const METRICS_CSV_HEADER: [&str; 10] = [
    "step",
    "n_nodes",
    "n_normal",
    "n_proliferative",
    "n_inflamed",
    "n_quiescent",
    "n_metastatic",
    "n_dead",
    "dead_inflamed_ratio",
    "p_redirect",
];

/// Write the metrics series as CSV. An undefined ratio is written as `NaN`.
pub fn write_metrics_csv<W: Write>(rows: &[StepMetrics], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(METRICS_CSV_HEADER)?;
    for row in rows {
        let ratio = row
            .dead_inflamed_ratio
            .map_or_else(|| "NaN".to_string(), |r| r.to_string());
        writer.write_record([
            row.step.to_string(),
            row.n_nodes.to_string(),
            row.n_normal.to_string(),
            row.n_proliferative.to_string(),
            row.n_inflamed.to_string(),
            row.n_quiescent.to_string(),
            row.n_metastatic.to_string(),
            row.n_dead.to_string(),
            ratio,
            row.p_redirect.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<metrics csv>", e))?;
    Ok(())
}

pub fn metrics_csv_string(rows: &[StepMetrics]) -> String {
    let mut buf = Vec::new();
    write_metrics_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// One parsed CSV row. Only the columns present in the file are recovered.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsCsvRow {
    pub step: u64,
    pub counts: [usize; 7],
    pub dead_inflamed_ratio: Option<f64>,
    pub p_redirect: f64,
}

pub fn read_metrics_csv<R: Read>(input: R) -> Result<Vec<MetricsCsvRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(METRICS_CSV_HEADER) {
        return Err(Error::Integrity(format!(
            "unexpected metrics header {header:?}"
        )));
    }
    let parse_err =
        |line: usize, what: &str| Error::Integrity(format!("metrics row {line}: bad {what}"));
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let int = |i: usize| {
            record[i]
                .parse::<usize>()
                .map_err(|_| parse_err(line, METRICS_CSV_HEADER[i]))
        };
        let mut counts = [0usize; 7];
        for (slot, i) in counts.iter_mut().zip(1..8) {
            *slot = int(i)?;
        }
        let ratio = match &record[8] {
            "NaN" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|_| parse_err(line, "dead_inflamed_ratio"))?,
            ),
        };
        rows.push(MetricsCsvRow {
            step: record[0].parse().map_err(|_| parse_err(line, "step"))?,
            counts,
            dead_inflamed_ratio: ratio,
            p_redirect: record[9]
                .parse()
                .map_err(|_| parse_err(line, "p_redirect"))?,
        });
    }
    Ok(rows)
}
