//! Per-patient profile tables: one column per growth pattern, one row for
//! the derived cell ids and one for the essential genomic profile.

use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::record::RunRecord;

/// Scientific notation with three significant digits and a signed two-digit
/// exponent, e.g. `2.19E-03`.
pub fn format_sci(value: f64) -> String {
    if !value.is_finite() {
        return "NaN".to_string();
    }
    let raw = format!("{value:.2E}");
    let (mantissa, exponent) = raw.split_once('E').expect("E format has an exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exponent.abs())
}

pub fn format_ids(ids: &[NodeId]) -> String {
    ids.iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_ids(text: &str) -> Result<Vec<NodeId>> {
    text.split(';')
        .map(|part| {
            part.trim()
                .parse()
                .map(NodeId)
                .map_err(|_| Error::Integrity(format!("bad derived cell id `{part}`")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileColumn {
    /// `GP1`, `GP2`, ...
    pub pattern: String,
    pub derived_cell_ids: Vec<NodeId>,
    pub essential_genomic_profile: f64,
    pub mean_betweenness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub patient: String,
    pub columns: Vec<ProfileColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTables {
    pub tables: Vec<ProfileTable>,
}

pub const PROFILE_CSV_HEADER: [&str; 6] = [
    "patient",
    "pattern",
    "derived_cell_ids",
    "essential_genomic_profile",
    "mean_betweenness",
    "essential_genomic_profile_exact",
];

/// Group records by baseline label (first-seen order) and lay out one table
/// per baseline with columns ordered by pattern index.
pub fn emit_profile_tables(records: &[RunRecord]) -> Result<ProfileTables> {
    if records.is_empty() {
        return Err(Error::Integrity("no run records to tabulate".into()));
    }
    let mut tables: Vec<ProfileTable> = Vec::new();
    for record in records {
        let profile = record.profile.as_ref().ok_or(Error::UndefinedProfile {
            nodes: record.final_snapshot.node_count,
        })?;
        let column = ProfileColumn {
            pattern: format!("GP{}", profile.pattern_index),
            derived_cell_ids: profile.derived_cell_ids.clone(),
            essential_genomic_profile: profile.essential_genomic_profile,
            mean_betweenness: profile.mean_betweenness,
        };
        match tables.iter_mut().find(|t| t.patient == record.label) {
            Some(table) => table.columns.push(column),
            None => tables.push(ProfileTable {
                patient: record.label.clone(),
                columns: vec![column],
            }),
        }
    }
    for table in &mut tables {
        table
            .columns
            .sort_by_key(|c| c.pattern[2..].parse::<usize>().unwrap_or(usize::MAX));
    }
    Ok(ProfileTables { tables })
}

impl ProfileTables {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(PROFILE_CSV_HEADER).expect("in-memory write");
        for table in &self.tables {
            for col in &table.columns {
                w.write_record([
                    table.patient.clone(),
                    col.pattern.clone(),
                    format_ids(&col.derived_cell_ids),
                    format_sci(col.essential_genomic_profile),
                    format_sci(col.mean_betweenness),
                    col.essential_genomic_profile.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Markdown: one table per patient, one column per growth pattern.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(
                out,
                "Tumor-derived cell ID and Genomic Profile for {}\n",
                table.patient
            );
            let _ = write!(out, "| Initial tumor({}) |", table.patient);
            for col in &table.columns {
                let _ = write!(out, " {} |", col.pattern);
            }
            out.push_str("\n|---|");
            out.push_str(&"---|".repeat(table.columns.len()));
            out.push_str("\n| tumor-derived cell ID |");
            for col in &table.columns {
                let _ = write!(out, " {} |", format_ids(&col.derived_cell_ids));
            }
            out.push_str("\n| Essential Genomic Profile |");
            for col in &table.columns {
                let _ = write!(out, " {} |", format_sci(col.essential_genomic_profile));
            }
            out.push('\n');
        }
        out
    }

    /// Parse `profile_tables.csv` back into tables.
    pub fn from_csv<R: Read>(input: R) -> Result<ProfileTables> {
        let mut reader = csv::Reader::from_reader(input);
        if reader.headers()?.iter().ne(PROFILE_CSV_HEADER) {
            return Err(Error::Integrity("unexpected profile table header".into()));
        }
        let mut tables: Vec<ProfileTable> = Vec::new();
        for record in reader.records() {
            let record = record?;
            let exact: f64 = record[5]
                .parse()
                .map_err(|_| Error::Integrity(format!("bad profile value `{}`", &record[5])))?;
            let mean: f64 = record[4]
                .parse()
                .map_err(|_| Error::Integrity(format!("bad mean value `{}`", &record[4])))?;
            let column = ProfileColumn {
                pattern: record[1].to_string(),
                derived_cell_ids: parse_ids(&record[2])?,
                essential_genomic_profile: exact,
                mean_betweenness: mean,
            };
            match tables.iter_mut().find(|t| t.patient == record[0]) {
                Some(t) => t.columns.push(column),
                None => tables.push(ProfileTable {
                    patient: record[0].to_string(),
                    columns: vec![column],
                }),
            }
        }
        Ok(ProfileTables { tables })
    }
}
