//! Result rows and their CSV form.
//!
//! Floating-point fields are printed with 17 significant digits so that
//! parsing the emitted file reproduces every double bit-exactly.

use std::path::Path;

use prta_core::analysis::Method;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(
        "method {missing} has no row for task set {taskset_id} target {target}; \
         comparison needs both methods on every set"
    )]
    MissingMethodRows {
        taskset_id: String,
        target: u32,
        missing: Method,
    },
    #[error("unexpected CSV header: {found}")]
    BadHeader { found: String },
    #[error("CSV record {record}: {message}")]
    BadRecord { record: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const CSV_HEADER: [&str; 10] = [
    "taskset_id",
    "n",
    "utilization",
    "target",
    "method",
    "wcdfp",
    "wall_time_s",
    "merge_operand_sum",
    "lost_mass",
    "mc_halfwidth",
];

/// One (task set, target, method) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub taskset_id: String,
    pub n: u32,
    pub utilization: f64,
    pub target: u32,
    pub method: Method,
    pub wcdfp: f64,
    pub wall_time_s: f64,
    pub merge_operand_sum: u64,
    pub lost_mass: f64,
    pub mc_halfwidth: Option<f64>,
}

/// A row that could not be produced; kept out of the CSV but never dropped
/// silently.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub taskset_id: String,
    /// `None` when the task set itself could not be generated.
    pub method: Option<Method>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<RowFailure>,
}

impl ResultTable {
    /// Rows of one method, in table order.
    pub fn method_rows(&self, method: Method) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    /// The row for an exact (task set, target, method) key.
    pub fn find(&self, taskset_id: &str, target: u32, method: Method) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.taskset_id == taskset_id && r.target == target && r.method == method)
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes the table (successful rows only) to CSV text.
pub fn csv_string(table: &ResultTable) -> Result<String, HarnessError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for row in &table.rows {
        writer.write_record([
            row.taskset_id.clone(),
            row.n.to_string(),
            fmt_float(row.utilization),
            row.target.to_string(),
            row.method.name().to_string(),
            fmt_float(row.wcdfp),
            fmt_float(row.wall_time_s),
            row.merge_operand_sum.to_string(),
            fmt_float(row.lost_mass),
            row.mc_halfwidth.map(fmt_float).unwrap_or_default(),
        ])?;
    }
    let bytes = writer.into_inner().expect("in-memory writer");
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, csv_string(table)?)?;
    Ok(())
}

pub fn parse_csv(path: &Path) -> Result<ResultTable, HarnessError> {
    parse_csv_str(&std::fs::read_to_string(path)?)
}

pub fn parse_csv_str(text: &str) -> Result<ResultTable, HarnessError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<&str> = reader.headers()?.iter().collect();
    if header != CSV_HEADER {
        return Err(HarnessError::BadHeader {
            found: header.join(","),
        });
    }

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |message: String| HarnessError::BadRecord {
            record: idx + 1,
            message,
        };
        let field = |i: usize| -> Result<&str, HarnessError> {
            record
                .get(i)
                .ok_or_else(|| bad(format!("missing field {}", CSV_HEADER[i])))
        };
        let float = |i: usize| -> Result<f64, HarnessError> {
            field(i)?.parse::<f64>().map_err(|e| bad(e.to_string()))
        };
        rows.push(ResultRow {
            taskset_id: field(0)?.to_string(),
            n: field(1)?
                .parse()
                .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            utilization: float(2)?,
            target: field(3)?
                .parse()
                .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            method: field(4)?.parse().map_err(bad)?,
            wcdfp: float(5)?,
            wall_time_s: float(6)?,
            merge_operand_sum: field(7)?
                .parse()
                .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            lost_mass: float(8)?,
            mc_halfwidth: match field(9)? {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            },
        });
    }
    Ok(ResultTable {
        rows,
        failures: Vec::new(),
    })
}
