//! Check records, report bundles and their JSON / CSV / text renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use stabcomm::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// One asserted check. `anchor` names the result the check exercises.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Record {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            status: Status::Pass,
            measured: None,
            bound: None,
            tolerance: None,
            detail: String::new(),
        }
    }

    pub fn measured(mut self, v: f64) -> Self {
        self.measured = Some(v);
        self
    }

    pub fn bound(mut self, v: f64) -> Self {
        self.bound = Some(v);
        self
    }

    pub fn tolerance(mut self, v: f64) -> Self {
        self.tolerance = Some(v);
        self
    }

    pub fn detail(mut self, s: impl Into<String>) -> Self {
        self.detail = s.into();
        self
    }

    pub fn passed_if(mut self, ok: bool) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }

    /// `measured ≤ bound + tolerance`.
    pub fn at_most(name: &str, anchor: &str, measured: f64, bound: f64, tol: f64) -> Self {
        Record::new(name, anchor).measured(measured).bound(bound).tolerance(tol).passed_if(measured <= bound + tol)
    }

    /// `|measured - expected| ≤ tolerance`.
    pub fn close(name: &str, anchor: &str, measured: f64, expected: f64, tol: f64) -> Self {
        Record::new(name, anchor)
            .measured(measured)
            .bound(expected)
            .tolerance(tol)
            .passed_if((measured - expected).abs() <= tol)
    }

    /// Cap violations become skipped records; every other error is a failure.
    pub fn from_error(name: &str, anchor: &str, e: &Error) -> Self {
        let status = match e {
            Error::CapExceeded { .. } => Status::Skipped,
            _ => Status::Fail,
        };
        Record { status, ..Record::new(name, anchor).detail(e.to_string()) }
    }
}

/// Runs `f`, turning an error into a single failed or skipped record.
pub fn guarded(name: &str, anchor: &str, f: impl FnOnce() -> stabcomm::Result<Vec<Record>>) -> Vec<Record> {
    f().unwrap_or_else(|e| vec![Record::from_error(name, anchor, &e)])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub command: String,
    pub config: serde_json::Value,
    pub records: Vec<Record>,
    /// Command-specific payload (enumerations, weights, protocol reports).
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
    /// Present only when timing was requested, so that output stays reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
    pub version: String,
}

impl ReportBundle {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            records: Vec::new(),
            data: serde_json::Value::Null,
            elapsed_seconds: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Fail).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
    /// A single number: the size of the enumerated set.
    Count,
    /// One JSON object per enumerated element.
    Jsonl,
}

pub fn to_json(bundle: &ReportBundle) -> String {
    let mut s = serde_json::to_string_pretty(bundle).expect("report serializes");
    s.push('\n');
    s
}

/// Records only; an empty slice renders as `[]`.
pub fn records_to_json(records: &[Record]) -> String {
    serde_json::to_string(records).expect("records serialize")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header plus one row per record.
pub fn to_csv(records: &[Record]) -> String {
    let mut out = String::from("name,anchor,status,measured,bound,tolerance,detail\n");
    for r in records {
        let row = [
            csv_field(&r.name),
            csv_field(&r.anchor),
            r.status.as_str().to_string(),
            opt(r.measured),
            opt(r.bound),
            opt(r.tolerance),
            csv_field(&r.detail),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn to_text(bundle: &ReportBundle) -> String {
    let w_name = bundle.records.iter().map(|r| r.name.chars().count()).max().unwrap_or(4).max(4);
    let mut out = String::new();
    let _ = writeln!(out, "{} (stabcomm {})", bundle.command, bundle.version);
    let _ = writeln!(out, "{:<w_name$}  {:<7}  {:>12}  {:>12}  detail", "name", "status", "measured", "bound");
    for r in &bundle.records {
        let _ = writeln!(
            out,
            "{:<w_name$}  {:<7}  {:>12}  {:>12}  {}",
            r.name,
            r.status.as_str(),
            r.measured.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into()),
            r.bound.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into()),
            r.detail
        );
    }
    let skipped = bundle.records.iter().filter(|r| r.status == Status::Skipped).count();
    let _ = writeln!(
        out,
        "{} checks: {} passed, {} failed, {} skipped",
        bundle.records.len(),
        bundle.records.len() - bundle.failures() - skipped,
        bundle.failures(),
        skipped
    );
    if let Some(t) = bundle.elapsed_seconds {
        let _ = writeln!(out, "elapsed: {t:.2}s");
    }
    out
}
