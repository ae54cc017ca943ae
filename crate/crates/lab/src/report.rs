//! Report envelope and its three renderings.
//!
//! The JSON form follows `schema/report.schema.json`. The CSV form has the
//! fixed columns `record,name,anchor,status,residual,detail`, where `detail`
//! is the record's `values` object as compact JSON.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 6] = ["record", "name", "anchor", "status", "residual", "detail"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    /// The statement the record checks or reports on.
    pub anchor: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub values: Map<String, Value>,
}

impl Record {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, status: Status) -> Self {
        Record { name: name.into(), anchor: anchor.into(), status, residual: None, values: Map::new() }
    }

    pub fn check(name: impl Into<String>, anchor: impl Into<String>, passed: bool) -> Self {
        Self::new(name, anchor, if passed { Status::Pass } else { Status::Fail })
    }

    pub fn residual(mut self, r: f64) -> Self {
        self.residual = Some(r);
        self
    }

    pub fn value(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.values.insert(key.to_string(), v.into());
        self
    }
}

/// The run configuration as echoed in reports. Thread count is left out so
/// that output does not depend on it.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub n: Option<usize>,
    pub pq: Option<[usize; 2]>,
    pub space: Option<String>,
    pub mode: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_n: Option<usize>,
    pub inject_bug: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub status: Status,
    pub passed: usize,
    pub failed: usize,
    pub info: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEnvelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub records: Vec<Record>,
    pub aggregate: Aggregate,
}

impl ReportEnvelope {
    pub fn new(config: ConfigEcho, records: Vec<Record>) -> Self {
        let count = |s: Status| records.iter().filter(|r| r.status == s).count();
        let failed = count(Status::Fail);
        let aggregate = Aggregate {
            status: if failed == 0 { Status::Pass } else { Status::Fail },
            passed: count(Status::Pass),
            failed,
            info: count(Status::Info),
        };
        ReportEnvelope {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            config,
            records,
            aggregate,
        }
    }

    pub fn passed(&self) -> bool {
        self.aggregate.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for (i, r) in self.records.iter().enumerate() {
            let residual = r.residual.map(fmt_float).unwrap_or_default();
            let detail = serde_json::to_string(&r.values).expect("values serialize");
            w.write_record([i.to_string(), r.name.clone(), r.anchor.clone(), r.status.as_str().into(), residual, detail])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = write!(out, "{} {}  {}", self.tool, self.version, c.command);
        if let Some(n) = c.n {
            let _ = write!(out, "  n={n}");
        }
        if let Some(s) = &c.space {
            let _ = write!(out, "  space={s}");
        }
        if let Some(m) = &c.mode {
            let _ = write!(out, "  mode={m}");
        }
        if let (Some(t), Some(s)) = (c.trials, c.seed) {
            let _ = write!(out, "  trials={t} seed={s}");
        }
        out.push('\n');
        let width = self.records.iter().map(|r| r.name.chars().count()).max().unwrap_or(4).max(4);
        let _ = writeln!(out, "{:<6} {:<width$} {:>12}  DETAIL", "STATUS", "NAME", "RESIDUAL");
        for r in &self.records {
            let residual = r.residual.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into());
            let detail = r
                .values
                .iter()
                .map(|(k, v)| format!("{k}={}", compact(v)))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(out, "{:<6} {:<width$} {:>12}  {}", r.status.as_str().to_uppercase(), r.name, residual, detail);
        }
        let a = &self.aggregate;
        let _ = writeln!(
            out,
            "{}: {} passed, {} failed, {} info",
            a.status.as_str().to_uppercase(),
            a.passed,
            a.failed,
            a.info
        );
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(x) => match x.as_f64() {
            Some(f) if x.is_f64() && f != 0.0 && (f.abs() < 1e-3 || f.abs() >= 1e6) => format!("{f:.3e}"),
            Some(f) if x.is_f64() => format!("{f:.6}"),
            _ => x.to_string(),
        },
        Value::Array(a) if a.len() > 6 => {
            let head: Vec<String> = a[..6].iter().map(compact).collect();
            format!("[{}, … {} more]", head.join(", "), a.len() - 6)
        }
        Value::Array(a) => format!("[{}]", a.iter().map(compact).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

/// Shortest round-trip decimal, as in the JSON output.
fn fmt_float(x: f64) -> String {
    serde_json::to_string(&x).expect("float serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportEnvelope {
        let records = vec![
            Record::check("round trip", "Calabi matrix to tensor and back", true).residual(1.5e-16).value("trials", 3),
            Record::check("estimate, with \"quotes\"", "a, b", false).residual(0.25),
            Record::new("spectrum", "eigenvalues", Status::Info).value("values", vec![1.0, 0.1]),
        ];
        ReportEnvelope::new(ConfigEcho { command: "verify".into(), n: Some(2), ..Default::default() }, records)
    }

    #[test]
    fn aggregate_counts() {
        let r = sample();
        assert_eq!((r.aggregate.passed, r.aggregate.failed, r.aggregate.info), (1, 1, 1));
        assert!(!r.passed());
    }

    #[test]
    fn csv_has_fixed_columns_and_quotes() {
        let text = sample().to_csv();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "record,name,anchor,status,residual,detail");
        assert_eq!(lines.next().unwrap(), r#"0,round trip,Calabi matrix to tensor and back,pass,1.5e-16,"{""trials"":3}""#);
        assert_eq!(lines.next().unwrap(), r#"1,"estimate, with ""quotes""","a, b",fail,0.25,{}"#);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.records().count(), 3);
    }

    #[test]
    fn json_uses_shortest_floats() {
        let j = sample().to_json();
        assert!(j.contains("\"residual\": 1.5e-16"));
        assert!(j.contains("0.1"));
        let v: Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["aggregate"]["status"], "fail");
        assert_eq!(v["schema_version"], 1);
    }

    #[test]
    fn table_lists_every_record() {
        let t = sample().to_table();
        assert_eq!(t.lines().count(), 2 + 3 + 1);
        assert!(t.lines().last().unwrap().starts_with("FAIL"));
    }
}
