//! Structured verification reports: one named record per sub-check, an
//! aggregate verdict, and stable JSON output with no environmental noise.

use serde::{Deserialize, Serialize};

/// Bumped whenever the serialized report layout changes shape.
pub const REPORT_SCHEMA: u32 = 1;

/// How a sub-check reached its verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Decided by exact rational or integer arithmetic.
    Exact,
    /// Decided on a finite grid; evidence at the stated resolution, not a
    /// certificate for the limit object.
    Raster,
}

/// Outcome of one named sub-check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub statement: String,
    pub method: Method,
    pub verdict: bool,
}

impl CheckRecord {
    pub fn exact(name: &str, statement: String, verdict: bool) -> Self {
        CheckRecord {
            name: name.into(),
            statement,
            method: Method::Exact,
            verdict,
        }
    }

    pub fn raster(name: &str, statement: String, verdict: bool) -> Self {
        CheckRecord {
            name: name.into(),
            statement,
            method: Method::Raster,
            verdict,
        }
    }
}

/// A titled bundle of sub-checks. `pass` is the conjunction of all verdicts
/// pushed so far; an empty report passes vacuously.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub title: String,
    pub records: Vec<CheckRecord>,
    pub pass: bool,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report {
            schema: REPORT_SCHEMA,
            title: title.into(),
            records: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, rec: CheckRecord) {
        self.pass &= rec.verdict;
        self.records.push(rec);
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| !r.verdict).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_verdict_tracks_records() {
        let mut r = Report::new("demo");
        assert!(r.pass);
        r.push(CheckRecord::exact("a", "1 = 1".into(), true));
        assert!(r.pass);
        r.push(CheckRecord::raster("b", "grid check".into(), false));
        assert!(!r.pass);
        assert_eq!(r.record("b").unwrap().method, Method::Raster);
        assert_eq!(r.failures().len(), 1);
    }

    #[test]
    fn json_round_trip_is_stable() {
        let mut r = Report::new("demo");
        r.push(CheckRecord::exact("a", "x".into(), true));
        let s1 = r.to_json();
        let back: Report = serde_json::from_str(&s1).unwrap();
        assert_eq!(back.to_json(), s1);
        assert!(s1.contains("\"method\": \"exact\""));
    }
}
