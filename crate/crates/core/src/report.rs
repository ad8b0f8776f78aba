//! Structured check reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    SkippedDegenerate,
}

/// One line of the newline-delimited JSON output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub type_string: String,
    pub params: BTreeMap<String, String>,
    pub status: Status,
    pub details: Value,
    /// Wall-clock milliseconds.
    pub elapsed: u64,
}

impl CheckReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json_line(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line)
    }
}

/// Outcome of a verification routine.
pub trait Verification {
    fn passed(&self) -> bool;

    /// Machine-readable payload; on failure it names the witness.
    fn details(&self) -> Value;

    /// True when a sub-check was skipped because the parameter is degenerate
    /// (and everything that did run passed).
    fn degenerate(&self) -> bool {
        false
    }

    fn status(&self) -> Status {
        if !self.passed() {
            Status::Fail
        } else if self.degenerate() {
            Status::SkippedDegenerate
        } else {
            Status::Pass
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_roundtrip_is_byte_identical() {
        let mut params = BTreeMap::new();
        params.insert("m".to_string(), "5/1".to_string());
        params.insert("prime".to_string(), "19".to_string());
        let r = CheckReport {
            check_id: "closure".into(),
            type_string: "A3".into(),
            params,
            status: Status::SkippedDegenerate,
            details: json!({"dimension": 36, "target": 36, "factors": [{"root": "3", "multiplicity": 2}]}),
            elapsed: 12,
        };
        let line = r.to_json_line();
        let back = CheckReport::from_json_line(&line).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json_line(), line);
        assert!(line.contains("\"skipped-degenerate\""));
    }
}
