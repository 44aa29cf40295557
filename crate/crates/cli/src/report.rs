//! Machine-readable run reports.
//!
//! Everything except the optional `timing` block is a pure function of the
//! config and the crate version, so two runs of the same config serialize to
//! the same bytes once timing is dropped.

use rough_ideal::analysis::LimitSetEstimate;
use rough_ideal::{Outcome, Verdict};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Expectation, ExperimentConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Environment {
    /// SHA-256 of the config as run (after command-line overrides).
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    pub window: u64,
    pub epsilons: Vec<f64>,
}

impl Environment {
    pub fn for_config(config: &ExperimentConfig) -> Self {
        let settings = config.settings();
        Environment {
            config_hash: config_hash(config),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            window: settings.window,
            epsilons: settings.epsilons,
        }
    }
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// How an entry counts towards the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
    /// Estimates without a verdict; they do not affect the exit code.
    Info,
}

impl Status {
    pub fn of(outcome: Option<Outcome>, has_error: bool, expect: Option<Expectation>) -> Status {
        match expect {
            Some(e) if e.matches(outcome) => Status::Pass,
            Some(_) if outcome == Some(Outcome::Unknown) => Status::Unknown,
            Some(_) => Status::Fail,
            None if has_error => Status::Fail,
            None => match outcome {
                Some(Outcome::Holds) => Status::Pass,
                Some(Outcome::Fails) => Status::Fail,
                Some(Outcome::Unknown) => Status::Unknown,
                None => Status::Info,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntryError {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Entry {
    pub index: usize,
    pub op: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expectation>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<LimitSetEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<EntryError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub unknown: usize,
    pub info: usize,
    pub exit_code: i32,
}

impl Summary {
    pub fn of(entries: &[Entry]) -> Summary {
        let count = |s: Status| entries.iter().filter(|e| e.status == s).count();
        let (pass, fail, unknown, info) = (
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Unknown),
            count(Status::Info),
        );
        let exit_code = if fail > 0 {
            1
        } else if unknown > 0 {
            2
        } else {
            0
        };
        Summary {
            pass,
            fail,
            unknown,
            info,
            exit_code,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub total_ms: f64,
    pub entry_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub environment: Environment,
    pub entries: Vec<Entry>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn without_timing(&self) -> Report {
        Report {
            timing: None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_rules() {
        assert_eq!(Status::of(Some(Outcome::Holds), false, None), Status::Pass);
        assert_eq!(Status::of(Some(Outcome::Fails), false, None), Status::Fail);
        assert_eq!(
            Status::of(Some(Outcome::Fails), false, Some(Expectation::Fails)),
            Status::Pass
        );
        assert_eq!(
            Status::of(Some(Outcome::Holds), false, Some(Expectation::Fails)),
            Status::Fail
        );
        assert_eq!(
            Status::of(Some(Outcome::Unknown), false, Some(Expectation::Holds)),
            Status::Unknown
        );
        assert_eq!(Status::of(None, true, None), Status::Fail);
        assert_eq!(Status::of(None, true, Some(Expectation::Error)), Status::Pass);
        assert_eq!(Status::of(None, false, None), Status::Info);
    }

    fn entry(status: Status) -> Entry {
        Entry {
            index: 0,
            op: "x".into(),
            params: serde_json::Value::Null,
            outcome: None,
            expected: None,
            status,
            certificate_id: None,
            verdict: None,
            estimate: None,
            error: None,
        }
    }

    #[test]
    fn exit_codes() {
        let s = |v: &[Status]| Summary::of(&v.iter().map(|&s| entry(s)).collect::<Vec<_>>()).exit_code;
        assert_eq!(s(&[]), 0);
        assert_eq!(s(&[Status::Pass, Status::Info]), 0);
        assert_eq!(s(&[Status::Pass, Status::Unknown]), 2);
        assert_eq!(s(&[Status::Unknown, Status::Fail]), 1);
    }
}
