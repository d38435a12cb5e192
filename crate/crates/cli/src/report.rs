//! The JSON document emitted by every command except `bloch-scan`.

use std::time::{SystemTime, UNIX_EPOCH};

use holevo::{Bits, CapacityReport, Certificate, OptimizerConfig};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

/// Slack for the bounds sandwich verdict.
pub const SANDWICH_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsRecord {
    pub eta: f64,
    pub chi_original: f64,
    pub chi_modified: f64,
    pub lower: f64,
    pub upper: Bits,
    pub delta_chi_actual: f64,
    pub sandwich_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Capacity(CapacityReport),
    Certificate(Certificate),
    Bounds(BoundsRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: String,
    /// SHA-256 of the canonical channel text; absent for `bounds`.
    pub channel_digest: Option<String>,
    pub command: String,
    pub config: Option<OptimizerConfig>,
    pub results: Results,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
}

impl ReportDocument {
    pub fn new(command: &str, channel_digest: Option<String>, config: Option<OptimizerConfig>, results: Results) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            channel_digest,
            command: command.to_string(),
            config,
            results,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}
