//! Persisted fit reports.
//!
//! A report is a JSON object:
//!
//! | key | type | meaning |
//! |---|---|---|
//! | `schema` | string | always `qdtrap/fit-report/v1` |
//! | `toolkit_version` | string | version of the writing binary |
//! | `created_utc` | string | RFC 3339 timestamp |
//! | `input` | object | `path` as given and `sha256` of the file bytes |
//! | `model` | string | `exponential`, `stretched` or `g2` |
//! | `options` | object | `window` (ns, `[lo, hi]` or null), `fit_scale`, `fit_background` |
//! | `status` | string | `converged` or `failed` |
//! | `result` | object or null | fitted parameters, uncertainties, derived values, covariance |
//! | `error` | string or null | failure message when `status` is `failed` |

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qdtrap::FitResult;

use crate::CliError;

pub const REPORT_SCHEMA: &str = "qdtrap/fit-report/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &str, bytes: &[u8]) -> Self {
        Self { path: path.to_string(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    pub window: Option<(f64, f64)>,
    pub fit_scale: bool,
    pub fit_background: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    pub schema: String,
    pub toolkit_version: String,
    pub created_utc: String,
    pub input: InputDigest,
    pub model: String,
    pub options: FitOptions,
    pub status: FitStatus,
    pub result: Option<FitResult>,
    pub error: Option<String>,
}

impl FitReport {
    pub fn new(input: InputDigest, model: &str, options: FitOptions, outcome: Result<FitResult, String>) -> Self {
        let (status, result, error) = match outcome {
            Ok(r) => (FitStatus::Converged, Some(r), None),
            Err(e) => (FitStatus::Failed, None, Some(e)),
        };
        Self {
            schema: REPORT_SCHEMA.to_string(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            created_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            input,
            model: model.to_string(),
            options,
            status,
            result,
            error,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Parses and checks a report written by [`FitReport::to_json`].
pub fn parse_report(text: &str) -> Result<FitReport, CliError> {
    let r: FitReport = serde_json::from_str(text).map_err(|e| CliError::Input(format!("fit report: {e}")))?;
    if r.schema != REPORT_SCHEMA {
        return Err(CliError::Input(format!("fit report: unsupported schema {:?}", r.schema)));
    }
    match (r.status, &r.result, &r.error) {
        (FitStatus::Converged, Some(_), None) | (FitStatus::Failed, None, Some(_)) => Ok(r),
        _ => Err(CliError::Input("fit report: status does not match result/error fields".into())),
    }
}
