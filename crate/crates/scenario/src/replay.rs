//! Re-deciding from the inputs recorded in an audit log.

use siov_core::{AuditLog, RecordKind, Registry};
use thiserror::Error;

use crate::run::{decide, inputs_digest, DecisionBody, RunError};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("record {sequence}: {message}")]
    Body { sequence: u64, message: String },
    #[error("record {sequence}: {source}")]
    Run {
        sequence: u64,
        #[source]
        source: RunError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub sequence: u64,
    pub recorded: String,
    pub replayed: String,
    /// Whether the recorded inputs still hash to the record's `inputs_digest`.
    pub digest_matches: bool,
}

impl ReplayOutcome {
    pub fn reproduced(&self) -> bool {
        self.digest_matches && self.recorded == self.replayed
    }
}

pub fn replay(log: &AuditLog) -> Result<Vec<ReplayOutcome>, ReplayError> {
    let registry = Registry::with_builtins();
    let mut out = Vec::new();
    for record in log.records() {
        if record.record_kind != RecordKind::Decision {
            continue;
        }
        let sequence = record.sequence;
        let body: DecisionBody =
            serde_json::from_value(record.body.clone()).map_err(|e| ReplayError::Body {
                sequence,
                message: e.to_string(),
            })?;
        let decided =
            decide(&body.inputs, &registry).map_err(|source| ReplayError::Run { sequence, source })?;
        out.push(ReplayOutcome {
            sequence,
            recorded: record.chosen.clone().unwrap_or_default(),
            replayed: decided.judgment.chosen_id,
            digest_matches: inputs_digest(&record.body["inputs"]) == record.inputs_digest,
        });
    }
    Ok(out)
}
