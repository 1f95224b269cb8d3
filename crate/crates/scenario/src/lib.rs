//! Scenario documents, decision runs with a hash-chained audit log, replay,
//! explanation and UF table emission.

pub mod emit;
pub mod explain;
pub mod replay;
pub mod run;
pub mod schema;

pub use emit::{emit_svg, emit_uf_table, UF_TABLE_HEADER};
pub use explain::explain;
pub use replay::{replay, ReplayError, ReplayOutcome};
pub use run::{
    resolve_seed, run_scenario, DecisionReport, RunError, RunOptions, RunOutput, SeedSource,
    SEED_ENV,
};
pub use schema::{parse_document, parse_scenario, RulebaseRef, Scenario, ScenarioError, SCHEMA_VERSION};

use siov_core::{AuditLog, AuditRecord};

/// Appends a prebuilt record, checking that it chains onto the head.
pub fn append_audit(mut log: AuditLog, record: AuditRecord) -> Result<AuditLog, siov_core::audit::AuditError> {
    log.append(record)?;
    Ok(log)
}
