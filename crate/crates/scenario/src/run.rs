//! Running a scenario through a control node and recording the decision.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use siov_core::audit::digest_json;
use siov_core::decision::{DecisionError, TufRow};
use siov_core::ethics::{personal_ethical_value, AgeBands, TieBreak};
use siov_core::rcs::{Command, JvAuthority, RawSensorEvent, RcsConfig, RcsNode, Recommendation};
use siov_core::{
    ActionProposal, AuditEvent, AuditLog, CandidateAction, EntityId, EntityKind, EntityState,
    EthicsError, Judgment, Participant, RecordKind, Registry, RegistryError, RuleBase, Verdict,
};
use siov_netsim::sim::NetRun;
use siov_netsim::{NetError, Simulation};
use thiserror::Error;

use crate::schema::{Scenario, ScenarioError};

/// Environment variable consulted when neither the command line nor the
/// scenario fixes a seed.
pub const SEED_ENV: &str = "SIOV_SEED";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Ethics(#[from] EthicsError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error("network simulation: {0}")]
    Net(#[from] NetError),
    #[error("{SEED_ENV} is not a 64-bit unsigned integer: `{0}`")]
    Seed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    CommandLine,
    Scenario,
    Environment,
    Default,
}

/// Picks the seed by precedence: command line, scenario, environment, 0.
pub fn resolve_seed(
    cli: Option<u64>,
    scenario: Option<u64>,
    env: Option<&str>,
) -> Result<(u64, SeedSource), RunError> {
    if let Some(s) = cli {
        return Ok((s, SeedSource::CommandLine));
    }
    if let Some(s) = scenario {
        return Ok((s, SeedSource::Scenario));
    }
    if let Some(raw) = env {
        let s = raw.trim().parse().map_err(|_| RunError::Seed(raw.to_string()))?;
        return Ok((s, SeedSource::Environment));
    }
    Ok((0, SeedSource::Default))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub engine: Option<String>,
    pub rulebase: Option<RuleBase>,
    /// Raw value of [`SEED_ENV`], if any.
    pub env_seed: Option<String>,
}

impl RunOptions {
    pub fn from_env() -> Self {
        RunOptions {
            env_seed: std::env::var(SEED_ENV).ok(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupantValue {
    pub age_years: f64,
    pub category: u8,
    pub pev_u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityValue {
    pub id: EntityId,
    pub kind: EntityKind,
    pub safety_rating: f64,
    pub occupants: Vec<OccupantValue>,
    pub tev_u: f64,
}

/// Everything the decision depended on. Its digest is the record's
/// `inputs_digest`, and replay starts from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionInputs {
    pub scenario: String,
    pub engine: String,
    pub crash_force_model: String,
    pub decider: EntityState,
    pub jv_authority: JvAuthority,
    pub rulebase: RuleBase,
    pub proposals: Vec<ActionProposal>,
    pub sensor_events: Vec<RawSensorEvent>,
    pub seed: u64,
    pub seed_source: SeedSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intermediates {
    pub entities: Vec<EntityValue>,
    pub tuf_table: Vec<TufRow>,
    pub verdicts: Vec<Verdict>,
    pub admitted: Vec<usize>,
    pub fallback: bool,
    pub tie_break: TieBreak,
}

/// Body of a Decision audit record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionBody {
    pub inputs: DecisionInputs,
    pub intermediates: Intermediates,
    pub chosen: String,
    pub command: Command,
    #[serde(default)]
    pub recommendation: Option<Recommendation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub scenario: String,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub engine: String,
    pub rulebase_version: u64,
    pub decider: EntityId,
    pub entities: Vec<EntityValue>,
    pub proposals: Vec<ActionProposal>,
    pub judgment: Judgment,
    pub command: Command,
    pub recommendation: Option<Recommendation>,
}

impl DecisionReport {
    pub fn chosen_id(&self) -> &str {
        &self.judgment.chosen_id
    }

    pub fn chosen_tuf(&self) -> f64 {
        self.judgment.tuf_table[self.judgment.chosen].tuf_un
    }

    pub fn tuf(&self, action_id: &str) -> Option<f64> {
        self.judgment
            .tuf_table
            .iter()
            .find(|r| r.action_id == action_id)
            .map(|r| r.tuf_un)
    }
}

pub struct RunOutput {
    pub report: DecisionReport,
    pub audit: AuditLog,
    pub network: Option<NetRun>,
}

fn entity_value(e: &EntityState, bands: &AgeBands) -> Result<EntityValue, EthicsError> {
    let mut occupants = Vec::with_capacity(e.occupants.len());
    let mut tev = 0.0;
    for o in &e.occupants {
        let category = o.category_with(bands)?;
        let pev = personal_ethical_value(category, e.safety_rating).units();
        tev += pev;
        occupants.push(OccupantValue {
            age_years: o.age_years(),
            category: category.value(),
            pev_u: pev,
        });
    }
    Ok(EntityValue {
        id: e.id.clone(),
        kind: e.kind,
        safety_rating: e.safety_rating.value(),
        occupants,
        tev_u: tev,
    })
}

/// Per-entity ethical values, in entity order.
pub fn entity_values(scenario: &Scenario) -> Result<Vec<EntityValue>, EthicsError> {
    let bands = scenario.config.age_bands.unwrap_or_default();
    scenario
        .entities
        .iter()
        .map(|e| entity_value(e, &bands))
        .collect()
}

/// Turns candidate specs into proposals, filling in ethical values and any
/// crash force left to the model.
pub fn resolve_proposals(
    scenario: &Scenario,
    registry: &Registry,
) -> Result<Vec<ActionProposal>, RunError> {
    let values = entity_values(scenario)?;
    let model = registry.crash_model(&scenario.config.crash_force_model)?;
    let decider = scenario
        .decider()
        .ok_or_else(|| ScenarioError::Referential("no decider".into()))?;
    let mut modelled = None;
    let mut out = Vec::with_capacity(scenario.candidates.len());
    for c in &scenario.candidates {
        let mut participants = Vec::with_capacity(c.participants.len());
        for p in &c.participants {
            let tev = values
                .iter()
                .find(|v| v.id == p.entity)
                .map(|v| v.tev_u)
                .ok_or_else(|| {
                    ScenarioError::Referential(format!("unknown entity `{}`", p.entity))
                })?;
            let force = match p.crash_force_n {
                Some(f) => f,
                None => match modelled {
                    Some(f) => f,
                    None => {
                        let f = model
                            .crash_force(decider.mass, decider.speed, decider.braking_distance)?
                            .newtons();
                        modelled = Some(f);
                        f
                    }
                },
            };
            participants.push(Participant::new(p.entity.clone(), tev, force)?);
        }
        let action = CandidateAction::new(c.id.clone(), participants)?
            .self_damage_only(c.self_damage_only)
            .describe(c.description.clone());
        let mut proposal = ActionProposal::new(action, c.outcome.clone());
        if let Some(sel) = c.sel {
            proposal = proposal.with_sel(sel);
        }
        out.push(proposal);
    }
    Ok(out)
}

/// Judges a scenario once, records the decision and runs its network if it
/// has one. Network audit events follow the decision in the log.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutput, RunError> {
    let registry = Registry::with_builtins();
    let engine_name = opts.engine.as_deref().unwrap_or(&scenario.config.engine);
    let engine = registry.engine(engine_name)?;
    let rulebase = match &opts.rulebase {
        Some(rb) => rb.clone(),
        None => scenario.rulebase_ref.resolve(&scenario.name)?,
    };
    let (seed, seed_source) = resolve_seed(opts.seed, scenario.seed, opts.env_seed.as_deref())?;
    let decider = scenario
        .decider()
        .ok_or_else(|| ScenarioError::Referential("no decider".into()))?
        .clone();

    let proposals = resolve_proposals(scenario, &registry)?;
    let inputs = DecisionInputs {
        scenario: scenario.name.clone(),
        engine: engine.name().to_string(),
        crash_force_model: scenario.config.crash_force_model.clone(),
        decider,
        jv_authority: scenario.config.jv_authority,
        rulebase,
        proposals,
        sensor_events: scenario.sensor_events.clone(),
        seed,
        seed_source,
    };
    let decided = decide(&inputs, &registry)?;
    let entities = entity_values(scenario)?;

    let body = DecisionBody {
        inputs,
        intermediates: Intermediates {
            entities: entities.clone(),
            tuf_table: decided.judgment.tuf_table.clone(),
            verdicts: decided.judgment.verdicts.clone(),
            admitted: decided.judgment.admitted.clone(),
            fallback: decided.judgment.fallback,
            tie_break: decided.judgment.tie_break,
        },
        chosen: decided.judgment.chosen_id.clone(),
        command: decided.command.clone(),
        recommendation: decided.recommendation.clone(),
    };
    let mut audit = AuditLog::new();
    audit.record(decision_event(&body));

    let network = match &scenario.network {
        Some(cfg) => {
            let run = Simulation::run_config(cfg, seed)?;
            for ev in &run.audit_events {
                audit.record(ev.clone());
            }
            Some(run)
        }
        None => None,
    };

    let DecisionBody { inputs, .. } = body;
    let report = DecisionReport {
        scenario: inputs.scenario,
        seed,
        seed_source,
        engine: inputs.engine,
        rulebase_version: inputs.rulebase.version,
        decider: inputs.decider.id,
        entities,
        proposals: inputs.proposals,
        judgment: decided.judgment,
        command: decided.command,
        recommendation: decided.recommendation,
    };
    Ok(RunOutput {
        report,
        audit,
        network,
    })
}

pub(crate) struct Decided {
    pub judgment: Judgment,
    pub command: Command,
    pub recommendation: Option<Recommendation>,
}

/// One control-node tick over the recorded inputs. Shared with replay.
pub(crate) fn decide(inputs: &DecisionInputs, registry: &Registry) -> Result<Decided, RunError> {
    let engine = registry.engine(&inputs.engine)?;
    let config = RcsConfig {
        jv_authority: inputs.jv_authority,
        ..RcsConfig::default()
    };
    let mut node = RcsNode::new(
        inputs.decider.clone(),
        Arc::new(inputs.rulebase.clone()),
        engine,
        config,
    );
    let out = node.tick(&inputs.sensor_events, &inputs.proposals)?;
    let judgment = out
        .judgment
        .ok_or(DecisionError::Ethics(EthicsError::EmptyCandidates))?;
    Ok(Decided {
        judgment,
        command: out.command,
        recommendation: out.recommendation,
    })
}

pub(crate) fn inputs_digest(inputs: &serde_json::Value) -> String {
    digest_json(inputs)
}

fn decision_event(body: &DecisionBody) -> AuditEvent {
    let value = serde_json::to_value(body).expect("decision bodies serialize");
    let logical_time = body
        .inputs
        .sensor_events
        .iter()
        .map(|e| e.timestamp)
        .max()
        .unwrap_or(0);
    AuditEvent {
        kind: RecordKind::Decision,
        logical_time,
        inputs_digest: inputs_digest(&value["inputs"]),
        rulebase_version: Some(body.inputs.rulebase.version),
        chosen: Some(body.chosen.clone()),
        body: value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(
            resolve_seed(Some(7), Some(3), Some("5")).unwrap(),
            (7, SeedSource::CommandLine)
        );
        assert_eq!(
            resolve_seed(None, Some(3), Some("5")).unwrap(),
            (3, SeedSource::Scenario)
        );
        assert_eq!(
            resolve_seed(None, None, Some(" 5 ")).unwrap(),
            (5, SeedSource::Environment)
        );
        assert_eq!(resolve_seed(None, None, None).unwrap(), (0, SeedSource::Default));
        assert!(matches!(
            resolve_seed(None, None, Some("x")),
            Err(RunError::Seed(_))
        ));
    }
}
