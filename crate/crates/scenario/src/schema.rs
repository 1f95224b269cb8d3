//! The scenario document: parsing, strict unknown-field detection and
//! validation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use siov_core::ethics::AgeBands;
use siov_core::rcs::{JvAuthority, RawSensorEvent};
use siov_core::{EntityId, EntityKind, EntityState, OutcomeFlags, Registry, RuleBase, SelScore};
use siov_netsim::{NetConfig, Simulation};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown field(s): {}", .0.join(", "))]
    UnknownFields(Vec<String>),
    #[error("schema_version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("referential error: {0}")]
    Referential(String),
    #[error("validation error: {0}")]
    Validation(String),
}

/// Which rule base a scenario is judged under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RulebaseRef {
    /// A published version. Version 1 is the built-in smart-vehicle baseline.
    Version(u64),
    Inline(RuleBase),
}

impl Default for RulebaseRef {
    fn default() -> Self {
        RulebaseRef::Version(1)
    }
}

impl RulebaseRef {
    pub fn resolve(&self, community: &str) -> Result<RuleBase, ScenarioError> {
        match self {
            RulebaseRef::Version(1) => Ok(RuleBase::sv_baseline(community)),
            RulebaseRef::Version(v) => Err(ScenarioError::Validation(format!(
                "rulebase version {v} is not published; use 1 or an inline rule base"
            ))),
            RulebaseRef::Inline(rb) => Ok(rb.clone()),
        }
    }
}

fn default_engine() -> String {
    siov_core::registry::DEFAULT_ENGINE.to_string()
}

fn default_crash_model() -> String {
    siov_core::registry::DEFAULT_CRASH_MODEL.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionConfig {
    #[serde(default = "default_engine")]
    pub engine: String,
    #[serde(default = "default_crash_model")]
    pub crash_force_model: String,
    /// The deciding vehicle. Defaults to the first smart vehicle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decider: Option<EntityId>,
    #[serde(default)]
    pub jv_authority: JvAuthority,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_bands: Option<AgeBands>,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        DecisionConfig {
            engine: default_engine(),
            crash_force_model: default_crash_model(),
            decider: None,
            jv_authority: JvAuthority::default(),
            age_bands: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantSpec {
    pub entity: EntityId,
    /// When absent, the crash-force model is applied to the decider's mass,
    /// speed and braking distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crash_force_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpec {
    pub id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub self_damage_only: bool,
    pub participants: Vec<ParticipantSpec>,
    #[serde(default)]
    pub outcome: OutcomeFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sel: Option<SelScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub config: DecisionConfig,
    pub entities: Vec<EntityState>,
    #[serde(default)]
    pub rulebase_ref: RulebaseRef,
    pub candidates: Vec<CandidateSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sensor_events: Vec<RawSensorEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetConfig>,
}

/// Parses and validates a scenario. Under `strict`, any field the schema does
/// not define is an error.
pub fn parse_scenario(bytes: &[u8], strict: bool) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = parse_document(bytes, strict)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Deserializes any schema document with the same syntax and strictness
/// rules as scenarios.
pub fn parse_document<T: serde::de::DeserializeOwned>(bytes: &[u8], strict: bool) -> Result<T, ScenarioError> {
    // Schema version first, so an old document gets a version error rather
    // than a confusing field error.
    let raw: serde_json::Value = serde_json::from_slice(bytes).map_err(syntax)?;
    if let Some(v) = raw.get("schema_version").and_then(|v| v.as_u64()) {
        if v != SCHEMA_VERSION as u64 {
            return Err(ScenarioError::SchemaVersion {
                found: v as u32,
                expected: SCHEMA_VERSION,
            });
        }
    }
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value: T = serde_ignored::deserialize(&mut de, |path| unknown.push(path.to_string()))
        .map_err(syntax)?;
    if strict && !unknown.is_empty() {
        return Err(ScenarioError::UnknownFields(unknown));
    }
    Ok(value)
}

fn syntax(e: serde_json::Error) -> ScenarioError {
    ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

impl Scenario {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    pub fn entity(&self, id: &EntityId) -> Option<&EntityState> {
        self.entities.iter().find(|e| &e.id == id)
    }

    /// The deciding vehicle: the configured one, else the first smart vehicle.
    pub fn decider(&self) -> Option<&EntityState> {
        match &self.config.decider {
            Some(id) => self.entity(id),
            None => self
                .entities
                .iter()
                .find(|e| e.kind == EntityKind::SmartVehicle),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        use ScenarioError::{Referential, Validation};

        if self.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }

        let mut ids = BTreeSet::new();
        for e in &self.entities {
            if !ids.insert(&e.id) {
                return Err(Validation(format!("duplicate entity id `{}`", e.id)));
            }
            let finite = e.position.is_finite() && e.speed.is_finite() && e.heading.is_finite();
            if !finite {
                return Err(Validation(format!("entity `{}` has non-finite kinematics", e.id)));
            }
            if e.kind.is_mobile() && !(e.mass > 0.0 && e.mass.is_finite()) {
                return Err(Validation(format!("entity `{}` must have mass > 0, got {}", e.id, e.mass)));
            }
            if e.speed < 0.0 || !(e.braking_distance >= 0.0) {
                return Err(Validation(format!(
                    "entity `{}` needs non-negative speed and braking distance",
                    e.id
                )));
            }
            if e.kind == EntityKind::Pedestrian
                && e.safety_rating.value() != siov_core::SafetyRating::PEDESTRIAN
            {
                return Err(Validation(format!(
                    "pedestrian `{}` must have safety rating 0.1, got {}",
                    e.id,
                    e.safety_rating.value()
                )));
            }
            if e.kind == EntityKind::Rsu && e.speed != 0.0 {
                return Err(Validation(format!("RSU `{}` must have speed 0", e.id)));
            }
            if !e.role().is_consistent() {
                return Err(Validation(format!("entity `{}` has an inconsistent role", e.id)));
            }
        }

        if self.candidates.is_empty() {
            return Err(Validation("no candidate actions".into()));
        }
        let mut cids = BTreeSet::new();
        for c in &self.candidates {
            if !cids.insert(&c.id) {
                return Err(Validation(format!("duplicate candidate id `{}`", c.id)));
            }
            if c.participants.is_empty() {
                return Err(Validation(format!("candidate `{}` has no participants", c.id)));
            }
            for p in &c.participants {
                if !ids.contains(&p.entity) {
                    return Err(Referential(format!(
                        "candidate `{}` names unknown entity `{}`",
                        c.id, p.entity
                    )));
                }
                if let Some(f) = p.crash_force_n {
                    if !(f >= 0.0) || !f.is_finite() {
                        return Err(Validation(format!(
                            "candidate `{}`: crash force for `{}` must be >= 0, got {f}",
                            c.id, p.entity
                        )));
                    }
                }
            }
            if let Some(sel) = &c.sel {
                sel.validate()
                    .map_err(|e| Validation(format!("candidate `{}`: {e}", c.id)))?;
            }
        }

        let registry = Registry::with_builtins();
        registry
            .engine(&self.config.engine)
            .map_err(|e| Validation(e.to_string()))?;
        registry
            .crash_model(&self.config.crash_force_model)
            .map_err(|e| Validation(e.to_string()))?;
        if self.config.engine == "sel" {
            if let Some(c) = self.candidates.iter().find(|c| c.sel.is_none()) {
                return Err(Validation(format!("engine `sel` needs a sel score on candidate `{}`", c.id)));
            }
        }
        if let Some(bands) = &self.config.age_bands {
            bands.validate().map_err(|e| Validation(e.to_string()))?;
        }
        match (&self.config.decider, self.decider()) {
            (Some(id), None) => {
                return Err(Referential(format!("decider `{id}` is not an entity")));
            }
            (None, None) => {
                return Err(Referential("no smart vehicle to act as decider".into()));
            }
            _ => {}
        }
        let needs_model = self
            .candidates
            .iter()
            .flat_map(|c| &c.participants)
            .any(|p| p.crash_force_n.is_none());
        if needs_model {
            let d = self.decider().expect("checked above");
            if !(d.braking_distance > 0.0) {
                return Err(Validation(format!(
                    "decider `{}` needs a braking distance > 0 to derive crash forces",
                    d.id
                )));
            }
        }
        self.rulebase_ref.resolve(&self.name)?;
        for ev in &self.sensor_events {
            if ev.source.trim().is_empty() {
                return Err(Validation("sensor event with empty source".into()));
            }
        }
        if let Some(net) = &self.network {
            Simulation::new(net, 0).map_err(|e| Validation(format!("network: {e}")))?;
        }
        Ok(())
    }
}
