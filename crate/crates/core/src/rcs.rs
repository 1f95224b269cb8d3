//! Per-entity control node: sensory processing, world modeling, judgment of
//! value and behavior generation, plus the command hierarchy nodes are
//! arranged in.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{ActionProposal, DecisionEngine, DecisionError, Judgment, UtilitarianEngine};
use crate::entity::{EntityId, EntityState, NodeRole, RoleKind};
use crate::ethics::CandidateAction;
use crate::rules::RuleBase;

pub type Tick = u64;

/// Default number of ticks an entity may go unseen before it is forgotten.
pub const DEFAULT_STALENESS_TICKS: Tick = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RcsError {
    #[error("topology error: {0}")]
    Topology(String),
    #[error("node `{0}` is a fixed RSU and cannot change role")]
    RoleLocked(EntityId),
    #[error("unknown node `{0}`")]
    UnknownNode(EntityId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impairment {
    Asleep,
    Intoxicated,
    MedicalEmergency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalPhase {
    Green,
    Red,
}

/// What a sensor reported, before normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reading {
    Sighting { entity: EntityState },
    Impairment { condition: Impairment },
    Message { origin: String, kind: String },
    Signal { signal: String, phase: SignalPhase },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSensorEvent {
    pub source: String,
    pub timestamp: Tick,
    pub reading: Reading,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PerceptKind {
    EntitySighted(EntityState),
    DriverImpairment(Impairment),
    MessageReceived { origin: String, kind: String },
    SignalState { signal: String, phase: SignalPhase },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Percept {
    pub source: String,
    pub timestamp: Tick,
    pub kind: PerceptKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensorBatch {
    /// Ordered by timestamp; input order among equal timestamps.
    pub percepts: Vec<Percept>,
    pub malformed: usize,
    pub duplicates: usize,
}

impl SensorBatch {
    pub fn impairment(&self) -> Option<&Impairment> {
        self.percepts.iter().find_map(|p| match &p.kind {
            PerceptKind::DriverImpairment(i) => Some(i),
            _ => None,
        })
    }
}

fn well_formed(event: &RawSensorEvent) -> bool {
    if event.source.is_empty() {
        return false;
    }
    match &event.reading {
        Reading::Sighting { entity } => {
            !entity.id.as_str().is_empty()
                && entity.position.is_finite()
                && entity.speed.is_finite()
                && entity.speed >= 0.0
        }
        Reading::Impairment { .. } => true,
        Reading::Message { origin, .. } => !origin.is_empty(),
        Reading::Signal { signal, .. } => !signal.is_empty(),
    }
}

/// Normalizes raw sensor events into percepts. Events sharing a
/// `(source, timestamp)` key are collapsed onto the first one; malformed
/// events are dropped and counted.
pub fn process_sensors(raw: &[RawSensorEvent]) -> SensorBatch {
    let mut batch = SensorBatch::default();
    let mut seen: HashSet<(&str, Tick)> = HashSet::new();
    for event in raw {
        if !well_formed(event) {
            batch.malformed += 1;
            continue;
        }
        if !seen.insert((event.source.as_str(), event.timestamp)) {
            batch.duplicates += 1;
            continue;
        }
        let kind = match &event.reading {
            Reading::Sighting { entity } => PerceptKind::EntitySighted(entity.clone()),
            Reading::Impairment { condition } => PerceptKind::DriverImpairment(condition.clone()),
            Reading::Message { origin, kind } => PerceptKind::MessageReceived {
                origin: origin.clone(),
                kind: kind.clone(),
            },
            Reading::Signal { signal, phase } => PerceptKind::SignalState {
                signal: signal.clone(),
                phase: *phase,
            },
        };
        batch.percepts.push(Percept {
            source: event.source.clone(),
            timestamp: event.timestamp,
            kind,
        });
    }
    batch.percepts.sort_by_key(|p| p.timestamp);
    batch
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownEntity {
    pub state: EntityState,
    pub last_seen: Tick,
}

/// Immutable snapshot of what a node believes about the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldModel {
    pub clock: Tick,
    pub self_state: EntityState,
    pub known_entities: BTreeMap<EntityId, KnownEntity>,
    pub signal_states: BTreeMap<String, SignalPhase>,
    pub rulebase_version: u64,
    pub driver_impairment: Option<Impairment>,
}

impl WorldModel {
    pub fn new(self_state: EntityState, rulebase_version: u64) -> Self {
        WorldModel {
            clock: 0,
            self_state,
            known_entities: BTreeMap::new(),
            signal_states: BTreeMap::new(),
            rulebase_version,
            driver_impairment: None,
        }
    }
}

/// Folds percepts into a new snapshot. The clock moves to the latest percept
/// timestamp; entities unseen for `staleness` ticks or more are evicted.
pub fn update_world_model(model: &WorldModel, percepts: &[Percept], staleness: Tick) -> WorldModel {
    let mut next = model.clone();
    if percepts.is_empty() {
        return next;
    }
    for p in percepts {
        next.clock = next.clock.max(p.timestamp);
        match &p.kind {
            PerceptKind::EntitySighted(e) if e.id == next.self_state.id => {
                next.self_state = e.clone();
            }
            PerceptKind::EntitySighted(e) => {
                next.known_entities.insert(
                    e.id.clone(),
                    KnownEntity {
                        state: e.clone(),
                        last_seen: p.timestamp,
                    },
                );
            }
            PerceptKind::DriverImpairment(i) => next.driver_impairment = Some(i.clone()),
            PerceptKind::SignalState { signal, phase } => {
                next.signal_states.insert(signal.clone(), *phase);
            }
            PerceptKind::MessageReceived { .. } => {}
        }
    }
    let clock = next.clock;
    next.known_entities
        .retain(|_, k| clock.saturating_sub(k.last_seen) < staleness);
    next
}

/// Judges with the default utilitarian engine.
pub fn judge(
    model: &WorldModel,
    proposals: &[ActionProposal],
    rulebase: &RuleBase,
) -> Result<Judgment, DecisionError> {
    judge_with(&UtilitarianEngine, model, proposals, rulebase)
}

/// The judgment of value depends only on its arguments; nothing outside the
/// node can steer it.
pub fn judge_with(
    engine: &dyn DecisionEngine,
    _model: &WorldModel,
    proposals: &[ActionProposal],
    rulebase: &RuleBase,
) -> Result<Judgment, DecisionError> {
    engine.decide(proposals, rulebase)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Command {
    SetSpeed { mps: f64 },
    SetTrajectory { action: String },
    EstablishEmergencyVanet { reason: String },
    ReleaseDriverControl { reason: Impairment },
    NoOp,
}

impl Command {
    pub fn set_speed(mps: f64) -> Self {
        assert!(mps >= 0.0, "speed commands must be non-negative");
        Command::SetSpeed { mps }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PendingDecision<'a> {
    None,
    Impairment(&'a Impairment),
    Chosen(&'a CandidateAction),
}

pub fn generate_behavior(pending: PendingDecision<'_>) -> Command {
    match pending {
        PendingDecision::None => Command::NoOp,
        PendingDecision::Impairment(i) => Command::ReleaseDriverControl { reason: i.clone() },
        PendingDecision::Chosen(action) => Command::SetTrajectory {
            action: action.id.clone(),
        },
    }
}

/// Command-and-control forest. Every node has at most one superior.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Hierarchy {
    roles: BTreeMap<EntityId, NodeRole>,
    subordinates: BTreeMap<EntityId, BTreeSet<EntityId>>,
    superior: BTreeMap<EntityId, EntityId>,
}

impl Hierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: EntityId, role: NodeRole) {
        self.roles.insert(id, role);
    }

    pub fn role(&self, id: &EntityId) -> Option<NodeRole> {
        self.roles.get(id).copied()
    }

    pub fn set_role(&mut self, id: &EntityId, role: NodeRole) -> Result<(), RcsError> {
        let current = self
            .roles
            .get_mut(id)
            .ok_or_else(|| RcsError::UnknownNode(id.clone()))?;
        if current.role == RoleKind::RsuFixed && role != *current {
            return Err(RcsError::RoleLocked(id.clone()));
        }
        *current = role;
        Ok(())
    }

    pub fn superior(&self, id: &EntityId) -> Option<&EntityId> {
        self.superior.get(id)
    }

    pub fn subordinates(&self, id: &EntityId) -> impl Iterator<Item = &EntityId> {
        self.subordinates.get(id).into_iter().flatten()
    }

    pub fn add_subordinate(&mut self, superior: &EntityId, sub: &EntityId) -> Result<(), RcsError> {
        for id in [superior, sub] {
            if !self.roles.contains_key(id) {
                return Err(RcsError::UnknownNode(id.clone()));
            }
        }
        if superior == sub {
            return Err(RcsError::Topology(format!("`{sub}` cannot be subordinate to itself")));
        }
        if let Some(existing) = self.superior.get(sub) {
            return Err(RcsError::Topology(format!(
                "`{sub}` already reports to `{existing}`"
            )));
        }
        // Walking up from the superior must not reach the new subordinate.
        let mut cursor = Some(superior);
        while let Some(node) = cursor {
            if node == sub {
                return Err(RcsError::Topology(format!(
                    "`{sub}` under `{superior}` would close a cycle"
                )));
            }
            cursor = self.superior.get(node);
        }
        self.subordinates
            .entry(superior.clone())
            .or_default()
            .insert(sub.clone());
        self.superior.insert(sub.clone(), superior.clone());
        Ok(())
    }

    pub fn remove_subordinate(&mut self, superior: &EntityId, sub: &EntityId) {
        if let Some(subs) = self.subordinates.get_mut(superior) {
            subs.remove(sub);
        }
        if self.superior.get(sub) == Some(superior) {
            self.superior.remove(sub);
        }
    }

    /// Breadth-first decomposition of a command into subtasks for every
    /// transitive subordinate. Only leader roles fan out, and only commands
    /// that make sense group-wide (speed, emergency VANET) are propagated.
    pub fn decompose_command(
        &self,
        node: &EntityId,
        command: &Command,
    ) -> Result<Vec<(EntityId, Command)>, RcsError> {
        let role = self
            .roles
            .get(node)
            .ok_or_else(|| RcsError::UnknownNode(node.clone()))?;
        let propagates = matches!(
            command,
            Command::SetSpeed { .. } | Command::EstablishEmergencyVanet { .. }
        );
        if !role.role.is_leader() || !propagates {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut visited: BTreeSet<&EntityId> = BTreeSet::from([node]);
        let mut frontier: Vec<&EntityId> = vec![node];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for n in frontier {
                for sub in self.subordinates(n) {
                    if !visited.insert(sub) {
                        return Err(RcsError::Topology(format!(
                            "command cycle through `{sub}`"
                        )));
                    }
                    out.push((sub.clone(), command.clone()));
                    next.push(sub);
                }
            }
            frontier = next;
        }
        Ok(out)
    }

    /// True when the subordinate relation is a forest.
    pub fn is_forest(&self) -> bool {
        self.roles.keys().all(|start| {
            let mut steps = 0;
            let mut cursor = self.superior.get(start);
            while let Some(n) = cursor {
                if n == start || steps > self.roles.len() {
                    return false;
                }
                steps += 1;
                cursor = self.superior.get(n);
            }
            true
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JvAuthority {
    /// The node acts on its own judgment.
    #[default]
    Autonomous,
    /// The judgment is only emitted as a recommendation.
    Advisory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcsConfig {
    pub staleness_ticks: Tick,
    pub jv_authority: JvAuthority,
}

impl Default for RcsConfig {
    fn default() -> Self {
        RcsConfig {
            staleness_ticks: DEFAULT_STALENESS_TICKS,
            jv_authority: JvAuthority::Autonomous,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub action: String,
    pub tuf_un: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    pub sensors: SensorBatch,
    pub judgment: Option<Judgment>,
    pub command: Command,
    pub recommendation: Option<Recommendation>,
}

/// A smart vehicle's control node.
pub struct RcsNode {
    pub config: RcsConfig,
    model: WorldModel,
    rulebase: Arc<RuleBase>,
    engine: Arc<dyn DecisionEngine>,
}

impl RcsNode {
    pub fn new(
        self_state: EntityState,
        rulebase: Arc<RuleBase>,
        engine: Arc<dyn DecisionEngine>,
        config: RcsConfig,
    ) -> Self {
        RcsNode {
            config,
            model: WorldModel::new(self_state, rulebase.version),
            rulebase,
            engine,
        }
    }

    pub fn model(&self) -> &WorldModel {
        &self.model
    }

    pub fn rulebase(&self) -> &Arc<RuleBase> {
        &self.rulebase
    }

    pub fn install_rulebase(&mut self, rulebase: Arc<RuleBase>) {
        self.model.rulebase_version = rulebase.version;
        self.rulebase = rulebase;
    }

    /// Runs one sense-model-judge-act cycle. A driver impairment seen in this
    /// tick always yields `ReleaseDriverControl`.
    pub fn tick(
        &mut self,
        raw: &[RawSensorEvent],
        proposals: &[ActionProposal],
    ) -> Result<TickOutput, DecisionError> {
        let sensors = process_sensors(raw);
        self.model = update_world_model(&self.model, &sensors.percepts, self.config.staleness_ticks);

        let judgment = if proposals.is_empty() {
            None
        } else {
            Some(judge_with(
                self.engine.as_ref(),
                &self.model,
                proposals,
                &self.rulebase,
            )?)
        };

        let mut recommendation = None;
        let command = if let Some(i) = sensors.impairment() {
            generate_behavior(PendingDecision::Impairment(i))
        } else if let Some(j) = &judgment {
            match self.config.jv_authority {
                JvAuthority::Autonomous => {
                    generate_behavior(PendingDecision::Chosen(&proposals[j.chosen].action))
                }
                JvAuthority::Advisory => {
                    recommendation = Some(Recommendation {
                        action: j.chosen_id.clone(),
                        tuf_un: j.tuf_table[j.chosen].tuf_un,
                    });
                    Command::NoOp
                }
            }
        } else {
            generate_behavior(PendingDecision::None)
        };

        Ok(TickOutput {
            sensors,
            judgment,
            command,
            recommendation,
        })
    }
}
