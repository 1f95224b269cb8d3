//! The simulation kernel.
//!
//! Each call to [`Simulation::step`] drains every event due at the current
//! tick, including zero-latency events scheduled while draining, then
//! advances the clock by one. Nodes are kept in id order and all randomness
//! comes from one seeded ChaCha stream, so runs are reproducible.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use siov_core::audit::digest_json;
use siov_core::rcs::{Command, Hierarchy, RcsError};
use siov_core::{AuditEvent, NodeRole, Position, RecordKind, RoleKind};
use thiserror::Error;

use crate::channel::{Channel, TICK_SECONDS};
use crate::config::{
    AttackSpec, MessageSpec, NetConfig, NodeKind, NodeSpec, SegmentSpec, SimParams, TripSpec, TrustList,
};
use crate::message::{papa_check, Message, MessageKey, MessageKind, PapaOutcome, PapaPolicy, Payload, Region};
use crate::queue::EventQueue;
use crate::trace::{
    self, BroadcastStats, DropReason, EmergencyDelivery, PlatoonSummary, PreemptionStatus, Promotion,
    Summary, TraceEvent, TraceRecord, TripSummary,
};
use crate::{NodeId, Tick};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("addressing error: unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(NodeId),
    #[error("routing error: unknown path segment `{0}`")]
    UnknownSegment(String),
    #[error("membership error: {0}")]
    Membership(String),
    #[error("invalid network config: {0}")]
    Config(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Hierarchy(#[from] RcsError),
}

/// What the channel did with a unicast. This is the simulator's view; the
/// sending node itself is never told.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SendOutcome {
    Scheduled { arrival_tick: Tick },
    Dropped(DropReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corroboration {
    Held { origins: usize },
    Promoted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedOverride {
    pub segment: String,
    pub rsu: NodeId,
    pub green_from: Tick,
    pub eta: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RightOfWay {
    Granted { overrides: Vec<PlannedOverride> },
    Denied { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct AttackHandle(pub usize);

/// Everything a configured run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct NetRun {
    pub trace: Vec<TraceRecord>,
    pub summary: Summary,
    pub audit_events: Vec<AuditEvent>,
    /// Same configuration with every preemption request removed, when the
    /// configuration asked for any.
    pub baseline: Option<Summary>,
}

impl NetRun {
    pub fn trace_bytes(&self) -> Vec<u8> {
        trace::to_json_lines(&self.trace)
    }
}

struct Node {
    kind: NodeKind,
    position: Position,
    base_role: NodeRole,
    papa_role: String,
    speed_mps: f64,
    platoon: Option<String>,
    seen: BTreeSet<MessageKey>,
    /// Per-sender (tick, tokens used).
    rate: BTreeMap<NodeId, (Tick, u32)>,
    inbound: (Tick, u32),
}

struct Platoon {
    leader: NodeId,
    members: BTreeSet<NodeId>,
}

struct Hold {
    origins: BTreeSet<NodeId>,
    opened: Tick,
    location: Position,
}

struct Trip {
    spec: TripSpec,
    seg: usize,
    started: bool,
    next_arrival: Tick,
    arrive: Option<Tick>,
    waited: Tick,
    wait_since: Option<Tick>,
    preemption: PreemptionStatus,
}

enum Event {
    Arrive { from: NodeId, to: NodeId, msg: Message },
    Originate { node: NodeId, msg: Message },
    Inject { nodes: Vec<NodeId>, msg: Message },
    Unicast { from: NodeId, to: NodeId, msg: Message },
    Flood { attacker: NodeId, target: NodeId, rate: u32, end: Tick },
    FalseReport { attacker: NodeId, incident: String, location: Position, remaining: u32 },
    HoldExpire { rsu: NodeId, incident: String, opened: Tick },
    TripDepart(usize),
    TripArrive(usize),
    OverrideStart { segment: String, vehicle: NodeId },
    OverrideTimeout { segment: String, vehicle: NodeId },
    PlatoonSpeed { leader: NodeId, mps: f64 },
}

pub struct Simulation {
    now: Tick,
    channel: Channel,
    params: SimParams,
    rng: ChaCha8Rng,
    queue: EventQueue<Event>,
    nodes: BTreeMap<NodeId, Node>,
    hierarchy: Hierarchy,
    trust: TrustList,
    segments: BTreeMap<String, SegmentSpec>,
    /// Segment id → vehicle the signal is currently forced green for.
    overrides: BTreeMap<String, NodeId>,
    platoons: BTreeMap<String, Platoon>,
    next_platoon: u64,
    next_msg_id: BTreeMap<NodeId, u64>,
    used_ids: BTreeSet<MessageKey>,
    holds: BTreeMap<(NodeId, String), Hold>,
    promoted: BTreeSet<String>,
    observers: BTreeSet<NodeId>,
    attacks: Vec<AttackSpec>,
    trips: Vec<Trip>,
    row_decided: BTreeSet<NodeId>,
    tracked: Vec<(MessageKey, u32)>,
    transmissions: BTreeMap<MessageKey, u64>,
    processed: BTreeMap<MessageKey, BTreeMap<NodeId, u32>>,
    stats: Summary,
    trace: Vec<TraceRecord>,
    audit: Vec<AuditEvent>,
}

fn travel_ticks(seg: &SegmentSpec, speed_mps: f64) -> Tick {
    ((seg.length() / (speed_mps * TICK_SECONDS)).ceil() as Tick).max(1)
}

impl Simulation {
    /// An empty network with default channel and parameters.
    pub fn empty(seed: u64) -> Self {
        Simulation {
            now: 0,
            channel: Channel::default(),
            params: SimParams::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            queue: EventQueue::new(),
            nodes: BTreeMap::new(),
            hierarchy: Hierarchy::new(),
            trust: TrustList::default(),
            segments: BTreeMap::new(),
            overrides: BTreeMap::new(),
            platoons: BTreeMap::new(),
            next_platoon: 0,
            next_msg_id: BTreeMap::new(),
            used_ids: BTreeSet::new(),
            holds: BTreeMap::new(),
            promoted: BTreeSet::new(),
            observers: BTreeSet::new(),
            attacks: Vec::new(),
            trips: Vec::new(),
            row_decided: BTreeSet::new(),
            tracked: Vec::new(),
            transmissions: BTreeMap::new(),
            processed: BTreeMap::new(),
            stats: Summary::default(),
            trace: Vec::new(),
            audit: Vec::new(),
        }
    }

    pub fn new(config: &NetConfig, seed: u64) -> Result<Self, NetError> {
        config.channel.validate().map_err(NetError::Config)?;
        let mut sim = Simulation::empty(seed);
        sim.channel = config.channel.clone();
        sim.params = config.params.clone();
        sim.trust = config.trust.clone();

        for spec in &config.nodes {
            sim.add_node(spec.clone())?;
        }
        for a in config.trust.0.keys() {
            sim.require(a)?;
        }

        for seg in &config.roads {
            if sim.segments.contains_key(&seg.id) {
                return Err(NetError::Config(format!("duplicate segment `{}`", seg.id)));
            }
            if let Some(sig) = &seg.signal {
                if sim.require(&sig.rsu)?.kind != NodeKind::Rsu {
                    return Err(NetError::Config(format!(
                        "signal on `{}` is controlled by `{}`, which is not an RSU",
                        seg.id, sig.rsu
                    )));
                }
            }
            sim.segments.insert(seg.id.clone(), seg.clone());
        }

        for p in &config.platoons {
            sim.form_platoon(&p.leader, &p.members)?;
        }

        for b in &config.broadcasts {
            let sender = match (&b.from, b.injected_at.is_empty()) {
                (Some(from), true) => from.clone(),
                (None, false) => b
                    .message
                    .origin
                    .clone()
                    .ok_or_else(|| NetError::Config("backbone injections need an explicit origin".into()))?,
                _ => {
                    return Err(NetError::Config(
                        "a broadcast needs exactly one of `from` or `injected_at`".into(),
                    ))
                }
            };
            let msg = sim.build(&sender, &b.message)?;
            sim.tracked.push((msg.key(), msg.ttl_hops));
            if b.injected_at.is_empty() {
                sim.require(&sender)?;
                sim.queue.push(b.tick, Event::Originate { node: sender, msg });
            } else {
                for n in &b.injected_at {
                    sim.require(n)?;
                }
                sim.queue.push(
                    b.tick,
                    Event::Inject {
                        nodes: b.injected_at.clone(),
                        msg,
                    },
                );
            }
        }

        for s in &config.sends {
            sim.require(&s.from)?;
            sim.require(&s.to)?;
            let msg = sim.build(&s.from, &s.message)?;
            sim.queue.push(
                s.tick,
                Event::Unicast {
                    from: s.from.clone(),
                    to: s.to.clone(),
                    msg,
                },
            );
        }

        for a in &config.attacks {
            sim.inject_attack(a.clone())?;
        }

        for t in &config.trips {
            sim.add_trip(t.clone())?;
        }

        for c in &config.platoon_commands {
            sim.require(&c.leader)?;
            if !(c.speed_mps >= 0.0) {
                return Err(NetError::Config(format!("negative platoon speed {}", c.speed_mps)));
            }
            sim.queue.push(
                c.tick,
                Event::PlatoonSpeed {
                    leader: c.leader.clone(),
                    mps: c.speed_mps,
                },
            );
        }
        Ok(sim)
    }

    /// Runs `config` for its configured number of ticks. When any trip asks
    /// for preemption, a second run without requests provides the baseline.
    pub fn run_config(config: &NetConfig, seed: u64) -> Result<NetRun, NetError> {
        let mut sim = Simulation::new(config, seed)?;
        sim.run_until(config.ticks);
        let baseline = if config.requests_preemption() {
            let mut plain = config.clone();
            for t in &mut plain.trips {
                t.request_preemption = false;
            }
            let mut base = Simulation::new(&plain, seed)?;
            base.run_until(plain.ticks);
            Some(base.summary())
        } else {
            None
        };
        Ok(NetRun {
            summary: sim.summary(),
            trace: sim.trace,
            audit_events: sim.audit,
            baseline,
        })
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn set_channel(&mut self, channel: Channel) -> Result<(), NetError> {
        channel.validate().map_err(NetError::Config)?;
        self.channel = channel;
        Ok(())
    }

    pub fn params_mut(&mut self) -> &mut SimParams {
        &mut self.params
    }

    pub fn trust_mut(&mut self) -> &mut TrustList {
        &mut self.trust
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn trace_bytes(&self) -> Vec<u8> {
        trace::to_json_lines(&self.trace)
    }

    pub fn audit_events(&self) -> &[AuditEvent] {
        &self.audit
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    pub fn position(&self, node: &NodeId) -> Option<Position> {
        self.nodes.get(node).map(|n| n.position)
    }

    pub fn speed(&self, node: &NodeId) -> Option<f64> {
        self.nodes.get(node).map(|n| n.speed_mps)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    pub fn add_node(&mut self, spec: NodeSpec) -> Result<(), NetError> {
        if self.nodes.contains_key(&spec.id) {
            return Err(NetError::DuplicateNode(spec.id));
        }
        if !spec.position.is_finite() {
            return Err(NetError::Config(format!("node `{}` has a non-finite position", spec.id)));
        }
        let role = spec.role.unwrap_or_else(|| match spec.kind {
            NodeKind::Rsu => NodeRole::new(RoleKind::RsuFixed),
            NodeKind::Vehicle => NodeRole::new(RoleKind::VehicleDynamic),
        });
        self.hierarchy.add_node(spec.id.clone(), role);
        self.nodes.insert(
            spec.id,
            Node {
                kind: spec.kind,
                position: spec.position,
                base_role: role,
                papa_role: spec.papa_role,
                speed_mps: spec.speed_mps,
                platoon: None,
                seen: BTreeSet::new(),
                rate: BTreeMap::new(),
                inbound: (0, 0),
            },
        );
        Ok(())
    }

    pub fn add_segment(&mut self, seg: SegmentSpec) -> Result<(), NetError> {
        if let Some(sig) = &seg.signal {
            self.require(&sig.rsu)?;
        }
        self.segments.insert(seg.id.clone(), seg);
        Ok(())
    }

    pub fn add_trip(&mut self, trip: TripSpec) -> Result<(), NetError> {
        self.require(&trip.vehicle)?;
        if trip.path.is_empty() {
            return Err(NetError::Config(format!("trip of `{}` has an empty path", trip.vehicle)));
        }
        for s in &trip.path {
            if !self.segments.contains_key(s) {
                return Err(NetError::UnknownSegment(s.clone()));
            }
        }
        if !(trip.speed_mps > 0.0) || !trip.speed_mps.is_finite() {
            return Err(NetError::Config(format!("trip speed must be > 0, got {}", trip.speed_mps)));
        }
        let idx = self.trips.len();
        let depart = trip.depart_tick.max(self.now);
        let first = travel_ticks(&self.segments[&trip.path[0]], trip.speed_mps);
        self.trips.push(Trip {
            preemption: if trip.request_preemption {
                PreemptionStatus::Pending
            } else {
                PreemptionStatus::NotRequested
            },
            spec: trip,
            seg: 0,
            started: false,
            next_arrival: depart + first,
            arrive: None,
            waited: 0,
            wait_since: None,
        });
        self.queue.push(depart, Event::TripDepart(idx));
        Ok(())
    }

    /// Processes every event due at the current tick, then advances the clock.
    pub fn step(&mut self) {
        while let Some((_, _, event)) = self.queue.pop_due(self.now) {
            self.handle(event);
        }
        self.now += 1;
    }

    pub fn run_until(&mut self, tick: Tick) {
        while self.now < tick {
            self.step();
        }
    }

    fn require(&self, id: &NodeId) -> Result<&Node, NetError> {
        self.nodes.get(id).ok_or_else(|| NetError::UnknownNode(id.clone()))
    }

    fn emit(&mut self, event: TraceEvent) {
        let seq = self.trace.len() as u64;
        self.trace.push(TraceRecord {
            tick: self.now,
            seq,
            event,
        });
    }

    fn audit_event(&mut self, kind: RecordKind, inputs: &impl Serialize, body: serde_json::Value) {
        self.audit.push(AuditEvent {
            kind,
            logical_time: self.now,
            inputs_digest: digest_json(inputs),
            rulebase_version: None,
            chosen: None,
            body,
        });
    }

    /// Next unused message id for `origin`.
    pub fn allocate_msg_id(&mut self, origin: &NodeId) -> u64 {
        let counter = self.next_msg_id.entry(origin.clone()).or_insert(0);
        loop {
            let id = *counter;
            *counter += 1;
            let key = MessageKey {
                origin: origin.clone(),
                msg_id: id,
            };
            if self.used_ids.insert(key) {
                return id;
            }
        }
    }

    fn build(&mut self, sender: &NodeId, spec: &MessageSpec) -> Result<Message, NetError> {
        let origin = spec.origin.clone().unwrap_or_else(|| sender.clone());
        let msg_id = match spec.msg_id {
            Some(id) => {
                let key = MessageKey {
                    origin: origin.clone(),
                    msg_id: id,
                };
                if !self.used_ids.insert(key.clone()) {
                    return Err(NetError::Config(format!("message id {key} used twice")));
                }
                id
            }
            None => self.allocate_msg_id(&origin),
        };
        let papa = spec.papa.clone().unwrap_or_else(|| PapaPolicy::open(&origin));
        if papa.acl.is_empty() {
            return Err(NetError::Config(format!("message {origin}#{msg_id} has an empty acl")));
        }
        if !spec.context_region.is_valid() {
            return Err(NetError::Config(format!("message {origin}#{msg_id} has an inverted region")));
        }
        Ok(Message {
            origin,
            msg_id,
            kind: spec.kind,
            context_region: spec.context_region,
            ttl_hops: spec.ttl_hops,
            papa,
            payload: spec.payload.clone(),
            sent_tick: self.now,
            modified_by: spec.modified_by.clone(),
        })
    }

    /// Builds a message from `origin` with a fresh id.
    pub fn new_message(&mut self, origin: &NodeId, kind: MessageKind, payload: Payload) -> Message {
        let id = self.allocate_msg_id(origin);
        let mut m = Message::new(origin.clone(), id, kind, payload);
        m.sent_tick = self.now;
        m
    }

    fn handle(&mut self, event: Event) {
        match event {
            Event::Arrive { from, to, msg } => self.receive(from, to, msg),
            Event::Originate { node, msg } => {
                let _ = self.broadcast(&node, msg);
            }
            Event::Inject { nodes, msg } => self.inject(&nodes, msg),
            Event::Unicast { from, to, msg } => {
                let _ = self.send(&from, &to, msg);
            }
            Event::Flood {
                attacker,
                target,
                rate,
                end,
            } => {
                if self.now >= end {
                    return;
                }
                for _ in 0..rate {
                    let mut m = self.new_message(&attacker, MessageKind::EventBroadcast, Payload::Noise);
                    m.papa.privacy_consent = false;
                    self.unicast(&attacker, &target, m);
                }
                if self.now + 1 < end {
                    self.queue.push(
                        self.now + 1,
                        Event::Flood {
                            attacker,
                            target,
                            rate,
                            end,
                        },
                    );
                }
            }
            Event::FalseReport {
                attacker,
                incident,
                location,
                remaining,
            } => {
                let m = self.new_message(
                    &attacker,
                    MessageKind::AccidentReport,
                    Payload::Accident {
                        incident_id: incident.clone(),
                        location,
                        corroborated: false,
                    },
                );
                let _ = self.broadcast(&attacker, m);
                if remaining > 1 {
                    self.queue.push(
                        self.now + 1,
                        Event::FalseReport {
                            attacker,
                            incident,
                            location,
                            remaining: remaining - 1,
                        },
                    );
                }
            }
            Event::HoldExpire { rsu, incident, opened } => {
                let key = (rsu, incident);
                if self.holds.get(&key).is_some_and(|h| h.opened == opened) {
                    self.holds.remove(&key);
                    self.stats.held_expired += 1;
                    let (rsu, incident) = key;
                    self.emit(TraceEvent::Expire { rsu, incident });
                }
            }
            Event::TripDepart(i) => self.trip_depart(i),
            Event::TripArrive(i) => self.trip_arrive(i),
            Event::OverrideStart { segment, vehicle } => self.override_start(segment, vehicle),
            Event::OverrideTimeout { segment, vehicle } => {
                if self.overrides.get(&segment) == Some(&vehicle) {
                    self.restore(&segment, "timeout");
                }
            }
            Event::PlatoonSpeed { leader, mps } => {
                let _ = self.command_platoon_speed(&leader, mps);
            }
        }
    }

    // ---- radio ----

    /// Unicast over the channel. Unknown endpoints are an addressing error;
    /// every other failure is a recorded drop.
    pub fn send(&mut self, from: &NodeId, to: &NodeId, mut msg: Message) -> Result<SendOutcome, NetError> {
        self.require(from)?;
        self.require(to)?;
        msg.sent_tick = self.now;
        self.used_ids.insert(msg.key());
        Ok(self.unicast(from, to, msg))
    }

    /// Queues a unicast to be sent at `tick`, after events already queued
    /// for that tick.
    pub fn schedule_send(&mut self, tick: Tick, from: &NodeId, to: &NodeId, msg: Message) -> Result<(), NetError> {
        self.require(from)?;
        self.require(to)?;
        self.used_ids.insert(msg.key());
        self.queue.push(
            tick.max(self.now),
            Event::Unicast {
                from: from.clone(),
                to: to.clone(),
                msg,
            },
        );
        Ok(())
    }

    fn unicast(&mut self, from: &NodeId, to: &NodeId, msg: Message) -> SendOutcome {
        self.count_transmission(from, &msg, false);
        let distance = self.nodes[from].position.distance(&self.nodes[to].position);
        if distance > self.channel.range_m {
            self.drop_msg(from, to, msg.key(), DropReason::OutOfRange);
            return SendOutcome::Dropped(DropReason::OutOfRange);
        }
        self.radio(from, to, msg)
    }

    fn count_transmission(&mut self, from: &NodeId, msg: &Message, broadcast: bool) {
        let key = msg.key();
        *self.transmissions.entry(key.clone()).or_default() += 1;
        self.stats.transmissions += 1;
        self.emit(TraceEvent::Transmit {
            from: from.clone(),
            key,
            kind: msg.kind,
            broadcast,
        });
        self.eavesdrop(from, msg);
    }

    /// Channel effects for one in-range receiver.
    fn radio(&mut self, from: &NodeId, to: &NodeId, msg: Message) -> SendOutcome {
        let reason = if self.channel.interfered(self.now) {
            Some(DropReason::Interference)
        } else if self.channel.loss_probability > 0.0
            && self.rng.gen::<f64>() < self.channel.loss_probability
        {
            Some(DropReason::Loss)
        } else {
            None
        };
        if let Some(reason) = reason {
            self.drop_msg(from, to, msg.key(), reason);
            return SendOutcome::Dropped(reason);
        }
        let arrival_tick = self.now + self.channel.latency_ticks();
        self.queue.push(
            arrival_tick,
            Event::Arrive {
                from: from.clone(),
                to: to.clone(),
                msg,
            },
        );
        SendOutcome::Scheduled { arrival_tick }
    }

    fn transmit(&mut self, from: &NodeId, msg: Message) {
        self.count_transmission(from, &msg, true);
        let src = self.nodes[from].position;
        let range = self.channel.range_m;
        let receivers: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|(id, n)| *id != from && n.position.distance(&src) <= range)
            .map(|(id, _)| id.clone())
            .collect();
        for to in receivers {
            self.radio(from, &to, msg.clone());
        }
    }

    fn drop_msg(&mut self, from: &NodeId, to: &NodeId, key: MessageKey, reason: DropReason) {
        *self.stats.drops.entry(reason).or_default() += 1;
        self.emit(TraceEvent::Drop {
            from: from.clone(),
            to: to.clone(),
            key,
            reason,
        });
    }

    fn eavesdrop(&mut self, from: &NodeId, msg: &Message) {
        if self.observers.is_empty() || msg.papa.encrypted {
            return;
        }
        let src = self.nodes[from].position;
        let observers: Vec<NodeId> = self
            .observers
            .iter()
            .filter(|o| {
                *o != from
                    && !self.trust.trusts(from, o)
                    && self.nodes[*o].position.distance(&src) <= self.channel.range_m
            })
            .cloned()
            .collect();
        for observer in observers {
            let privacy = msg.papa.privacy_consent || msg.payload.is_personal();
            self.stats.exposures += 1;
            if privacy {
                self.stats.privacy_exposures += 1;
                self.audit_event(
                    RecordKind::AttackObservation,
                    msg,
                    json!({"attack": "eavesdrop", "observer": observer, "key": msg.key(), "exposure": "privacy"}),
                );
            }
            self.emit(TraceEvent::Exposure {
                observer,
                key: msg.key(),
                privacy,
            });
        }
    }

    /// Originates a broadcast at `node`. Platoon members hand external
    /// messages to their leader, which relays them.
    pub fn broadcast(&mut self, node: &NodeId, mut msg: Message) -> Result<MessageKey, NetError> {
        self.require(node)?;
        msg.sent_tick = self.now;
        let key = msg.key();
        self.used_ids.insert(key.clone());
        self.nodes.get_mut(node).expect("checked").seen.insert(key.clone());
        match self.member_leader(node) {
            Some(leader) if msg.kind != MessageKind::PlatoonControl => {
                self.unicast(node, &leader, msg);
            }
            _ => self.transmit(node, msg),
        }
        Ok(key)
    }

    /// Delivers `msg` over the wired backbone to each of `nodes`, which
    /// process it and transmit it once.
    pub fn inject(&mut self, nodes: &[NodeId], mut msg: Message) {
        msg.sent_tick = self.now;
        self.used_ids.insert(msg.key());
        for n in nodes {
            let Some(node) = self.nodes.get_mut(n) else { continue };
            if !node.seen.insert(msg.key()) {
                continue;
            }
            if self.process(n, &msg) {
                self.transmit(n, msg.clone());
            }
        }
    }

    /// Number of radio transmissions seen so far for `key`.
    pub fn transmissions(&self, key: &MessageKey) -> u64 {
        self.transmissions.get(key).copied().unwrap_or(0)
    }

    /// How many times each node processed `key`.
    pub fn processed_by(&self, key: &MessageKey) -> BTreeMap<NodeId, u32> {
        self.processed.get(key).cloned().unwrap_or_default()
    }

    fn receive(&mut self, from: NodeId, to: NodeId, msg: Message) {
        let now = self.now;
        let key = msg.key();
        let (limit, capacity, limiting) = (
            self.params.rate_limit_per_tick,
            self.params.inbound_capacity_per_tick,
            self.params.rate_limiting,
        );
        let node = self.nodes.get_mut(&to).expect("arrivals target known nodes");
        let verdict = 'check: {
            if limiting {
                let bucket = node.rate.entry(from.clone()).or_insert((now, 0));
                if bucket.0 != now {
                    *bucket = (now, 0);
                }
                if bucket.1 >= limit {
                    break 'check Some(DropReason::RateLimited);
                }
                bucket.1 += 1;
            }
            if node.inbound.0 != now {
                node.inbound = (now, 0);
            }
            if node.inbound.1 >= capacity {
                break 'check Some(DropReason::QueueFull);
            }
            node.inbound.1 += 1;
            if node.seen.contains(&key) {
                break 'check Some(DropReason::Duplicate);
            }
            if !msg.context_region.contains(&node.position) {
                break 'check Some(DropReason::OutOfContext);
            }
            node.seen.insert(key.clone());
            None
        };
        if let Some(reason) = verdict {
            self.drop_msg(&from, &to, key, reason);
            return;
        }
        self.stats.deliveries += 1;
        self.emit(TraceEvent::Deliver {
            from: from.clone(),
            to: to.clone(),
            key,
        });
        if !self.process(&to, &msg) {
            return;
        }
        if self.leads_member(&to, &from) && msg.origin == from && msg.kind != MessageKind::PlatoonControl {
            self.transmit(&to, msg);
        } else if msg.ttl_hops > 0 {
            let mut fwd = msg;
            fwd.ttl_hops -= 1;
            fwd.sent_tick = now;
            self.transmit(&to, fwd);
        }
    }

    /// PAPA screening and kind-specific handling. Returns whether the message
    /// may travel further.
    fn process(&mut self, node: &NodeId, msg: &Message) -> bool {
        let key = msg.key();
        if let PapaOutcome::Violations(violations) = papa_check(&self.nodes[node].papa_role, msg) {
            self.stats.quarantined += 1;
            self.audit_event(
                RecordKind::PapaViolation,
                msg,
                json!({"node": node, "key": key, "kind": msg.kind, "violations": violations}),
            );
            self.emit(TraceEvent::Quarantine {
                node: node.clone(),
                key,
                violations,
            });
            return false;
        }
        self.stats.processed += 1;
        *self
            .processed
            .entry(key.clone())
            .or_default()
            .entry(node.clone())
            .or_default() += 1;
        self.emit(TraceEvent::Process {
            node: node.clone(),
            key: key.clone(),
            kind: msg.kind,
        });
        if msg.kind == MessageKind::EmergencyRightOfWay {
            self.stats.emergency_deliveries.push(EmergencyDelivery {
                key,
                node: node.clone(),
                sent_tick: msg.sent_tick,
                processed_tick: self.now,
            });
        }
        let is_rsu = self.nodes[node].kind == NodeKind::Rsu;
        match &msg.payload {
            Payload::Accident {
                incident_id,
                location,
                corroborated: false,
            } => {
                if is_rsu {
                    self.corroborate_from(node, &msg.origin, incident_id, *location);
                }
                // Unverified reports are never relayed.
                return false;
            }
            Payload::RightOfWay { vehicle, path } if is_rsu => {
                if self.row_decided.insert(vehicle.clone()) {
                    if let Err(e) = self.request_right_of_way(vehicle, path) {
                        self.deny(vehicle, e.to_string());
                    }
                }
            }
            Payload::PlatoonSpeed { platoon, mps } => {
                if self.nodes[node].platoon.as_ref() == Some(platoon) {
                    self.apply_speed(node, *mps);
                }
            }
            Payload::ReduceSpeed { mps, .. } if !is_rsu => {
                if self.nodes[node].speed_mps > *mps {
                    self.apply_speed(node, *mps);
                }
            }
            _ => {}
        }
        true
    }

    fn apply_speed(&mut self, node: &NodeId, mps: f64) {
        self.nodes.get_mut(node).expect("known node").speed_mps = mps;
        self.emit(TraceEvent::SpeedApplied {
            node: node.clone(),
            mps,
        });
    }

    // ---- corroboration ----

    /// Feeds an accident report to an RSU's corroboration state.
    pub fn corroborate(&mut self, rsu: &NodeId, report: &Message) -> Result<Corroboration, NetError> {
        if self.require(rsu)?.kind != NodeKind::Rsu {
            return Err(NetError::InvalidRequest(format!("`{rsu}` is not an RSU")));
        }
        match &report.payload {
            Payload::Accident {
                incident_id,
                location,
                corroborated,
            } => {
                if *corroborated {
                    return Ok(Corroboration::Promoted);
                }
                Ok(self.corroborate_from(rsu, &report.origin, incident_id, *location))
            }
            _ => Err(NetError::InvalidRequest(format!(
                "{} is not an accident report",
                report.key()
            ))),
        }
    }

    fn corroborate_from(
        &mut self,
        rsu: &NodeId,
        origin: &NodeId,
        incident: &str,
        location: Position,
    ) -> Corroboration {
        if self.promoted.contains(incident) {
            return Corroboration::Promoted;
        }
        let key = (rsu.clone(), incident.to_string());
        if !self.holds.contains_key(&key) {
            self.queue.push(
                self.now + self.params.hold_window_ticks,
                Event::HoldExpire {
                    rsu: rsu.clone(),
                    incident: incident.to_string(),
                    opened: self.now,
                },
            );
            self.holds.insert(
                key.clone(),
                Hold {
                    origins: BTreeSet::new(),
                    opened: self.now,
                    location,
                },
            );
        }
        let hold = self.holds.get_mut(&key).expect("inserted above");
        hold.origins.insert(origin.clone());
        let origins = hold.origins.len();
        if origins < self.params.corroboration_threshold {
            self.emit(TraceEvent::Hold {
                rsu: rsu.clone(),
                incident: incident.to_string(),
                origins,
            });
            return Corroboration::Held { origins };
        }
        let hold = self.holds.remove(&key).expect("present");
        self.promoted.insert(incident.to_string());
        let mut msg = self.new_message(
            rsu,
            MessageKind::AccidentReport,
            Payload::Accident {
                incident_id: incident.to_string(),
                location: hold.location,
                corroborated: true,
            },
        );
        msg.ttl_hops = self.params.promoted_ttl_hops;
        self.stats.promotions.push(Promotion {
            tick: self.now,
            rsu: rsu.clone(),
            incident: incident.to_string(),
        });
        self.emit(TraceEvent::Promote {
            rsu: rsu.clone(),
            incident: incident.to_string(),
            key: msg.key(),
        });
        let _ = self.broadcast(rsu, msg);
        Corroboration::Promoted
    }

    pub fn is_promoted(&self, incident: &str) -> bool {
        self.promoted.contains(incident)
    }

    // ---- platoons ----

    fn member_leader(&self, node: &NodeId) -> Option<NodeId> {
        let p = self.platoons.get(self.nodes.get(node)?.platoon.as_ref()?)?;
        (p.leader != *node).then(|| p.leader.clone())
    }

    fn leads_member(&self, leader: &NodeId, member: &NodeId) -> bool {
        self.member_leader(member).as_ref() == Some(leader)
    }

    fn check_free_vehicle(&self, id: &NodeId) -> Result<(), NetError> {
        let node = self.require(id)?;
        if node.kind == NodeKind::Rsu {
            return Err(NetError::Membership(format!("RSU `{id}` cannot join a platoon")));
        }
        if let Some(p) = &node.platoon {
            return Err(NetError::Membership(format!("`{id}` already belongs to {p}")));
        }
        Ok(())
    }

    pub fn form_platoon(&mut self, leader: &NodeId, members: &[NodeId]) -> Result<String, NetError> {
        self.check_free_vehicle(leader)?;
        let mut set = BTreeSet::new();
        for m in members {
            if m == leader || !set.insert(m.clone()) {
                return Err(NetError::Membership(format!("`{m}` listed twice")));
            }
            self.check_free_vehicle(m)?;
        }
        let id = format!("platoon-{}", self.next_platoon);
        self.next_platoon += 1;
        self.hierarchy.set_role(leader, NodeRole::new(RoleKind::PlatoonLeader))?;
        self.nodes.get_mut(leader).expect("checked").platoon = Some(id.clone());
        for m in &set {
            self.hierarchy.set_role(m, NodeRole::new(RoleKind::PlatoonMember))?;
            self.hierarchy.add_subordinate(leader, m)?;
            self.nodes.get_mut(m).expect("checked").platoon = Some(id.clone());
        }
        self.platoons.insert(
            id.clone(),
            Platoon {
                leader: leader.clone(),
                members: set.clone(),
            },
        );
        self.emit(TraceEvent::PlatoonFormed {
            platoon: id.clone(),
            leader: leader.clone(),
            members: set.into_iter().collect(),
        });
        self.notify_membership(&id, None);
        Ok(id)
    }

    pub fn join_platoon(&mut self, node: &NodeId, platoon: &str) -> Result<(), NetError> {
        self.check_free_vehicle(node)?;
        let leader = self
            .platoons
            .get(platoon)
            .ok_or_else(|| NetError::Membership(format!("no platoon `{platoon}`")))?
            .leader
            .clone();
        self.hierarchy.set_role(node, NodeRole::new(RoleKind::PlatoonMember))?;
        self.hierarchy.add_subordinate(&leader, node)?;
        self.nodes.get_mut(node).expect("checked").platoon = Some(platoon.to_string());
        self.platoons
            .get_mut(platoon)
            .expect("checked")
            .members
            .insert(node.clone());
        self.emit(TraceEvent::PlatoonJoined {
            platoon: platoon.to_string(),
            node: node.clone(),
        });
        self.notify_membership(platoon, None);
        Ok(())
    }

    /// Removes `node` from `platoon`. A departing leader dissolves it.
    pub fn leave_platoon(&mut self, node: &NodeId, platoon: &str) -> Result<(), NetError> {
        self.require(node)?;
        if self.nodes[node].platoon.as_deref() != Some(platoon) {
            return Err(NetError::Membership(format!("`{node}` is not in `{platoon}`")));
        }
        let p = &self.platoons[platoon];
        if p.leader == *node {
            let members: Vec<NodeId> = p.members.iter().cloned().collect();
            let leader = p.leader.clone();
            for m in &members {
                self.release(&leader, m);
            }
            self.reset_role(&leader)?;
            self.nodes.get_mut(&leader).expect("checked").platoon = None;
            self.platoons.remove(platoon);
            self.emit(TraceEvent::PlatoonDissolved {
                platoon: platoon.to_string(),
            });
            for m in &members {
                self.reset_role(m)?;
                self.membership_message(&leader, m, platoon, &leader, &[]);
            }
            return Ok(());
        }
        let leader = p.leader.clone();
        self.release(&leader, node);
        self.reset_role(node)?;
        self.platoons
            .get_mut(platoon)
            .expect("checked")
            .members
            .remove(node);
        self.emit(TraceEvent::PlatoonLeft {
            platoon: platoon.to_string(),
            node: node.clone(),
        });
        self.notify_membership(platoon, Some(node));
        Ok(())
    }

    fn release(&mut self, leader: &NodeId, member: &NodeId) {
        self.hierarchy.remove_subordinate(leader, member);
        self.nodes.get_mut(member).expect("known member").platoon = None;
    }

    fn reset_role(&mut self, node: &NodeId) -> Result<(), NetError> {
        let base = self.nodes[node].base_role;
        self.hierarchy.set_role(node, base)?;
        Ok(())
    }

    /// Leader → each member (and a departing node) unicast of the roster.
    fn notify_membership(&mut self, platoon: &str, departed: Option<&NodeId>) {
        let p = &self.platoons[platoon];
        let leader = p.leader.clone();
        let members: Vec<NodeId> = p.members.iter().cloned().collect();
        let recipients = members.iter().chain(departed);
        for to in recipients.cloned().collect::<Vec<_>>() {
            self.membership_message(&leader, &to, platoon, &leader, &members);
        }
    }

    fn membership_message(
        &mut self,
        from: &NodeId,
        to: &NodeId,
        platoon: &str,
        leader: &NodeId,
        members: &[NodeId],
    ) {
        let msg = self.new_message(
            from,
            MessageKind::PlatoonControl,
            Payload::Membership {
                platoon: platoon.to_string(),
                leader: leader.clone(),
                members: members.to_vec(),
            },
        );
        self.unicast(from, to, msg);
    }

    /// `(leader, members)` of a platoon.
    pub fn platoon(&self, id: &str) -> Option<(NodeId, Vec<NodeId>)> {
        self.platoons
            .get(id)
            .map(|p| (p.leader.clone(), p.members.iter().cloned().collect()))
    }

    pub fn platoon_of(&self, node: &NodeId) -> Option<&str> {
        self.nodes.get(node)?.platoon.as_deref()
    }

    /// Sets the leader's speed and sends the command down the hierarchy.
    pub fn command_platoon_speed(&mut self, leader: &NodeId, mps: f64) -> Result<usize, NetError> {
        self.require(leader)?;
        let platoon = self.nodes[leader]
            .platoon
            .clone()
            .filter(|p| self.platoons[p].leader == *leader)
            .ok_or_else(|| NetError::Membership(format!("`{leader}` does not lead a platoon")))?;
        self.apply_speed(leader, mps);
        let subtasks = self.hierarchy.decompose_command(leader, &Command::set_speed(mps))?;
        for (member, _) in &subtasks {
            let msg = self.new_message(
                leader,
                MessageKind::PlatoonControl,
                Payload::PlatoonSpeed {
                    platoon: platoon.clone(),
                    mps,
                },
            );
            self.unicast(leader, member, msg);
        }
        Ok(subtasks.len())
    }

    // ---- emergency preemption ----

    fn active_trip(&self, vehicle: &NodeId) -> Option<usize> {
        self.trips
            .iter()
            .position(|t| t.spec.vehicle == *vehicle && t.arrive.is_none())
    }

    fn deny(&mut self, vehicle: &NodeId, reason: String) -> RightOfWay {
        self.stats.preemptions_denied += 1;
        if let Some(i) = self.active_trip(vehicle) {
            self.trips[i].preemption = PreemptionStatus::Denied;
        }
        self.audit_event(
            RecordKind::Preemption,
            &(vehicle, &reason),
            json!({"vehicle": vehicle, "decision": "denied", "reason": reason}),
        );
        self.emit(TraceEvent::PreemptionDenied {
            vehicle: vehicle.clone(),
            reason: reason.clone(),
        });
        RightOfWay::Denied { reason }
    }

    /// Grants signal preemption along `path` to emergency vehicles. Signals
    /// turn green ahead of the predicted arrival and are restored after
    /// passage or, failing that, after a maximum hold.
    pub fn request_right_of_way(&mut self, vehicle: &NodeId, path: &[String]) -> Result<RightOfWay, NetError> {
        self.require(vehicle)?;
        for s in path {
            if !self.segments.contains_key(s) {
                return Err(NetError::UnknownSegment(s.clone()));
            }
        }
        let role = self.hierarchy.role(vehicle).expect("every node has a role").role;
        if role != RoleKind::EmergencyTactical {
            return Ok(self.deny(vehicle, format!("role {role:?} may not preempt signals")));
        }

        // Predicted arrival at the end of each segment of the path.
        let trip = self
            .active_trip(vehicle)
            .filter(|&i| self.trips[i].spec.path == path);
        let mut etas: Vec<Option<Tick>> = vec![None; path.len()];
        match trip {
            Some(i) => {
                let t = &self.trips[i];
                let mut eta = t.next_arrival;
                for (j, s) in path.iter().enumerate().skip(t.seg) {
                    if j > t.seg {
                        eta += travel_ticks(&self.segments[s], t.spec.speed_mps);
                    }
                    etas[j] = Some(eta);
                }
            }
            None => {
                let speed = self.nodes[vehicle].speed_mps;
                let mut eta = self.now;
                for (j, s) in path.iter().enumerate() {
                    if speed > 0.0 {
                        eta += travel_ticks(&self.segments[s], speed);
                    }
                    etas[j] = Some(eta);
                }
            }
        }

        let mut overrides = Vec::new();
        let mut advisories = Vec::new();
        for (j, s) in path.iter().enumerate() {
            let (Some(eta), Some(sig)) = (etas[j], self.segments[s].signal.as_ref()) else {
                continue;
            };
            let green_from = eta.saturating_sub(self.params.preemption_lead_ticks).max(self.now);
            overrides.push(PlannedOverride {
                segment: s.clone(),
                rsu: sig.rsu.clone(),
                green_from,
                eta,
            });
            advisories.push((sig.rsu.clone(), s.clone()));
        }
        for o in &overrides {
            self.queue.push(
                o.green_from,
                Event::OverrideStart {
                    segment: o.segment.clone(),
                    vehicle: vehicle.clone(),
                },
            );
            self.queue.push(
                o.eta + self.params.preemption_max_hold_ticks,
                Event::OverrideTimeout {
                    segment: o.segment.clone(),
                    vehicle: vehicle.clone(),
                },
            );
        }
        self.stats.preemptions_granted += 1;
        if let Some(i) = trip {
            self.trips[i].preemption = PreemptionStatus::Granted;
        }
        self.audit_event(
            RecordKind::Preemption,
            &(vehicle, path),
            json!({"vehicle": vehicle, "decision": "granted", "overrides": overrides}),
        );
        self.emit(TraceEvent::PreemptionGranted {
            vehicle: vehicle.clone(),
            segments: overrides.iter().map(|o| o.segment.clone()).collect(),
        });
        // RSUs tell nearby traffic to slow down along the corridor.
        for (rsu, s) in advisories {
            let seg = &self.segments[&s];
            let region = Region::around(&seg.from, &seg.to, 200.0);
            let msg = self
                .new_message(
                    &rsu,
                    MessageKind::Advisory,
                    Payload::ReduceSpeed {
                        segment: s.clone(),
                        mps: self.params.advisory_speed_mps,
                    },
                )
                .with_region(region)
                .with_ttl(1);
            let _ = self.broadcast(&rsu, msg);
        }
        Ok(RightOfWay::Granted { overrides })
    }

    fn override_start(&mut self, segment: String, vehicle: NodeId) {
        if self.overrides.contains_key(&segment) {
            return;
        }
        if let Some(i) = self.active_trip(&vehicle) {
            let t = &self.trips[i];
            let passed = t.spec.path[..t.seg].contains(&segment) && !t.spec.path[t.seg..].contains(&segment);
            if passed {
                return;
            }
        }
        let rsu = self.segments[&segment]
            .signal
            .as_ref()
            .expect("overrides only target signalled segments")
            .rsu
            .clone();
        self.overrides.insert(segment.clone(), vehicle.clone());
        self.emit(TraceEvent::SignalOverride { segment, rsu, vehicle });
    }

    fn restore(&mut self, segment: &str, reason: &str) {
        self.overrides.remove(segment);
        let rsu = self.segments[segment]
            .signal
            .as_ref()
            .expect("signalled")
            .rsu
            .clone();
        self.emit(TraceEvent::SignalRestore {
            segment: segment.to_string(),
            rsu,
            reason: reason.to_string(),
        });
    }

    /// Signal state seen by traffic at the end of `segment`.
    pub fn signal_green(&self, segment: &str) -> Option<bool> {
        let sig = self.segments.get(segment)?.signal.as_ref()?;
        Some(self.overrides.contains_key(segment) || sig.program_green(self.now))
    }

    pub fn forced_signals(&self) -> impl Iterator<Item = (&String, &NodeId)> {
        self.overrides.iter()
    }

    fn trip_depart(&mut self, i: usize) {
        let t = &mut self.trips[i];
        t.started = true;
        let vehicle = t.spec.vehicle.clone();
        let path = t.spec.path.clone();
        let speed = t.spec.speed_mps;
        let first = travel_ticks(&self.segments[&path[0]], speed);
        t.next_arrival = self.now + first;
        let wants = t.spec.request_preemption;
        let arrival = t.next_arrival;
        let node = self.nodes.get_mut(&vehicle).expect("validated");
        node.position = self.segments[&path[0]].from;
        node.speed_mps = speed;
        self.emit(TraceEvent::TripDepart {
            vehicle: vehicle.clone(),
        });
        if wants {
            self.row_decided.remove(&vehicle);
            let msg = self
                .new_message(
                    &vehicle,
                    MessageKind::EmergencyRightOfWay,
                    Payload::RightOfWay {
                        vehicle: vehicle.clone(),
                        path,
                    },
                )
                .with_ttl(self.params.request_ttl_hops);
            let _ = self.broadcast(&vehicle, msg);
        }
        self.queue.push(arrival, Event::TripArrive(i));
    }

    fn trip_arrive(&mut self, i: usize) {
        let now = self.now;
        let seg_id = self.trips[i].spec.path[self.trips[i].seg].clone();
        let vehicle = self.trips[i].spec.vehicle.clone();
        if self.signal_green(&seg_id) == Some(false) {
            let t = &mut self.trips[i];
            t.next_arrival = now + 1;
            let first_wait = t.wait_since.is_none();
            t.wait_since.get_or_insert(now);
            if first_wait {
                self.emit(TraceEvent::TripWait {
                    vehicle,
                    segment: seg_id,
                });
            }
            self.queue.push(now + 1, Event::TripArrive(i));
            return;
        }
        let t = &mut self.trips[i];
        if let Some(since) = t.wait_since.take() {
            t.waited += now - since;
        }
        if self.overrides.get(&seg_id) == Some(&vehicle) {
            self.restore(&seg_id, "passage");
        }
        let to = self.segments[&seg_id].to;
        self.nodes.get_mut(&vehicle).expect("validated").position = to;
        let t = &mut self.trips[i];
        t.seg += 1;
        if t.seg < t.spec.path.len() {
            let next = travel_ticks(&self.segments[&t.spec.path[t.seg]], t.spec.speed_mps);
            t.next_arrival = now + next;
            self.queue.push(now + next, Event::TripArrive(i));
        } else {
            t.arrive = Some(now);
            let traversal_ticks = now - t.spec.depart_tick;
            self.emit(TraceEvent::TripArrive {
                vehicle,
                traversal_ticks,
            });
        }
    }

    // ---- attacks ----

    pub fn inject_attack(&mut self, attack: AttackSpec) -> Result<AttackHandle, NetError> {
        match &attack {
            AttackSpec::DosFlood {
                attacker,
                target,
                rate_per_tick,
                start_tick,
                end_tick,
            } => {
                self.require(attacker)?;
                self.require(target)?;
                self.queue.push(
                    (*start_tick).max(self.now),
                    Event::Flood {
                        attacker: attacker.clone(),
                        target: target.clone(),
                        rate: *rate_per_tick,
                        end: *end_tick,
                    },
                );
            }
            AttackSpec::FalseMessage {
                attacker,
                incident_id,
                location,
                tick,
                repeats,
            } => {
                self.require(attacker)?;
                if *repeats > 0 {
                    self.queue.push(
                        (*tick).max(self.now),
                        Event::FalseReport {
                            attacker: attacker.clone(),
                            incident: incident_id.clone(),
                            location: *location,
                            remaining: *repeats,
                        },
                    );
                }
            }
            AttackSpec::Eavesdrop { observer } => {
                self.require(observer)?;
                self.observers.insert(observer.clone());
            }
        }
        self.attacks.push(attack);
        Ok(AttackHandle(self.attacks.len() - 1))
    }

    pub fn attack(&self, handle: AttackHandle) -> Option<&AttackSpec> {
        self.attacks.get(handle.0)
    }

    // ---- reporting ----

    pub fn summary(&self) -> Summary {
        let mut s = self.stats.clone();
        s.ticks = self.now;
        let node_count = self.nodes.len();
        s.broadcasts = self
            .tracked
            .iter()
            .map(|(key, ttl)| {
                let per_node = self.processed.get(key);
                BroadcastStats {
                    key: key.clone(),
                    ttl_hops: *ttl,
                    transmissions: self.transmissions(key),
                    node_count,
                    nodes_processed: per_node.map_or(0, |m| m.len()),
                    max_processed_per_node: per_node
                        .and_then(|m| m.values().max().copied())
                        .unwrap_or(0),
                    storm_bound: node_count as u64 * (*ttl as u64 + 1),
                }
            })
            .collect();
        s.trips = self
            .trips
            .iter()
            .map(|t| TripSummary {
                vehicle: t.spec.vehicle.clone(),
                depart_tick: t.spec.depart_tick,
                arrive_tick: t.arrive,
                traversal_ticks: t.arrive.map(|a| a - t.spec.depart_tick),
                waited_ticks: t.waited + t.wait_since.map_or(0, |w| self.now - w),
                preemption: t.preemption,
            })
            .collect();
        s.signals_restored = self.overrides.is_empty();
        s.platoons = self
            .platoons
            .iter()
            .map(|(id, p)| PlatoonSummary {
                id: id.clone(),
                leader: p.leader.clone(),
                members: p.members.iter().cloned().collect(),
            })
            .collect();
        s
    }
}
