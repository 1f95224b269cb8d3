use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use siov_core::{NodeRole, Position};

use crate::channel::Channel;
use crate::message::{MessageKind, PapaPolicy, Payload, Region};
use crate::{NodeId, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Rsu,
    Vehicle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub kind: NodeKind,
    pub position: Position,
    /// Defaults to `RsuFixed` for RSUs and `VehicleDynamic` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<NodeRole>,
    /// Role name checked against message ACLs.
    #[serde(default = "default_papa_role")]
    pub papa_role: String,
    #[serde(default)]
    pub compromised: bool,
    #[serde(default)]
    pub speed_mps: f64,
}

fn default_papa_role() -> String {
    "vehicle".into()
}

impl NodeSpec {
    pub fn new(id: impl Into<NodeId>, kind: NodeKind, position: Position) -> Self {
        NodeSpec {
            id: id.into(),
            kind,
            position,
            role: None,
            papa_role: match kind {
                NodeKind::Rsu => "rsu".into(),
                NodeKind::Vehicle => default_papa_role(),
            },
            compromised: false,
            speed_mps: 0.0,
        }
    }

    pub fn with_role(mut self, role: NodeRole) -> Self {
        self.role = Some(role);
        self
    }
}

/// Directional trust: `a` trusts every id in `trust[a]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrustList(pub BTreeMap<NodeId, BTreeSet<NodeId>>);

impl TrustList {
    pub fn trusts(&self, a: &NodeId, b: &NodeId) -> bool {
        self.0.get(a).is_some_and(|s| s.contains(b))
    }

    pub fn add(&mut self, a: impl Into<NodeId>, b: impl Into<NodeId>) {
        self.0.entry(a.into()).or_default().insert(b.into());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub rate_limiting: bool,
    /// Token-bucket size per (receiver, sender) per tick.
    pub rate_limit_per_tick: u32,
    pub inbound_capacity_per_tick: u32,
    pub corroboration_threshold: usize,
    pub hold_window_ticks: Tick,
    pub promoted_ttl_hops: u32,
    pub request_ttl_hops: u32,
    /// How long before the predicted arrival a signal is forced green.
    pub preemption_lead_ticks: Tick,
    /// Forced-green signals are restored at the latest this long after the
    /// predicted arrival.
    pub preemption_max_hold_ticks: Tick,
    pub advisory_speed_mps: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            rate_limiting: true,
            rate_limit_per_tick: 10,
            inbound_capacity_per_tick: 64,
            corroboration_threshold: 2,
            hold_window_ticks: 100,
            promoted_ttl_hops: 8,
            request_ttl_hops: 2,
            preemption_lead_ticks: 200,
            preemption_max_hold_ticks: 3000,
            advisory_speed_mps: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub rsu: NodeId,
    pub green_ticks: Tick,
    pub red_ticks: Tick,
    #[serde(default)]
    pub offset_ticks: Tick,
}

impl SignalSpec {
    pub fn program_green(&self, tick: Tick) -> bool {
        let cycle = self.green_ticks + self.red_ticks;
        cycle == 0 || (tick + self.offset_ticks) % cycle < self.green_ticks
    }
}

/// A straight road segment; its signal, if any, sits at the `to` end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub id: String,
    pub from: Position,
    pub to: Position,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalSpec>,
}

impl SegmentSpec {
    pub fn length(&self) -> f64 {
        self.from.distance(&self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonSpec {
    pub leader: NodeId,
    pub members: Vec<NodeId>,
}

/// A message template; ids and send time are filled in by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageSpec {
    /// Defaults to the sending node. May name an off-network source such as a
    /// traffic centre for backbone injections.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msg_id: Option<u64>,
    pub kind: MessageKind,
    #[serde(default)]
    pub ttl_hops: u32,
    #[serde(default)]
    pub context_region: Region,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub papa: Option<PapaPolicy>,
    pub payload: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modified_by: Option<String>,
}

/// A message entering the radio network at `tick`. With `injected_at` empty
/// it is broadcast by `from`; otherwise it arrives over the backbone at each
/// listed node, which processes it and transmits it once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastSpec {
    pub tick: Tick,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub injected_at: Vec<NodeId>,
    pub message: MessageSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SendSpec {
    pub tick: Tick,
    pub from: NodeId,
    pub to: NodeId,
    pub message: MessageSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum AttackSpec {
    DosFlood {
        attacker: NodeId,
        target: NodeId,
        rate_per_tick: u32,
        start_tick: Tick,
        end_tick: Tick,
    },
    /// Uncorroborated accident report, broadcast `repeats` times on
    /// consecutive ticks from one origin.
    FalseMessage {
        attacker: NodeId,
        incident_id: String,
        location: Position,
        tick: Tick,
        #[serde(default = "one")]
        repeats: u32,
    },
    Eavesdrop { observer: NodeId },
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripSpec {
    pub vehicle: NodeId,
    pub path: Vec<String>,
    pub speed_mps: f64,
    #[serde(default)]
    pub depart_tick: Tick,
    #[serde(default)]
    pub request_preemption: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonCommandSpec {
    pub tick: Tick,
    pub leader: NodeId,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub ticks: Tick,
    #[serde(default)]
    pub channel: Channel,
    #[serde(default)]
    pub params: SimParams,
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub trust: TrustList,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roads: Vec<SegmentSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub platoons: Vec<PlatoonSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub broadcasts: Vec<BroadcastSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sends: Vec<SendSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attacks: Vec<AttackSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trips: Vec<TripSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub platoon_commands: Vec<PlatoonCommandSpec>,
}

impl NetConfig {
    pub fn new(ticks: Tick, nodes: Vec<NodeSpec>) -> Self {
        NetConfig {
            ticks,
            channel: Channel::default(),
            params: SimParams::default(),
            nodes,
            trust: TrustList::default(),
            roads: Vec::new(),
            platoons: Vec::new(),
            broadcasts: Vec::new(),
            sends: Vec::new(),
            attacks: Vec::new(),
            trips: Vec::new(),
            platoon_commands: Vec::new(),
        }
    }

    pub fn requests_preemption(&self) -> bool {
        self.trips.iter().any(|t| t.request_preemption)
    }
}
