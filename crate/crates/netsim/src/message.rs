use std::fmt;

use serde::{Deserialize, Serialize};
use siov_core::Position;

use crate::{NodeId, Tick};

/// Role identifiers used by access-control lists.
pub const ACL_ANY: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    TrafficCongestion,
    AccidentReport,
    EmergencyRightOfWay,
    EventBroadcast,
    PlatoonControl,
    Advisory,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `(origin, msg_id)`: the identity used by seen-caches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MessageKey {
    pub origin: NodeId,
    pub msg_id: u64,
}

impl fmt::Display for MessageKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.origin, self.msg_id)
    }
}

/// Axis-aligned rectangle, bounds inclusive. Unbounded sides serialize as
/// `null` since JSON has no infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Region {
    pub const EVERYWHERE: Region = Region {
        min_x: f64::NEG_INFINITY,
        min_y: f64::NEG_INFINITY,
        max_x: f64::INFINITY,
        max_y: f64::INFINITY,
    };

    pub fn contains(&self, p: &Position) -> bool {
        (self.min_x..=self.max_x).contains(&p.x) && (self.min_y..=self.max_y).contains(&p.y)
    }

    /// Bounding box of two points grown by `margin` on every side.
    pub fn around(a: &Position, b: &Position, margin: f64) -> Region {
        Region {
            min_x: a.x.min(b.x) - margin,
            min_y: a.y.min(b.y) - margin,
            max_x: a.x.max(b.x) + margin,
            max_y: a.y.max(b.y) + margin,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.min_x <= self.max_x && self.min_y <= self.max_y
    }
}

impl Default for Region {
    fn default() -> Self {
        Region::EVERYWHERE
    }
}

#[derive(Serialize, Deserialize)]
struct RegionRepr {
    min_x: Option<f64>,
    min_y: Option<f64>,
    max_x: Option<f64>,
    max_y: Option<f64>,
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let finite = |v: f64| v.is_finite().then_some(v);
        RegionRepr {
            min_x: finite(self.min_x),
            min_y: finite(self.min_y),
            max_x: finite(self.max_x),
            max_y: finite(self.max_y),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RegionRepr::deserialize(d)?;
        Ok(Region {
            min_x: r.min_x.unwrap_or(f64::NEG_INFINITY),
            min_y: r.min_y.unwrap_or(f64::NEG_INFINITY),
            max_x: r.max_x.unwrap_or(f64::INFINITY),
            max_y: r.max_y.unwrap_or(f64::INFINITY),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PapaPolicy {
    pub privacy_consent: bool,
    /// Originating sensor or node.
    pub provenance: String,
    pub owner: String,
    /// Receiver roles allowed to read; `"*"` admits everyone.
    pub acl: Vec<String>,
    #[serde(default)]
    pub encrypted: bool,
}

impl PapaPolicy {
    /// Consented, owned and provenanced by `node`, readable by anyone.
    pub fn open(node: &NodeId) -> Self {
        PapaPolicy {
            privacy_consent: true,
            provenance: node.to_string(),
            owner: node.to_string(),
            acl: vec![ACL_ANY.to_string()],
            encrypted: false,
        }
    }

    pub fn admits(&self, role: &str) -> bool {
        self.acl.iter().any(|r| r == ACL_ANY || r == role)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    Congestion { segment: String, level: f64 },
    Accident { incident_id: String, location: Position, corroborated: bool },
    RightOfWay { vehicle: NodeId, path: Vec<String> },
    Event { description: String },
    Membership { platoon: String, leader: NodeId, members: Vec<NodeId> },
    PlatoonSpeed { platoon: String, mps: f64 },
    ReduceSpeed { segment: String, mps: f64 },
    /// Location of an identifiable person or vehicle.
    Location { subject: NodeId, position: Position },
    /// Filler used by flooding attacks.
    Noise,
}

impl Payload {
    pub fn is_personal(&self) -> bool {
        matches!(self, Payload::Location { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub origin: NodeId,
    pub msg_id: u64,
    pub kind: MessageKind,
    #[serde(default)]
    pub context_region: Region,
    pub ttl_hops: u32,
    pub papa: PapaPolicy,
    pub payload: Payload,
    #[serde(default)]
    pub sent_tick: Tick,
    /// Last node that altered the content, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modified_by: Option<String>,
}

impl Message {
    pub fn new(origin: impl Into<NodeId>, msg_id: u64, kind: MessageKind, payload: Payload) -> Self {
        let origin = origin.into();
        Message {
            papa: PapaPolicy::open(&origin),
            origin,
            msg_id,
            kind,
            context_region: Region::EVERYWHERE,
            ttl_hops: 0,
            payload,
            sent_tick: 0,
            modified_by: None,
        }
    }

    pub fn with_ttl(mut self, ttl_hops: u32) -> Self {
        self.ttl_hops = ttl_hops;
        self
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.context_region = region;
        self
    }

    pub fn with_papa(mut self, papa: PapaPolicy) -> Self {
        self.papa = papa;
        self
    }

    pub fn key(&self) -> MessageKey {
        MessageKey {
            origin: self.origin.clone(),
            msg_id: self.msg_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PapaViolation {
    Privacy,
    Accuracy,
    Property,
    Accessibility,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PapaOutcome {
    Pass,
    Violations(Vec<PapaViolation>),
}

impl PapaOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, PapaOutcome::Pass)
    }
}

pub fn papa_check(receiver_role: &str, msg: &Message) -> PapaOutcome {
    let p = &msg.papa;
    let mut v = Vec::new();
    if msg.payload.is_personal() && !p.privacy_consent {
        v.push(PapaViolation::Privacy);
    }
    if p.provenance.trim().is_empty() {
        v.push(PapaViolation::Accuracy);
    }
    if msg.modified_by.as_ref().is_some_and(|m| *m != p.owner) {
        v.push(PapaViolation::Property);
    }
    if !p.admits(receiver_role) {
        v.push(PapaViolation::Accessibility);
    }
    if v.is_empty() {
        PapaOutcome::Pass
    } else {
        PapaOutcome::Violations(v)
    }
}
