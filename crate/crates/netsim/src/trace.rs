use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::message::{MessageKey, MessageKind, PapaViolation};
use crate::{NodeId, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    OutOfRange,
    Interference,
    Loss,
    RateLimited,
    QueueFull,
    Duplicate,
    OutOfContext,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Transmit { from: NodeId, key: MessageKey, kind: MessageKind, broadcast: bool },
    Drop { from: NodeId, to: NodeId, key: MessageKey, reason: DropReason },
    Deliver { from: NodeId, to: NodeId, key: MessageKey },
    Process { node: NodeId, key: MessageKey, kind: MessageKind },
    Quarantine { node: NodeId, key: MessageKey, violations: Vec<PapaViolation> },
    Hold { rsu: NodeId, incident: String, origins: usize },
    Promote { rsu: NodeId, incident: String, key: MessageKey },
    Expire { rsu: NodeId, incident: String },
    Exposure { observer: NodeId, key: MessageKey, privacy: bool },
    PlatoonFormed { platoon: String, leader: NodeId, members: Vec<NodeId> },
    PlatoonJoined { platoon: String, node: NodeId },
    PlatoonLeft { platoon: String, node: NodeId },
    PlatoonDissolved { platoon: String },
    SpeedApplied { node: NodeId, mps: f64 },
    PreemptionGranted { vehicle: NodeId, segments: Vec<String> },
    PreemptionDenied { vehicle: NodeId, reason: String },
    SignalOverride { segment: String, rsu: NodeId, vehicle: NodeId },
    SignalRestore { segment: String, rsu: NodeId, reason: String },
    TripDepart { vehicle: NodeId },
    TripWait { vehicle: NodeId, segment: String },
    TripArrive { vehicle: NodeId, traversal_ticks: Tick },
}

/// One line of the exported event trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: Tick,
    pub seq: u64,
    #[serde(flatten)]
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastStats {
    pub key: MessageKey,
    pub ttl_hops: u32,
    pub transmissions: u64,
    pub node_count: usize,
    pub nodes_processed: usize,
    pub max_processed_per_node: u32,
    /// `node_count * (ttl_hops + 1)`.
    pub storm_bound: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Promotion {
    pub tick: Tick,
    pub rsu: NodeId,
    pub incident: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergencyDelivery {
    pub key: MessageKey,
    pub node: NodeId,
    pub sent_tick: Tick,
    pub processed_tick: Tick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreemptionStatus {
    NotRequested,
    Pending,
    Granted,
    Denied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripSummary {
    pub vehicle: NodeId,
    pub depart_tick: Tick,
    pub arrive_tick: Option<Tick>,
    pub traversal_ticks: Option<Tick>,
    pub waited_ticks: Tick,
    pub preemption: PreemptionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonSummary {
    pub id: String,
    pub leader: NodeId,
    pub members: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub ticks: Tick,
    pub transmissions: u64,
    pub deliveries: u64,
    pub processed: u64,
    pub drops: BTreeMap<DropReason, u64>,
    pub broadcasts: Vec<BroadcastStats>,
    pub promotions: Vec<Promotion>,
    pub held_expired: u64,
    pub quarantined: u64,
    pub exposures: u64,
    pub privacy_exposures: u64,
    pub emergency_deliveries: Vec<EmergencyDelivery>,
    pub preemptions_granted: u64,
    pub preemptions_denied: u64,
    pub trips: Vec<TripSummary>,
    /// No signal is still forced green.
    pub signals_restored: bool,
    pub platoons: Vec<PlatoonSummary>,
}

pub fn to_json_lines(records: &[TraceRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("trace records serialize");
        out.push(b'\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_are_flat_json() {
        let r = TraceRecord {
            tick: 3,
            seq: 7,
            event: TraceEvent::Drop {
                from: "a".into(),
                to: "b".into(),
                key: MessageKey { origin: "a".into(), msg_id: 0 },
                reason: DropReason::Interference,
            },
        };
        let line = String::from_utf8(to_json_lines(std::slice::from_ref(&r))).unwrap();
        assert_eq!(
            line,
            "{\"tick\":3,\"seq\":7,\"event\":\"drop\",\"from\":\"a\",\"to\":\"b\",\"key\":{\"origin\":\"a\",\"msg_id\":0},\"reason\":\"interference\"}\n"
        );
        let back: TraceRecord = serde_json::from_str(line.trim_end()).unwrap();
        assert_eq!(back, r);
    }
}
