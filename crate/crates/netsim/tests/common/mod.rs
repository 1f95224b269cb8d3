#![allow(dead_code)]

use siov_core::Position;
use siov_netsim::config::NodeSpec;
use siov_netsim::{NetConfig, NodeId, NodeKind, TraceEvent, TraceRecord};

pub fn vehicle(id: &str, x: f64, y: f64) -> NodeSpec {
    NodeSpec::new(id, NodeKind::Vehicle, Position::new(x, y))
}

pub fn rsu(id: &str, x: f64, y: f64) -> NodeSpec {
    NodeSpec::new(id, NodeKind::Rsu, Position::new(x, y))
}

pub fn id(s: &str) -> NodeId {
    NodeId::from(s)
}

/// 5x5 grid, 400 m spacing; the four corners and the centre are RSUs.
pub fn grid25() -> NetConfig {
    let mut nodes = Vec::new();
    for r in 0..5 {
        for c in 0..5 {
            let (x, y) = (c as f64 * 400.0, r as f64 * 400.0);
            let corner = (r == 0 || r == 4) && (c == 0 || c == 4);
            if corner || (r == 2 && c == 2) {
                nodes.push(rsu(&format!("rsu-{r}{c}"), x, y));
            } else {
                nodes.push(vehicle(&format!("v-{r}{c}"), x, y));
            }
        }
    }
    NetConfig::new(200, nodes)
}

pub fn processed(trace: &[TraceRecord]) -> Vec<(u64, NodeId)> {
    trace
        .iter()
        .filter_map(|r| match &r.event {
            TraceEvent::Process { node, .. } => Some((r.tick, node.clone())),
            _ => None,
        })
        .collect()
}
