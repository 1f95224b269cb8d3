mod common;

use common::{id, rsu, vehicle};
use siov_core::{NodeRole, RoleKind};
use siov_netsim::config::AttackSpec;
use siov_netsim::{DropReason, MessageKind, NetConfig, Payload, Region, Simulation};

fn flooded(rate_limiting: bool) -> siov_netsim::Summary {
    let mut cfg = NetConfig::new(
        60,
        vec![
            rsu("rsu", 0.0, 0.0),
            vehicle("mallory", 100.0, 0.0),
            vehicle("amb", -200.0, 0.0).with_role(NodeRole::new(RoleKind::EmergencyTactical)),
        ],
    );
    cfg.params.rate_limiting = rate_limiting;
    cfg.nodes[1].compromised = true;
    cfg.attacks.push(AttackSpec::DosFlood {
        attacker: id("mallory"),
        target: id("rsu"),
        rate_per_tick: 1000,
        start_tick: 0,
        end_tick: 40,
    });
    let mut sim = Simulation::new(&cfg, 5).unwrap();
    // Sent mid-flood, so it queues behind that tick's noise.
    sim.run_until(11);
    let msg = sim
        .new_message(
            &id("amb"),
            MessageKind::EmergencyRightOfWay,
            Payload::RightOfWay {
                vehicle: id("amb"),
                path: vec![],
            },
        )
        .with_region(Region::EVERYWHERE);
    sim.schedule_send(11, &id("amb"), &id("rsu"), msg).unwrap();
    sim.run_until(60);
    sim.summary()
}

#[test]
fn emergency_gets_through_a_flood() {
    let s = flooded(true);
    let d = s
        .emergency_deliveries
        .iter()
        .find(|d| d.node.as_str() == "rsu")
        .expect("emergency message processed");
    assert_eq!(d.sent_tick, 11);
    assert!(d.processed_tick <= d.sent_tick + 2 + 1);
    // The flood sender is held to 10 per tick.
    assert_eq!(s.drops[&DropReason::RateLimited], 40 * 990);
    assert_eq!(s.preemptions_granted, 1);
}

#[test]
fn without_rate_limiting_the_queue_starves() {
    let s = flooded(false);
    assert!(s.emergency_deliveries.is_empty());
    assert!(s.drops[&DropReason::QueueFull] > 0);
}
