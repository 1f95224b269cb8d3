mod common;

use common::{id, vehicle};
use siov_core::{Position, RecordKind};
use siov_netsim::config::{AttackSpec, NodeSpec};
use siov_netsim::{
    Message, MessageKind, NetConfig, NodeKind, PapaViolation, Payload, Simulation, TraceEvent,
};

fn location_msg(consent: bool) -> Message {
    let mut m = Message::new(
        "car",
        0,
        MessageKind::EventBroadcast,
        Payload::Location {
            subject: "car".into(),
            position: Position::new(0.0, 0.0),
        },
    );
    m.papa.privacy_consent = consent;
    m
}

fn sim_with_advertiser() -> Simulation {
    let mut ad = NodeSpec::new("ad", NodeKind::Vehicle, Position::new(100.0, 0.0));
    ad.papa_role = "advertiser".into();
    let mut police = NodeSpec::new("police", NodeKind::Vehicle, Position::new(200.0, 0.0));
    police.papa_role = "law_enforcement".into();
    let cfg = NetConfig::new(20, vec![vehicle("car", 0.0, 0.0), ad, police]);
    Simulation::new(&cfg, 0).unwrap()
}

#[test]
fn violations_are_quarantined_and_audited() {
    let mut sim = sim_with_advertiser();
    let mut m = location_msg(true);
    m.papa.acl = vec!["law_enforcement".into()];
    sim.broadcast(&id("car"), m).unwrap();
    sim.run_until(10);

    let quarantined: Vec<_> = sim
        .trace()
        .iter()
        .filter_map(|r| match &r.event {
            TraceEvent::Quarantine { node, violations, .. } => Some((node.to_string(), violations.clone())),
            _ => None,
        })
        .collect();
    assert_eq!(quarantined, vec![("ad".into(), vec![PapaViolation::Accessibility])]);
    let processed: Vec<_> = common::processed(sim.trace()).into_iter().map(|(_, n)| n).collect();
    assert_eq!(processed, vec![id("police")]);
    let audit = sim.audit_events();
    assert_eq!(audit.len(), 1);
    assert_eq!(audit[0].kind, RecordKind::PapaViolation);
}

#[test]
fn unconsented_location_is_quarantined_everywhere() {
    let mut sim = sim_with_advertiser();
    sim.broadcast(&id("car"), location_msg(false)).unwrap();
    sim.run_until(10);
    assert_eq!(sim.summary().quarantined, 2);
    assert_eq!(sim.summary().processed, 0);
}

#[test]
fn eavesdropper_exposure_is_logged() {
    let mut cfg = NetConfig::new(
        20,
        vec![vehicle("car", 0.0, 0.0), vehicle("friend", 50.0, 0.0), vehicle("spy", 80.0, 0.0)],
    );
    cfg.trust.add("car", "friend");
    cfg.attacks.push(AttackSpec::Eavesdrop { observer: id("spy") });
    cfg.attacks.push(AttackSpec::Eavesdrop { observer: id("friend") });
    let mut sim = Simulation::new(&cfg, 0).unwrap();
    sim.broadcast(&id("car"), location_msg(true)).unwrap();

    let mut sealed = location_msg(true);
    sealed.msg_id = 1;
    sealed.papa.encrypted = true;
    sim.broadcast(&id("car"), sealed).unwrap();
    sim.run_until(5);

    let s = sim.summary();
    // Only the untrusted observer reads, and only the unencrypted message.
    assert_eq!(s.exposures, 1);
    assert_eq!(s.privacy_exposures, 1);
    assert!(sim
        .audit_events()
        .iter()
        .any(|e| e.kind == RecordKind::AttackObservation));
}
