mod common;

use common::{id, rsu, vehicle};
use siov_core::{NodeRole, Position, RecordKind, RoleKind};
use siov_netsim::config::{SegmentSpec, SignalSpec, TripSpec};
use siov_netsim::sim::RightOfWay;
use siov_netsim::trace::PreemptionStatus;
use siov_netsim::{NetConfig, NetError, Simulation, TraceEvent};

fn segment(i: usize) -> SegmentSpec {
    let x0 = i as f64 * 300.0;
    SegmentSpec {
        id: format!("s{i}"),
        from: Position::new(x0, 0.0),
        to: Position::new(x0 + 300.0, 0.0),
        signal: Some(SignalSpec {
            rsu: id(&format!("rsu{i}")),
            green_ticks: 100,
            red_ticks: 900,
            offset_ticks: 150 * i as u64,
        }),
    }
}

fn corridor(vehicle_role: RoleKind, request: bool) -> NetConfig {
    let mut nodes = vec![
        vehicle("amb", 0.0, 0.0).with_role(NodeRole::new(vehicle_role)),
        vehicle("car", 310.0, 20.0),
    ];
    for i in 0..3 {
        nodes.push(rsu(&format!("rsu{i}"), i as f64 * 300.0 + 300.0, 10.0));
    }
    let mut cfg = NetConfig::new(20_000, nodes);
    cfg.nodes[1].speed_mps = 14.0;
    cfg.roads = (0..3).map(segment).collect();
    cfg.trips.push(TripSpec {
        vehicle: id("amb"),
        path: vec!["s0".into(), "s1".into(), "s2".into()],
        speed_mps: 15.0,
        depart_tick: 10,
        request_preemption: request,
    });
    cfg
}

#[test]
fn ambulance_gets_green_wave() {
    let cfg = corridor(RoleKind::EmergencyTactical, true);
    let run = Simulation::run_config(&cfg, 0).unwrap();
    let s = &run.summary;
    assert_eq!(s.preemptions_granted, 1);
    assert_eq!(s.trips[0].preemption, PreemptionStatus::Granted);
    assert_eq!(s.trips[0].waited_ticks, 0);
    assert!(s.signals_restored);

    // Each signal flips before the ambulance reaches it and is restored on passage.
    for seg in ["s0", "s1", "s2"] {
        let flipped = run.trace.iter().find_map(|r| match &r.event {
            TraceEvent::SignalOverride { segment, .. } if segment == seg => Some(r.tick),
            _ => None,
        });
        let restored = run.trace.iter().find_map(|r| match &r.event {
            TraceEvent::SignalRestore { segment, reason, .. } if segment == seg => Some((r.tick, reason.clone())),
            _ => None,
        });
        let (flipped, (restored, reason)) = (flipped.unwrap(), restored.unwrap());
        assert!(flipped < restored, "{seg}: {flipped} !< {restored}");
        assert_eq!(reason, "passage");
    }

    let base = run.baseline.as_ref().unwrap();
    assert!(base.trips[0].waited_ticks > 0);
    assert!(s.trips[0].traversal_ticks.unwrap() < base.trips[0].traversal_ticks.unwrap());

    // Nearby traffic was asked to slow down.
    assert!(run.trace.iter().any(|r| matches!(
        &r.event,
        TraceEvent::SpeedApplied { node, .. } if node.as_str() == "car"
    )));
    assert!(run
        .audit_events
        .iter()
        .any(|e| e.kind == RecordKind::Preemption && e.body["decision"] == "granted"));
}

#[test]
fn sedan_request_is_denied_and_logged() {
    let cfg = corridor(RoleKind::VehicleDynamic, true);
    let run = Simulation::run_config(&cfg, 0).unwrap();
    assert_eq!(run.summary.preemptions_denied, 1);
    assert_eq!(run.summary.trips[0].preemption, PreemptionStatus::Denied);
    assert!(!run.trace.iter().any(|r| matches!(r.event, TraceEvent::SignalOverride { .. })));
    assert!(run
        .audit_events
        .iter()
        .any(|e| e.kind == RecordKind::Preemption && e.body["decision"] == "denied"));
}

#[test]
fn empty_path_is_trivially_granted() {
    let cfg = corridor(RoleKind::EmergencyTactical, false);
    let mut sim = Simulation::new(&cfg, 0).unwrap();
    assert_eq!(
        sim.request_right_of_way(&id("amb"), &[]).unwrap(),
        RightOfWay::Granted { overrides: vec![] }
    );
    sim.run_until(100);
    assert!(sim.forced_signals().next().is_none());
}

#[test]
fn unknown_segment_is_routing_error() {
    let cfg = corridor(RoleKind::EmergencyTactical, false);
    let mut sim = Simulation::new(&cfg, 0).unwrap();
    assert_eq!(
        sim.request_right_of_way(&id("amb"), &["s0".into(), "nowhere".into()]),
        Err(NetError::UnknownSegment("nowhere".into()))
    );
}

#[test]
fn stranded_override_times_out() {
    // No trip: the vehicle is parked, so only the hold timeout restores.
    let cfg = corridor(RoleKind::EmergencyTactical, false);
    let mut cfg = cfg;
    cfg.trips.clear();
    let mut sim = Simulation::new(&cfg, 0).unwrap();
    let plan = sim.request_right_of_way(&id("amb"), &["s1".into()]).unwrap();
    let RightOfWay::Granted { overrides } = plan else { panic!("denied") };
    assert_eq!(overrides.len(), 1);
    sim.run_until(5);
    assert_eq!(sim.signal_green("s1"), Some(true));
    sim.run_until(3100);
    assert!(sim.summary().signals_restored);
    assert!(sim.trace().iter().any(|r| matches!(
        &r.event,
        TraceEvent::SignalRestore { reason, .. } if reason == "timeout"
    )));
}
