#![allow(dead_code)]

use std::path::PathBuf;

use siov_scenario::{parse_scenario, Scenario};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .join("scenario.json")
}

pub fn shipped(name: &str) -> Scenario {
    let bytes = std::fs::read(scenario_path(name)).expect("shipped scenario is readable");
    parse_scenario(&bytes, true).expect("shipped scenario is valid")
}
