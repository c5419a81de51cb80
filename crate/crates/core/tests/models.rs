use std::path::PathBuf;

use causal_bandits::environments::{build_email_env, build_lowerbound_env, build_pure_sim_benchmark};
use causal_bandits::{CausalEnv, ModelFile};

fn load(name: &str) -> CausalEnv {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    serde_json::from_str::<ModelFile>(&text).unwrap().into_env().unwrap()
}

fn assert_same(a: &CausalEnv, b: &CausalEnv) {
    assert_eq!(a.num_arms(), b.num_arms());
    assert_eq!(a.num_parent_assignments(), b.num_parent_assignments());
    for (x, y) in a.true_means().iter().zip(b.true_means()) {
        assert!((x - y).abs() < 1e-12);
    }
    for (x, y) in a.conditional_means().iter().zip(b.conditional_means()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn shipped_models_match_presets() {
    assert_same(&load("pure_sim.json"), &build_pure_sim_benchmark());
    assert_same(&load("email.json"), &build_email_env());
    assert_same(
        &load("lower_bound.json"),
        &build_lowerbound_env(0.3, &[0.5; 3]).unwrap(),
    );
}

#[test]
fn model_without_reward_is_rejected() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/email.json");
    let mut json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    json.as_object_mut().unwrap().remove("reward");
    let model: ModelFile = serde_json::from_value(json).unwrap();
    assert!(model.into_env().is_err());
}
