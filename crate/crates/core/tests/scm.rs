mod common;

use causal_bandits::environments::{
    build_email_env, build_lowerbound_env, build_pure_sim_benchmark, email_network_spec,
};
use causal_bandits::scm::{validate, DiscreteNetwork, Intervention, NetworkSpec, VariableSpec};
use common::{brute_force_parent_distribution, max_abs_diff, total_variation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assignments(a: &Intervention) -> Vec<(usize, usize)> {
    a.assignments.iter().map(|(&v, &x)| (v, x)).collect()
}

#[test]
fn exact_inference_matches_full_joint_on_presets() {
    for env in [
        build_pure_sim_benchmark(),
        build_email_env(),
        build_lowerbound_env(0.3, &[0.4, 0.5, 0.7]).unwrap(),
    ] {
        let net = env.network();
        let spec = net.to_spec();
        for id in 0..env.num_arms() {
            let a = env.arm(id).intervention;
            let exact = net.parent_distribution(&a).unwrap();
            let oracle = brute_force_parent_distribution(&spec, &assignments(&a));
            assert!(max_abs_diff(&exact, &oracle) < 1e-12, "{} arm {id}", env.name());
        }
    }
}

#[test]
fn email_table_lookups() {
    let net = DiscreteNetwork::from_spec(&email_network_spec()).unwrap();
    let x2 = net.index_of("X2").unwrap();
    let dist = net.parent_distribution(&Intervention::new([(x2, 2)])).unwrap();
    // Z1 is the most significant digit of the parent index.
    let z1_first: f64 = dist[..dist.len() / 2].iter().sum();
    assert!((z1_first - 0.3).abs() < 1e-12);
}

#[test]
fn sampling_frequencies_match_exact_distribution() {
    let env = build_email_env();
    let net = env.network();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for id in [0, 7, 33, 79] {
        let a = env.arm(id).intervention;
        let exact = net.parent_distribution(&a).unwrap();
        let mut counts = vec![0usize; exact.len()];
        let draws = 100_000;
        for _ in 0..draws {
            let s = net.sample(&a, &mut rng);
            counts[net.parent_index(&s)] += 1;
        }
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
        assert!(total_variation(&freq, &exact) < 0.01, "arm {id}");
    }
}

#[test]
fn intervened_variable_is_fixed_in_samples() {
    let env = build_pure_sim_benchmark();
    let net = env.network();
    let a = env.arm(env.num_arms() - 1).intervention;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let s = net.sample(&a, &mut rng);
        for (&v, &x) in &a.assignments {
            assert_eq!(s[v], x);
        }
    }
}

#[test]
fn intervention_on_root_with_its_marginal_changes_nothing_downstream() {
    // do(X = x) on a root variable equals conditioning on X = x.
    let env = build_pure_sim_benchmark();
    let net = env.network();
    let x1 = net.index_of("X1").unwrap();
    let w1 = net.index_of("W1").unwrap();
    let dist = net.parent_distribution(&Intervention::new([(x1, 2)])).unwrap();
    let p_w1_first: f64 = dist[..dist.len() / 2].iter().sum();
    assert!((p_w1_first - net.conditional(w1, &[2, 0, 0, 0, 0, 0, 0, 0])[0]).abs() < 1e-12);
}

fn chain(p_root: f64, flip: f64) -> NetworkSpec {
    NetworkSpec {
        variables: vec![
            VariableSpec::new("A", 2),
            VariableSpec::new("B", 2),
            VariableSpec::new("C", 2),
        ],
        edges: vec![("A".into(), "B".into()), ("B".into(), "C".into())],
        cpts: [
            ("A".to_string(), vec![p_root, 1.0 - p_root]),
            ("B".to_string(), vec![1.0 - flip, flip, flip, 1.0 - flip]),
            ("C".to_string(), vec![0.9, 0.1, 0.2, 0.8]),
        ]
        .into_iter()
        .collect(),
        reward_parents: vec!["C".into()],
        intervenable: vec!["A".into(), "B".into()],
    }
}

#[test]
fn validation_reports_every_problem() {
    let mut spec = chain(0.5, 0.1);
    spec.cpts.get_mut("A").unwrap()[0] = 0.6;
    spec.edges.push(("C".into(), "A".into()));
    let report = validate(&spec);
    assert!(!report.is_valid());
    assert!(report.issues.len() >= 2, "{report}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutilation_is_idempotent(p in 0.05f64..0.95, flip in 0.0f64..1.0, a in 0usize..2, b in 0usize..2) {
        let net = DiscreteNetwork::from_spec(&chain(p, flip)).unwrap();
        // Intervening on B makes A irrelevant; repeating the same intervention
        // or adding one on A upstream must give bit-identical output.
        let once = net.parent_distribution(&Intervention::new([(1, b)])).unwrap();
        let twice = net.parent_distribution(&Intervention::new([(1, b)])).unwrap();
        let with_a = net.parent_distribution(&Intervention::new([(0, a), (1, b)])).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(&once, &with_a);
    }

    #[test]
    fn chain_matches_oracle(p in 0.0f64..1.0, flip in 0.0f64..1.0, a in 0usize..3) {
        let spec = chain(p, flip);
        let net = DiscreteNetwork::from_spec(&spec).unwrap();
        let assign: Vec<(usize, usize)> = if a == 2 { vec![] } else { vec![(0, a)] };
        let exact = net.parent_distribution(&Intervention::new(assign.clone())).unwrap();
        let oracle = brute_force_parent_distribution(&spec, &assign);
        prop_assert!(max_abs_diff(&exact, &oracle) < 1e-12);
        prop_assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
