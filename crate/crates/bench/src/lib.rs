//! Fixtures shared by the benchmarks.

use causal_bandits::environments::{build_email_env, build_parallel_sim, build_pure_sim_benchmark, ParallelSim};
use causal_bandits::runner::first_unit_theta;
use causal_bandits::CausalEnv;

/// Named environments of increasing size.
pub fn fixture(name: &str) -> CausalEnv {
    match name {
        "pure-sim" => build_pure_sim_benchmark(),
        "email" => build_email_env(),
        "parallel-n6" => {
            let mut sim = ParallelSim::benchmark();
            sim.marginals = vec![vec![0.3, 0.4, 0.3]; 6];
            sim.conditionals = vec![vec![0.2, 0.5, 0.8]; 6];
            sim.theta = first_unit_theta(6);
            build_parallel_sim(&sim).expect("valid fixture")
        }
        other => panic!("unknown fixture {other}"),
    }
}

pub const FIXTURES: [&str; 3] = ["pure-sim", "email", "parallel-n6"];
