use std::hint::black_box;

use causal_bandits::agents::{build_agent, AgentKind, AgentParams, Problem};
use causal_bandits_bench::{fixture, FIXTURES};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ROUNDS: usize = 200;

fn agent_rounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("agent_rounds");
    for name in FIXTURES {
        let env = fixture(name);
        let problem = Problem::from_env(&env, ROUNDS);
        for kind in [
            AgentKind::Ucb,
            AgentKind::CausalUcb,
            AgentKind::CausalTsGauss,
            AgentKind::CausalLinUcb,
            AgentKind::CausalLinTs,
        ] {
            group.bench_with_input(BenchmarkId::new(kind.name(), name), &kind, |b, &kind| {
                b.iter(|| {
                    let mut agent = build_agent(kind, &problem, &AgentParams::default(), 1).unwrap();
                    let mut rng = ChaCha8Rng::seed_from_u64(2);
                    for _ in 0..ROUNDS {
                        let arm = agent.select();
                        agent.update(arm, env.pull(arm, &mut rng)).unwrap();
                    }
                    black_box(agent.select())
                })
            });
        }
    }
    group.finish();
}

fn inference(c: &mut Criterion) {
    let mut group = c.benchmark_group("parent_distribution");
    for name in FIXTURES {
        let env = fixture(name);
        let arms: Vec<_> = (0..env.num_arms()).map(|id| env.arm(id).intervention).collect();
        group.bench_function(name, |b| {
            b.iter(|| {
                for a in &arms {
                    black_box(env.network().parent_distribution(a).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn environment_build(c: &mut Criterion) {
    c.bench_function("build/parallel-n6", |b| b.iter(|| black_box(fixture("parallel-n6"))));
}

criterion_group!(benches, agent_rounds, inference, environment_build);
criterion_main!(benches);
