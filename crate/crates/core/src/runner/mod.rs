//! Monte-Carlo regret experiments.
//!
//! Replications are independent tasks. Results are always collected by
//! `(agent, replication)` index, never by completion order, so serial and
//! parallel runs produce identical output.

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::agents::{build_agent, Agent, AgentError, AgentKind, Problem};
use crate::environments::{
    build_email_env, build_lowerbound_env, build_parallel_sim, lowerbound_arm_count, parallel_arm_count, CausalEnv,
    EnvError, ParallelSim, PURE_SIM_THETA,
};

mod config;
mod output;
mod seed;

pub use config::{
    AgentParamOverrides, ConfigOverrides, ExperimentConfig, ScanAxis, Scenario, DEFAULT_ARM_BUDGET,
    DEFAULT_REPLICATIONS,
};
pub use output::{
    curves_csv, scan_csv, summary_csv, write_curves_csv, write_manifest, write_scan_csv, write_summary_csv, Manifest,
    SeedRecord, CURVES_HEADER, SCAN_HEADER, SUMMARY_HEADER,
};
pub use seed::{derive_seed, ReplicationSeeds};

/// RNG driving environment draws.
pub type EnvRng = ChaCha8Rng;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("{agent} failed: {source}")]
    Agent {
        agent: AgentKind,
        #[source]
        source: AgentError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl RunError {
    /// Configuration problems, as opposed to failures while running.
    pub fn is_config(&self) -> bool {
        matches!(self, RunError::Config(_))
    }
}

/// Regret of one agent over one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub agent: AgentKind,
    pub replication: usize,
    pub seed: u64,
    /// `μ* − μ_{a_t}` for `t = 1..=T`.
    pub instant: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub arms: Vec<usize>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Runs `agent` against `env` for `horizon` rounds. Environment draws come
/// from a stream seeded by `env_seed`; the trace records that seed and
/// replication 0.
pub fn run_replication(
    env: &CausalEnv,
    agent: &mut dyn Agent,
    horizon: usize,
    env_seed: u64,
) -> Result<RegretTrace, RunError> {
    if agent.horizon() != horizon {
        return Err(RunError::Config(format!(
            "agent built for horizon {} run for {horizon} rounds",
            agent.horizon()
        )));
    }
    let kind = agent.kind();
    let mut rng = EnvRng::seed_from_u64(env_seed);
    let best = env.optimal_mean();
    let mut instant = Vec::with_capacity(horizon);
    let mut cumulative = Vec::with_capacity(horizon);
    let mut arms = Vec::with_capacity(horizon);
    let mut total = 0.0;
    for _ in 0..horizon {
        let arm = agent.select();
        if arm >= env.num_arms() {
            return Err(RunError::Agent {
                agent: kind,
                source: AgentError::ArmOutOfRange {
                    arm,
                    arms: env.num_arms(),
                },
            });
        }
        let obs = env.pull(arm, &mut rng);
        agent
            .update(arm, obs)
            .map_err(|source| RunError::Agent { agent: kind, source })?;
        let regret = best - env.true_mean(arm);
        total += regret;
        instant.push(regret);
        cumulative.push(total);
        arms.push(arm);
    }
    Ok(RegretTrace {
        agent: kind,
        replication: 0,
        seed: env_seed,
        instant,
        cumulative,
        arms,
    })
}

/// Mean and standard error of cumulative regret across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub agent: AgentKind,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl RegretCurve {
    pub fn from_traces(agent: AgentKind, traces: &[&RegretTrace]) -> Self {
        let r = traces.len();
        let horizon = traces.first().map_or(0, |t| t.cumulative.len());
        let mut mean = vec![0.0; horizon];
        let mut stderr = vec![0.0; horizon];
        for t in 0..horizon {
            let m = traces.iter().map(|tr| tr.cumulative[t]).sum::<f64>() / r as f64;
            mean[t] = m;
            if r > 1 {
                let var = traces.iter().map(|tr| (tr.cumulative[t] - m).powi(2)).sum::<f64>() / (r - 1) as f64;
                stderr[t] = (var / r as f64).sqrt();
            }
        }
        Self { agent, mean, stderr }
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub scenario: String,
    pub config: ExperimentConfig,
    /// Ordered by `(agent position in config, replication)`.
    pub traces: Vec<RegretTrace>,
    pub curves: Vec<RegretCurve>,
}

impl ExperimentResult {
    pub fn curve(&self, agent: AgentKind) -> Option<&RegretCurve> {
        self.curves.iter().find(|c| c.agent == agent)
    }

    pub fn seed_records(&self) -> Vec<SeedRecord> {
        self.traces
            .iter()
            .map(|t| SeedRecord {
                agent: t.agent.to_string(),
                replication: t.replication,
                seed: t.seed,
                env_seed: ReplicationSeeds::new(self.config.base_seed, &self.scenario, t.agent.name(), t.replication)
                    .env,
            })
            .collect()
    }
}

/// How each replication gets its environment.
enum EnvPlan {
    Fixed(Arc<CausalEnv>),
    BayesTheta {
        prior_sd: f64,
        noise_sd: f64,
    },
    Random {
        m: usize,
        n: usize,
        theta: Vec<f64>,
        noise_sd: f64,
    },
}

impl EnvPlan {
    fn env(&self, instance_seed: u64) -> Result<Arc<CausalEnv>, RunError> {
        let mut rng = EnvRng::seed_from_u64(instance_seed);
        Ok(match self {
            EnvPlan::Fixed(env) => Arc::clone(env),
            EnvPlan::BayesTheta { prior_sd, noise_sd } => {
                let mut sim = ParallelSim::benchmark();
                sim.theta = (0..sim.n())
                    .map(|_| prior_sd * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                sim.noise_sd = *noise_sd;
                Arc::new(build_parallel_sim(&sim)?)
            }
            EnvPlan::Random { m, n, theta, noise_sd } => {
                let sim = ParallelSim::random(*m, *n, theta.clone(), *noise_sd, &mut rng);
                Arc::new(build_parallel_sim(&sim)?)
            }
        })
    }
}

fn check_budget(arms: Option<usize>, budget: usize, what: &str) -> Result<(), RunError> {
    match arms {
        Some(a) if a <= budget => Ok(()),
        Some(a) => Err(RunError::Config(format!(
            "{what} has {a} arms, over the arm budget of {budget}; raise arm_budget to run it"
        ))),
        None => Err(RunError::Config(format!("{what} has too many arms to count"))),
    }
}

/// `(0.25, …, 0.25, −0.25, …, −0.25)`: first half positive. Equals the
/// benchmark coefficients for n = 4.
pub fn alternating_theta(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i < n.div_ceil(2) { 0.25 } else { -0.25 }).collect()
}

/// `(1, 0, …, 0)`.
pub fn first_unit_theta(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
}

fn theta_or(cfg: &ExperimentConfig, n: usize, default: Vec<f64>) -> Result<Vec<f64>, RunError> {
    match &cfg.theta {
        Some(t) if t.len() != n => Err(RunError::Config(format!("theta has length {}, expected {n}", t.len()))),
        Some(t) => Ok(t.clone()),
        None => Ok(default),
    }
}

fn plan_for(cfg: &ExperimentConfig) -> Result<EnvPlan, RunError> {
    Ok(match cfg.scenario {
        Scenario::PureSim => {
            let mut sim = ParallelSim::benchmark();
            sim.theta = theta_or(cfg, sim.n(), PURE_SIM_THETA.to_vec())?;
            sim.noise_sd = cfg.noise_sd;
            EnvPlan::Fixed(Arc::new(build_parallel_sim(&sim)?))
        }
        Scenario::PureSimBayes => EnvPlan::BayesTheta {
            prior_sd: cfg.prior_sd,
            noise_sd: cfg.noise_sd,
        },
        Scenario::Email => EnvPlan::Fixed(Arc::new(build_email_env())),
        Scenario::RandomInstance => {
            check_budget(parallel_arm_count(cfg.m, cfg.n), cfg.arm_budget, "random instance")?;
            EnvPlan::Random {
                m: cfg.m,
                n: cfg.n,
                theta: theta_or(cfg, cfg.n, alternating_theta(cfg.n))?,
                noise_sd: cfg.noise_sd,
            }
        }
        Scenario::LowerBound => {
            check_budget(
                lowerbound_arm_count(cfg.n_vars),
                cfg.arm_budget,
                "lower-bound environment",
            )?;
            EnvPlan::Fixed(Arc::new(build_lowerbound_env(cfg.gap, &vec![cfg.p; cfg.n_vars])?))
        }
    })
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| RunError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every `(agent, replication)` pair of a plan. Output is ordered by
/// agent, then replication.
fn run_plan(tag: &str, plan: &EnvPlan, cfg: &ExperimentConfig) -> Result<Vec<RegretTrace>, RunError> {
    let envs: Vec<Arc<CausalEnv>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| plan.env(ReplicationSeeds::new(cfg.base_seed, tag, "", rep).instance))
        .collect::<Result<_, _>>()?;

    let tasks: Vec<(AgentKind, usize)> = cfg
        .agents
        .iter()
        .flat_map(|&a| (0..cfg.replications).map(move |r| (a, r)))
        .collect();

    tasks
        .into_par_iter()
        .map(|(kind, rep)| {
            let env = &envs[rep];
            let seeds = ReplicationSeeds::new(cfg.base_seed, tag, kind.name(), rep);
            let problem = Problem::from_env(env, cfg.horizon);
            let mut agent = build_agent(kind, &problem, &cfg.agent_params, seeds.agent)
                .map_err(|source| RunError::Agent { agent: kind, source })?;
            let mut trace = run_replication(env, agent.as_mut(), cfg.horizon, seeds.env)?;
            trace.replication = rep;
            trace.seed = seeds.agent;
            Ok(trace)
        })
        .collect()
}

fn curves(cfg: &ExperimentConfig, traces: &[RegretTrace]) -> Vec<RegretCurve> {
    cfg.agents
        .iter()
        .map(|&a| {
            let mine: Vec<&RegretTrace> = traces.iter().filter(|t| t.agent == a).collect();
            RegretCurve::from_traces(a, &mine)
        })
        .collect()
}

/// Runs `R` replications of every configured agent on the configured
/// scenario and aggregates the regret curves.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, RunError> {
    cfg.validate()?;
    let mut unique = cfg.agents.clone();
    unique.sort();
    unique.dedup();
    if unique.len() != cfg.agents.len() {
        return Err(RunError::Config("agent list has duplicates".into()));
    }
    let tag = cfg.scenario.name();
    let plan = plan_for(cfg)?;
    let traces = with_pool(cfg.threads, || run_plan(tag, &plan, cfg))??;
    Ok(ExperimentResult {
        scenario: tag.to_string(),
        config: cfg.clone(),
        curves: curves(cfg, &traces),
        traces,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub agent: AgentKind,
    pub axis_value: usize,
    pub replication: usize,
    pub seed: u64,
    pub final_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub scenario: String,
    pub axis: ScanAxis,
    pub values: Vec<usize>,
    pub config: ExperimentConfig,
    /// Ordered by agent, axis value, replication.
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    /// Mean final regret of `agent` at `value`.
    pub fn mean_final(&self, agent: AgentKind, value: usize) -> Option<f64> {
        let finals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.agent == agent && r.axis_value == value)
            .map(|r| r.final_regret)
            .collect();
        (!finals.is_empty()).then(|| finals.iter().sum::<f64>() / finals.len() as f64)
    }

    /// Mean final regret of `agent` at every scanned value, in scan order.
    pub fn mean_finals(&self, agent: AgentKind) -> Vec<f64> {
        self.values.iter().filter_map(|&v| self.mean_final(agent, v)).collect()
    }
}

/// Arms of the environment at one axis value.
pub fn scan_arm_count(axis: ScanAxis, value: usize, cfg: &ExperimentConfig) -> Option<usize> {
    match axis {
        ScanAxis::M => parallel_arm_count(value, cfg.n),
        ScanAxis::N => parallel_arm_count(cfg.m, value),
        ScanAxis::LowerBoundN => lowerbound_arm_count(value),
    }
}

/// Final cumulative regret per `(axis value, agent, replication)`. Axis `m`
/// and `n` draw a fresh random parallel instance per replication and value;
/// axis `N` uses lower-bound environments.
pub fn scaling_scan(axis: ScanAxis, values: &[usize], cfg: &ExperimentConfig) -> Result<ScanResult, RunError> {
    cfg.validate()?;
    if values.is_empty() {
        return Err(RunError::Config("scan needs at least one axis value".into()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RunError::Config("axis values must be strictly ascending".into()));
    }
    for &v in values {
        check_budget(
            scan_arm_count(axis, v, cfg),
            cfg.arm_budget,
            &format!("{}={v}", axis.name()),
        )?;
    }
    let plans: Vec<(usize, EnvPlan)> = values
        .iter()
        .map(|&v| {
            let plan = match axis {
                ScanAxis::M => {
                    if v < 2 {
                        return Err(RunError::Config("m must be at least 2".into()));
                    }
                    EnvPlan::Random {
                        m: v,
                        n: cfg.n,
                        theta: theta_or(cfg, cfg.n, alternating_theta(cfg.n))?,
                        noise_sd: cfg.noise_sd,
                    }
                }
                ScanAxis::N => EnvPlan::Random {
                    m: cfg.m,
                    n: v,
                    theta: first_unit_theta(v),
                    noise_sd: cfg.noise_sd,
                },
                ScanAxis::LowerBoundN => EnvPlan::Fixed(Arc::new(build_lowerbound_env(cfg.gap, &vec![cfg.p; v])?)),
            };
            Ok((v, plan))
        })
        .collect::<Result<_, RunError>>()?;

    let scenario = axis.scenario_name();
    let per_value: Vec<Vec<RegretTrace>> = with_pool(cfg.threads, || {
        plans
            .iter()
            .map(|(v, plan)| run_plan(&format!("{scenario}/{}={v}", axis.name()), plan, cfg))
            .collect::<Result<Vec<_>, _>>()
    })??;

    let mut rows = Vec::new();
    for &agent in &cfg.agents {
        for (&v, traces) in values.iter().zip(&per_value) {
            for t in traces.iter().filter(|t| t.agent == agent) {
                rows.push(ScanRow {
                    agent,
                    axis_value: v,
                    replication: t.replication,
                    seed: t.seed,
                    final_regret: t.final_regret(),
                });
            }
        }
    }
    Ok(ScanResult {
        scenario: scenario.to_string(),
        axis,
        values: values.to_vec(),
        config: cfg.clone(),
        rows,
    })
}
