//! Bandit environments built on top of a [`DiscreteNetwork`].
//!
//! Every environment exposes the full product arm set over its intervenable
//! variables. Each coordinate of an arm carries a code in `0..=domain`, where
//! `0` leaves the variable alone and `c > 0` forces value label `c`. Arm ids
//! are the mixed-radix encoding of those codes (first variable most
//! significant), so arm 0 is always `do()`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{DecompositionTable, FeatureTable, TableError};
use crate::scm::{DiscreteNetwork, Intervention, NetworkSpec, ScmError, VariableSpec, LABEL_OFFSET};

/// Default reward noise of the parallel simulation.
pub const PURE_SIM_NOISE_SD: f64 = 0.1;

/// Marginals `P(X_i = j)` of the fixed parallel benchmark, one row per `X_i`.
pub const PURE_SIM_MARGINALS: [[f64; 3]; 4] = [[0.3, 0.4, 0.3], [0.3, 0.3, 0.4], [0.5, 0.3, 0.2], [0.25, 0.25, 0.5]];

/// `P(W_i = 1 | X_i = j)` of the fixed parallel benchmark.
pub const PURE_SIM_CONDITIONALS: [[f64; 3]; 4] = [[0.2, 0.5, 0.8], [0.3, 0.2, 0.8], [0.4, 0.6, 0.5], [0.3, 0.5, 0.6]];

pub const PURE_SIM_THETA: [f64; 4] = [0.25, 0.25, -0.25, -0.25];

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("{0}")]
    Config(String),
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, EnvError> {
    Err(EnvError::Config(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arm {
    pub id: usize,
    pub intervention: Intervention,
}

/// What the learner sees after a pull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub z_index: usize,
    pub reward: f64,
}

/// Conditional reward law given the reward parents.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardModel {
    /// `Y = ⟨f(Z), θ⟩ + N(0, noise_sd²)` with `f` the parent value labels.
    LinearGaussian { theta: Vec<f64>, noise_sd: f64 },
    /// `Y ~ Bernoulli(means[z])`.
    Bernoulli { means: Vec<f64> },
    /// `Y = Δ · label(X_1) + N(0, 1)` with a single reward parent.
    LowerBoundGaussian { delta: f64 },
}

/// Reward stanza of a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSpec {
    LinearGaussian {
        theta: Vec<f64>,
        noise_sd: f64,
    },
    /// `Bernoulli(1 - Σ labels / 9)` over the reward parents.
    BernoulliEmail,
    LowerBound {
        delta: f64,
    },
}

/// A network file, optionally carrying a reward stanza.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub network: NetworkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<RewardSpec>,
}

impl ModelFile {
    pub fn into_env(self) -> Result<CausalEnv, EnvError> {
        let network = DiscreteNetwork::from_spec(&self.network)?;
        let Some(spec) = self.reward else {
            return config_err("model file has no reward stanza");
        };
        let reward = match spec {
            RewardSpec::LinearGaussian { theta, noise_sd } => RewardModel::LinearGaussian { theta, noise_sd },
            RewardSpec::BernoulliEmail => RewardModel::Bernoulli {
                means: email_means(&network),
            },
            RewardSpec::LowerBound { delta } => RewardModel::LowerBoundGaussian { delta },
        };
        CausalEnv::new(self.name.unwrap_or_else(|| "model".into()), network, reward)
    }
}

/// Encodes arm ids as per-variable intervention codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmCoder {
    vars: Vec<usize>,
    radices: Vec<usize>,
    len: usize,
}

impl ArmCoder {
    pub fn new(network: &DiscreteNetwork) -> Self {
        let vars: Vec<usize> = network.intervenable().collect();
        let radices: Vec<usize> = vars.iter().map(|&v| network.domain_size(v) + 1).collect();
        let len = radices.iter().product();
        Self { vars, radices, len }
    }

    /// Intervenable variables, one per code position.
    pub fn variables(&self) -> &[usize] {
        &self.vars
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn encode(&self, codes: &[usize]) -> usize {
        codes.iter().zip(&self.radices).fold(0, |acc, (&c, &r)| acc * r + c)
    }

    pub fn decode(&self, mut id: usize) -> Vec<usize> {
        let mut codes = vec![0; self.radices.len()];
        for i in (0..self.radices.len()).rev() {
            codes[i] = id % self.radices[i];
            id /= self.radices[i];
        }
        codes
    }

    pub fn intervention(&self, id: usize) -> Intervention {
        Intervention::new(
            self.decode(id)
                .into_iter()
                .zip(&self.vars)
                .filter(|&(c, _)| c > 0)
                .map(|(c, &v)| (v, c - 1)),
        )
    }

    /// Inverse of [`intervention`](Self::intervention).
    pub fn id_of(&self, a: &Intervention) -> Option<usize> {
        let mut codes = vec![0; self.vars.len()];
        for (&var, &value) in &a.assignments {
            let pos = self.vars.iter().position(|&v| v == var)?;
            codes[pos] = value + 1;
        }
        Some(self.encode(&codes))
    }
}

/// A causal bandit instance: the network, the arm set, the reward law and
/// the ground truth needed for regret bookkeeping.
#[derive(Debug, Clone)]
pub struct CausalEnv {
    name: String,
    network: DiscreteNetwork,
    arms: ArmCoder,
    interventions: Vec<Intervention>,
    reward: RewardModel,
    decomposition: Arc<DecompositionTable>,
    features: Arc<FeatureTable>,
    conditional_means: Vec<f64>,
    true_means: Vec<f64>,
    optimal_mean: f64,
}

impl CausalEnv {
    pub fn new(name: impl Into<String>, network: DiscreteNetwork, reward: RewardModel) -> Result<Self, EnvError> {
        let arms = ArmCoder::new(&network);
        let k = network.num_parent_assignments();
        let d = network.reward_parents().len();

        let labels: Vec<f64> = network
            .enumerate_parent_assignments()
            .into_iter()
            .flat_map(|pa| pa.values.into_iter().map(|v| (v + LABEL_OFFSET) as f64))
            .collect();

        let conditional_means: Vec<f64> = match &reward {
            RewardModel::LinearGaussian { theta, noise_sd } => {
                if theta.len() != d {
                    return config_err(format!(
                        "theta has length {}, network has {d} reward parents",
                        theta.len()
                    ));
                }
                if !(*noise_sd >= 0.0) {
                    return config_err("noise_sd must be non-negative");
                }
                labels.chunks(d).map(|f| crate::linalg::dot(f, theta)).collect()
            }
            RewardModel::Bernoulli { means } => {
                if means.len() != k {
                    return config_err(format!("{} Bernoulli means for {k} assignments", means.len()));
                }
                if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
                    return config_err("Bernoulli means must lie in [0, 1]");
                }
                means.clone()
            }
            RewardModel::LowerBoundGaussian { delta } => {
                if d != 1 {
                    return config_err("lower-bound reward needs exactly one reward parent");
                }
                if !(*delta > 0.0) {
                    return config_err("delta must be positive");
                }
                labels.iter().map(|l| delta * l).collect()
            }
        };

        let interventions: Vec<Intervention> = (0..arms.len()).map(|id| arms.intervention(id)).collect();
        let mut probs = Vec::with_capacity(arms.len() * k);
        for a in &interventions {
            probs.extend(network.parent_distribution(a)?);
        }
        let decomposition = DecompositionTable::new(arms.len(), k, probs)?;
        let features = FeatureTable::new(&decomposition, d, labels)?;

        let true_means: Vec<f64> = (0..arms.len())
            .map(|a| crate::linalg::dot(decomposition.row(a), &conditional_means))
            .collect();
        let optimal_mean = true_means.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        Ok(Self {
            name: name.into(),
            network,
            arms,
            interventions,
            reward,
            decomposition: Arc::new(decomposition),
            features: Arc::new(features),
            conditional_means,
            true_means,
            optimal_mean,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn network(&self) -> &DiscreteNetwork {
        &self.network
    }

    pub fn arm_coder(&self) -> &ArmCoder {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn arm(&self, id: usize) -> Arm {
        Arm {
            id,
            intervention: self.interventions[id].clone(),
        }
    }

    pub fn num_parent_assignments(&self) -> usize {
        self.decomposition.num_assignments()
    }

    pub fn reward_model(&self) -> &RewardModel {
        &self.reward
    }

    /// The tables causal agents are allowed to see.
    pub fn decomposition(&self) -> &Arc<DecompositionTable> {
        &self.decomposition
    }

    pub fn features(&self) -> &Arc<FeatureTable> {
        &self.features
    }

    /// `E[Y | Pa_Y = Z_j]`.
    pub fn conditional_means(&self) -> &[f64] {
        &self.conditional_means
    }

    /// `μ_a = Σ_j E[Y | Z_j] P(Z_j | a)`.
    pub fn true_mean(&self, arm: usize) -> f64 {
        self.true_means[arm]
    }

    pub fn true_means(&self) -> &[f64] {
        &self.true_means
    }

    pub fn optimal_mean(&self) -> f64 {
        self.optimal_mean
    }

    pub fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Observation {
        let mut values = vec![0; self.network.num_variables()];
        self.network.sample_into(&self.interventions[arm], rng, &mut values);
        let z_index = self.network.parent_index(&values);
        let mean = self.conditional_means[z_index];
        let reward = match &self.reward {
            RewardModel::LinearGaussian { noise_sd, .. } => {
                let eps: f64 = rng.sample(StandardNormal);
                mean + noise_sd * eps
            }
            RewardModel::Bernoulli { .. } => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardModel::LowerBoundGaussian { .. } => {
                let eps: f64 = rng.sample(StandardNormal);
                mean + eps
            }
        };
        Observation { z_index, reward }
    }
}

/// Inputs of the parallel `X_i → W_i → Y` simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelSim {
    /// `marginals[i][j] = P(X_i = j + 1)`.
    pub marginals: Vec<Vec<f64>>,
    /// `conditionals[i][j] = P(W_i = 1 | X_i = j + 1)`.
    pub conditionals: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub noise_sd: f64,
}

impl ParallelSim {
    /// The fixed m = 3, n = 4 benchmark.
    pub fn benchmark() -> Self {
        Self {
            marginals: PURE_SIM_MARGINALS.iter().map(|r| r.to_vec()).collect(),
            conditionals: PURE_SIM_CONDITIONALS.iter().map(|r| r.to_vec()).collect(),
            theta: PURE_SIM_THETA.to_vec(),
            noise_sd: PURE_SIM_NOISE_SD,
        }
    }

    /// Random tables: marginals uniform on the simplex (Dirichlet(1)),
    /// conditionals uniform on `[0, 1]`.
    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, theta: Vec<f64>, noise_sd: f64, rng: &mut R) -> Self {
        let mut marginals = Vec::with_capacity(n);
        let mut conditionals = Vec::with_capacity(n);
        for _ in 0..n {
            let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            marginals.push(draws.iter().map(|x| x / total).collect());
            conditionals.push((0..m).map(|_| rng.random::<f64>()).collect());
        }
        Self {
            marginals,
            conditionals,
            theta,
            noise_sd,
        }
    }

    pub fn m(&self) -> usize {
        self.marginals.first().map_or(0, Vec::len)
    }

    pub fn n(&self) -> usize {
        self.marginals.len()
    }

    pub fn network_spec(&self) -> Result<NetworkSpec, EnvError> {
        let (m, n) = (self.m(), self.n());
        if m < 2 || n < 1 {
            return config_err(format!("need m >= 2 and n >= 1, got m={m}, n={n}"));
        }
        if self.conditionals.len() != n || self.theta.len() != n {
            return config_err(format!(
                "expected {n} conditional rows and theta of length {n}, got {} and {}",
                self.conditionals.len(),
                self.theta.len()
            ));
        }
        let mut variables = Vec::with_capacity(2 * n);
        let mut edges = Vec::with_capacity(n);
        let mut cpts = BTreeMap::new();
        for i in 0..n {
            let (marg, cond) = (&self.marginals[i], &self.conditionals[i]);
            if marg.len() != m || cond.len() != m {
                return config_err(format!("row {i} does not have {m} entries"));
            }
            if cond.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return config_err(format!("conditional row {i} leaves [0, 1]"));
            }
            let (x, w) = (format!("X{}", i + 1), format!("W{}", i + 1));
            // interleaved so the topological order visits X_i, W_i pairwise
            variables.push(VariableSpec::new(&x, m));
            variables.push(VariableSpec::new(&w, 2));
            edges.push((x.clone(), w.clone()));
            cpts.insert(x, marg.clone());
            cpts.insert(w, cond.iter().flat_map(|&p| [p, 1.0 - p]).collect());
        }
        Ok(NetworkSpec {
            variables,
            edges,
            cpts,
            reward_parents: (1..=n).map(|i| format!("W{i}")).collect(),
            intervenable: (1..=n).map(|i| format!("X{i}")).collect(),
        })
    }
}

/// `(m + 1)^n` arms of the parallel simulation.
pub fn parallel_arm_count(m: usize, n: usize) -> Option<usize> {
    (m + 1).checked_pow(n as u32)
}

/// `3^N` arms of the lower-bound environment.
pub fn lowerbound_arm_count(n_vars: usize) -> Option<usize> {
    3usize.checked_pow(n_vars as u32)
}

pub fn build_parallel_sim(sim: &ParallelSim) -> Result<CausalEnv, EnvError> {
    let network = DiscreteNetwork::from_spec(&sim.network_spec()?)?;
    CausalEnv::new(
        format!("parallel-m{}-n{}", sim.m(), sim.n()),
        network,
        RewardModel::LinearGaussian {
            theta: sim.theta.clone(),
            noise_sd: sim.noise_sd,
        },
    )
}

pub fn build_pure_sim_benchmark() -> CausalEnv {
    build_parallel_sim(&ParallelSim::benchmark()).expect("benchmark tables are valid")
}

pub fn build_random_instance<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    theta: Vec<f64>,
    noise_sd: f64,
    rng: &mut R,
) -> Result<CausalEnv, EnvError> {
    build_parallel_sim(&ParallelSim::random(m, n, theta, noise_sd, rng))
}

fn email_means(network: &DiscreteNetwork) -> Vec<f64> {
    network
        .enumerate_parent_assignments()
        .into_iter()
        .map(|pa| {
            let total: usize = pa.values.iter().map(|v| v + LABEL_OFFSET).sum();
            1.0 - total as f64 / 9.0
        })
        .collect()
}

/// Network of the email campaign: product `X1`, purpose `X2` and send time
/// `Z3` are under control; subject length `Z1` and template `Z2` follow from
/// the chosen email pool.
pub fn email_network_spec() -> NetworkSpec {
    let p_z1: [f64; 4] = [0.7, 0.7, 0.3, 0.3];
    let p_z2_product3: [f64; 4] = [0.6, 0.7, 0.6, 0.5];
    let p_z2_other: [f64; 4] = [0.8, 0.9, 0.5, 0.2];
    let binary = |p: f64| [p, 1.0 - p];

    // Z2 rows: X1 most significant, then X2.
    let mut z2 = Vec::with_capacity(24);
    for x1 in 0..3 {
        let row = if x1 == 2 { &p_z2_product3 } else { &p_z2_other };
        for &p in row {
            z2.extend(binary(p));
        }
    }
    NetworkSpec {
        variables: vec![
            VariableSpec::new("X1", 3),
            VariableSpec::new("X2", 4),
            VariableSpec::new("Z3", 3),
            VariableSpec::new("Z1", 2),
            VariableSpec::new("Z2", 2),
        ],
        edges: vec![
            ("X2".into(), "Z1".into()),
            ("X1".into(), "Z2".into()),
            ("X2".into(), "Z2".into()),
        ],
        cpts: BTreeMap::from([
            ("X1".into(), vec![0.2, 0.2, 0.6]),
            ("X2".into(), vec![0.05, 0.6, 0.3, 0.05]),
            ("Z3".into(), vec![0.5, 0.2, 0.3]),
            ("Z1".into(), p_z1.iter().flat_map(|&p| binary(p)).collect()),
            ("Z2".into(), z2),
        ]),
        reward_parents: vec!["Z1".into(), "Z2".into(), "Z3".into()],
        intervenable: vec!["X1".into(), "X2".into(), "Z3".into()],
    }
}

pub fn build_email_env() -> CausalEnv {
    let network = DiscreteNetwork::from_spec(&email_network_spec()).expect("email tables are valid");
    let means = email_means(&network);
    CausalEnv::new("email", network, RewardModel::Bernoulli { means }).expect("email env is valid")
}

/// `N` binary variables with `P(X_i = 1) = p[i]`, only `X_1` feeding the
/// reward.
pub fn lowerbound_network_spec(p: &[f64]) -> Result<NetworkSpec, EnvError> {
    if p.is_empty() {
        return config_err("lower-bound environment needs at least one variable");
    }
    if p.iter().any(|&pi| !(pi > 0.0 && pi < 1.0)) {
        return config_err("lower-bound marginals must lie in (0, 1)");
    }
    let names: Vec<String> = (1..=p.len()).map(|i| format!("X{i}")).collect();
    Ok(NetworkSpec {
        variables: names.iter().map(|n| VariableSpec::new(n, 2)).collect(),
        edges: Vec::new(),
        cpts: names
            .iter()
            .zip(p)
            .map(|(n, &pi)| (n.clone(), vec![pi, 1.0 - pi]))
            .collect(),
        reward_parents: vec![names[0].clone()],
        intervenable: names,
    })
}

pub fn build_lowerbound_env(delta: f64, p: &[f64]) -> Result<CausalEnv, EnvError> {
    let network = DiscreteNetwork::from_spec(&lowerbound_network_spec(p)?)?;
    CausalEnv::new(
        format!("lower-bound-N{}", p.len()),
        network,
        RewardModel::LowerBoundGaussian { delta },
    )
}
