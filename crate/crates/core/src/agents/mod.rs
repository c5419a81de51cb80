//! Bandit policies behind a single select/update contract.
//!
//! Causal agents share statistics across arms through a
//! [`DecompositionTable`]; linear agents work on the induced arm features of
//! a [`FeatureTable`]; baselines only know the number of arms. Every agent
//! breaks ties towards the lowest arm id and owns its own RNG stream.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environments::{CausalEnv, Observation};
use crate::linalg::LinalgError;

mod baseline;
mod causal;
mod linear;
mod tables;

pub use baseline::{TsBeta, TsGauss, Ucb};
pub use causal::{CausalTsBeta, CausalTsGauss, CausalUcb};
pub use linear::{clucb_beta, CausalLinTs, CausalLinUcb, LinState};
pub use tables::{DecompositionTable, FeatureTable, TableError, ROW_TOLERANCE};

/// RNG used for agent-internal sampling.
pub type AgentRng = ChaCha8Rng;

/// Diagonal jitter added on a failed Cholesky before giving up.
pub const CHOLESKY_JITTER: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("rewards must lie in [0, 1] for {agent}, got {reward}")]
    RewardOutOfRange { agent: AgentKind, reward: f64 },
    #[error("arm {arm} out of range ({arms} arms)")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("observed assignment {z} out of range ({assignments} assignments)")]
    AssignmentOutOfRange { z: usize, assignments: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid agent configuration: {0}")]
    Config(String),
}

/// Every policy the simulator knows, by its command-line name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AgentKind {
    CausalUcb,
    CausalTsBeta,
    CausalTsGauss,
    CausalLinUcb,
    CausalLinTs,
    Ucb,
    TsBeta,
    TsGauss,
}

impl AgentKind {
    pub const ALL: [AgentKind; 8] = [
        AgentKind::CausalUcb,
        AgentKind::CausalTsBeta,
        AgentKind::CausalTsGauss,
        AgentKind::CausalLinUcb,
        AgentKind::CausalLinTs,
        AgentKind::Ucb,
        AgentKind::TsBeta,
        AgentKind::TsGauss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::CausalUcb => "c-ucb",
            AgentKind::CausalTsBeta => "c-ts-beta",
            AgentKind::CausalTsGauss => "c-ts-gauss",
            AgentKind::CausalLinUcb => "cl-ucb",
            AgentKind::CausalLinTs => "cl-ts",
            AgentKind::Ucb => "ucb",
            AgentKind::TsBeta => "ts-beta",
            AgentKind::TsGauss => "ts-gauss",
        }
    }

    pub fn is_causal(self) -> bool {
        !matches!(self, AgentKind::Ucb | AgentKind::TsBeta | AgentKind::TsGauss)
    }

    /// Beta-prior agents only accept rewards in `[0, 1]`.
    pub fn needs_unit_rewards(self) -> bool {
        matches!(self, AgentKind::CausalTsBeta | AgentKind::TsBeta)
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let known: Vec<&str> = AgentKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown agent `{s}` (known: {})", known.join(", "))
        })
    }
}

impl TryFrom<String> for AgentKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AgentKind> for String {
    fn from(k: AgentKind) -> Self {
        k.name().to_string()
    }
}

/// Tunable hyperparameters shared by all agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParams {
    /// Confidence level of the UCB agents. `None` means `1 / T²`.
    pub delta: Option<f64>,
    /// Posterior scale of CL-TS.
    pub v: f64,
    /// Replaces the horizon-derived confidence radius of CL-UCB.
    pub beta_override: Option<f64>,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            delta: None,
            v: 1.0,
            beta_override: None,
        }
    }
}

impl AgentParams {
    pub fn delta_for(&self, horizon: usize) -> f64 {
        self.delta.unwrap_or_else(|| 1.0 / (horizon as f64).powi(2))
    }
}

/// What an agent is told about the problem up front.
#[derive(Debug, Clone)]
pub struct Problem {
    pub num_arms: usize,
    pub horizon: usize,
    pub decomposition: Arc<DecompositionTable>,
    pub features: Arc<FeatureTable>,
}

impl Problem {
    pub fn from_env(env: &CausalEnv, horizon: usize) -> Self {
        Self {
            num_arms: env.num_arms(),
            horizon,
            decomposition: Arc::clone(env.decomposition()),
            features: Arc::clone(env.features()),
        }
    }
}

/// One policy instance. `select` and `update` alternate strictly.
pub trait Agent: Send {
    fn kind(&self) -> AgentKind;

    fn horizon(&self) -> usize;

    fn select(&mut self) -> usize;

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError>;
}

pub fn build_agent(
    kind: AgentKind,
    problem: &Problem,
    params: &AgentParams,
    seed: u64,
) -> Result<Box<dyn Agent>, AgentError> {
    if problem.horizon == 0 {
        return Err(AgentError::Config("horizon must be at least 1".into()));
    }
    if problem.decomposition.num_arms() != problem.num_arms {
        return Err(AgentError::Config(format!(
            "decomposition table has {} rows for {} arms",
            problem.decomposition.num_arms(),
            problem.num_arms
        )));
    }
    let delta = params.delta_for(problem.horizon);
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AgentError::Config(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(params.v >= 0.0) {
        return Err(AgentError::Config("v must be non-negative".into()));
    }
    let rng = AgentRng::seed_from_u64(seed);
    let table = Arc::clone(&problem.decomposition);
    let features = Arc::clone(&problem.features);
    let t = problem.horizon;
    Ok(match kind {
        AgentKind::CausalUcb => Box::new(CausalUcb::new(table, t, delta)),
        AgentKind::CausalTsBeta => Box::new(CausalTsBeta::new(table, t, rng)),
        AgentKind::CausalTsGauss => Box::new(CausalTsGauss::new(table, t, rng)),
        AgentKind::CausalLinUcb => {
            let beta = params.beta_override.unwrap_or_else(|| clucb_beta(t, features.dim()));
            Box::new(CausalLinUcb::new(features, t, beta))
        }
        AgentKind::CausalLinTs => Box::new(CausalLinTs::new(features, t, params.v, rng)),
        AgentKind::Ucb => Box::new(Ucb::new(problem.num_arms, t, delta)),
        AgentKind::TsBeta => Box::new(TsBeta::new(problem.num_arms, t, rng)),
        AgentKind::TsGauss => Box::new(TsGauss::new(problem.num_arms, t, rng)),
    })
}

/// Running mean with the pre-increment count: `μ ← (μ k + y) / (k + 1)`,
/// then `k ← k + 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanStats {
    pub count: u64,
    pub mean: f64,
}

impl MeanStats {
    pub fn push(&mut self, y: f64) {
        let k = self.count as f64;
        self.mean = (self.mean * k + y) / (k + 1.0);
        self.count += 1;
    }
}

/// `√(2 ln(1/δ) / max(1, count))`.
pub fn ucb_width(log_inv_delta: f64, count: u64) -> f64 {
    (2.0 * log_inv_delta / count.max(1) as f64).sqrt()
}

/// Relative gap below which two scores count as tied. Mixing per-assignment
/// bounds through a table row leaves a few ulps of rounding, so scores that
/// are equal in exact arithmetic rarely compare equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Index of the largest score; the lowest index wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    let mut top = scores.first().copied().unwrap_or(f64::NEG_INFINITY);
    for (i, &s) in scores.iter().enumerate().skip(1) {
        let margin = if top.is_finite() {
            TIE_TOLERANCE * top.abs().max(1.0)
        } else {
            0.0
        };
        if s > top + margin {
            best = i;
            top = s;
        }
    }
    best
}

fn check_arm(arm: usize, arms: usize) -> Result<(), AgentError> {
    if arm < arms {
        Ok(())
    } else {
        Err(AgentError::ArmOutOfRange { arm, arms })
    }
}

fn check_assignment(z: usize, assignments: usize) -> Result<(), AgentError> {
    if z < assignments {
        Ok(())
    } else {
        Err(AgentError::AssignmentOutOfRange { z, assignments })
    }
}
