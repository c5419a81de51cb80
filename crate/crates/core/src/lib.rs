//! Causal bandits: multi-armed bandits whose arms are interventions on a
//! discrete causal network.
//!
//! The reward depends on the intervention only through the reward node's
//! parents, so an arm's mean is `Σ_j E[Y | Z = j] P(Z = j | do(a))`. Causal
//! agents learn the per-assignment conditional means and share that
//! information across every arm.
//!
//! * [`scm`] holds discrete networks, interventions and exact inference.
//! * [`environments`] turns networks into bandit problems.
//! * [`agents`] has the causal and baseline policies.
//! * [`runner`] runs replicated regret experiments and writes results.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod agents;
pub mod environments;
pub mod linalg;
pub mod runner;
pub mod scm;

pub use agents::{build_agent, Agent, AgentError, AgentKind, AgentParams, DecompositionTable, FeatureTable, Problem};
pub use environments::{Arm, CausalEnv, EnvError, ModelFile, Observation, RewardModel};
pub use runner::{run_experiment, scaling_scan, ExperimentConfig, RunError, ScanAxis, Scenario};
pub use scm::{DiscreteNetwork, Intervention, NetworkSpec, ScmError};
