use std::sync::Arc;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use super::{
    argmax, check_arm, check_assignment, ucb_width, Agent, AgentError, AgentKind, AgentRng, DecompositionTable,
    MeanStats,
};
use crate::environments::Observation;

/// C-UCB: confidence bounds per parent assignment, mixed into arm scores by
/// the decomposition table.
#[derive(Debug, Clone)]
pub struct CausalUcb {
    table: Arc<DecompositionTable>,
    horizon: usize,
    log_inv_delta: f64,
    stats: Vec<MeanStats>,
    ucb: Vec<f64>,
    scores: Vec<f64>,
}

impl CausalUcb {
    pub fn new(table: Arc<DecompositionTable>, horizon: usize, delta: f64) -> Self {
        let k = table.num_assignments();
        let a = table.num_arms();
        Self {
            table,
            horizon,
            log_inv_delta: -delta.ln(),
            stats: vec![MeanStats::default(); k],
            ucb: vec![0.0; k],
            scores: vec![0.0; a],
        }
    }

    pub fn stats(&self) -> &[MeanStats] {
        &self.stats
    }

    /// Confidence half-width of assignment `j` at the current counts.
    pub fn width(&self, j: usize) -> f64 {
        ucb_width(self.log_inv_delta, self.stats[j].count)
    }

    /// Per-assignment upper bounds used by the last `select`.
    pub fn upper_bounds(&self) -> &[f64] {
        &self.ucb
    }

    /// Arm scores computed by the last `select`.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

impl Agent for CausalUcb {
    fn kind(&self) -> AgentKind {
        AgentKind::CausalUcb
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select(&mut self) -> usize {
        for (u, s) in self.ucb.iter_mut().zip(&self.stats) {
            *u = s.mean + ucb_width(self.log_inv_delta, s.count);
        }
        self.table.scores_into(&self.ucb, &mut self.scores);
        argmax(&self.scores)
    }

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError> {
        check_arm(arm, self.table.num_arms())?;
        check_assignment(obs.z_index, self.stats.len())?;
        self.stats[obs.z_index].push(obs.reward);
        Ok(())
    }
}

/// C-TS with a Beta(1, 1) prior per parent assignment. Rewards in `[0, 1]`
/// are turned into Bernoulli outcomes before the conjugate update.
#[derive(Debug, Clone)]
pub struct CausalTsBeta {
    table: Arc<DecompositionTable>,
    horizon: usize,
    successes: Vec<u64>,
    failures: Vec<u64>,
    samples: Vec<f64>,
    scores: Vec<f64>,
    rng: AgentRng,
}

impl CausalTsBeta {
    pub fn new(table: Arc<DecompositionTable>, horizon: usize, rng: AgentRng) -> Self {
        let k = table.num_assignments();
        let a = table.num_arms();
        Self {
            table,
            horizon,
            successes: vec![1; k],
            failures: vec![1; k],
            samples: vec![0.0; k],
            scores: vec![0.0; a],
            rng,
        }
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn failures(&self) -> &[u64] {
        &self.failures
    }
}

pub(super) fn sample_beta(rng: &mut AgentRng, s: u64, f: u64) -> f64 {
    Beta::new(s as f64, f as f64)
        .expect("beta parameters are at least 1")
        .sample(rng)
}

/// Bernoulli trial with success probability `reward`.
pub(super) fn binarize(rng: &mut AgentRng, kind: AgentKind, reward: f64) -> Result<bool, AgentError> {
    if !(0.0..=1.0).contains(&reward) {
        return Err(AgentError::RewardOutOfRange { agent: kind, reward });
    }
    Ok(rng.random::<f64>() < reward)
}

impl Agent for CausalTsBeta {
    fn kind(&self) -> AgentKind {
        AgentKind::CausalTsBeta
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select(&mut self) -> usize {
        for j in 0..self.samples.len() {
            self.samples[j] = sample_beta(&mut self.rng, self.successes[j], self.failures[j]);
        }
        self.table.scores_into(&self.samples, &mut self.scores);
        argmax(&self.scores)
    }

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError> {
        check_arm(arm, self.table.num_arms())?;
        check_assignment(obs.z_index, self.successes.len())?;
        if binarize(&mut self.rng, AgentKind::CausalTsBeta, obs.reward)? {
            self.successes[obs.z_index] += 1;
        } else {
            self.failures[obs.z_index] += 1;
        }
        Ok(())
    }
}

/// C-TS with Gaussian posteriors `N(μ̂_j, 1 / (k_j + 1))`.
#[derive(Debug, Clone)]
pub struct CausalTsGauss {
    table: Arc<DecompositionTable>,
    horizon: usize,
    stats: Vec<MeanStats>,
    samples: Vec<f64>,
    scores: Vec<f64>,
    rng: AgentRng,
}

impl CausalTsGauss {
    pub fn new(table: Arc<DecompositionTable>, horizon: usize, rng: AgentRng) -> Self {
        let k = table.num_assignments();
        let a = table.num_arms();
        Self {
            table,
            horizon,
            stats: vec![MeanStats::default(); k],
            samples: vec![0.0; k],
            scores: vec![0.0; a],
            rng,
        }
    }

    pub fn stats(&self) -> &[MeanStats] {
        &self.stats
    }
}

pub(super) fn sample_gauss(rng: &mut AgentRng, s: MeanStats) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    s.mean + z / ((s.count + 1) as f64).sqrt()
}

impl Agent for CausalTsGauss {
    fn kind(&self) -> AgentKind {
        AgentKind::CausalTsGauss
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select(&mut self) -> usize {
        for (x, &s) in self.samples.iter_mut().zip(&self.stats) {
            *x = sample_gauss(&mut self.rng, s);
        }
        self.table.scores_into(&self.samples, &mut self.scores);
        argmax(&self.scores)
    }

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError> {
        check_arm(arm, self.table.num_arms())?;
        check_assignment(obs.z_index, self.stats.len())?;
        self.stats[obs.z_index].push(obs.reward);
        Ok(())
    }
}
