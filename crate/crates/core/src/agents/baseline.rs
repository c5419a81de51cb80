//! Standard per-arm policies that ignore the observed parent assignment.

use super::causal::{binarize, sample_beta, sample_gauss};
use super::{argmax, check_arm, ucb_width, Agent, AgentError, AgentKind, AgentRng, MeanStats};
use crate::environments::Observation;

/// UCB with the same width and `δ` as C-UCB, indexed by arm.
#[derive(Debug, Clone)]
pub struct Ucb {
    horizon: usize,
    log_inv_delta: f64,
    stats: Vec<MeanStats>,
    scores: Vec<f64>,
}

impl Ucb {
    pub fn new(arms: usize, horizon: usize, delta: f64) -> Self {
        Self {
            horizon,
            log_inv_delta: -delta.ln(),
            stats: vec![MeanStats::default(); arms],
            scores: vec![0.0; arms],
        }
    }

    pub fn stats(&self) -> &[MeanStats] {
        &self.stats
    }
}

impl Agent for Ucb {
    fn kind(&self) -> AgentKind {
        AgentKind::Ucb
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select(&mut self) -> usize {
        for (score, s) in self.scores.iter_mut().zip(&self.stats) {
            *score = s.mean + ucb_width(self.log_inv_delta, s.count);
        }
        argmax(&self.scores)
    }

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError> {
        check_arm(arm, self.stats.len())?;
        self.stats[arm].push(obs.reward);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TsBeta {
    horizon: usize,
    successes: Vec<u64>,
    failures: Vec<u64>,
    scores: Vec<f64>,
    rng: AgentRng,
}

impl TsBeta {
    pub fn new(arms: usize, horizon: usize, rng: AgentRng) -> Self {
        Self {
            horizon,
            successes: vec![1; arms],
            failures: vec![1; arms],
            scores: vec![0.0; arms],
            rng,
        }
    }
}

impl Agent for TsBeta {
    fn kind(&self) -> AgentKind {
        AgentKind::TsBeta
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select(&mut self) -> usize {
        for a in 0..self.scores.len() {
            self.scores[a] = sample_beta(&mut self.rng, self.successes[a], self.failures[a]);
        }
        argmax(&self.scores)
    }

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError> {
        check_arm(arm, self.scores.len())?;
        if binarize(&mut self.rng, AgentKind::TsBeta, obs.reward)? {
            self.successes[arm] += 1;
        } else {
            self.failures[arm] += 1;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TsGauss {
    horizon: usize,
    stats: Vec<MeanStats>,
    scores: Vec<f64>,
    rng: AgentRng,
}

impl TsGauss {
    pub fn new(arms: usize, horizon: usize, rng: AgentRng) -> Self {
        Self {
            horizon,
            stats: vec![MeanStats::default(); arms],
            scores: vec![0.0; arms],
            rng,
        }
    }

    pub fn stats(&self) -> &[MeanStats] {
        &self.stats
    }
}

impl Agent for TsGauss {
    fn kind(&self) -> AgentKind {
        AgentKind::TsGauss
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select(&mut self) -> usize {
        for (x, &s) in self.scores.iter_mut().zip(&self.stats) {
            *x = sample_gauss(&mut self.rng, s);
        }
        argmax(&self.scores)
    }

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError> {
        check_arm(arm, self.stats.len())?;
        self.stats[arm].push(obs.reward);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn ucb_visits_arms_in_id_order_first() {
        let mut agent = Ucb::new(5, 100, 1e-4);
        for expected in 0..5 {
            let arm = agent.select();
            assert_eq!(arm, expected);
            agent
                .update(
                    arm,
                    Observation {
                        z_index: 0,
                        reward: -1.0,
                    },
                )
                .unwrap();
        }
    }

    #[test]
    fn single_arm_gauss_tracks_posterior_mean() {
        let mut agent = TsGauss::new(1, 10, AgentRng::seed_from_u64(2));
        for (i, y) in [4.0, 2.0, 0.0].into_iter().enumerate() {
            assert_eq!(agent.select(), 0);
            agent.update(0, Observation { z_index: 0, reward: y }).unwrap();
            assert_eq!(agent.stats()[0].count, i as u64 + 1);
        }
        assert_eq!(agent.stats()[0].mean, 2.0);
    }

    #[test]
    fn ts_beta_checks_reward_range() {
        let mut agent = TsBeta::new(2, 10, AgentRng::seed_from_u64(2));
        assert!(agent
            .update(
                0,
                Observation {
                    z_index: 0,
                    reward: -0.1
                }
            )
            .is_err());
        assert!(agent
            .update(
                0,
                Observation {
                    z_index: 0,
                    reward: 0.4
                }
            )
            .is_ok());
    }
}
