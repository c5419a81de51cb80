use std::sync::Arc;

use super::{argmax, check_arm, Agent, AgentError, AgentKind, AgentRng, FeatureTable, CHOLESKY_JITTER};
use crate::environments::Observation;
use crate::linalg::{dot, Cholesky, SpdMatrix};

/// `β = 1 + √(2 ln T + d ln(1 + T/d))`.
pub fn clucb_beta(horizon: usize, dim: usize) -> f64 {
    let t = horizon as f64;
    let d = dim as f64;
    1.0 + (2.0 * t.ln() + d * (1.0 + t / d).ln()).sqrt()
}

/// Ridge statistics of a linear bandit: `V = I + Σ m mᵀ`, `g = Σ m y` and
/// `θ̂ = V⁻¹ g`. The factorization of `V` is refreshed from scratch after
/// every update.
#[derive(Debug, Clone)]
pub struct LinState {
    gram: SpdMatrix,
    g: Vec<f64>,
    theta_hat: Vec<f64>,
    chol: Cholesky,
    updates: usize,
}

impl LinState {
    pub fn new(dim: usize) -> Self {
        let gram = SpdMatrix::identity(dim);
        let chol = gram.cholesky().expect("identity is positive definite");
        Self {
            gram,
            g: vec![0.0; dim],
            theta_hat: vec![0.0; dim],
            chol,
            updates: 0,
        }
    }

    pub fn gram(&self) -> &SpdMatrix {
        &self.gram
    }

    pub fn theta_hat(&self) -> &[f64] {
        &self.theta_hat
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn update(&mut self, m: &[f64], reward: f64) -> Result<(), AgentError> {
        self.gram.rank1_update(m)?;
        for (gi, &mi) in self.g.iter_mut().zip(m) {
            *gi += mi * reward;
        }
        self.chol = match self.gram.cholesky() {
            Ok(c) => c,
            Err(_) => {
                let mut jittered = self.gram.clone();
                jittered.add_diagonal(CHOLESKY_JITTER);
                jittered.cholesky()?
            }
        };
        self.theta_hat = self.chol.solve(&self.g)?;
        self.updates += 1;
        Ok(())
    }
}

/// CL-UCB: optimism over the confidence ellipsoid around `θ̂`.
#[derive(Debug, Clone)]
pub struct CausalLinUcb {
    features: Arc<FeatureTable>,
    horizon: usize,
    beta: f64,
    state: LinState,
    scores: Vec<f64>,
    scratch: Vec<f64>,
}

impl CausalLinUcb {
    pub fn new(features: Arc<FeatureTable>, horizon: usize, beta: f64) -> Self {
        let d = features.dim();
        let a = features.num_arms();
        Self {
            features,
            horizon,
            beta,
            state: LinState::new(d),
            scores: vec![0.0; a],
            scratch: vec![0.0; d],
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn state(&self) -> &LinState {
        &self.state
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }
}

impl Agent for CausalLinUcb {
    fn kind(&self) -> AgentKind {
        AgentKind::CausalLinUcb
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select(&mut self) -> usize {
        let chol = self.state.cholesky();
        let theta = self.state.theta_hat();
        for (a, score) in self.scores.iter_mut().enumerate() {
            let m = self.features.arm_feature(a);
            *score = dot(theta, m) + self.beta * chol.quad_norm_inv_with(m, &mut self.scratch);
        }
        argmax(&self.scores)
    }

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError> {
        check_arm(arm, self.scores.len())?;
        self.state.update(self.features.arm_feature(arm), obs.reward)
    }
}

/// CL-TS: sample `θ̃ ~ N(θ̂, v² V⁻¹)` and act greedily on it.
#[derive(Debug, Clone)]
pub struct CausalLinTs {
    features: Arc<FeatureTable>,
    horizon: usize,
    v: f64,
    state: LinState,
    scores: Vec<f64>,
    rng: AgentRng,
    last_sample: Vec<f64>,
}

impl CausalLinTs {
    pub fn new(features: Arc<FeatureTable>, horizon: usize, v: f64, rng: AgentRng) -> Self {
        let d = features.dim();
        let a = features.num_arms();
        Self {
            features,
            horizon,
            v,
            state: LinState::new(d),
            scores: vec![0.0; a],
            rng,
            last_sample: vec![0.0; d],
        }
    }

    pub fn state(&self) -> &LinState {
        &self.state
    }

    /// `θ̃` drawn by the last `select`.
    pub fn last_sample(&self) -> &[f64] {
        &self.last_sample
    }
}

impl Agent for CausalLinTs {
    fn kind(&self) -> AgentKind {
        AgentKind::CausalLinTs
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn select(&mut self) -> usize {
        self.last_sample = self
            .state
            .cholesky()
            .sample_precision(self.state.theta_hat(), self.v, &mut self.rng);
        for (a, score) in self.scores.iter_mut().enumerate() {
            *score = dot(&self.last_sample, self.features.arm_feature(a));
        }
        argmax(&self.scores)
    }

    fn update(&mut self, arm: usize, obs: Observation) -> Result<(), AgentError> {
        check_arm(arm, self.scores.len())?;
        self.state.update(self.features.arm_feature(arm), obs.reward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::DecompositionTable;
    use rand::SeedableRng;

    fn features(rows: &[[f64; 2]]) -> Arc<FeatureTable> {
        let map: Vec<usize> = (0..rows.len()).collect();
        let table = DecompositionTable::point_mass(&map, rows.len()).unwrap();
        Arc::new(FeatureTable::new(&table, 2, rows.iter().flatten().copied().collect()).unwrap())
    }

    #[test]
    fn beta_at_t5000_d4() {
        let beta = clucb_beta(5000, 4);
        assert!((beta - 7.750).abs() < 1e-3, "{beta}");
    }

    #[test]
    fn first_round_score_is_beta_times_norm() {
        let f = features(&[[3.0, 4.0], [1.0, 0.0]]);
        let mut agent = CausalLinUcb::new(f, 100, 2.0);
        assert_eq!(agent.select(), 0);
        assert!((agent.scores()[0] - 10.0).abs() < 1e-12);
        assert!((agent.scores()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ridge_estimate_on_repeated_arm() {
        // V = I + t e1 e1ᵀ, g = t e1  =>  θ̂[0] = t / (1 + t)
        let f = features(&[[1.0, 0.0]]);
        let mut agent = CausalLinUcb::new(f, 100, 1.0);
        for t in 1..=20u32 {
            agent
                .update(
                    0,
                    Observation {
                        z_index: 0,
                        reward: 1.0,
                    },
                )
                .unwrap();
            let expected = f64::from(t) / (1.0 + f64::from(t));
            assert!((agent.state().theta_hat()[0] - expected).abs() < 1e-12);
            assert_eq!(agent.state().theta_hat()[1], 0.0);
        }
    }

    #[test]
    fn zero_scale_is_greedy() {
        let f = features(&[[1.0, 0.0], [0.0, 1.0]]);
        let mut agent = CausalLinTs::new(f, 100, 0.0, AgentRng::seed_from_u64(5));
        agent
            .update(
                1,
                Observation {
                    z_index: 1,
                    reward: 2.0,
                },
            )
            .unwrap();
        for _ in 0..10 {
            assert_eq!(agent.select(), 1);
            assert_eq!(agent.last_sample(), agent.state().theta_hat());
        }
    }

    #[test]
    fn gram_matrix_tracks_updates() {
        let f = features(&[[1.0, 2.0], [0.5, -1.0]]);
        let mut agent = CausalLinTs::new(f, 100, 1.0, AgentRng::seed_from_u64(5));
        let pulls = [0, 1, 1, 0, 1];
        let mut expected = SpdMatrix::identity(2);
        let mut trace = 2.0;
        for &a in &pulls {
            let m = if a == 0 { [1.0, 2.0] } else { [0.5, -1.0] };
            expected.rank1_update(&m).unwrap();
            trace += dot(&m, &m);
            agent
                .update(
                    a,
                    Observation {
                        z_index: a,
                        reward: 0.1,
                    },
                )
                .unwrap();
        }
        assert_eq!(agent.state().gram(), &expected);
        assert!((agent.state().gram().trace() - trace).abs() < 1e-12);
        assert_eq!(agent.state().updates(), pulls.len());
    }
}
