use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RunError;
use crate::agents::{AgentKind, AgentParams};
use crate::environments::PURE_SIM_NOISE_SD;

pub const DEFAULT_REPLICATIONS: usize = 20;
pub const DEFAULT_ARM_BUDGET: usize = 100_000;

/// Named experiment presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Fixed m = 3, n = 4 parallel graph with the benchmark tables.
    PureSim,
    /// Same graph, `θ ~ N(0, prior_sd² I)` redrawn per replication.
    PureSimBayes,
    /// Email campaign graph with Bernoulli rewards.
    Email,
    /// Parallel graph with Dirichlet/uniform tables redrawn per replication.
    RandomInstance,
    /// N binary variables, reward `Δ X_1 + N(0, 1)`.
    LowerBound,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::PureSim,
        Scenario::PureSimBayes,
        Scenario::Email,
        Scenario::RandomInstance,
        Scenario::LowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::PureSim => "pure-sim",
            Scenario::PureSimBayes => "pure-sim-bayes",
            Scenario::Email => "email",
            Scenario::RandomInstance => "random-instance",
            Scenario::LowerBound => "lower-bound",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::PureSim => "parallel X_i -> W_i -> Y graph, m=3, n=4, fixed tables, linear Gaussian reward",
            Scenario::PureSimBayes => "pure-sim graph with theta drawn from N(0, prior_sd^2 I) per replication",
            Scenario::Email => "email campaign graph, 80 arms, Bernoulli(1 - (Z1+Z2+Z3)/9) reward",
            Scenario::RandomInstance => "parallel graph with random tables per replication (uses m, n)",
            Scenario::LowerBound => "N binary variables, reward delta*X1 + N(0,1) (uses n_vars, gap, p)",
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            Scenario::Email => 3000,
            Scenario::LowerBound => 10_000,
            _ => 5000,
        }
    }

    pub fn default_agents(self) -> Vec<AgentKind> {
        use AgentKind::*;
        match self {
            Scenario::PureSim | Scenario::RandomInstance => {
                vec![Ucb, CausalUcb, CausalLinUcb, TsGauss, CausalTsGauss, CausalLinTs]
            }
            Scenario::PureSimBayes => vec![TsGauss, CausalTsGauss, CausalLinTs],
            Scenario::Email => vec![Ucb, CausalUcb, TsBeta, CausalTsBeta],
            Scenario::LowerBound => vec![Ucb, CausalUcb, TsGauss, CausalTsGauss],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Parameter swept by a scaling scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScanAxis {
    /// Domain size of the non-parent variables, n fixed.
    #[serde(rename = "m")]
    M,
    /// Number of parent/non-parent pairs, m fixed, `θ = e_1`.
    #[serde(rename = "n")]
    N,
    /// Number of variables of the lower-bound environment.
    #[serde(rename = "N")]
    LowerBoundN,
}

impl ScanAxis {
    pub fn name(self) -> &'static str {
        match self {
            ScanAxis::M => "m",
            ScanAxis::N => "n",
            ScanAxis::LowerBoundN => "N",
        }
    }

    pub fn scenario_name(self) -> &'static str {
        match self {
            ScanAxis::M => "scale-m",
            ScanAxis::N => "scale-n",
            ScanAxis::LowerBoundN => "lower-bound",
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            ScanAxis::M => 5000,
            ScanAxis::N | ScanAxis::LowerBoundN => 10_000,
        }
    }
}

impl FromStr for ScanAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m" => Ok(ScanAxis::M),
            "n" => Ok(ScanAxis::N),
            "N" => Ok(ScanAxis::LowerBoundN),
            _ => Err(format!("unknown axis `{s}` (expected m, n or N)")),
        }
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub horizon: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub agents: Vec<AgentKind>,
    pub agent_params: AgentParams,
    /// Domain size of each `X_i` (random instances and `scale-n`).
    pub m: usize,
    /// Number of `X_i → W_i` pairs (random instances and `scale-m`).
    pub n: usize,
    /// Reward coefficients; `None` picks the scenario's default.
    pub theta: Option<Vec<f64>>,
    pub noise_sd: f64,
    pub prior_sd: f64,
    /// Number of variables of the lower-bound environment.
    pub n_vars: usize,
    /// Reward scale `Δ` of the lower-bound environment.
    pub gap: f64,
    /// `P(X_i = 1)` for every lower-bound variable.
    pub p: f64,
    pub threads: Option<usize>,
    pub arm_budget: usize,
}

impl ExperimentConfig {
    pub fn preset(scenario: Scenario) -> Self {
        Self {
            scenario,
            horizon: scenario.default_horizon(),
            replications: DEFAULT_REPLICATIONS,
            base_seed: 0,
            agents: scenario.default_agents(),
            agent_params: AgentParams::default(),
            m: 3,
            n: 4,
            theta: None,
            noise_sd: PURE_SIM_NOISE_SD,
            prior_sd: 0.1,
            n_vars: 3,
            gap: 0.3,
            p: 0.5,
            threads: None,
            arm_budget: DEFAULT_ARM_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.agents.is_empty() {
            return bad("no agents selected".into());
        }
        if self.m < 2 {
            return bad(format!("m must be at least 2, got {}", self.m));
        }
        if self.n == 0 || self.n_vars == 0 {
            return bad("n and n_vars must be at least 1".into());
        }
        if !(self.noise_sd >= 0.0) || !(self.prior_sd >= 0.0) {
            return bad("noise_sd and prior_sd must be non-negative".into());
        }
        if !(self.gap > 0.0) {
            return bad(format!("gap must be positive, got {}", self.gap));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return bad(format!("p must lie in (0, 1), got {}", self.p));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }
}

/// Partially specified settings, as read from a config file or flags.
/// Every field of [`ExperimentConfig`] has a counterpart here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigOverrides {
    pub scenario: Option<Scenario>,
    pub horizon: Option<usize>,
    pub replications: Option<usize>,
    pub base_seed: Option<u64>,
    pub agents: Option<Vec<AgentKind>>,
    pub agent_params: Option<AgentParamOverrides>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub theta: Option<Vec<f64>>,
    pub noise_sd: Option<f64>,
    pub prior_sd: Option<f64>,
    pub n_vars: Option<usize>,
    pub gap: Option<f64>,
    pub p: Option<f64>,
    pub threads: Option<usize>,
    pub arm_budget: Option<usize>,
    /// Scan settings; ignored by curve runs.
    pub axis: Option<ScanAxis>,
    pub values: Option<Vec<usize>>,
    /// Output directory, used by the command-line front end.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentParamOverrides {
    pub delta: Option<f64>,
    pub v: Option<f64>,
    pub beta_override: Option<f64>,
}

macro_rules! take {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl ConfigOverrides {
    pub fn from_toml_str(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `top` win over fields set in `self`.
    pub fn overlay(mut self, top: ConfigOverrides) -> Self {
        take!(
            self,
            top,
            scenario,
            horizon,
            replications,
            base_seed,
            agents,
            m,
            n,
            theta,
            noise_sd,
            prior_sd,
            n_vars,
            gap,
            p,
            threads,
            arm_budget,
            axis,
            values,
            out
        );
        self.agent_params = match (self.agent_params, top.agent_params) {
            (Some(mut base), Some(top)) => {
                take!(base, top, delta, v, beta_override);
                Some(base)
            }
            (base, top) => top.or(base),
        };
        self
    }

    /// Fills unset fields from the preset of the chosen scenario.
    pub fn resolve(&self, default_scenario: Scenario) -> Result<ExperimentConfig, RunError> {
        let scenario = self.scenario.unwrap_or(default_scenario);
        let mut cfg = ExperimentConfig::preset(scenario);
        if let Some(axis) = self.axis {
            cfg.horizon = axis.default_horizon();
        }
        let o = self.clone();
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = o.$field { cfg.$field = v; } )* };
        }
        set!(
            horizon,
            replications,
            base_seed,
            agents,
            m,
            n,
            noise_sd,
            prior_sd,
            n_vars,
            gap,
            p,
            arm_budget
        );
        if o.theta.is_some() {
            cfg.theta = o.theta;
        }
        if o.threads.is_some() {
            cfg.threads = o.threads;
        }
        if let Some(ap) = o.agent_params {
            if ap.delta.is_some() {
                cfg.agent_params.delta = ap.delta;
            }
            if let Some(v) = ap.v {
                cfg.agent_params.v = v;
            }
            if ap.beta_override.is_some() {
                cfg.agent_params.beta_override = ap.beta_override;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
