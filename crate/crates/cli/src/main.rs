//! `cbandit`: run causal bandit regret experiments from the command line.
//!
//! Exit status is 0 on success, 1 for usage or configuration errors and 2
//! when a run fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use causal_bandits::runner::{
    run_experiment, scaling_scan, write_curves_csv, write_manifest, write_scan_csv, write_summary_csv,
    AgentParamOverrides, ConfigOverrides, ExperimentConfig, Manifest, ScanResult,
};
use causal_bandits::scm::validate;
use causal_bandits::{AgentKind, ModelFile, RunError, ScanAxis, Scenario};
use clap::{Args, Parser, Subcommand};

const DEFAULT_OUT: &str = "results";

#[derive(Debug, Parser)]
#[command(name = "cbandit", version, about = "Causal bandit regret experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regret curves of several agents on one scenario.
    Run {
        #[arg(long)]
        scenario: Option<Scenario>,
        #[command(flatten)]
        common: Common,
    },
    /// Final regret as the random parallel instance grows along m or n.
    Scale {
        #[arg(long)]
        axis: Option<ScaleAxis>,
        /// Axis values, e.g. `2,3,4` or `2..6`.
        #[arg(long, value_parser = parse_values)]
        values: Option<Values>,
        #[command(flatten)]
        common: Common,
    },
    /// Final regret on lower-bound environments of growing size N.
    LowerBound {
        /// Values of N, e.g. `2..6`.
        #[arg(long = "n-values", value_parser = parse_values)]
        n_values: Option<Values>,
        /// Reward gap Δ.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a model file and report every problem found.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the built-in scenarios and their defaults.
    ListScenarios,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ScaleAxis {
    M,
    N,
}

#[derive(Debug, Clone)]
struct Values(Vec<usize>);

#[derive(Debug, Clone)]
struct Agents(Vec<AgentKind>);

#[derive(Debug, Clone)]
struct Theta(Vec<f64>);

#[derive(Debug, Args)]
struct Common {
    /// TOML file with defaults; flags win over file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Horizon T.
    #[arg(long = "t")]
    horizon: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated agent names.
    #[arg(long, value_parser = parse_agents)]
    agents: Option<Agents>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of non-parent values m.
    #[arg(long)]
    m: Option<usize>,
    /// Number of parent/non-parent pairs n.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated linear coefficients.
    #[arg(long, value_parser = parse_theta, allow_hyphen_values = true)]
    theta: Option<Theta>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    prior_sd: Option<f64>,
    /// Variables in the lower-bound scenario.
    #[arg(long)]
    n_vars: Option<usize>,
    /// Marginal P(X_i = 1) in lower-bound environments.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    arm_budget: Option<usize>,
    /// Confidence level δ of the UCB agents (default 1/T²).
    #[arg(long)]
    ucb_delta: Option<f64>,
    /// Posterior scale v of CL-TS.
    #[arg(long)]
    v: Option<f64>,
    /// Fixed confidence radius for CL-UCB.
    #[arg(long)]
    beta: Option<f64>,
}

fn parse_values(s: &str) -> Result<Values, String> {
    let bad = || format!("expected `a,b,c` or `a..b`, got `{s}`");
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok(Values((lo..=hi).collect()));
    }
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()
        .map(Values)
}

fn parse_agents(s: &str) -> Result<Agents, String> {
    s.split(',')
        .map(|a| a.trim().parse())
        .collect::<Result<_, _>>()
        .map(Agents)
}

fn parse_theta(s: &str) -> Result<Theta, String> {
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| format!("bad coefficient `{v}`")))
        .collect::<Result<_, _>>()
        .map(Theta)
}

/// Where a failure happened decides the exit status.
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl Common {
    fn overrides(&self) -> ConfigOverrides {
        let params =
            (self.ucb_delta.is_some() || self.v.is_some() || self.beta.is_some()).then_some(AgentParamOverrides {
                delta: self.ucb_delta,
                v: self.v,
                beta_override: self.beta,
            });
        ConfigOverrides {
            horizon: self.horizon,
            replications: self.reps,
            base_seed: self.seed,
            agents: self.agents.clone().map(|a| a.0),
            agent_params: params,
            m: self.m,
            n: self.n,
            theta: self.theta.clone().map(|t| t.0),
            noise_sd: self.noise_sd,
            prior_sd: self.prior_sd,
            n_vars: self.n_vars,
            p: self.p,
            threads: self.threads,
            arm_budget: self.arm_budget,
            out: self.out.clone(),
            ..Default::default()
        }
    }

    /// File values overlaid with `flags`.
    fn merged(&self, flags: ConfigOverrides) -> Result<ConfigOverrides, Failure> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::load(path).map_err(|e| Failure::Config(e.to_string()))?,
            None => ConfigOverrides::default(),
        };
        Ok(file.overlay(self.overrides()).overlay(flags))
    }
}

fn resolve(merged: &ConfigOverrides, default: Scenario) -> Result<(ExperimentConfig, PathBuf), Failure> {
    let cfg = merged.resolve(default).map_err(|e| Failure::Config(e.to_string()))?;
    let out = merged.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((cfg, out))
}

fn cmd_run(scenario: Option<Scenario>, common: &Common) -> Result<(), Failure> {
    let merged = common.merged(ConfigOverrides {
        scenario,
        ..Default::default()
    })?;
    let (cfg, out) = resolve(&merged, Scenario::PureSim)?;
    let started = Instant::now();
    let result = run_experiment(&cfg)?;
    let elapsed = started.elapsed().as_secs_f64();

    let name = &result.scenario;
    write_curves_csv(&result, &out.join(format!("{name}_curves.csv")))?;
    write_summary_csv(&result, &out.join(format!("{name}_summary.csv")))?;
    write_manifest(
        &Manifest::for_experiment(&result, elapsed),
        &out.join(format!("{name}_manifest.json")),
    )?;

    println!("{name}: T={} R={} ({elapsed:.1}s)", cfg.horizon, cfg.replications);
    for curve in &result.curves {
        let last = curve.mean.len() - 1;
        println!(
            "  {:<11} {:>10.2} ± {:.2}",
            curve.agent.name(),
            curve.mean[last],
            curve.stderr[last]
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_scan(axis: ScanAxis, values: Option<Values>, flags: ConfigOverrides, common: &Common) -> Result<(), Failure> {
    let merged = common.merged(ConfigOverrides {
        axis: Some(axis),
        values: values.map(|v| v.0),
        ..flags
    })?;
    let default_scenario = match axis {
        ScanAxis::LowerBoundN => Scenario::LowerBound,
        ScanAxis::M | ScanAxis::N => Scenario::RandomInstance,
    };
    // A scan owns its scenario; a file's `scenario` key only matters for `run`.
    let merged = ConfigOverrides {
        scenario: None,
        ..merged
    };
    let (mut cfg, out) = resolve(&merged, default_scenario)?;
    if merged.agents.is_none() {
        cfg.agents = match axis {
            ScanAxis::LowerBoundN => vec![AgentKind::Ucb, AgentKind::CausalUcb],
            ScanAxis::M | ScanAxis::N => Scenario::RandomInstance.default_agents(),
        };
    }
    let values = merged.values.clone().unwrap_or_else(|| (2..=6).collect());
    let started = Instant::now();
    let scan = scaling_scan(axis, &values, &cfg)?;
    let elapsed = started.elapsed().as_secs_f64();
    write_scan(&scan, &out, elapsed)?;
    Ok(())
}

fn write_scan(scan: &ScanResult, out: &Path, elapsed: f64) -> Result<(), Failure> {
    let name = &scan.scenario;
    write_scan_csv(scan, &out.join(format!("{name}_scan.csv")))?;
    write_manifest(
        &Manifest::for_scan(scan, elapsed),
        &out.join(format!("{name}_manifest.json")),
    )?;
    println!(
        "{name}: T={} R={} ({elapsed:.1}s)",
        scan.config.horizon, scan.config.replications
    );
    print!("  {:<11}", scan.axis.name());
    for v in &scan.values {
        print!(" {v:>9}");
    }
    println!();
    for &agent in &scan.config.agents {
        print!("  {:<11}", agent.name());
        for m in scan.mean_finals(agent) {
            print!(" {m:>9.2}");
        }
        println!();
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_validate(model: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(model).map_err(|e| Failure::Config(format!("{}: {e}", model.display())))?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", model.display())))?;
    let report = validate(&file.network);
    if !report.is_valid() {
        return Err(Failure::Config(format!("{}:\n{report}", model.display())));
    }
    let vars = file.network.variables.len();
    match file.reward {
        Some(_) => {
            let env = file.into_env().map_err(|e| Failure::Config(e.to_string()))?;
            println!(
                "{}: valid ({vars} variables, {} arms, {} parent assignments)",
                model.display(),
                env.num_arms(),
                env.num_parent_assignments()
            );
        }
        None => println!(
            "{}: valid network ({vars} variables, no reward stanza)",
            model.display()
        ),
    }
    Ok(())
}

fn cmd_list() {
    for s in Scenario::ALL {
        let agents: Vec<&str> = s.default_agents().iter().map(|a| a.name()).collect();
        println!("{:<16} T={:<6} {}", s.name(), s.default_horizon(), s.description());
        println!("{:<16} agents: {}", "", agents.join(","));
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, common } => cmd_run(scenario, &common),
        Command::Scale { axis, values, common } => {
            let axis = match axis.or_else(|| file_axis(&common)) {
                Some(ScaleAxis::M) => ScanAxis::M,
                Some(ScaleAxis::N) => ScanAxis::N,
                None => return Err(Failure::Config("scale needs --axis m or --axis n".into())),
            };
            cmd_scan(axis, values, ConfigOverrides::default(), &common)
        }
        Command::LowerBound {
            n_values,
            delta,
            common,
        } => {
            let flags = ConfigOverrides {
                gap: delta,
                ..Default::default()
            };
            cmd_scan(ScanAxis::LowerBoundN, n_values, flags, &common)
        }
        Command::Validate { model } => cmd_validate(&model),
        Command::ListScenarios => {
            cmd_list();
            Ok(())
        }
    }
}

/// Axis named in the config file, if it is one `scale` accepts.
fn file_axis(common: &Common) -> Option<ScaleAxis> {
    let path = common.config.as_ref()?;
    match ConfigOverrides::load(path).ok()?.axis? {
        ScanAxis::M => Some(ScaleAxis::M),
        ScanAxis::N => Some(ScaleAxis::N),
        ScanAxis::LowerBoundN => None,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
