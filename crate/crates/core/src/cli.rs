//! The `smw` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 when an input fails
//! validation or a file cannot be read or written.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{
    compare_outcomes, mann_whitney_u_with, run_batch, run_batch_with_trajectories, two_proportion_z, Alternative,
    BatchResult, Outcomes, PValueMethod, TestResult,
};
use crate::io::{load_environment, load_subgoals, read_json, write_json, Scenario, SCHEMA_VERSION};
use crate::optimize::{discover_subgoal, CEConfig};
use crate::service::{AppState, SessionRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "smw",
    version,
    about = "Subgoal discovery and evaluation for linear microworlds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roll out the agent population and write per-episode scores.
    Simulate(SimulateArgs),
    /// Search for the best two-dimensional subgoal.
    Discover(DiscoverArgs),
    /// Compare a subgoal condition against a no-subgoal condition.
    Compare(CompareArgs),
    /// Run the interactive session service.
    Serve(ServeArgs),
    /// Run a single statistical test on two data files.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Environment file.
    #[arg(long)]
    pub env: PathBuf,
    /// Optimisation report or goal record supplying the subgoal; replaces
    /// the environment file's own subgoals.
    #[arg(long)]
    pub subgoal_file: Option<PathBuf>,
    /// Ignore all subgoals and pursue the final goal only.
    #[arg(long, conflicts_with = "subgoal_file")]
    pub final_only: bool,
    /// Episodes per agent.
    #[arg(long, default_value_t = 100)]
    pub rollouts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Disable action noise for every agent.
    #[arg(long)]
    pub no_noise: bool,
    /// Store full trajectories alongside the scores.
    #[arg(long)]
    pub trajectories: bool,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with cross-entropy settings; missing keys keep defaults.
    #[arg(long)]
    pub ce_config: Option<PathBuf>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Candidates sampled per iteration.
    #[arg(long)]
    pub population_size: Option<usize>,
    /// Episodes per agent when scoring a candidate during the search.
    #[arg(long)]
    pub rollouts: Option<usize>,
    #[arg(long)]
    pub no_noise: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Batch file, session record, or directory of session records for the
    /// subgoal condition.
    pub with_subgoal: PathBuf,
    /// The same for the no-subgoal condition.
    pub without_subgoal: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub env: PathBuf,
    /// Name clients use to pick this environment; defaults to the
    /// environment's name.
    #[arg(long)]
    pub env_id: Option<String>,
    #[arg(long)]
    pub subgoal_file: Option<PathBuf>,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsTest {
    /// Mann–Whitney U on the metric's values.
    Mwu,
    /// Two-proportion z test on the share of positive values.
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Gas,
    Ds,
    Resources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub test: StatsTest,
    /// Two data files: JSON arrays of numbers, batch files, session records
    /// or directories of session records.
    #[arg(num_args = 2, required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Metric::Gas)]
    pub metric: Metric,
    #[arg(long, value_enum, default_value_t = Alternative::TwoSided)]
    pub alternative: Alternative,
    /// p-value method for the rank test.
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Output of `smw stats`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub schema_version: u32,
    pub metric: Metric,
    pub n_a: usize,
    pub n_b: usize,
    pub result: TestResult,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Discover(a) => discover(a),
        Command::Compare(a) => compare(a),
        Command::Serve(a) => serve(a),
        Command::Stats(a) => stats(a),
    }
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("records serialize"));
            Ok(())
        }
    }
}

fn scenario_with_noise(path: &Path, no_noise: bool) -> Result<Scenario> {
    let mut s = load_environment(path)?;
    if no_noise {
        s.population = s.population.with_noise_enabled(false);
    }
    Ok(s)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let scenario = scenario_with_noise(&a.env, a.no_noise)?;
    let program = if a.final_only {
        scenario.final_only()
    } else if let Some(p) = &a.subgoal_file {
        scenario.program_with(load_subgoals(p, &scenario.env)?)
    } else {
        scenario.program()
    };
    let ctx = scenario.context();
    let batch = if a.trajectories {
        run_batch_with_trajectories(&ctx, &program, a.rollouts, a.seed)?
    } else {
        run_batch(&ctx, &program, a.rollouts, a.seed)?
    };
    eprintln!(
        "{} episodes, {} subgoal(s), mean GAS {:.4}, positive GAS {:.1}%",
        batch.rows.len(),
        program.subgoals().len(),
        batch.mean_gas(),
        100.0 * batch.positive_gas_count() as f64 / batch.rows.len() as f64
    );
    emit(a.out.as_deref(), &batch)
}

fn discover(a: DiscoverArgs) -> Result<()> {
    let scenario = scenario_with_noise(&a.env, a.no_noise)?;
    let mut config: CEConfig = match &a.ce_config {
        Some(p) => read_json(p)?,
        None => CEConfig::default(),
    };
    if let Some(v) = a.iterations {
        config.iterations = v;
    }
    if let Some(v) = a.population_size {
        config.population_size = v;
    }
    if let Some(v) = a.rollouts {
        config.rollouts_per_candidate = v;
    }
    config.validate()?;
    let report = discover_subgoal(&scenario.context(), &config, a.seed)?;
    let names = report.winner_names();
    let tol = report.winner.tolerances();
    eprintln!(
        "winner: {} = {:.2} ± {:.2}, {} = {:.2} ± {:.2} (score {:.4})",
        names[0], report.winner.targets[0], tol[0], names[1], report.winner.targets[1], tol[1], report.winner_score
    );
    emit(a.out.as_deref(), &report)
}

/// Reads per-run scores from a batch file, a session record or a directory
/// of session records.
pub fn load_outcomes(path: &Path) -> Result<Outcomes> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let mut out = Outcomes::default();
        for f in files {
            let rec: SessionRecord = read_json(&f)?;
            out.push(rec.scores.gas, rec.scores.ds, rec.scores.resources);
        }
        return Ok(out);
    }
    let value: serde_json::Value = read_json(path)?;
    let parse_err = |e: serde_json::Error| Error::Parse {
        path: path.to_path_buf(),
        source: e,
    };
    if value.get("rows").is_some() {
        let batch: BatchResult = serde_json::from_value(value).map_err(parse_err)?;
        Ok((&batch).into())
    } else if value.get("session_id").is_some() {
        let rec: SessionRecord = serde_json::from_value(value).map_err(parse_err)?;
        let mut out = Outcomes::default();
        out.push(rec.scores.gas, rec.scores.ds, rec.scores.resources);
        Ok(out)
    } else {
        Err(Error::field("<root>", "expected a batch file or a session record").in_file(path))
    }
}

fn load_values(path: &Path, metric: Metric) -> Result<Vec<f64>> {
    if path.is_file() {
        let value: serde_json::Value = read_json(path)?;
        if value.is_array() {
            return serde_json::from_value(value).map_err(|source| Error::Parse {
                path: path.to_path_buf(),
                source,
            });
        }
    }
    let o = load_outcomes(path)?;
    Ok(match metric {
        Metric::Gas => o.gas,
        Metric::Ds => o.ds,
        Metric::Resources => o.resources,
    })
}

fn compare(a: CompareArgs) -> Result<()> {
    let with = load_outcomes(&a.with_subgoal)?;
    let without = load_outcomes(&a.without_subgoal)?;
    let report = compare_outcomes(&with, &without)?;
    print!("{}", report.to_table());
    if let Some(p) = &a.out {
        write_json(p, &report)?;
    }
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let xa = load_values(&a.files[0], a.metric)?;
    let xb = load_values(&a.files[1], a.metric)?;
    let result = match a.test {
        StatsTest::Mwu => {
            let method = match a.method {
                MethodArg::Auto => PValueMethod::Auto,
                MethodArg::Exact => PValueMethod::Exact,
                MethodArg::Normal => PValueMethod::Normal,
            };
            mann_whitney_u_with(&xa, &xb, a.alternative, method)?
        }
        StatsTest::Z => {
            let pos = |x: &[f64]| x.iter().filter(|&&v| v > 0.0).count() as u64;
            two_proportion_z(pos(&xa), xa.len() as u64, pos(&xb), xb.len() as u64, a.alternative)?
        }
    };
    let record = StatsRecord {
        schema_version: SCHEMA_VERSION,
        metric: a.metric,
        n_a: xa.len(),
        n_b: xb.len(),
        result,
    };
    emit(a.out.as_deref(), &record)
}

fn serve(a: ServeArgs) -> Result<()> {
    let scenario = load_environment(&a.env)?;
    let subgoals = match &a.subgoal_file {
        Some(p) => load_subgoals(p, &scenario.env)?,
        None => scenario.subgoals.clone(),
    };
    let env_id = a.env_id.clone().unwrap_or_else(|| scenario.name.clone());
    let state = Arc::new(AppState::from_env().with_env(env_id.clone(), scenario, subgoals));
    let addr = SocketAddr::new(a.host, a.port);
    eprintln!(
        "serving `{env_id}` on http://{addr}, sessions written to {}",
        state.out_dir().display()
    );
    let runtime = tokio::runtime::Runtime::new().map_err(|source| Error::Io {
        path: PathBuf::from("<runtime>"),
        source,
    })?;
    runtime
        .block_on(crate::service::serve(state, addr))
        .map_err(|source| Error::Io {
            path: PathBuf::from(addr.to_string()),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["smw", "simulate"]), EXIT_USAGE);
        assert_eq!(run(["smw", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["smw", "discover", "--env", "x.json", "--bogus"]), EXIT_USAGE);
    }

    #[test]
    fn missing_env_file_exits_two() {
        assert_eq!(
            run(["smw", "simulate", "--env", "/nonexistent/farm.json"]),
            EXIT_INVALID
        );
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["smw", "--help"]), EXIT_OK);
    }
}
