//! Command-line front end: one subcommand per analysis, JSON/CSV artifacts
//! written atomically into an output directory.
//!
//! Exit status contract: 0 on success (including `--help`), 1 when a
//! numerical invariant fails mid-run, 2 on input or usage errors. All
//! diagnostics go to the error stream; artifact data goes only to files.
//! Verbosity is controlled by `ENTROPY_GAMES_LOG=debug|info|quiet`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::game::{self, PayoffMatrix, DEFAULT_TIE_TOL};
use crate::io::{self, json_float};
use crate::lax;
use crate::quantum::{self, ReplicatorHamiltonian};
use crate::replicator::{self, DEFAULT_DT};
use crate::simplex::FrequencyVector;
use crate::thermo;

/// Entry point used by the binary: parses, executes, returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints help/version to stdout (success) and usage errors
            // to stderr
            let failed = err.use_stderr();
            let _ = err.print();
            return if failed { 2 } else { 0 };
        }
    };
    let logger = Logger::from_env();
    match execute(&cli, &logger) {
        Ok(()) => 0,
        Err(err) => {
            logger.error(&err.to_string());
            if err.is_numerical() {
                1
            } else {
                2
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Verbosity {
    Quiet,
    Info,
    Debug,
}

struct Logger {
    level: Verbosity,
}

impl Logger {
    fn from_env() -> Self {
        let level = match std::env::var("ENTROPY_GAMES_LOG").as_deref() {
            Ok("debug") => Verbosity::Debug,
            Ok("quiet") => Verbosity::Quiet,
            _ => Verbosity::Info,
        };
        Self { level }
    }

    /// Errors are printed even under `quiet`; a silent nonzero exit would be
    /// undebuggable.
    fn error(&self, msg: &str) {
        eprintln!("error: {msg}");
    }

    fn info(&self, msg: &str) {
        if self.level >= Verbosity::Info {
            eprintln!("{msg}");
        }
    }

    fn debug(&self, msg: &str) {
        if self.level >= Verbosity::Debug {
            eprintln!("debug: {msg}");
        }
    }
}

#[derive(Parser)]
#[command(
    name = "entropy-games",
    version,
    about = "Evolutionary game dynamics, their matrix and quantum forms, and \
             entropy accounting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate symmetric Nash equilibria and flag evolutionary stability
    Analyze(AnalyzeArgs),
    /// Integrate the replicator flow and write the trajectory
    Simulate(SimulateArgs),
    /// Integrate the matrix flow and verify the diagonal equivalence
    Lax(LaxArgs),
    /// Evolve the quantized state and measure the classical correspondence
    Quantum(QuantumArgs),
    /// Report entropies and mutual information of a joint distribution
    Info(InfoArgs),
    /// Report canonical-ensemble quantities at one inverse temperature
    Thermo(ThermoArgs),
    /// Run an energy-exchange network until temperatures merge
    Globalize(GlobalizeArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Directory receiving the output artifacts
    #[arg(long = "out", default_value = ".")]
    out: PathBuf,
}

/// Logarithm base for entropy columns.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogBase {
    /// Nats
    Natural,
    /// Bits
    Two,
}

impl LogBase {
    fn scale(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LOG2_E,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Game file: {"n", "payoff", "labels"?}
    #[arg(long)]
    game: PathBuf,
    /// Simplex grid resolution (default 100 for 2 strategies, 50 for 3,
    /// 20 above)
    #[arg(long)]
    resolution: Option<usize>,
    /// Payoff comparison tolerance
    #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    game: PathBuf,
    /// Starting point as comma-separated probabilities (default uniform)
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long = "t-end", default_value_t = 50.0)]
    t_end: f64,
    #[arg(long = "log-base", value_enum, default_value_t = LogBase::Natural)]
    log_base: LogBase,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct LaxArgs {
    #[arg(long)]
    game: PathBuf,
    /// Starting point as comma-separated probabilities (default uniform)
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long = "t-end", default_value_t = 10.0)]
    t_end: f64,
    /// Seed for the random-instance identity sweep
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random instances in the identity sweep
    #[arg(long, default_value_t = 100)]
    sweep: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct QuantumArgs {
    #[arg(long)]
    game: PathBuf,
    /// Starting point as comma-separated probabilities (default uniform)
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long = "t-end", default_value_t = 5.0)]
    t_end: f64,
    /// Planck constant scale; physical results do not depend on it
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long = "log-base", value_enum, default_value_t = LogBase::Natural)]
    log_base: LogBase,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct InfoArgs {
    /// Joint distribution file: {"rows", "cols", "probs"}
    #[arg(long)]
    joint: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ThermoArgs {
    /// Ensemble file: {"energies", "beta"}
    #[arg(long)]
    ensemble: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GlobalizeArgs {
    /// Scenario file: {"nodes", "edges", "kappa", "merge_tol", "dt", "t_end"}
    #[arg(long)]
    scenario: PathBuf,
    /// Record one sample every this many steps
    #[arg(long = "sample-every", default_value_t = 10)]
    sample_every: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn execute(cli: &Cli, logger: &Logger) -> Result<()> {
    match &cli.command {
        Command::Analyze(args) => run_analyze(args, logger),
        Command::Simulate(args) => run_simulate(args, logger),
        Command::Lax(args) => run_lax(args, logger),
        Command::Quantum(args) => run_quantum(args, logger),
        Command::Info(args) => run_info(args, logger),
        Command::Thermo(args) => run_thermo(args, logger),
        Command::Globalize(args) => run_globalize(args, logger),
    }
}

fn write_artifact(out: &Path, name: &str, contents: &str, logger: &Logger) -> Result<()> {
    fs::create_dir_all(out).map_err(|err| {
        Error::InvalidArgument(format!("creating {}: {err}", out.display()))
    })?;
    let path = out.join(name);
    io::atomic_write(&path, contents)?;
    logger.info(&format!("wrote {}", path.display()));
    Ok(())
}

fn parse_x0(text: &Option<String>, n: usize) -> Result<FrequencyVector> {
    let Some(text) = text else {
        return FrequencyVector::uniform(n);
    };
    let mut probs = Vec::new();
    for part in text.split(',') {
        let value: f64 = part.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("--x0 entry {part:?} is not a number"))
        })?;
        probs.push(value);
    }
    if probs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "--x0 has {} entries for a {n}-strategy game",
            probs.len()
        )));
    }
    FrequencyVector::new(probs)
}

fn default_resolution(n: usize) -> usize {
    match n {
        0..=2 => 100,
        3 => 50,
        _ => 20,
    }
}

fn run_analyze(args: &AnalyzeArgs, logger: &Logger) -> Result<()> {
    let input = io::read_game(&args.game)?;
    let n = input.payoff.n();
    let resolution = args.resolution.unwrap_or_else(|| default_resolution(n));
    logger.debug(&format!("scanning the {n}-strategy simplex at resolution {resolution}"));
    let equilibria = game::enumerate_symmetric_equilibria(&input.payoff, resolution, args.tol)?;

    let mut entries = Vec::new();
    for eq in &equilibria {
        let payoff = game::expected_payoff(&eq.strategy, &eq.strategy, &input.payoff)?;
        entries.push(json!({
            "strategy": eq.strategy.probs().iter().map(|&p| json_float(p)).collect::<Vec<_>>(),
            "nash": eq.nash,
            "ess": eq.ess,
            "payoff": json_float(payoff),
        }));
    }
    let mut report = json!({
        "strategies": n,
        "grid_resolution": resolution,
        "tol": json_float(args.tol),
        "equilibria": entries,
    });
    if let Some(labels) = &input.labels {
        report["labels"] = json!(labels);
    }
    write_artifact(&args.output.out, "equilibria.json", &io::to_json_string(&report), logger)
}

fn run_simulate(args: &SimulateArgs, logger: &Logger) -> Result<()> {
    let input = io::read_game(&args.game)?;
    let x0 = parse_x0(&args.x0, input.payoff.n())?;
    let trajectory = replicator::integrate(&x0, &input.payoff, args.dt, args.t_end)?;
    logger.debug(&format!("integrated {} samples", trajectory.len()));
    let csv = io::trajectory_csv(&trajectory, args.log_base.scale());
    write_artifact(&args.output.out, "trajectory.csv", &csv, logger)
}

fn random_simplex_point(rng: &mut impl Rng, n: usize) -> FrequencyVector {
    // Normalized -ln U draws are the flat Dirichlet, uniform on the simplex.
    let raw: Vec<f64> =
        (0..n).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let sum: f64 = raw.iter().sum();
    FrequencyVector::with_drift(raw.iter().map(|v| v / sum).collect(), 1e-9)
        .expect("normalized point")
}

fn random_game(rng: &mut impl Rng, n: usize) -> PayoffMatrix {
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..n).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    PayoffMatrix::new(rows).expect("finite square matrix")
}

fn run_lax(args: &LaxArgs, logger: &Logger) -> Result<()> {
    let input = io::read_game(&args.game)?;
    let x0 = parse_x0(&args.x0, input.payoff.n())?;

    let matrix_samples = lax::integrate_matrix_flow(&x0, &input.payoff, args.dt, args.t_end)?;
    let vector = replicator::integrate(&x0, &input.payoff, args.dt, args.t_end)?;
    let mut max_diag_residual = 0.0f64;
    for ((_, matrix), state) in matrix_samples.iter().zip(&vector.states) {
        for (i, &xi) in state.probs().iter().enumerate() {
            max_diag_residual = max_diag_residual.max((matrix.entry(i, i) - xi).abs());
        }
    }
    logger.debug(&format!(
        "matrix and vector flows agree on the diagonal to {max_diag_residual:.3e}"
    ));

    // Seeded sweep over random instances: the bracket identities must hold
    // pointwise, independent of any integration.
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut max_rhs_residual = 0.0f64;
    let mut max_bracket_residual = 0.0f64;
    for index in 0..args.sweep {
        let n = 2 + index % 3;
        let a = random_game(&mut rng, n);
        let x = random_simplex_point(&mut rng, n);
        let ops = lax::lax_operators(&x, &a)?;
        let rhs = replicator::replicator_rhs(&x, &a)?;
        let xm = lax::build_frequency_matrix(&x);
        for (i, &ri) in rhs.iter().enumerate() {
            max_rhs_residual = max_rhs_residual.max((ops.theta[(i, i)] - ri).abs());
        }
        let qx = &ops.q * xm.as_matrix() - xm.as_matrix() * &ops.q;
        let qxx = &qx * xm.as_matrix() - xm.as_matrix() * &qx;
        max_bracket_residual = max_bracket_residual.max((&qxx - &ops.theta).abs().max());
    }

    let report = json!({
        "trajectory": {
            "samples": matrix_samples.len(),
            "dt": json_float(args.dt),
            "t_end": json_float(args.t_end),
            "max_diagonal_residual": json_float(max_diag_residual),
        },
        "sweep": {
            "instances": args.sweep,
            "seed": args.seed,
            "max_rhs_residual": json_float(max_rhs_residual),
            "max_double_bracket_residual": json_float(max_bracket_residual),
        },
    });

    let out = &args.output.out;
    write_artifact(out, "matrix_trajectory.csv", &io::matrix_trajectory_csv(&matrix_samples), logger)?;
    write_artifact(out, "matrix_eigenvalues.csv", &io::matrix_eigenvalue_csv(&matrix_samples), logger)?;
    write_artifact(out, "lax_equivalence.json", &io::to_json_string(&report), logger)
}

fn run_quantum(args: &QuantumArgs, logger: &Logger) -> Result<()> {
    let input = io::read_game(&args.game)?;
    let x0 = parse_x0(&args.x0, input.payoff.n())?;

    let source = ReplicatorHamiltonian::new(&x0, &input.payoff, args.dt, args.t_end, args.hbar)?;
    let rho0 = quantum::quantize(&x0);
    let samples = quantum::integrate_von_neumann(&rho0, &source, args.dt, args.t_end)?;

    // The reference trajectory is stored at half the step, so evolved
    // samples line up with quantized classical states by index.
    let reference = source.reference();
    let mut max_residual = 0.0f64;
    let mut compared = 0usize;
    for (t, rho) in &samples {
        let index = (t / (args.dt / 2.0)).round() as usize;
        let Some(ref_t) = reference.times.get(index) else { continue };
        if (ref_t - t).abs() > 1e-9 * t.abs().max(1.0) {
            continue;
        }
        let expected = quantum::quantize(&reference.states[index]);
        for i in 0..rho.n() {
            for j in 0..rho.n() {
                let gap = (rho.entry(i, j) - expected.entry(i, j)).norm();
                max_residual = max_residual.max(gap);
            }
        }
        compared += 1;
    }
    logger.debug(&format!(
        "{compared} of {} samples compared against the quantized flow",
        samples.len()
    ));

    let report = json!({
        "hbar": json_float(args.hbar),
        "dt": json_float(args.dt),
        "t_end": json_float(args.t_end),
        "samples": samples.len(),
        "compared": compared,
        "max_residual": json_float(max_residual),
    });

    let out = &args.output.out;
    write_artifact(out, "density_trajectory.csv", &io::density_trajectory_csv(&samples), logger)?;
    let spectrum = io::density_spectrum_csv(&samples, args.log_base.scale())?;
    write_artifact(out, "density_spectrum.csv", &spectrum, logger)?;
    write_artifact(out, "correspondence.json", &io::to_json_string(&report), logger)
}

fn run_info(args: &InfoArgs, logger: &Logger) -> Result<()> {
    let joint = io::read_joint(&args.joint)?;
    let report = crate::info::info_report(&joint);
    let value = json!({
        "h_a": json_float(report.h_a),
        "h_b": json_float(report.h_b),
        "h_ab": json_float(report.h_ab),
        "h_a_given_b": json_float(report.h_a_given_b),
        "h_b_given_a": json_float(report.h_b_given_a),
        "i_ab": json_float(report.i_ab),
    });
    write_artifact(&args.output.out, "info_report.json", &io::to_json_string(&value), logger)
}

fn run_thermo(args: &ThermoArgs, logger: &Logger) -> Result<()> {
    let ensemble = io::read_ensemble(&args.ensemble)?;
    let report = thermo::gibbs(&ensemble.energies, ensemble.beta)?;
    let value = json!({
        "z": json_float(report.z),
        "probs": report.probs.iter().map(|&p| json_float(p)).collect::<Vec<_>>(),
        "mean_e": json_float(report.mean_e),
        "var_e": json_float(report.var_e),
        "s": json_float(report.s),
        "tau": json_float(report.tau),
    });
    write_artifact(&args.output.out, "ensemble_report.json", &io::to_json_string(&value), logger)
}

fn run_globalize(args: &GlobalizeArgs, logger: &Logger) -> Result<()> {
    let mut scenario = io::read_scenario(&args.scenario)?;
    let history = scenario.network.run(scenario.dt, scenario.t_end, args.sample_every)?;
    logger.debug(&format!(
        "{} blocks after t = {}",
        history.block_counts.last().copied().unwrap_or_default(),
        scenario.t_end
    ));
    write_artifact(&args.output.out, "equilibration.csv", &io::history_csv(&history), logger)
}
