//! Command-line front end: every toolkit operation behind one binary with
//! machine-readable JSON/CSV artifacts and a stable exit-code contract:
//!
//! - 0: certificate / verdict / target met
//! - 1: clean negative result (closure stalled, rank deficient, steering
//!   missed the target, direction not steady, simulation diverged)
//! - 2: input error (bad JSON, failed validation, genericity violation)
//! - 3: resource cap hit while growing the bracket tree

mod artifact;
mod inputs;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use mrb::dynamics::{integrate, ControlledSystem, Schedule};
use mrb::extension::{
    is_steady, saturate_constrained_with_labels, saturate_with_labels, table_deviation,
    two_torque_seeds, SaturateOptions, SaturationResult,
};
use mrb::fields::{bracket_generating_rank, RankOptions};
use mrb::sample::{random_unit_skew, rng_from_seed};
use mrb::skew::index_pair;
use mrb::steer::{steer, SteerOptions};
use mrb::{Error as MrbError, Skew64, SkewMatrix};

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    msg: String,
    code: u8,
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        Self { msg: msg.into(), code: 2 }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<MrbError> for CliError {
    fn from(e: MrbError) -> Self {
        let code = match &e {
            MrbError::ResourceCap { .. } => 3,
            MrbError::Diverged { .. } => 1,
            _ => 2,
        };
        Self { msg: e.to_string(), code }
    }
}

#[derive(Parser)]
#[command(
    name = "mrb",
    about = "Rotational dynamics and controllability toolkit for the n-dimensional rigid body",
    version
)]
struct Cli {
    /// Write the artifact to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for every randomized probe (sampled points, steering restarts).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Primary tolerance of the subcommand (table pass threshold, steady
    /// test, rank threshold). Subcommand defaults apply when omitted.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the closed-form extension-operator table against the numeric
    /// operator on every ordered pair of principal axes.
    Table {
        /// Body JSON: {"eigenvalues": [...]} or {"C": [[...]]}.
        #[arg(long)]
        body: PathBuf,
    },

    /// Run the saturation closure from a seed set and certify whether it
    /// spans all of so(n).
    Saturate {
        #[arg(long)]
        body: PathBuf,
        /// Seed directions (JSON array; entries may carry "steady": true).
        #[arg(long, conflicts_with = "theorem1")]
        seeds: Option<PathBuf>,
        /// Use the built-in two-torque seed pair instead of a seeds file.
        #[arg(long)]
        theorem1: bool,
        /// Require a steady member in every evaluated pair.
        #[arg(long)]
        constrained: bool,
        #[arg(long, default_value_t = 16)]
        max_rounds: usize,
        /// Relative singular-value threshold for rank decisions.
        #[arg(long)]
        rank_tol: Option<f64>,
        /// Steadiness tolerance for the constrained variant.
        #[arg(long)]
        steady_tol: Option<f64>,
    },

    /// Bracket-generating rank probe at seeded random unit points (the
    /// origin is evaluated as a diagnostic but never enters the verdict).
    Rank {
        #[arg(long)]
        body: PathBuf,
        /// Controlled directions (JSON array).
        #[arg(long)]
        dirs: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
        /// Bracket generations to build.
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Number of random unit evaluation points.
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 6)]
        degree_cap: usize,
        #[arg(long, default_value_t = 5000)]
        field_cap: usize,
    },

    /// Integrate the controlled, damped equation and write the trajectory
    /// as CSV (t followed by lexicographic coordinates).
    Simulate {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
        /// Initial state JSON.
        #[arg(long)]
        omega0: PathBuf,
        /// Time horizon.
        #[arg(long = "T")]
        horizon: f64,
        /// Integrator step (rounded down to tile control segments).
        #[arg(long)]
        dt: f64,
        /// Control schedule JSON: {"directions": [...], "values": [[...]]}.
        #[arg(long)]
        controls: Option<PathBuf>,
    },

    /// Two-point steering by direct shooting over piecewise-constant
    /// controls.
    Steer {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        dirs: PathBuf,
        /// Start state JSON.
        #[arg(long)]
        from: PathBuf,
        /// Goal state JSON.
        #[arg(long)]
        to: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = 12)]
        segments: usize,
        #[arg(long, default_value_t = 60)]
        max_iter: usize,
        /// Terminal Frobenius error below which steering succeeds.
        #[arg(long)]
        target: Option<f64>,
    },

    /// Steady-state residual and principal-axis verdict for one direction.
    Steady {
        #[arg(long)]
        body: PathBuf,
        /// Direction JSON.
        #[arg(long)]
        g: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Table { body } => run_table(cli, body),
        Command::Saturate {
            body,
            seeds,
            theorem1,
            constrained,
            max_rounds,
            rank_tol,
            steady_tol,
        } => run_saturate(
            cli,
            body,
            seeds.as_deref(),
            *theorem1,
            *constrained,
            *max_rounds,
            *rank_tol,
            *steady_tol,
        ),
        Command::Rank { body, dirs, nu, depth, points, degree_cap, field_cap } => {
            run_rank(cli, body, dirs, *nu, *depth, *points, *degree_cap, *field_cap)
        }
        Command::Simulate { body, nu, omega0, horizon, dt, controls } => {
            run_simulate(cli, body, *nu, omega0, *horizon, *dt, controls.as_deref())
        }
        Command::Steer { body, dirs, from, to, nu, horizon, segments, max_iter, target } => {
            run_steer(cli, body, dirs, from, to, *nu, *horizon, *segments, *max_iter, *target)
        }
        Command::Steady { body, g } => run_steady(cli, body, g),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_table(cli: &Cli, body_path: &Path) -> Result<u8, CliError> {
    let body = inputs::load_body(body_path)?;
    let tol = cli.tol.unwrap_or(1e-9);
    let report = table_deviation(&body)?;
    let pass = report.max_deviation < tol;
    let value = json!({
        "n": body.n(),
        "pairs_checked": report.pairs_checked,
        "max_deviation": report.max_deviation,
        "tolerance": tol,
        "pass": pass,
    });
    emit(cli, &artifact::render(&value))?;
    eprintln!(
        "table: max deviation {:.3e} over {} pairs (tolerance {:.1e}): {}",
        report.max_deviation,
        report.pairs_checked,
        tol,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}

fn saturation_value(result: &SaturationResult<f64>, dim_target: usize) -> Value {
    let rounds: Vec<Value> = result
        .rounds
        .iter()
        .map(|r| {
            let added: Vec<Value> = r.added.iter().map(artifact::skew_value).collect();
            json!({ "round": r.index, "added": added, "span_dim": r.span_dim })
        })
        .collect();
    json!({
        "dim_target": dim_target,
        "initial_dim": result.initial_dim,
        "rounds": rounds,
        "final_dim": result.final_dim,
        "certificate": result.certificate,
        "seed_labels": result.seed_labels,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_saturate(
    cli: &Cli,
    body_path: &Path,
    seeds_path: Option<&Path>,
    theorem1: bool,
    constrained: bool,
    max_rounds: usize,
    rank_tol: Option<f64>,
    steady_tol: Option<f64>,
) -> Result<u8, CliError> {
    let body = inputs::load_body(body_path)?;
    let (seeds, flags, labels) = match (seeds_path, theorem1) {
        (Some(path), false) => {
            let (seeds, flags) = inputs::load_seeds(path)?;
            let labels: Vec<String> = (0..seeds.len()).map(|i| format!("seed-{i}")).collect();
            (seeds, flags, labels)
        }
        (None, true) => {
            let (g1, g2) = two_torque_seeds(&body)?;
            (
                vec![g1, g2],
                vec![true, false],
                vec!["axis(1,2)".to_string(), "consecutive-axis-sum".to_string()],
            )
        }
        _ => {
            return Err(CliError::input(
                "saturate needs exactly one of --seeds <file> or --theorem1",
            ))
        }
    };

    let opts = SaturateOptions {
        max_rounds,
        rank_tol: rank_tol.or(cli.tol).unwrap_or(1e-9),
        steady_tol: steady_tol.or(cli.tol).unwrap_or(1e-9),
    };
    let result = if constrained {
        saturate_constrained_with_labels(&body, &seeds, &flags, &labels, &opts)?
    } else {
        saturate_with_labels(&body, &seeds, &labels, &opts)?
    };

    let mut value = saturation_value(&result, body.dim());
    value["n"] = json!(body.n());
    value["constrained"] = json!(constrained);
    emit(cli, &artifact::render(&value))?;
    eprintln!(
        "saturate: span {}/{} after {} round(s): {}",
        result.final_dim,
        body.dim(),
        result.rounds_used(),
        if result.certificate { "certificate" } else { "no certificate" }
    );
    Ok(if result.certificate { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn run_rank(
    cli: &Cli,
    body_path: &Path,
    dirs_path: &Path,
    nu: f64,
    depth: usize,
    points: usize,
    degree_cap: usize,
    field_cap: usize,
) -> Result<u8, CliError> {
    let body = inputs::load_body(body_path)?;
    let dirs = inputs::load_directions(dirs_path)?;
    if points == 0 {
        return Err(CliError::input("need at least one evaluation point"));
    }
    let mut rng = rng_from_seed(cli.seed);
    let mut sample_points: Vec<Skew64> = (0..points)
        .map(|_| random_unit_skew(body.n(), &mut rng))
        .collect::<Result<_, _>>()?;
    sample_points.push(SkewMatrix::zeros(body.n())?); // origin, diagnostic only

    let opts = RankOptions {
        depth,
        degree_cap,
        field_cap,
        rank_tol: cli.tol.unwrap_or(1e-9),
    };
    let report = bracket_generating_rank(&body, &dirs, nu, &sample_points, &opts)?;

    let per_point: Vec<usize> = report.ranks[..points].to_vec();
    let origin_rank = report.ranks[points];
    let value = json!({
        "n": body.n(),
        "dim_target": body.dim(),
        "nu": nu,
        "depth": depth,
        "seed": cli.seed,
        "per_point_ranks": per_point,
        "origin_rank": origin_rank,
        "fields_built": report.fields_built,
        "depth_reached": report.depth_reached,
        "verdict": report.verdict,
    });
    emit(cli, &artifact::render(&value))?;
    eprintln!(
        "rank: per-point ranks {:?} of {} (origin {}): {}",
        per_point,
        body.dim(),
        origin_rank,
        if report.verdict { "full rank everywhere" } else { "rank deficient" }
    );
    Ok(if report.verdict { 0 } else { 1 })
}

fn run_simulate(
    cli: &Cli,
    body_path: &Path,
    nu: f64,
    omega0_path: &Path,
    horizon: f64,
    dt: f64,
    controls_path: Option<&Path>,
) -> Result<u8, CliError> {
    let body = inputs::load_body(body_path)?;
    let omega0 = inputs::load_skew(omega0_path)?;
    let system = match controls_path {
        None => ControlledSystem::new(body, nu, Vec::new(), Schedule::zero(1, 0)?)?,
        Some(path) => {
            let sched: inputs::ScheduleJson = inputs::load(path)?;
            let dirs: Vec<Skew64> = sched
                .directions
                .iter()
                .map(inputs::SkewJson::to_skew)
                .collect::<Result<_, _>>()?;
            let schedule = Schedule::from_values(sched.values, dirs.len())?;
            ControlledSystem::new(body, nu, dirs, schedule)?
        }
    };

    let trajectory = integrate(&system, &omega0, horizon, dt)?;

    let n = omega0.n();
    let d = omega0.dim();
    let mut csv = String::new();
    csv.push('t');
    for k in 0..d {
        let (r, s) = index_pair(k, n)?;
        write!(csv, ",coord_{r}_{s}").expect("string write");
    }
    csv.push('\n');
    for (t, state) in trajectory.times().iter().zip(trajectory.states()) {
        csv.push_str(&artifact::format_float(*t));
        for c in state.coords().iter() {
            csv.push(',');
            csv.push_str(&artifact::format_float(*c));
        }
        csv.push('\n');
    }
    emit(cli, &csv)?;
    eprintln!(
        "simulate: {} states over [0, {horizon}] at dt {:.6e}",
        trajectory.states().len(),
        trajectory.dt()
    );
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run_steer(
    cli: &Cli,
    body_path: &Path,
    dirs_path: &Path,
    from_path: &Path,
    to_path: &Path,
    nu: f64,
    horizon: f64,
    segments: usize,
    max_iter: usize,
    target: Option<f64>,
) -> Result<u8, CliError> {
    let body = inputs::load_body(body_path)?;
    let dirs = inputs::load_directions(dirs_path)?;
    let start = inputs::load_skew(from_path)?;
    let goal = inputs::load_skew(to_path)?;

    let schedule = Schedule::zero(segments, dirs.len())?;
    let system = ControlledSystem::new(body, nu, dirs, schedule)?;
    let opts = SteerOptions {
        error_target: target.or(cli.tol).unwrap_or(1e-3),
        ..SteerOptions::default()
    };
    let outcome = steer(&system, &start, &goal, horizon, segments, max_iter, cli.seed, &opts)?;

    let schedule_rows: Vec<Value> = outcome
        .schedule
        .values()
        .iter()
        .map(|row| Value::Array(row.iter().map(|&v| Value::from(v)).collect()))
        .collect();
    let value = json!({
        "horizon": horizon,
        "segments": segments,
        "nu": nu,
        "seed": cli.seed,
        "schedule": schedule_rows,
        "terminal_error": outcome.terminal_error,
        "iterations": outcome.iterations,
        "restart_index": outcome.restart_index,
        "error_target": opts.error_target,
        "success": outcome.success,
    });
    emit(cli, &artifact::render(&value))?;
    eprintln!(
        "steer: terminal error {:.6e} after {} iteration(s), restart {}: {}",
        outcome.terminal_error,
        outcome.iterations,
        outcome.restart_index,
        if outcome.success { "target met" } else { "target missed" }
    );
    Ok(if outcome.success { 0 } else { 1 })
}

fn run_steady(cli: &Cli, body_path: &Path, g_path: &Path) -> Result<u8, CliError> {
    let body = inputs::load_body(body_path)?;
    let g = inputs::load_skew(g_path)?;
    let tol = cli.tol.unwrap_or(1e-9);
    let residual = body.steady_residual(&g)?;
    let steady = is_steady(&body, &g, tol);
    let (principal, mu) = body.principal_axis(&g, tol)?;
    let value = json!({
        "n": body.n(),
        "residual": residual,
        "tolerance": tol,
        "steady": steady,
        "principal_axis": principal,
        "mu": mu,
    });
    emit(cli, &artifact::render(&value))?;
    eprintln!(
        "steady: residual {residual:.6e}, steady: {steady}, principal axis: {principal} (mu = {mu:.6})"
    );
    Ok(if steady { 0 } else { 1 })
}
