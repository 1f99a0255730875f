//! `unital-nm`: trajectories, non-Markovianity degrees and divisibility
//! checks for the Ohmic phase-damping and colored-noise qubit families.

mod family;
mod output;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;
use unital_nm::channels::{check_divisibility, DivisibilityReport, Verdict};
use unital_nm::measure::{
    evaluate_states, optimize_over_states, uniform_grid, MeasureReport, OptimizeOptions, StateGrid,
    StatePath, Trajectory, DEFAULT_REFINE_TOL, DEFAULT_TIME_STEPS,
};
use unital_nm::qubit::{entropy_rate, EigenPair, QubitState};
use unital_nm::Execution;

use family::{Family, FamilyKind, Point};
use output::{Cell, Format, Table};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] unital_nm::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use unital_nm::Error as E;
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Core(E::Convergence { .. }) => 3,
            CliError::Core(E::NonInvertible { .. }) => 4,
            CliError::Core(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "unital-nm",
    version,
    about = "Entropy-based non-Markovianity of unital qubit dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-time-step eigenvalues, entropy and rates for one initial state.
    Trajectory {
        #[command(flatten)]
        common: Common,
        /// Initial Bloch vector x,y,z.
        #[arg(long, default_value = "1,0,0")]
        state: BlochArg,
    },
    /// N_e and N_S for one state or optimized over a state grid.
    Measure {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1,0,0", conflicts_with = "optimize")]
        state: BlochArg,
        /// Maximize over a Fibonacci-sphere grid instead of a fixed state.
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = StateGrid::DEFAULT_PURE_POINTS)]
        grid_points: usize,
        /// Interior shell radii, comma separated.
        #[arg(long, default_value = "0.25,0.5,0.75", value_delimiter = ',')]
        shells: Vec<f64>,
        /// Skip the local search after the grid search.
        #[arg(long)]
        no_polish: bool,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Sampled CP-divisibility check of the intermediate maps.
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// Ohmicity (ohmic-dephasing only, default 1).
    #[arg(long)]
    s: Option<f64>,
    /// Cutoff frequency (ohmic-dephasing only, default 1).
    #[arg(long)]
    omega_c: Option<f64>,
    /// Product aτ with τ = 1 (colored-noise only, default 1).
    #[arg(long)]
    a_tau: Option<f64>,
    /// Final time; defaults to 10 (ohmic-dephasing) or 30 (colored-noise).
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TIME_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_REFINE_TOL)]
    refine_tol: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Parameter sweep param:lo:hi:n over s, omega-c or a-tau.
    #[arg(long)]
    sweep: Option<Sweep>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BlochArg([f64; 3]);

impl FromStr for BlochArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad component {p:?}: {e}"))
            })
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [x, y, z] => Ok(BlochArg([x, y, z])),
            _ => Err(format!("expected x,y,z, got {} components", parts.len())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    S,
    OmegaC,
    ATau,
}

impl Param {
    fn name(self) -> &'static str {
        match self {
            Param::S => "s",
            Param::OmegaC => "omega-c",
            Param::ATau => "a-tau",
        }
    }

    fn family(self) -> FamilyKind {
        match self {
            Param::S | Param::OmegaC => FamilyKind::OhmicDephasing,
            Param::ATau => FamilyKind::ColoredNoise,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Sweep {
    param: Param,
    values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split(':').collect();
        let [param, lo, hi, n] = fields[..] else {
            return Err(format!("expected param:lo:hi:n, got {s:?}"));
        };
        let param = match param {
            "s" => Param::S,
            "omega-c" | "omega_c" => Param::OmegaC,
            "a-tau" | "a_tau" => Param::ATau,
            other => return Err(format!("unknown sweep parameter {other:?}")),
        };
        let lo: f64 = lo.parse().map_err(|e| format!("bad lower bound: {e}"))?;
        let hi: f64 = hi.parse().map_err(|e| format!("bad upper bound: {e}"))?;
        let n: usize = n.parse().map_err(|e| format!("bad count: {e}"))?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err("sweep needs n >= 1 and finite bounds".into());
        }
        let values = (0..n)
            .map(|i| {
                if n == 1 {
                    lo
                } else if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        Ok(Sweep { param, values })
    }
}

impl Common {
    fn base_point(&self) -> CliResult<Point> {
        let kind = self.family;
        let misplaced = match kind {
            FamilyKind::OhmicDephasing => self.a_tau.map(|_| "--a-tau"),
            FamilyKind::ColoredNoise => self.s.map(|_| "--s").or(self.omega_c.map(|_| "--omega-c")),
        };
        if let Some(flag) = misplaced {
            return Err(CliError::Usage(format!(
                "{flag} does not apply to {}",
                kind.name()
            )));
        }
        Ok(match kind {
            FamilyKind::OhmicDephasing => Point {
                family: kind,
                s: Some(self.s.unwrap_or(1.0)),
                omega_c: Some(self.omega_c.unwrap_or(1.0)),
                a_tau: None,
            },
            FamilyKind::ColoredNoise => Point {
                family: kind,
                s: None,
                omega_c: None,
                a_tau: Some(self.a_tau.unwrap_or(1.0)),
            },
        })
    }

    fn points(&self, sweep: Option<&Sweep>) -> CliResult<Vec<Point>> {
        let base = self.base_point()?;
        let Some(sweep) = sweep else {
            return Ok(vec![base]);
        };
        if sweep.param.family() != self.family {
            return Err(CliError::Usage(format!(
                "sweep parameter {} does not apply to {}",
                sweep.param.name(),
                self.family.name()
            )));
        }
        Ok(sweep
            .values
            .iter()
            .map(|v| {
                let mut p = base;
                match sweep.param {
                    Param::S => p.s = Some(*v),
                    Param::OmegaC => p.omega_c = Some(*v),
                    Param::ATau => p.a_tau = Some(*v),
                }
                p
            })
            .collect())
    }

    fn horizon(&self) -> f64 {
        self.horizon
            .unwrap_or_else(|| self.family.default_horizon())
    }

    fn times(&self) -> CliResult<Vec<f64>> {
        Ok(uniform_grid(self.horizon(), self.steps)?)
    }

    fn config(&self, command: &str) -> CliResult<Value> {
        let p = self.base_point()?;
        Ok(json!({
            "command": command,
            "family": self.family.name(),
            "s": p.s,
            "omega_c": p.omega_c,
            "a_tau": p.a_tau,
            "horizon": self.horizon(),
            "steps": self.steps,
            "refine_tol": self.refine_tol,
        }))
    }
}

fn point_cells(p: &Point) -> Vec<Cell> {
    vec![
        p.family.name().into(),
        p.s.into(),
        p.omega_c.into(),
        p.a_tau.into(),
    ]
}

fn run_trajectory(common: &Common, state: BlochArg) -> CliResult<()> {
    let point = common.base_point()?;
    let family = Family::build(&point)?;
    let [x, y, z] = state.0;
    let initial = QubitState::from_bloch_xyz(x, y, z)?;
    let times = common.times()?;
    let exec = Execution::default();
    let traj = Trajectory::sample(&StatePath::new(&family, initial), &times, exec)?;
    let diag = exec.try_map(times.len(), |i| family.diagnostic(times[i]))?;
    let eta = traj.eta_plus().map(<[f64]>::to_vec);

    let mut table = Table::new(&[
        "t",
        "lambda_plus",
        "lambda_minus",
        "entropy_bits",
        "eta_plus",
        "dS_dt",
        common.family.diagnostic_column(),
    ]);
    for (i, t) in times.iter().enumerate() {
        let lp = traj.lambda_plus()[i];
        let eig = EigenPair::from_lambda_plus(lp);
        let eta_i = eta.as_ref().map(|e| e[i]);
        table.push(vec![
            (*t).into(),
            lp.into(),
            eig.lambda_minus.into(),
            traj.entropy()[i].into(),
            eta_i.into(),
            eta_i.map(|e| entropy_rate(&eig, e)).into(),
            diag[i].into(),
        ]);
    }
    let mut config = common.config("trajectory")?;
    config["state"] = json!(state.0);
    output::write(&table, config, common.format, common.out.as_deref())?;
    Ok(())
}

fn join(values: impl Iterator<Item = String>) -> String {
    values.collect::<Vec<_>>().join(";")
}

fn measure_row(p: &Point, r: &MeasureReport) -> Vec<Cell> {
    let argmax = r.argmax_state.map(|s| s.bloch());
    let mut row = point_cells(p);
    row.extend([
        r.n_e.into(),
        r.n_s.into(),
        r.intervals.len().into(),
        join(
            r.intervals
                .iter()
                .map(|iv| format!("{}:{}", output::fmt_num(iv.start), output::fmt_num(iv.end))),
        )
        .into(),
        join(r.gains.iter().map(|g| output::fmt_num(*g))).into(),
        argmax.map(|v| v.x).into(),
        argmax.map(|v| v.y).into(),
        argmax.map(|v| v.z).into(),
        r.tie.into(),
    ]);
    row
}

struct MeasureSpec {
    state: BlochArg,
    optimize: bool,
    grid_points: usize,
    shells: Vec<f64>,
    polish: bool,
}

fn run_measure(common: &Common, spec: &MeasureSpec, sweep: Option<&Sweep>) -> CliResult<()> {
    let points = common.points(sweep)?;
    let times = common.times()?;
    let options = OptimizeOptions {
        refine_tol: common.refine_tol,
        polish: spec.polish,
        ..Default::default()
    };
    let grid = if spec.optimize {
        Some(StateGrid::fibonacci(spec.grid_points, &spec.shells)?)
    } else {
        None
    };
    let [x, y, z] = spec.state.0;
    let initial = QubitState::from_bloch_xyz(x, y, z)?;
    let reports = Execution::default().try_map(points.len(), |i| {
        let family = Family::build(&points[i])?;
        match &grid {
            Some(g) => optimize_over_states(&family, &times, g, &options),
            None => Ok(evaluate_states(&family, &times, &[initial], &options)?.remove(0)),
        }
    })?;

    let mut table = Table::new(&[
        "family",
        "s",
        "omega_c",
        "a_tau",
        "n_e",
        "n_s",
        "n_intervals",
        "intervals",
        "gains",
        "argmax_x",
        "argmax_y",
        "argmax_z",
        "tie",
    ]);
    for (p, r) in points.iter().zip(&reports) {
        table.push(measure_row(p, r));
    }
    let mut config = common.config("measure")?;
    if spec.optimize {
        config["optimize"] = json!({
            "grid_points": spec.grid_points,
            "shells": spec.shells,
            "polish": spec.polish,
        });
    } else {
        config["state"] = json!(spec.state.0);
    }
    config["sweep"] = sweep_config(sweep);
    output::write(&table, config, common.format, common.out.as_deref())?;
    Ok(())
}

fn sweep_config(sweep: Option<&Sweep>) -> Value {
    sweep.map_or(
        Value::Null,
        |s| json!({ "param": s.param.name(), "values": s.values }),
    )
}

fn check_row(p: &Point, r: &DivisibilityReport) -> Vec<Cell> {
    let mut row = point_cells(p);
    row.extend([
        r.verdict.as_str().into(),
        r.min_eigenvalue.into(),
        r.first_violation.map(|w| w.t1).into(),
        r.first_violation.map(|w| w.t2).into(),
        r.pairs_checked.into(),
        r.singular_pairs.into(),
    ]);
    row
}

/// Returns whether any verdict was indeterminate.
fn run_check(common: &Common, sweep: Option<&Sweep>) -> CliResult<bool> {
    let points = common.points(sweep)?;
    let times = common.times()?;
    let reports = Execution::default().try_map(points.len(), |i| {
        let family = Family::build(&points[i])?;
        check_divisibility(&family, &times, Execution::default())
    })?;
    let mut table = Table::new(&[
        "family",
        "s",
        "omega_c",
        "a_tau",
        "verdict",
        "min_choi_eigenvalue",
        "witness_t1",
        "witness_t2",
        "pairs_checked",
        "singular_pairs",
    ]);
    for (p, r) in points.iter().zip(&reports) {
        table.push(check_row(p, r));
    }
    let mut config = common.config("check")?;
    config["sweep"] = sweep_config(sweep);
    output::write(&table, config, common.format, common.out.as_deref())?;
    Ok(reports.iter().any(|r| r.verdict == Verdict::Indeterminate))
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Trajectory { common, state } => run_trajectory(&common, state)?,
        Command::Measure {
            common,
            state,
            optimize,
            grid_points,
            shells,
            no_polish,
            sweep,
        } => {
            let spec = MeasureSpec {
                state,
                optimize,
                grid_points,
                shells,
                polish: !no_polish,
            };
            run_measure(&common, &spec, sweep.sweep.as_ref())?
        }
        Command::Check { common, sweep } => {
            if run_check(&common, sweep.sweep.as_ref())? {
                return Ok(4);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
