use nalgebra::Vector3;

use super::{
    n_e_from_trajectory, MeasureReport, SampledDynamics, StatePath, DEFAULT_REFINE_TOL, TIE_TOL,
};
use crate::channels::{DynamicalMap, Memoized};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qubit::QubitState;

/// Candidate initial states for the maximization over the Bloch ball.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    states: Vec<QubitState>,
    resolution: f64,
}

impl StateGrid {
    pub const DEFAULT_PURE_POINTS: usize = 312;
    pub const DEFAULT_SHELLS: [f64; 3] = [0.25, 0.5, 0.75];

    /// Fibonacci-sphere points on the pure-state surface, then the same
    /// directions scaled onto each interior shell radius.
    pub fn fibonacci(pure_points: usize, shells: &[f64]) -> Result<Self> {
        if pure_points == 0 {
            return Err(Error::Input("state grid is empty".into()));
        }
        if let Some(r) = shells.iter().find(|r| !(**r >= 0.0 && **r <= 1.0)) {
            return Err(Error::Input(format!("shell radius {r} outside [0, 1]")));
        }
        let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let n = pure_points as f64;
        let directions: Vec<Vector3<f64>> = (0..pure_points)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden_angle * i as f64;
                Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
            })
            .collect();
        let mut states = Vec::with_capacity(pure_points * (1 + shells.len()));
        for radius in std::iter::once(1.0).chain(shells.iter().copied()) {
            for d in &directions {
                states.push(QubitState::from_bloch(d * radius)?);
            }
        }
        Ok(Self {
            states,
            resolution: (4.0 * std::f64::consts::PI / n).sqrt(),
        })
    }

    pub fn from_states(states: Vec<QubitState>, resolution: f64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Input("state grid is empty".into()));
        }
        Ok(Self { states, resolution })
    }

    pub fn states(&self) -> &[QubitState] {
        &self.states
    }

    /// Typical angular spacing of the surface points, √(4π/N).
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

impl Default for StateGrid {
    fn default() -> Self {
        Self::fibonacci(Self::DEFAULT_PURE_POINTS, &Self::DEFAULT_SHELLS)
            .expect("valid default grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub refine_tol: f64,
    pub execution: Execution,
    /// Follow the grid search with a local search over the sphere through
    /// the best grid state.
    pub polish: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            refine_tol: DEFAULT_REFINE_TOL,
            execution: Execution::default(),
            polish: true,
        }
    }
}

fn report_for<M: DynamicalMap>(
    table: &SampledDynamics,
    memo: &Memoized<M>,
    state: &QubitState,
    refine_tol: f64,
) -> Result<MeasureReport> {
    let traj = table.trajectory(state)?;
    let path = StatePath::new(memo, *state);
    let mut report = n_e_from_trajectory(&traj, Some(&path), refine_tol)?;
    report.argmax_state = Some(*state);
    Ok(report)
}

fn reports_for<M: DynamicalMap>(
    table: &SampledDynamics,
    memo: &Memoized<M>,
    states: &[QubitState],
    options: &OptimizeOptions,
) -> Result<Vec<MeasureReport>> {
    options.execution.try_map(states.len(), |i| {
        report_for(table, memo, &states[i], options.refine_tol)
    })
}

/// Per-state reports, in the order of `states`.
pub fn evaluate_states<M: DynamicalMap>(
    map: &M,
    times: &[f64],
    states: &[QubitState],
    options: &OptimizeOptions,
) -> Result<Vec<MeasureReport>> {
    let table = SampledDynamics::sample(map, times, options.execution)?;
    reports_for(&table, &Memoized::new(map), states, options)
}

const GOLDEN_TOL: f64 = 1e-10;

/// Golden-section search for a maximum of `f` on [lo, hi]. Only unimodal
/// functions are guaranteed to reach the global maximum of the bracket.
fn golden_max(lo: f64, hi: f64, f: &mut dyn FnMut(f64) -> Result<f64>) -> Result<f64> {
    let ratio = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Coordinate-wise golden-section search in polar and azimuthal angle on
/// the sphere through `report.argmax_state`, within `width` of it. A
/// candidate replaces the incumbent only when its N_e is strictly larger.
fn polish<M: DynamicalMap>(
    table: &SampledDynamics,
    memo: &Memoized<M>,
    report: MeasureReport,
    width: f64,
    refine_tol: f64,
) -> Result<MeasureReport> {
    let Some(seed) = report.argmax_state else {
        return Ok(report);
    };
    let r = seed.bloch();
    let radius = r.norm();
    if radius == 0.0 {
        return Ok(report);
    }
    let at = |theta: f64, phi: f64| {
        QubitState::from_bloch(
            Vector3::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ) * radius,
        )
    };
    let mut theta = (r.z / radius).clamp(-1.0, 1.0).acos();
    let mut phi = r.y.atan2(r.x);
    let mut best = report;
    for _ in 0..2 {
        let lo = (theta - width).max(0.0);
        let hi = (theta + width).min(std::f64::consts::PI);
        let t = golden_max(lo, hi, &mut |x| {
            Ok(report_for(table, memo, &at(x, phi)?, refine_tol)?.n_e)
        })?;
        let span = (width / theta.sin().max(width)).min(std::f64::consts::PI);
        let p = golden_max(phi - span, phi + span, &mut |x| {
            Ok(report_for(table, memo, &at(t, x)?, refine_tol)?.n_e)
        })?;
        for (ct, cp) in [(t, phi), (t, p)] {
            let candidate = report_for(table, memo, &at(ct, cp)?, refine_tol)?;
            if candidate.n_e > best.n_e {
                best = candidate;
                theta = ct;
                phi = cp;
            }
        }
    }
    Ok(best)
}

/// Maximizes N_e over the grid, then polishes the best grid state when
/// `options.polish` is set. The first state in grid order wins ties, and
/// the `tie` flag records whether any other grid state came within
/// [`TIE_TOL`] of the final value.
pub fn optimize_over_states<M: DynamicalMap>(
    map: &M,
    times: &[f64],
    grid: &StateGrid,
    options: &OptimizeOptions,
) -> Result<MeasureReport> {
    if grid.is_empty() {
        return Err(Error::Input("state grid is empty".into()));
    }
    let table = SampledDynamics::sample(map, times, options.execution)?;
    let memo = Memoized::new(map);
    let reports = reports_for(&table, &memo, grid.states(), options)?;
    let best = reports.iter().enumerate().fold(
        0,
        |best, (i, r)| if r.n_e > reports[best].n_e { i } else { best },
    );
    let mut report = reports[best].clone();
    if options.polish && report.n_e > 0.0 {
        report = polish(&table, &memo, report, grid.resolution(), options.refine_tol)?;
    }
    let top = report.n_e;
    report.tie = reports
        .iter()
        .enumerate()
        .any(|(i, r)| i != best && (r.n_e - top).abs() <= TIE_TOL);
    Ok(report)
}
