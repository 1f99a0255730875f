//! Non-Markovianity witness and degrees for single-qubit trajectories.
//!
//! For a qubit the entropy rate is dS/dt = η₊ log₂(λ₋/λ₊) with η₊ = dλ₊/dt,
//! so entropy decreases exactly where the larger eigenvalue rises. The degree
//! N_e sums the rises of λ₊ over all maximal rising intervals; N_S sums the
//! entropy drops. Both are reported as nonnegative magnitudes.
//!
//! Intervals are located on a sampled [`Trajectory`] and their endpoints are
//! refined by bisection on the sign of the slope, using a [`PathEvaluator`]
//! that can evaluate the path between grid points.

mod optimize;

pub use optimize::{evaluate_states, optimize_over_states, OptimizeOptions, StateGrid};

use serde::Serialize;

use crate::channels::{Coherence, DynamicalMap, KrausChannel};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qubit::{entropy_rate, EigenPair, QubitState, STATE_TOL};

/// Default endpoint refinement tolerance, in time units.
pub const DEFAULT_REFINE_TOL: f64 = 1e-9;

pub const DEFAULT_TIME_STEPS: usize = 4000;

/// Two reports whose degrees differ by less than this are tied.
pub const TIE_TOL: f64 = 1e-9;

/// Sample-to-sample changes at or below this are treated as flat. It sits a
/// few ulps above the roundoff of a channel application.
const STEP_FLOOR: f64 = 32.0 * f64::EPSILON;

/// Step for centered differences when a path has no closed-form slope.
const FD_STEP: f64 = 1e-6;

/// Uniform grid of `steps` points on [0, horizon].
pub fn uniform_grid(horizon: f64, steps: usize) -> Result<Vec<f64>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Input(format!("horizon must be > 0, got {horizon}")));
    }
    if steps < 2 {
        return Err(Error::Input(format!(
            "need at least 2 time steps, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                horizon
            } else {
                horizon * i as f64 / last
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

/// Sampled eigenvalue and entropy history of one initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    lambda_plus: Vec<f64>,
    entropy: Vec<f64>,
    eta_plus: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        lambda_plus: Vec<f64>,
        entropy: Vec<f64>,
        eta_plus: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::Input(format!(
                "trajectory needs >= 2 samples, got {n}"
            )));
        }
        if lambda_plus.len() != n
            || entropy.len() != n
            || eta_plus.as_ref().is_some_and(|e| e.len() != n)
        {
            return Err(Error::Input("trajectory columns differ in length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        if let Some(bad) = lambda_plus
            .iter()
            .find(|l| !(**l >= 0.5 - STATE_TOL && **l <= 1.0 + STATE_TOL))
        {
            return Err(Error::Input(format!(
                "lambda_plus value {bad} outside [1/2, 1]"
            )));
        }
        Ok(Self {
            times,
            lambda_plus,
            entropy,
            eta_plus,
        })
    }

    /// Samples `path` at every time in `times`.
    pub fn sample<P: PathEvaluator + ?Sized>(
        path: &P,
        times: &[f64],
        execution: Execution,
    ) -> Result<Self> {
        let rows = execution.try_map(times.len(), |i| {
            let t = times[i];
            Ok((path.eigenvalues(t)?, path.eta_plus(t)?))
        })?;
        let eta: Option<Vec<f64>> = rows.iter().map(|(_, e)| *e).collect();
        Self::new(
            times.to_vec(),
            rows.iter().map(|(e, _)| e.lambda_plus).collect(),
            rows.iter().map(|(e, _)| e.entropy()).collect(),
            eta,
        )
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn lambda_plus(&self) -> &[f64] {
        &self.lambda_plus
    }

    pub fn lambda_minus(&self) -> Vec<f64> {
        self.lambda_plus.iter().map(|l| 1.0 - l).collect()
    }

    pub fn entropy(&self) -> &[f64] {
        &self.entropy
    }

    pub fn eta_plus(&self) -> Option<&[f64]> {
        self.eta_plus.as_deref()
    }

    /// dS/dt from η₊ through the eigenvalue identity, when η₊ is known.
    pub fn entropy_rate(&self) -> Option<Vec<f64>> {
        let eta = self.eta_plus.as_ref()?;
        Some(
            self.lambda_plus
                .iter()
                .zip(eta)
                .map(|(l, e)| entropy_rate(&EigenPair::from_lambda_plus(*l), *e))
                .collect(),
        )
    }
}

/// Continuous-time access to a trajectory, used to refine interval
/// endpoints between grid samples.
pub trait PathEvaluator: Sync {
    fn eigenvalues(&self, t: f64) -> Result<EigenPair>;

    /// Closed-form η₊ = dλ₊/dt, if the path has one.
    fn eta_plus(&self, _t: f64) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// η₊ for a pure-dephasing family acting on `initial`.
///
/// With X = r_z² + c² (r_x² + r_y²) the larger eigenvalue is (1 + √X)/2,
/// giving η₊ = c ċ (r_x² + r_y²) / (2√X). At X = 0 the one-sided limits
/// differ and zero is returned.
pub fn dephasing_eta_plus(initial: &QubitState, coherence: &Coherence) -> f64 {
    let r = initial.bloch();
    let perp2 = r.x * r.x + r.y * r.y;
    let c = coherence.factor;
    let x = r.z * r.z + c * c * perp2;
    if x <= 0.0 {
        return 0.0;
    }
    c * coherence.rate * perp2 / (2.0 * x.sqrt())
}

/// The evolution of a fixed initial state under a dynamical map.
pub struct StatePath<M> {
    map: M,
    initial: QubitState,
}

impl<M: DynamicalMap> StatePath<M> {
    pub fn new(map: M, initial: QubitState) -> Self {
        Self { map, initial }
    }

    pub fn state(&self, t: f64) -> Result<QubitState> {
        self.map.channel(t)?.apply(&self.initial)
    }

    pub fn initial(&self) -> &QubitState {
        &self.initial
    }
}

impl<M: DynamicalMap> PathEvaluator for StatePath<M> {
    fn eigenvalues(&self, t: f64) -> Result<EigenPair> {
        self.state(t)?.eigenvalues()
    }

    fn eta_plus(&self, t: f64) -> Result<Option<f64>> {
        Ok(self
            .map
            .coherence(t)?
            .map(|c| dephasing_eta_plus(&self.initial, &c)))
    }
}

/// A dynamical map tabulated on a time grid, so that many initial states can
/// be evolved without re-evaluating the family.
#[derive(Debug, Clone)]
pub struct SampledDynamics {
    times: Vec<f64>,
    channels: Vec<KrausChannel>,
    coherence: Vec<Option<Coherence>>,
}

impl SampledDynamics {
    pub fn sample<M: DynamicalMap + ?Sized>(
        map: &M,
        times: &[f64],
        execution: Execution,
    ) -> Result<Self> {
        let rows = execution.try_map(times.len(), |i| {
            Ok((map.channel(times[i])?, map.coherence(times[i])?))
        })?;
        let (channels, coherence) = rows.into_iter().unzip();
        Ok(Self {
            times: times.to_vec(),
            channels,
            coherence,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coherence(&self) -> &[Option<Coherence>] {
        &self.coherence
    }

    pub fn trajectory(&self, initial: &QubitState) -> Result<Trajectory> {
        let n = self.times.len();
        let mut lambda_plus = Vec::with_capacity(n);
        let mut entropy = Vec::with_capacity(n);
        let mut eta = Vec::with_capacity(n);
        for (channel, coh) in self.channels.iter().zip(&self.coherence) {
            let e = channel.apply(initial)?.eigenvalues()?;
            lambda_plus.push(e.lambda_plus);
            entropy.push(e.entropy());
            eta.push(coh.map(|c| dephasing_eta_plus(initial, &c)));
        }
        let eta: Option<Vec<f64>> = eta.into_iter().collect();
        Trajectory::new(self.times.clone(), lambda_plus, entropy, eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trend {
    Rising,
    Falling,
}

/// Maximal runs of consecutive samples moving in direction `trend`, as
/// inclusive sample-index pairs.
fn monotone_runs(values: &[f64], trend: Trend) -> Vec<(usize, usize)> {
    let moving = |i: usize| {
        let d = values[i + 1] - values[i];
        match trend {
            Trend::Rising => d > STEP_FLOOR,
            Trend::Falling => d < -STEP_FLOOR,
        }
    };
    let mut runs = Vec::new();
    let mut i = 0;
    while i + 1 < values.len() {
        if moving(i) {
            let start = i;
            while i + 1 < values.len() && moving(i) {
                i += 1;
            }
            runs.push((start, i));
        } else {
            i += 1;
        }
    }
    runs
}

/// Value and slope access for one scalar quantity along a path.
struct Probe<'a> {
    value: Box<dyn Fn(f64) -> Result<f64> + 'a>,
    slope: Box<dyn Fn(f64) -> Result<f64> + 'a>,
}

fn centered_difference(value: &dyn Fn(f64) -> Result<f64>, t: f64) -> Result<f64> {
    let lo = (t - FD_STEP).max(0.0);
    let hi = t + FD_STEP;
    Ok((value(hi)? - value(lo)?) / (hi - lo))
}

fn lambda_probe<'a>(path: &'a dyn PathEvaluator) -> Probe<'a> {
    let value = move |t: f64| Ok(path.eigenvalues(t)?.lambda_plus);
    Probe {
        value: Box::new(value),
        slope: Box::new(move |t| match path.eta_plus(t)? {
            Some(eta) => Ok(eta),
            None => centered_difference(&value, t),
        }),
    }
}

fn entropy_probe<'a>(path: &'a dyn PathEvaluator) -> Probe<'a> {
    let value = move |t: f64| Ok(path.eigenvalues(t)?.entropy());
    Probe {
        value: Box::new(value),
        slope: Box::new(move |t| match path.eta_plus(t)? {
            Some(eta) => Ok(entropy_rate(&path.eigenvalues(t)?, eta)),
            None => centered_difference(&value, t),
        }),
    }
}

/// Locates the minimum (`sign = 1`) or maximum (`sign = −1`) inside
/// `[lo, hi]` by bisection on the sign of the slope. Returns `None` when the
/// slope signs at the ends do not bracket an extremum.
fn refine_extremum(
    probe: &Probe,
    lo: f64,
    hi: f64,
    sign: f64,
    tol: f64,
) -> Result<Option<(f64, f64)>> {
    let slope = |t: f64| -> Result<f64> { Ok(sign * (probe.slope)(t)?) };
    if !(slope(lo)? <= 0.0 && slope(hi)? > 0.0) {
        return Ok(None);
    }
    let (mut l, mut r) = (lo, hi);
    while r - l > tol {
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            break;
        }
        if slope(m)? <= 0.0 {
            l = m;
        } else {
            r = m;
        }
    }
    let vl = (probe.value)(l)?;
    let vr = (probe.value)(r)?;
    Ok(Some(if sign * vl <= sign * vr {
        (l, vl)
    } else {
        (r, vr)
    }))
}

/// A run of samples. Each end has a sample index and, away from the grid
/// edges, the pair of samples bracketing the extremum.
struct Run {
    start: End,
    end: End,
    /// Found from slope signs, so it is kept even when roundoff makes the
    /// endpoint values tie.
    from_slopes: bool,
}

struct End {
    sample: usize,
    bracket: Option<(usize, usize)>,
}

/// Maximal runs of samples whose slope points in direction `trend`. The
/// extremum opening a run lies between its first sample and the one before.
fn slope_runs(values: &[f64], slopes: &[f64], trend: Trend) -> Vec<Run> {
    let last = slopes.len() - 1;
    let sign = match trend {
        Trend::Rising => 1.0,
        Trend::Falling => -1.0,
    };
    let moving = |i: usize| sign * slopes[i] > 0.0;
    // Lower (start) or higher (end) of two neighbouring samples along `trend`.
    let pick = |a: usize, b: usize, low: bool| {
        if (sign * values[a] <= sign * values[b]) == low {
            a
        } else {
            b
        }
    };
    let mut runs = Vec::new();
    let mut i = 0;
    while i <= last {
        if moving(i) {
            let first = i;
            while i < last && moving(i + 1) {
                i += 1;
            }
            let start = if first == 0 {
                End {
                    sample: 0,
                    bracket: None,
                }
            } else {
                End {
                    sample: pick(first - 1, first, true),
                    bracket: Some((first - 1, first)),
                }
            };
            let end = if i == last {
                End {
                    sample: last,
                    bracket: None,
                }
            } else {
                End {
                    sample: pick(i, i + 1, false),
                    bracket: Some((i, i + 1)),
                }
            };
            runs.push(Run {
                start,
                end,
                from_slopes: true,
            });
        }
        i += 1;
    }
    runs
}

fn value_runs(values: &[f64], trend: Trend) -> Vec<Run> {
    let last = values.len() - 1;
    monotone_runs(values, trend)
        .into_iter()
        .map(|(i, k)| Run {
            start: End {
                sample: i,
                bracket: (i > 0).then(|| (i - 1, i + 1)),
            },
            end: End {
                sample: k,
                bracket: (k < last).then(|| (k - 1, k + 1)),
            },
            from_slopes: false,
        })
        .collect()
}

/// Monotone intervals with the quantity's value at each endpoint.
///
/// With sampled `slopes` the runs follow their signs, otherwise successive
/// value differences above the roundoff floor.
fn monotone_intervals(
    times: &[f64],
    values: &[f64],
    slopes: Option<&[f64]>,
    trend: Trend,
    probe: Option<&Probe>,
    refine_tol: f64,
) -> Result<Vec<(Interval, f64, f64)>> {
    if times.len() < 2 {
        return Err(Error::Input("need at least two samples".into()));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::Input(format!(
            "refine_tol must be > 0, got {refine_tol}"
        )));
    }
    // A rising run starts at a minimum and ends at a maximum.
    let (start_sign, end_sign) = match trend {
        Trend::Rising => (1.0, -1.0),
        Trend::Falling => (-1.0, 1.0),
    };
    let runs = match slopes {
        Some(sl) => slope_runs(values, sl, trend),
        None => value_runs(values, trend),
    };
    let mut out: Vec<(Interval, f64, f64)> = Vec::new();
    for run in runs {
        let mut start = (times[run.start.sample], values[run.start.sample]);
        let mut end = (times[run.end.sample], values[run.end.sample]);
        if let Some(p) = probe {
            if let Some((a, b)) = run.start.bracket {
                if let Some(v) = refine_extremum(p, times[a], times[b], start_sign, refine_tol)? {
                    start = v;
                }
            }
            if let Some((a, b)) = run.end.bracket {
                if let Some(v) = refine_extremum(p, times[a], times[b], end_sign, refine_tol)? {
                    end = v;
                }
            }
        }
        if let Some((prev, _, prev_end)) = out.last() {
            if start.0 < prev.end {
                start = (prev.end, *prev_end);
            }
        }
        let gain = match trend {
            Trend::Rising => end.1 - start.1,
            Trend::Falling => start.1 - end.1,
        };
        if end.0 > start.0 && (gain > 0.0 || run.from_slopes) {
            if gain < 0.0 {
                // Roundoff-level run: keep the interval, report no change.
                end.1 = start.1;
            }
            out.push((
                Interval {
                    start: start.0,
                    end: end.0,
                },
                start.1,
                end.1,
            ));
        }
    }
    Ok(out)
}

/// Maximal intervals on which λ₊ strictly increases.
///
/// Without a `path` the endpoints are grid times. With one, each endpoint is
/// refined to within `refine_tol` between its neighbouring samples.
pub fn detect_rising_intervals(
    traj: &Trajectory,
    path: Option<&dyn PathEvaluator>,
    refine_tol: f64,
) -> Result<Vec<Interval>> {
    let probe = path.map(lambda_probe);
    Ok(monotone_intervals(
        &traj.times,
        &traj.lambda_plus,
        traj.eta_plus(),
        Trend::Rising,
        probe.as_ref(),
        refine_tol,
    )?
    .into_iter()
    .map(|(iv, _, _)| iv)
    .collect())
}

/// Entropy-decrease part of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyDecrease {
    pub intervals: Vec<Interval>,
    pub drops: Vec<f64>,
    /// Total decrease in bits, a nonnegative magnitude.
    pub n_s: f64,
}

pub fn n_s_from_trajectory(
    traj: &Trajectory,
    path: Option<&dyn PathEvaluator>,
    refine_tol: f64,
) -> Result<EntropyDecrease> {
    let probe = path.map(entropy_probe);
    let rate = traj.entropy_rate();
    let found = monotone_intervals(
        &traj.times,
        &traj.entropy,
        rate.as_deref(),
        Trend::Falling,
        probe.as_ref(),
        refine_tol,
    )?;
    let drops: Vec<f64> = found.iter().map(|(_, a, b)| a - b).collect();
    Ok(EntropyDecrease {
        intervals: found.iter().map(|(iv, _, _)| *iv).collect(),
        n_s: drops.iter().fold(0.0, |a, b| a + b),
        drops,
    })
}

/// Outcome of the witness on one state or on an optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    /// Maximal intervals on which λ₊ rises.
    pub intervals: Vec<Interval>,
    /// λ₊(b) − λ₊(a) for each interval.
    pub gains: Vec<f64>,
    pub n_e: f64,
    /// Total entropy decrease, in bits.
    pub n_s: f64,
    pub entropy_intervals: Vec<Interval>,
    pub argmax_state: Option<QubitState>,
    /// Set when another evaluated state reached `n_e` within [`TIE_TOL`].
    pub tie: bool,
}

/// N_e and N_S for a single trajectory.
pub fn n_e_from_trajectory(
    traj: &Trajectory,
    path: Option<&dyn PathEvaluator>,
    refine_tol: f64,
) -> Result<MeasureReport> {
    let probe = path.map(lambda_probe);
    let found = monotone_intervals(
        &traj.times,
        &traj.lambda_plus,
        traj.eta_plus(),
        Trend::Rising,
        probe.as_ref(),
        refine_tol,
    )?;
    let gains: Vec<f64> = found.iter().map(|(_, a, b)| b - a).collect();
    let entropy = n_s_from_trajectory(traj, path, refine_tol)?;
    Ok(MeasureReport {
        intervals: found.iter().map(|(iv, _, _)| *iv).collect(),
        n_e: gains.iter().fold(0.0, |a, b| a + b),
        gains,
        n_s: entropy.n_s,
        entropy_intervals: entropy.intervals,
        argmax_state: None,
        tie: false,
    })
}
