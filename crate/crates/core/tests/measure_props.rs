use std::f64::consts::PI;

use unital_nm::channels::{ColoredNoise, ColoredNoiseParams, Memoized, OhmicDephasing};
use unital_nm::measure::{
    evaluate_states, n_e_from_trajectory, optimize_over_states, uniform_grid, OptimizeOptions,
    SampledDynamics, StateGrid, StatePath,
};
use unital_nm::qubit::QubitState;
use unital_nm::spectral::quadrature::integrate;
use unital_nm::spectral::SpectralParams;
use unital_nm::Execution;

const TOL: f64 = 1e-9;

fn plus() -> QubitState {
    QubitState::from_bloch_xyz(1.0, 0.0, 0.0).unwrap()
}

#[test]
fn colored_intervals_sit_between_zeros_and_extrema() {
    // aτ = 2, τ = 1: Λ vanishes at t = 2(kπ − atan μ)/μ and |Λ| peaks at t = 2kπ/μ.
    let map = ColoredNoise::new(ColoredNoiseParams::from_a_tau(2.0).unwrap());
    let mu = 63f64.sqrt();
    let horizon = 30.0;
    let times = uniform_grid(horizon, 4000).unwrap();
    let table = SampledDynamics::sample(&map, &times, Execution::default()).unwrap();
    let traj = table.trajectory(&plus()).unwrap();
    let memo = Memoized::new(&map);
    let path = StatePath::new(&memo, plus());
    let report = n_e_from_trajectory(&traj, Some(&path), TOL).unwrap();

    let mut expected = Vec::new();
    for k in 1.. {
        let start = 2.0 * (k as f64 * PI - mu.atan()) / mu;
        if start >= horizon {
            break;
        }
        let end = (2.0 * k as f64 * PI / mu).min(horizon);
        expected.push((start, end));
    }
    assert_eq!(report.intervals.len(), expected.len());
    let mut oracle_n_e = 0.0;
    for (iv, (a, b)) in report.intervals.iter().zip(&expected) {
        assert!((iv.start - a).abs() <= 2.0 * TOL, "{} vs {a}", iv.start);
        assert!((iv.end - b).abs() <= 2.0 * TOL, "{} vs {b}", iv.end);
        oracle_n_e += 0.5 * map.lambda(*b).unwrap().abs();
    }
    assert!(
        (report.n_e - oracle_n_e).abs() <= 1e-9,
        "{} vs {oracle_n_e}",
        report.n_e
    );
}

#[test]
fn n_e_equals_integral_of_positive_eta() {
    let map = OhmicDephasing::new(SpectralParams::new(3.0, 1.0).unwrap());
    let times = uniform_grid(10.0, 2000).unwrap();
    let table = SampledDynamics::sample(&map, &times, Execution::default()).unwrap();
    let memo = Memoized::new(&map);
    for state in [plus(), QubitState::from_bloch_xyz(0.3, 0.4, 0.5).unwrap()] {
        let traj = table.trajectory(&state).unwrap();
        let path = StatePath::new(&memo, state);
        let report = n_e_from_trajectory(&traj, Some(&path), TOL).unwrap();
        let eta = |t: f64| {
            let c = unital_nm::channels::DynamicalMap::coherence(&map, t)
                .unwrap()
                .unwrap();
            unital_nm::measure::dephasing_eta_plus(&state, &c).max(0.0)
        };
        let integral = integrate(eta, &times, 1e-12, 1e-14, 20_000).unwrap().value;
        let max_eta = traj
            .eta_plus()
            .unwrap()
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()));
        assert!(
            (report.n_e - integral).abs() <= 10.0 * TOL * max_eta.max(1.0),
            "{} vs {integral}",
            report.n_e
        );
    }
}

#[test]
fn n_e_grows_with_coherence() {
    let map = ColoredNoise::new(ColoredNoiseParams::from_a_tau(1.0).unwrap());
    let times = uniform_grid(30.0, 2000).unwrap();
    let states: Vec<QubitState> = (0..=10)
        .map(|i| QubitState::from_bloch_xyz(0.1 * i as f64, 0.0, 0.0).unwrap())
        .collect();
    let reports = evaluate_states(&map, &times, &states, &OptimizeOptions::default()).unwrap();
    assert_eq!(reports[0].n_e, 0.0);
    for w in reports.windows(2) {
        assert!(w[1].n_e > w[0].n_e);
    }
}

#[test]
fn ohmic_dephasing_at_s1_has_no_backflow_for_any_state() {
    let map = OhmicDephasing::new(SpectralParams::new(1.0, 1.0).unwrap());
    let times = uniform_grid(10.0, 1000).unwrap();
    let grid = StateGrid::default();
    let reports =
        evaluate_states(&map, &times, grid.states(), &OptimizeOptions::default()).unwrap();
    for r in &reports {
        assert_eq!(r.n_e, 0.0);
        assert_eq!(r.n_s, 0.0);
        assert!(r.intervals.is_empty());
    }
}

#[test]
fn optimization_is_execution_independent() {
    let map = ColoredNoise::new(ColoredNoiseParams::from_a_tau(1.5).unwrap());
    let times = uniform_grid(30.0, 1000).unwrap();
    let grid = StateGrid::fibonacci(60, &[0.5]).unwrap();
    let run = |execution| {
        let opts = OptimizeOptions {
            execution,
            ..Default::default()
        };
        optimize_over_states(&map, &times, &grid, &opts).unwrap()
    };
    let seq = run(Execution::Sequential);
    let par = run(Execution::default());
    assert_eq!(seq.n_e, par.n_e);
    assert_eq!(seq.intervals, par.intervals);
    assert_eq!(seq.argmax_state, par.argmax_state);
}

#[test]
fn polish_never_lowers_the_grid_optimum() {
    let map = OhmicDephasing::new(SpectralParams::new(4.0, 1.0).unwrap());
    let times = uniform_grid(10.0, 1000).unwrap();
    let grid = StateGrid::default();
    let coarse = OptimizeOptions {
        polish: false,
        ..Default::default()
    };
    let a = optimize_over_states(&map, &times, &grid, &coarse).unwrap();
    let b = optimize_over_states(&map, &times, &grid, &OptimizeOptions::default()).unwrap();
    assert!(b.n_e >= a.n_e);
    let best = b.argmax_state.unwrap().bloch();
    assert!(best.z.abs() < 1e-6 && (best.norm() - 1.0).abs() < 1e-9);
}
