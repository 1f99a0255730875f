//! Sampled divisibility check: a family is flagged non-divisible as soon as
//! one intermediate map Φ(t₂, t₁) has a Choi matrix with an eigenvalue below
//! −[`CP_TOL`].

use serde::Serialize;

use super::families::divide;
use super::{AffineMap, DynamicalMap, CP_TOL};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Number of grid points used for the all-pairs part of the scan.
const COARSE_POINTS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Divisible,
    NonDivisible,
    /// No violation found, but some intermediate maps could not be formed.
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Divisible => "divisible",
            Verdict::NonDivisible => "non-divisible",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCheck {
    pub t1: f64,
    pub t2: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisibilityReport {
    pub verdict: Verdict,
    /// Smallest intermediate-Choi eigenvalue over all formed pairs.
    pub min_eigenvalue: f64,
    pub min_pair: Option<PairCheck>,
    /// First pair, in scan order, whose intermediate map is not CP.
    pub first_violation: Option<PairCheck>,
    pub pairs_checked: usize,
    pub singular_pairs: usize,
}

/// Scans consecutive pairs of `times`, then all pairs of an evenly thinned
/// subgrid.
pub fn check_divisibility<M: DynamicalMap + ?Sized>(
    map: &M,
    times: &[f64],
    execution: Execution,
) -> Result<DivisibilityReport> {
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::Input(
            "times must be nonnegative and strictly increasing".into(),
        ));
    }
    let affines: Vec<AffineMap> = execution.try_map(times.len(), |i| map.affine(times[i]))?;

    let mut pairs: Vec<(usize, usize)> = (1..times.len()).map(|i| (i - 1, i)).collect();
    let coarse = thin(times.len(), COARSE_POINTS);
    for (a, &i) in coarse.iter().enumerate() {
        for &j in &coarse[a + 1..] {
            if j > i + 1 {
                pairs.push((i, j));
            }
        }
    }

    let results = execution.map(pairs.len(), |k| {
        let (i, j) = pairs[k];
        divide(&affines[i], &affines[j], times[i]).map(|mid| PairCheck {
            t1: times[i],
            t2: times[j],
            min_eigenvalue: mid.min_choi_eigenvalue(),
        })
    });

    let mut report = DivisibilityReport {
        verdict: Verdict::Divisible,
        min_eigenvalue: f64::INFINITY,
        min_pair: None,
        first_violation: None,
        pairs_checked: 0,
        singular_pairs: 0,
    };
    for r in results {
        match r {
            Ok(pc) => {
                report.pairs_checked += 1;
                if pc.min_eigenvalue < report.min_eigenvalue {
                    report.min_eigenvalue = pc.min_eigenvalue;
                    report.min_pair = Some(pc);
                }
                if pc.min_eigenvalue < -CP_TOL && report.first_violation.is_none() {
                    report.first_violation = Some(pc);
                }
            }
            Err(Error::NonInvertible { .. }) => report.singular_pairs += 1,
            Err(e) => return Err(e),
        }
    }
    report.verdict = if report.first_violation.is_some() {
        Verdict::NonDivisible
    } else if report.singular_pairs > 0 {
        Verdict::Indeterminate
    } else {
        Verdict::Divisible
    };
    if report.pairs_checked == 0 {
        report.min_eigenvalue = 0.0;
    }
    Ok(report)
}

/// Up to `k` evenly spaced indices in `0..n`, always including both ends.
fn thin(n: usize, k: usize) -> Vec<usize> {
    if n <= k {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..k).map(|i| i * (n - 1) / (k - 1)).collect();
    idx.dedup();
    idx
}
