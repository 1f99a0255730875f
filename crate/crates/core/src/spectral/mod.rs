//! Ohmic-family spectral density and the pure-dephasing exponent.
//!
//! At zero temperature the decoherence exponent is
//! Γ(t) = 4 ∫ J(ω) (1 − cos ωt)/ω² dω with J(ω) = ω_c^{1−s} ω^s e^{−ω/ω_c},
//! and the dephasing rate is its derivative γ(t) = 4 ∫ J(ω) sin(ωt)/ω dω.
//! Both integrals are truncated at `omega_max_factor · ω_c` and evaluated on
//! panels of length π/t so that each panel holds at most half an oscillation.

pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quadrature::integrate;

/// Ohmicity `s` and cutoff frequency `omega_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    s: f64,
    omega_c: f64,
}

impl SpectralParams {
    pub fn new(s: f64, omega_c: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("Ohmicity s must be > 0, got {s}")));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::Domain(format!(
                "cutoff omega_c must be > 0, got {omega_c}"
            )));
        }
        Ok(Self { s, omega_c })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper integration limit in units of ω_c.
    pub omega_max_factor: f64,
    pub max_segments: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            omega_max_factor: 40.0,
            max_segments: 200_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Input("quadrature tolerances must be > 0".into()));
        }
        if !(self.omega_max_factor >= 20.0) {
            return Err(Error::Input(format!(
                "omega_max_factor must be >= 20, got {}",
                self.omega_max_factor
            )));
        }
        if self.max_segments == 0 {
            return Err(Error::Input("max_segments must be positive".into()));
        }
        Ok(())
    }
}

/// Quadrature result with the bound on the discarded tail beyond ω_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub tail_bound: f64,
}

/// J(ω) = ω_c^{1−s} ω^s e^{−ω/ω_c}.
pub fn j_omega(p: &SpectralParams, omega: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    p.omega_c.powf(1.0 - p.s) * omega.powf(p.s) * (-omega / p.omega_c).exp()
}

/// Decoherence exponent Γ(t) ≥ 0.
pub fn gamma_big(p: &SpectralParams, t: f64, q: &QuadratureConfig) -> Result<f64> {
    gamma_big_estimate(p, t, q).map(|e| e.value)
}

/// Dephasing rate γ(t) = dΓ/dt.
pub fn gamma_rate(p: &SpectralParams, t: f64, q: &QuadratureConfig) -> Result<f64> {
    gamma_rate_estimate(p, t, q).map(|e| e.value)
}

pub fn gamma_big_estimate(p: &SpectralParams, t: f64, q: &QuadratureConfig) -> Result<Estimate> {
    check_time(t)?;
    q.validate()?;
    let omega_max = q.omega_max_factor * p.omega_c;
    // 1 − cos x ≤ 2, so the tail is at most 8 ω_c^{1−s} ∫ ω^{s−2} e^{−ω/ω_c}.
    let tail_bound = 8.0 * p.omega_c.powf(1.0 - p.s) * exp_tail(p.s - 2.0, p.omega_c, omega_max);
    if t == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            tail_bound: 0.0,
        });
    }
    let prefactor = 8.0 * p.omega_c.powf(1.0 - p.s);
    let half_t = 0.5 * t;
    // (1 − cos ωt)/ω² = 2 (sin(ωt/2)/ω)², which stays finite as ω → 0.
    let integrand = |w: f64| {
        let sinc = (w * half_t).sin() / w;
        prefactor * w.powf(p.s) * (-w / p.omega_c).exp() * sinc * sinc
    };
    let r = integrate(
        integrand,
        &panels(t, omega_max),
        q.rel_tol,
        q.abs_tol,
        q.max_segments,
    )?;
    Ok(Estimate {
        value: r.value.max(0.0),
        error: r.error,
        tail_bound,
    })
}

pub fn gamma_rate_estimate(p: &SpectralParams, t: f64, q: &QuadratureConfig) -> Result<Estimate> {
    check_time(t)?;
    q.validate()?;
    let omega_max = q.omega_max_factor * p.omega_c;
    let tail_bound = 4.0 * p.omega_c.powf(1.0 - p.s) * exp_tail(p.s - 1.0, p.omega_c, omega_max);
    if t == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            tail_bound: 0.0,
        });
    }
    let prefactor = 4.0 * p.omega_c.powf(1.0 - p.s);
    let integrand = |w: f64| prefactor * w.powf(p.s) * (-w / p.omega_c).exp() * ((w * t).sin() / w);
    let r = integrate(
        integrand,
        &panels(t, omega_max),
        q.rel_tol,
        q.abs_tol,
        q.max_segments,
    )?;
    Ok(Estimate {
        value: r.value,
        error: r.error,
        tail_bound,
    })
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// Breakpoints on [0, ω_max] with spacing at most π/t (and at least four
/// panels).
fn panels(t: f64, omega_max: f64) -> Vec<f64> {
    let n = ((omega_max * t / PI).ceil() as usize).max(4);
    let width = omega_max / n as f64;
    (0..=n)
        .map(|k| if k == n { omega_max } else { k as f64 * width })
        .collect()
}

/// Upper bound on ∫_Ω^∞ ω^k e^{−ω/c} dω.
fn exp_tail(k: f64, c: f64, omega: f64) -> f64 {
    let head = omega.powf(k) * c * (-omega / c).exp();
    if k <= 0.0 {
        head
    } else if omega > k * c {
        head / (1.0 - k * c / omega)
    } else {
        f64::INFINITY
    }
}
