//! Single-qubit state algebra.
//!
//! A [`QubitState`] is a validated 2×2 density matrix. Everything here is
//! expressed through the Bloch parametrization ρ = (I + r·σ)/2, which makes
//! the spectrum, entropies and trace distance closed-form. Entropies are in
//! bits throughout.

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when validating Hermiticity, trace and positivity.
pub const STATE_TOL: f64 = 1e-9;

pub type CMatrix2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity() -> CMatrix2 {
    CMatrix2::identity()
}

pub fn pauli_x() -> CMatrix2 {
    CMatrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> CMatrix2 {
    CMatrix2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> CMatrix2 {
    CMatrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// The three Pauli matrices in x, y, z order.
pub fn paulis() -> [CMatrix2; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Largest absolute entry of a complex matrix.
pub(crate) fn max_abs<const R: usize, const C: usize>(
    m: &nalgebra::SMatrix<Complex64, R, C>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Validated qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: CMatrix2,
}

impl QubitState {
    /// Builds a state from its Bloch vector, ρ = (I + r·σ)/2.
    pub fn from_bloch(r: Vector3<f64>) -> Result<Self> {
        let norm = r.norm();
        if !norm.is_finite() || norm > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!(
                "Bloch vector norm {norm} exceeds 1"
            )));
        }
        Ok(Self {
            rho: bloch_matrix(&r),
        })
    }

    pub fn from_bloch_xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_bloch(Vector3::new(x, y, z))
    }

    /// Validates an arbitrary 2×2 matrix as a density matrix.
    pub fn from_matrix(rho: CMatrix2) -> Result<Self> {
        let herm_err = max_abs(&(rho - rho.adjoint()));
        if !(herm_err <= STATE_TOL) {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (deviation {herm_err:e})"
            )));
        }
        let trace = rho[(0, 0)].re + rho[(1, 1)].re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        let state = Self {
            rho: (rho + rho.adjoint()).scale(0.5),
        };
        let r = state.bloch();
        if r.norm() > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!(
                "matrix has a negative eigenvalue (|r| = {})",
                r.norm()
            )));
        }
        Ok(state)
    }

    /// Renormalizes the trace and symmetrizes, then validates. Used for the
    /// output of channels whose trace is already correct up to roundoff.
    pub(crate) fn from_matrix_renormalized(rho: CMatrix2) -> Result<Self> {
        let trace = rho[(0, 0)].re + rho[(1, 1)].re;
        if !(trace > 0.0) {
            return Err(Error::InvalidState(format!("non-positive trace {trace}")));
        }
        Self::from_matrix(rho.unscale(trace))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: CMatrix2::identity().scale(0.5),
        }
    }

    pub fn matrix(&self) -> &CMatrix2 {
        &self.rho
    }

    pub fn bloch(&self) -> Vector3<f64> {
        let c = self.rho[(0, 1)];
        Vector3::new(
            2.0 * c.re,
            -2.0 * c.im,
            self.rho[(0, 0)].re - self.rho[(1, 1)].re,
        )
    }

    /// |ρ₁₂|, the coherence magnitude in the computational basis.
    pub fn coherence(&self) -> f64 {
        self.rho[(0, 1)].norm()
    }

    /// Spectrum from the closed-form quadratic
    /// λ± = (1 ± √(1 − 4(ρ₁₁ρ₂₂ − |ρ₁₂|²)))/2.
    ///
    /// With unit trace the discriminant equals (ρ₁₁ − ρ₂₂)² + 4|ρ₁₂|², which
    /// is evaluated instead to keep precision near the maximally mixed state.
    pub fn eigenvalues(&self) -> Result<EigenPair> {
        let dz = self.rho[(0, 0)].re - self.rho[(1, 1)].re;
        let disc = dz * dz + 4.0 * self.rho[(0, 1)].norm_sqr();
        if !disc.is_finite() {
            return Err(Error::InvalidState(format!(
                "non-finite discriminant {disc:e}"
            )));
        }
        Ok(EigenPair::from_lambda_plus(0.5 * (1.0 + disc.sqrt())))
    }

    /// von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.entropy())
    }

    pub fn is_pure(&self) -> bool {
        (self.bloch().norm() - 1.0).abs() <= STATE_TOL
    }

    /// Conjugates by a 2×2 unitary, U ρ U†. The unitarity of `u` is the
    /// caller's responsibility; the result is revalidated.
    pub fn conjugate(&self, u: &CMatrix2) -> Result<Self> {
        Self::from_matrix_renormalized(u * self.rho * u.adjoint())
    }
}

fn bloch_matrix(r: &Vector3<f64>) -> CMatrix2 {
    let [sx, sy, sz] = paulis();
    (identity() + sx.scale(r.x) + sy.scale(r.y) + sz.scale(r.z)).scale(0.5)
}

/// Ordered spectrum of a qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl EigenPair {
    /// `lambda_plus` is clamped to [1/2, 1]; the smaller eigenvalue is its
    /// complement so the pair sums to one exactly.
    pub fn from_lambda_plus(lambda_plus: f64) -> Self {
        let lambda_plus = lambda_plus.clamp(0.5, 1.0);
        Self {
            lambda_plus,
            lambda_minus: 1.0 - lambda_plus,
        }
    }

    pub fn entropy(&self) -> f64 {
        plogp(self.lambda_plus) + plogp(self.lambda_minus)
    }
}

/// −p log₂ p with the 0·log₂0 = 0 branch.
fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Quantum relative entropy S(ρ‖σ) in bits.
///
/// Returns `f64::INFINITY` when the support of ρ is not contained in the
/// support of σ (σ pure and ρ ≠ σ beyond [`STATE_TOL`]).
pub fn relative_entropy(rho: &QubitState, sigma: &QubitState) -> Result<f64> {
    let eig_rho = rho.eigenvalues()?;
    let eig_sigma = sigma.eigenvalues()?;
    let r_sigma = sigma.bloch();
    let r_rho = rho.bloch();

    // σ's eigenprojectors are (I ± n̂·σ)/2, so ⟨v±|ρ|v±⟩ = (1 ± r_ρ·n̂)/2.
    let len = r_sigma.norm();
    let proj = if len > 0.0 {
        r_rho.dot(&r_sigma) / len
    } else {
        0.0
    };
    let weights = [0.5 * (1.0 + proj), 0.5 * (1.0 - proj)];
    let spectrum = [eig_sigma.lambda_plus, eig_sigma.lambda_minus];

    let mut cross = 0.0;
    for (w, mu) in weights.into_iter().zip(spectrum) {
        if w <= STATE_TOL {
            continue;
        }
        if mu <= 0.0 {
            return Ok(f64::INFINITY);
        }
        cross -= w * mu.log2();
    }
    Ok((cross - eig_rho.entropy()).max(0.0))
}

/// Entropy rate dS/dt = dλ₊/dt · log₂(λ₋/λ₊).
///
/// Returns exactly zero at the degenerate point λ₊ = λ₋ and whenever the
/// spectrum is stationary. A pure state with a moving spectrum has an
/// unbounded rate and yields ±∞.
pub fn entropy_rate(eig: &EigenPair, dlambda_plus_dt: f64) -> f64 {
    if dlambda_plus_dt == 0.0 || eig.lambda_plus == eig.lambda_minus {
        return 0.0;
    }
    dlambda_plus_dt * (eig.lambda_minus / eig.lambda_plus).log2()
}

/// Trace distance ½‖ρ − σ‖₁, which for qubits is half the Bloch distance.
pub fn trace_distance(rho: &QubitState, sigma: &QubitState) -> f64 {
    (0.5 * (rho.bloch() - sigma.bloch()).norm()).min(1.0)
}
