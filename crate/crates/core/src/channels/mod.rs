//! Qubit channel representations and structural checks.
//!
//! Kraus operators follow the usual convention Φ(ρ) = Σ K ρ K† with
//! Σ K†K = I for trace preservation. Operator sets written the other way
//! round, Φ(ρ) = Σ E† ρ E with Σ E E† = I, can be imported with
//! [`KrausChannel::from_adjoint_convention`], which sets K = E†.

mod divisibility;
mod families;

pub use divisibility::{check_divisibility, DivisibilityReport, PairCheck, Verdict};
pub use families::{
    colored_noise_channel, dephasing_channel, intermediate_map, lambda_derivative, lambda_of_nu,
    Coherence, ColoredNoise, ColoredNoiseParams, DynamicalMap, Memoized, NoiseRegime,
    OhmicDephasing, CRITICAL_BAND,
};

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qubit::{identity, max_abs, paulis, CMatrix2, QubitState};

/// Tolerance on ‖Σ K†K − I‖ and ‖Σ K K† − I‖ (max-abs entry).
pub const CHANNEL_TOL: f64 = 1e-9;

/// Choi eigenvalues above −CP_TOL count as non-negative.
pub const CP_TOL: f64 = 1e-10;

/// Largest condition number of M(t₁) accepted when inverting an affine map.
pub const MAX_CONDITION: f64 = 1e12;

/// A channel given by a nonempty list of Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix2>,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix2>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::MalformedChannel("no Kraus operators".into()));
        }
        if operators.iter().any(|k| k.iter().any(|z| !z.is_finite())) {
            return Err(Error::MalformedChannel("non-finite Kraus entry".into()));
        }
        Ok(Self { operators })
    }

    /// Imports operators E with Φ(ρ) = Σ E† ρ E.
    pub fn from_adjoint_convention(operators: Vec<CMatrix2>) -> Result<Self> {
        Self::new(operators.iter().map(|e| e.adjoint()).collect())
    }

    pub fn identity() -> Self {
        Self {
            operators: vec![identity()],
        }
    }

    /// Random-unitary channel Σ pₖ σₖ ρ σₖ with σ₀ = I.
    pub fn pauli_mixture(weights: [f64; 4]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0) || (total - 1.0).abs() > CHANNEL_TOL {
            return Err(Error::MalformedChannel(format!(
                "Pauli weights {weights:?} are not a probability vector"
            )));
        }
        let [sx, sy, sz] = paulis();
        let ops = [identity(), sx, sy, sz]
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|(p, w)| p.scale(w.sqrt()))
            .collect();
        Self::new(ops)
    }

    pub fn operators(&self) -> &[CMatrix2] {
        &self.operators
    }

    /// ‖Σ K†K − I‖, the trace-preservation defect.
    pub fn trace_defect(&self) -> f64 {
        let sum: CMatrix2 = self.operators.iter().map(|k| k.adjoint() * k).sum();
        max_abs(&(sum - identity()))
    }

    /// ‖Σ K K† − I‖, the unitality defect.
    pub fn unitality_defect(&self) -> f64 {
        let sum: CMatrix2 = self.operators.iter().map(|k| k * k.adjoint()).sum();
        max_abs(&(sum - identity()))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_defect() <= tol
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_defect() <= tol
    }

    /// Action on an arbitrary operator, without normalization.
    pub fn apply_operator(&self, m: &CMatrix2) -> CMatrix2 {
        self.operators.iter().map(|k| k * m * k.adjoint()).sum()
    }

    pub fn apply(&self, rho: &QubitState) -> Result<QubitState> {
        let defect = self.trace_defect();
        if !(defect <= CHANNEL_TOL) {
            return Err(Error::MalformedChannel(format!(
                "not trace preserving (defect {defect:e})"
            )));
        }
        QubitState::from_matrix_renormalized(self.apply_operator(rho.matrix()))
    }

    /// Affine Bloch representation r ↦ t + M r, read off from the action on
    /// the Pauli basis: tₗ = ½Tr(σₗ Φ(I)), Mₗₖ = ½Tr(σₗ Φ(σₖ)).
    pub fn to_affine(&self) -> AffineMap {
        let sigma = paulis();
        let half_trace = |a: &CMatrix2, b: &CMatrix2| 0.5 * (a * b).trace().re;
        let image_id = self.apply_operator(&identity());
        let translation = Vector3::from_fn(|l, _| half_trace(&sigma[l], &image_id));
        let images = sigma.map(|s| self.apply_operator(&s));
        let matrix = Matrix3::from_fn(|l, k| half_trace(&sigma[l], &images[k]));
        AffineMap::new(translation, matrix)
    }

    /// Choi matrix Σₖ vec(Kₖ) vec(Kₖ)†, i.e. Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
    pub fn choi_matrix(&self) -> Matrix4<Complex64> {
        let mut choi = Matrix4::zeros();
        for k in &self.operators {
            // |Kₖ⟩⟩ = Σᵢ |i⟩ ⊗ Kₖ|i⟩, indexed as 2i + a.
            let v = nalgebra::Vector4::new(k[(0, 0)], k[(1, 0)], k[(0, 1)], k[(1, 1)]);
            choi += v * v.adjoint();
        }
        choi
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &KrausChannel) -> KrausChannel {
        let operators = next
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| b * a))
            .collect();
        KrausChannel { operators }
    }
}

/// Affine action r ↦ t + M r on Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub translation: Vector3<f64>,
    pub matrix: Matrix3<f64>,
}

impl AffineMap {
    pub fn new(translation: Vector3<f64>, matrix: Matrix3<f64>) -> Self {
        Self {
            translation,
            matrix,
        }
    }

    pub fn identity() -> Self {
        Self::new(Vector3::zeros(), Matrix3::identity())
    }

    /// Pure-dephasing form diag(c, c, 1).
    pub fn dephasing(coherence: f64) -> Self {
        Self::new(
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(coherence, coherence, 1.0)),
        )
    }

    pub fn apply_bloch(&self, r: &Vector3<f64>) -> Vector3<f64> {
        self.translation + self.matrix * r
    }

    /// Evolves a state; fails if the image leaves the Bloch ball.
    pub fn apply(&self, rho: &QubitState) -> Result<QubitState> {
        QubitState::from_bloch(self.apply_bloch(&rho.bloch()))
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.translation.norm() <= tol
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &AffineMap) -> AffineMap {
        AffineMap::new(
            next.translation + next.matrix * self.translation,
            next.matrix * self.matrix,
        )
    }

    /// 4×4 real transfer matrix [[1, 0], [t, M]] in the basis (I, σx, σy, σz).
    pub fn transfer_matrix(&self) -> Matrix4<f64> {
        let mut l = Matrix4::zeros();
        l[(0, 0)] = 1.0;
        l.fixed_view_mut::<3, 1>(1, 0).copy_from(&self.translation);
        l.fixed_view_mut::<3, 3>(1, 1).copy_from(&self.matrix);
        l
    }

    /// Ratio of extreme singular values of M; infinite when M is singular.
    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }

    /// Action on an arbitrary operator A = a₀I + a·σ by linearity.
    pub fn apply_operator(&self, m: &CMatrix2) -> CMatrix2 {
        let sigma = paulis();
        let half = Complex64::new(0.5, 0.0);
        let a0 = m.trace() * half;
        let a: [Complex64; 3] = std::array::from_fn(|k| (sigma[k] * m).trace() * half);
        let mut out = identity() * a0;
        for (l, s) in sigma.iter().enumerate() {
            let mut coeff = a0 * self.translation[l];
            for (k, ak) in a.iter().enumerate() {
                coeff += ak * self.matrix[(l, k)];
            }
            out += s * coeff;
        }
        out
    }

    /// Choi matrix Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|). Meaningful for maps that are not
    /// completely positive, such as intermediate maps of non-divisible
    /// families.
    pub fn choi_matrix(&self) -> Matrix4<Complex64> {
        let mut choi = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut unit = CMatrix2::zeros();
                unit[(i, j)] = Complex64::new(1.0, 0.0);
                let image = self.apply_operator(&unit);
                for a in 0..2 {
                    for b in 0..2 {
                        choi[(2 * i + a, 2 * j + b)] = image[(a, b)];
                    }
                }
            }
        }
        choi
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.choi_matrix())
    }

    pub fn is_completely_positive(&self) -> bool {
        self.min_choi_eigenvalue() >= -CP_TOL
    }
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
pub fn hermitian_eigenvalues(m: &Matrix4<Complex64>) -> [f64; 4] {
    let herm = (m + m.adjoint()).scale(0.5);
    let mut ev: [f64; 4] = SymmetricEigen::new(herm).eigenvalues.into();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_hermitian_eigenvalue(m: &Matrix4<Complex64>) -> f64 {
    hermitian_eigenvalues(m)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::pauli_z;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn amplitude_damping(p: f64) -> KrausChannel {
        let k0 = CMatrix2::new(c(1.0), c(0.0), c(0.0), c((1.0 - p).sqrt()));
        let k1 = CMatrix2::new(c(0.0), c(p.sqrt()), c(0.0), c(0.0));
        KrausChannel::new(vec![k0, k1]).unwrap()
    }

    #[test]
    fn identity_channel_is_trivial() {
        let id = KrausChannel::identity();
        let rho = QubitState::from_bloch_xyz(0.3, -0.2, 0.6).unwrap();
        let out = id.apply(&rho).unwrap();
        assert!((out.bloch() - rho.bloch()).norm() < 1e-15);

        let aff = id.to_affine();
        assert_eq!(aff.translation, Vector3::zeros());
        assert!((aff.matrix - Matrix3::identity()).abs().max() < 1e-15);

        let ev = hermitian_eigenvalues(&id.choi_matrix());
        for (got, want) in ev.iter().zip([0.0, 0.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_channel_rejected() {
        assert!(matches!(
            KrausChannel::new(vec![]),
            Err(Error::MalformedChannel(_))
        ));
    }

    #[test]
    fn apply_rejects_non_trace_preserving() {
        let ch = KrausChannel::new(vec![identity().scale(0.9)]).unwrap();
        let rho = QubitState::maximally_mixed();
        assert!(matches!(ch.apply(&rho), Err(Error::MalformedChannel(_))));
    }

    #[test]
    fn adjoint_convention_maps_to_standard() {
        let e = CMatrix2::new(c(0.0), c(1.0), c(0.0), c(0.0));
        let f = CMatrix2::new(c(0.0), c(0.0), c(0.0), c(1.0));
        // Σ E E† = I here, so {E} is trace preserving in the adjoint convention.
        let ch = KrausChannel::from_adjoint_convention(vec![e, f]).unwrap();
        assert!(ch.is_trace_preserving(CHANNEL_TOL));
        assert_eq!(ch.operators()[0], e.adjoint());
    }

    #[test]
    fn amplitude_damping_is_not_unital() {
        let ad = amplitude_damping(0.5);
        assert!(ad.is_trace_preserving(CHANNEL_TOL));
        assert!(!ad.is_unital(CHANNEL_TOL));
        // Σ K K† = diag(1.5, 0.5), so the defect is exactly 1/2.
        assert!((ad.unitality_defect() - 0.5).abs() < 1e-15);
        let aff = ad.to_affine();
        assert!(!aff.is_unital(1e-9));
        assert!((aff.translation - Vector3::new(0.0, 0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn affine_matches_kraus_action() {
        let ad = amplitude_damping(0.3);
        let aff = ad.to_affine();
        for r in [
            Vector3::new(0.1, 0.2, 0.3),
            Vector3::new(0.0, 0.0, -1.0),
            Vector3::new(0.6, -0.8, 0.0),
        ] {
            let rho = QubitState::from_bloch(r).unwrap();
            let direct = ad.apply(&rho).unwrap().bloch();
            assert!((direct - aff.apply_bloch(&r)).norm() < 1e-12);
        }
    }

    #[test]
    fn choi_routes_agree() {
        let ch = amplitude_damping(0.3)
            .then(&KrausChannel::pauli_mixture([0.5, 0.2, 0.1, 0.2]).unwrap());
        let kraus = ch.choi_matrix();
        let affine = ch.to_affine().choi_matrix();
        assert!(max_abs(&(kraus - affine)) < 1e-12);
        assert!((kraus.trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn transpose_is_not_completely_positive() {
        // Transposition flips σy: M = diag(1, −1, 1). Choi is the swap,
        // with eigenvalue −1.
        let t = AffineMap::new(
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)),
        );
        assert!((t.min_choi_eigenvalue() + 1.0).abs() < 1e-12);
        assert!(!t.is_completely_positive());
    }

    #[test]
    fn transfer_matrix_layout() {
        let aff = AffineMap::new(
            Vector3::new(0.1, 0.2, 0.3),
            Matrix3::from_diagonal(&Vector3::new(0.5, 0.6, 0.7)),
        );
        let l = aff.transfer_matrix();
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(l[(0, 1)], 0.0);
        assert_eq!(l[(3, 0)], 0.3);
        assert_eq!(l[(2, 2)], 0.6);
    }

    #[test]
    fn sigma_z_conjugation_negates_coherences() {
        let ch = KrausChannel::new(vec![pauli_z()]).unwrap();
        let rho = QubitState::from_bloch_xyz(0.4, 0.3, 0.1).unwrap();
        let r = ch.apply(&rho).unwrap().bloch();
        assert!((r - Vector3::new(-0.4, -0.3, 0.1)).norm() < 1e-15);
    }
}
