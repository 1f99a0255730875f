use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{AffineMap, KrausChannel, MAX_CONDITION};
use crate::error::{Error, Result};
use crate::qubit::{identity, pauli_z};
use crate::spectral::{gamma_big, gamma_rate, QuadratureConfig, SpectralParams};

/// Half-width of the band around 4aτ = 1 where the critical limit of Λ(ν)
/// is used instead of either analytic branch.
pub const CRITICAL_BAND: f64 = 1e-8;

/// Pure-dephasing channel with off-diagonal factor `c`:
/// K₁ = √((1+c)/2) I, K₂ = √((1−c)/2) σz.
fn coherence_channel(c: f64) -> KrausChannel {
    let k1 = identity().scale((0.5 * (1.0 + c)).max(0.0).sqrt());
    let k2 = pauli_z().scale((0.5 * (1.0 - c)).max(0.0).sqrt());
    KrausChannel::new(vec![k1, k2]).expect("two finite operators")
}

/// Phase damping with decoherence exponent Γ: off-diagonals scale by e^{−Γ}.
pub fn dephasing_channel(gamma: f64) -> Result<KrausChannel> {
    if !(gamma >= 0.0) {
        return Err(Error::Domain(format!(
            "decoherence exponent must be >= 0, got {gamma}"
        )));
    }
    Ok(coherence_channel((-gamma).exp()))
}

/// Colored-noise dephasing with memory kernel value Λ ∈ [−1, 1].
pub fn colored_noise_channel(lambda: f64) -> Result<KrausChannel> {
    if !(lambda.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "|Lambda| must be <= 1, got {lambda}"
        )));
    }
    Ok(coherence_channel(lambda))
}

/// Random-telegraph noise amplitude `a` and mean flip time `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColoredNoiseParams {
    a: f64,
    tau: f64,
}

/// Which closed form of Λ(ν) applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseRegime {
    /// 4aτ > 1, μ = √((4aτ)² − 1).
    Oscillatory { mu: f64 },
    /// 4aτ ≈ 1, Λ = e^{−ν}(1 + ν).
    Critical,
    /// 4aτ < 1, μ̃ = √(1 − (4aτ)²).
    Overdamped { mu: f64 },
}

impl ColoredNoiseParams {
    pub fn new(a: f64, tau: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!(
                "noise amplitude a must be > 0, got {a}"
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Domain(format!(
                "flip time tau must be > 0, got {tau}"
            )));
        }
        Ok(Self { a, tau })
    }

    /// Unit flip time with amplitude a = aτ.
    pub fn from_a_tau(a_tau: f64) -> Result<Self> {
        Self::new(a_tau, 1.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn regime(&self) -> NoiseRegime {
        let x = 4.0 * self.a * self.tau;
        if (x - 1.0).abs() <= CRITICAL_BAND {
            NoiseRegime::Critical
        } else if x > 1.0 {
            NoiseRegime::Oscillatory {
                mu: (x * x - 1.0).sqrt(),
            }
        } else {
            NoiseRegime::Overdamped {
                mu: (1.0 - x * x).sqrt(),
            }
        }
    }
}

/// Memory kernel Λ(ν) = e^{−ν}(cos μν + sin(μν)/μ), continued to real
/// hyperbolic form below 4aτ = 1.
pub fn lambda_of_nu(params: &ColoredNoiseParams, nu: f64) -> f64 {
    let decay = (-nu).exp();
    match params.regime() {
        NoiseRegime::Oscillatory { mu } => decay * ((mu * nu).cos() + (mu * nu).sin() / mu),
        NoiseRegime::Critical => decay * (1.0 + nu),
        NoiseRegime::Overdamped { mu } => {
            // cosh x + sinh x / μ written with e^{−ν} folded in to avoid
            // overflow at large ν.
            let grow = (-(1.0 - mu) * nu).exp();
            let shrink = (-(1.0 + mu) * nu).exp();
            0.5 * (grow + shrink) + 0.5 * (grow - shrink) / mu
        }
    }
}

/// dΛ/dν.
pub fn lambda_derivative(params: &ColoredNoiseParams, nu: f64) -> f64 {
    let decay = (-nu).exp();
    match params.regime() {
        NoiseRegime::Oscillatory { mu } => -decay * (mu * nu).sin() * (mu * mu + 1.0) / mu,
        NoiseRegime::Critical => -nu * decay,
        NoiseRegime::Overdamped { mu } => {
            let grow = (-(1.0 - mu) * nu).exp();
            let shrink = (-(1.0 + mu) * nu).exp();
            -0.5 * (grow - shrink) * (1.0 - mu * mu) / mu
        }
    }
}

/// Off-diagonal multiplier of a pure-dephasing family and its time
/// derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    pub factor: f64,
    pub rate: f64,
}

/// A time-indexed family of channels Φ(t, 0).
pub trait DynamicalMap: Sync {
    fn channel(&self, t: f64) -> Result<KrausChannel>;

    /// Closed-form coherence factor, for families that only dephase in the
    /// computational basis.
    fn coherence(&self, _t: f64) -> Result<Option<Coherence>> {
        Ok(None)
    }

    fn affine(&self, t: f64) -> Result<AffineMap> {
        Ok(self.channel(t)?.to_affine())
    }
}

impl<M: DynamicalMap + ?Sized> DynamicalMap for &M {
    fn channel(&self, t: f64) -> Result<KrausChannel> {
        (**self).channel(t)
    }

    fn coherence(&self, t: f64) -> Result<Option<Coherence>> {
        (**self).coherence(t)
    }

    fn affine(&self, t: f64) -> Result<AffineMap> {
        (**self).affine(t)
    }
}

/// Phase damping by a zero-temperature bath with Ohmic-like spectral
/// density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmicDephasing {
    pub spectral: SpectralParams,
    pub quadrature: QuadratureConfig,
}

impl OhmicDephasing {
    pub fn new(spectral: SpectralParams) -> Self {
        Self {
            spectral,
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn gamma_big(&self, t: f64) -> Result<f64> {
        gamma_big(&self.spectral, t, &self.quadrature)
    }

    pub fn gamma_rate(&self, t: f64) -> Result<f64> {
        gamma_rate(&self.spectral, t, &self.quadrature)
    }
}

impl DynamicalMap for OhmicDephasing {
    fn channel(&self, t: f64) -> Result<KrausChannel> {
        dephasing_channel(self.gamma_big(t)?)
    }

    fn coherence(&self, t: f64) -> Result<Option<Coherence>> {
        let factor = (-self.gamma_big(t)?).exp();
        let rate = -self.gamma_rate(t)? * factor;
        Ok(Some(Coherence { factor, rate }))
    }

    fn affine(&self, t: f64) -> Result<AffineMap> {
        Ok(AffineMap::dephasing((-self.gamma_big(t)?).exp()))
    }
}

/// Dephasing by random telegraph noise along z; ν = t/(2τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoredNoise {
    pub params: ColoredNoiseParams,
}

impl ColoredNoise {
    pub fn new(params: ColoredNoiseParams) -> Self {
        Self { params }
    }

    pub fn nu(&self, t: f64) -> f64 {
        t / (2.0 * self.params.tau)
    }

    pub fn lambda(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be >= 0, got {t}")));
        }
        Ok(lambda_of_nu(&self.params, self.nu(t)).clamp(-1.0, 1.0))
    }
}

impl DynamicalMap for ColoredNoise {
    fn channel(&self, t: f64) -> Result<KrausChannel> {
        colored_noise_channel(self.lambda(t)?)
    }

    fn coherence(&self, t: f64) -> Result<Option<Coherence>> {
        let factor = self.lambda(t)?;
        let rate = lambda_derivative(&self.params, self.nu(t)) / (2.0 * self.params.tau);
        Ok(Some(Coherence { factor, rate }))
    }

    fn affine(&self, t: f64) -> Result<AffineMap> {
        Ok(AffineMap::dephasing(self.lambda(t)?))
    }
}

/// Caches a family's evaluations by exact time value. Endpoint refinement
/// for many initial states probes the same times, and each probe of the
/// Ohmic family costs two quadratures.
pub struct Memoized<M> {
    inner: M,
    channels: Mutex<HashMap<u64, KrausChannel>>,
    coherences: Mutex<HashMap<u64, Option<Coherence>>>,
}

impl<M: DynamicalMap> Memoized<M> {
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            channels: Mutex::new(HashMap::new()),
            coherences: Mutex::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: DynamicalMap> DynamicalMap for Memoized<M> {
    fn channel(&self, t: f64) -> Result<KrausChannel> {
        let key = t.to_bits();
        if let Some(hit) = self.channels.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let value = self.inner.channel(t)?;
        self.channels.lock().unwrap().insert(key, value.clone());
        Ok(value)
    }

    fn coherence(&self, t: f64) -> Result<Option<Coherence>> {
        let key = t.to_bits();
        if let Some(hit) = self.coherences.lock().unwrap().get(&key) {
            return Ok(*hit);
        }
        let value = self.inner.coherence(t)?;
        self.coherences.lock().unwrap().insert(key, value);
        Ok(value)
    }

    fn affine(&self, t: f64) -> Result<AffineMap> {
        self.inner.affine(t)
    }
}

/// Intermediate map Φ(t₂, t₁) = Φ(t₂, 0) Φ(t₁, 0)⁻¹ in affine form.
///
/// Fails with [`Error::NonInvertible`] when the condition number of M(t₁)
/// exceeds [`MAX_CONDITION`].
pub fn intermediate_map<M: DynamicalMap + ?Sized>(map: &M, t1: f64, t2: f64) -> Result<AffineMap> {
    if !(t1 >= 0.0 && t2 >= t1) {
        return Err(Error::Input(format!(
            "need 0 <= t1 <= t2, got t1 = {t1}, t2 = {t2}"
        )));
    }
    if t1 == t2 {
        return Ok(AffineMap::identity());
    }
    let first = map.affine(t1)?;
    let second = map.affine(t2)?;
    divide(&first, &second, t1)
}

/// Affine map X with `first.then(X) == second`.
pub(super) fn divide(first: &AffineMap, second: &AffineMap, t1: f64) -> Result<AffineMap> {
    let condition = first.condition_number();
    let inverse = match first.matrix.try_inverse() {
        Some(inv) if condition <= MAX_CONDITION => inv,
        _ => {
            return Err(Error::NonInvertible {
                time: t1,
                condition,
            })
        }
    };
    let matrix = second.matrix * inverse;
    let translation = second.translation - matrix * first.translation;
    Ok(AffineMap::new(translation, matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{hermitian_eigenvalues, CHANNEL_TOL};
    use crate::qubit::QubitState;
    use nalgebra::{Matrix3, Vector3};

    #[test]
    fn dephasing_limits() {
        let id = dephasing_channel(0.0).unwrap();
        let rho = QubitState::from_bloch_xyz(0.2, 0.4, 0.1).unwrap();
        assert!((id.apply(&rho).unwrap().bloch() - rho.bloch()).norm() < 1e-15);

        let full = dephasing_channel(800.0).unwrap();
        let plus = QubitState::from_bloch_xyz(1.0, 0.0, 0.0).unwrap();
        let out = full.apply(&plus).unwrap();
        assert!(out.bloch().norm() < 1e-15);

        assert!(matches!(dephasing_channel(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn dephasing_scales_coherences() {
        let gamma = 0.7;
        let ch = dephasing_channel(gamma).unwrap();
        let rho = QubitState::from_bloch_xyz(0.3, -0.5, 0.4).unwrap();
        let out = ch.apply(&rho).unwrap();
        let m_in = rho.matrix();
        let m_out = out.matrix();
        assert!((m_out[(0, 0)] - m_in[(0, 0)]).norm() < 1e-15);
        assert!((m_out[(1, 1)] - m_in[(1, 1)]).norm() < 1e-15);
        assert!((m_out[(0, 1)] - m_in[(0, 1)] * (-gamma).exp()).norm() < 1e-15);

        let e = ch
            .apply(&QubitState::from_bloch_xyz(1.0, 0.0, 0.0).unwrap())
            .unwrap()
            .eigenvalues()
            .unwrap();
        assert!((e.lambda_plus - 0.5 * (1.0 + (-gamma).exp())).abs() < 1e-15);
    }

    #[test]
    fn dephasing_affine_and_choi() {
        let gamma: f64 = 1.3;
        let d = (-gamma).exp();
        let ch = dephasing_channel(gamma).unwrap();
        assert!(ch.is_unital(CHANNEL_TOL));
        assert!(ch.is_trace_preserving(CHANNEL_TOL));
        let aff = ch.to_affine();
        assert_eq!(aff.translation, Vector3::zeros());
        let want = Matrix3::from_diagonal(&Vector3::new(d, d, 1.0));
        assert!((aff.matrix - want).abs().max() < 1e-15);

        let ev = hermitian_eigenvalues(&ch.choi_matrix());
        let want = [0.0, 0.0, 1.0 - d, 1.0 + d];
        for (g, w) in ev.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn colored_noise_channel_limits() {
        let rho = QubitState::from_bloch_xyz(0.3, 0.4, 0.5).unwrap();
        let id = colored_noise_channel(1.0).unwrap();
        assert!((id.apply(&rho).unwrap().bloch() - rho.bloch()).norm() < 1e-15);

        let kill = colored_noise_channel(0.0).unwrap();
        assert!((kill.apply(&rho).unwrap().bloch() - Vector3::new(0.0, 0.0, 0.5)).norm() < 1e-15);

        let flip = colored_noise_channel(-1.0).unwrap();
        assert_eq!(flip.operators()[0], identity().scale(0.0));
        assert!((flip.apply(&rho).unwrap().bloch() - Vector3::new(-0.3, -0.4, 0.5)).norm() < 1e-15);

        assert!(colored_noise_channel(1.0001).is_err());
        assert!(colored_noise_channel(f64::NAN).is_err());
    }

    #[test]
    fn colored_noise_affine_form() {
        let ch = colored_noise_channel(-0.35).unwrap();
        assert!(ch.is_unital(CHANNEL_TOL));
        let aff = ch.to_affine();
        assert_eq!(aff.translation, Vector3::zeros());
        let want = Matrix3::from_diagonal(&Vector3::new(-0.35, -0.35, 1.0));
        assert!((aff.matrix - want).abs().max() < 1e-15);
    }

    #[test]
    fn kraus_convention_matches_paper_form() {
        // Both families use Hermitian operators, so the adjoint convention
        // gives the same channel.
        let ch = dephasing_channel(0.4).unwrap();
        let adj = KrausChannel::from_adjoint_convention(ch.operators().to_vec()).unwrap();
        assert_eq!(ch, adj);
        assert!(adj.is_unital(CHANNEL_TOL));
    }

    #[test]
    fn lambda_fixtures() {
        for a_tau in [0.1, 0.25, 0.5, 2.0] {
            let p = ColoredNoiseParams::from_a_tau(a_tau).unwrap();
            assert_eq!(lambda_of_nu(&p, 0.0), 1.0);
        }
        let crit = ColoredNoiseParams::from_a_tau(0.25).unwrap();
        assert_eq!(crit.regime(), NoiseRegime::Critical);
        for nu in [0.0, 0.5, 3.0, 10.0] {
            assert!((lambda_of_nu(&crit, nu) - (-nu).exp() * (1.0 + nu)).abs() < 1e-16);
        }
    }

    #[test]
    fn lambda_series_near_critical() {
        // Second-order expansion in μ² about 4aτ = 1:
        // Λ ≈ e^{−ν}(1 + ν ∓ μ²(ν²/2 + ν³/6)), minus on the oscillatory side.
        for (a_tau, sign) in [(0.25 * (1.0 + 1e-4), -1.0), (0.25 * (1.0 - 1e-4), 1.0)] {
            let p = ColoredNoiseParams::from_a_tau(a_tau).unwrap();
            let x = 4.0 * a_tau;
            let mu2 = (x * x - 1.0f64).abs();
            for nu in [0.5f64, 2.0, 6.0] {
                let series =
                    (-nu).exp() * (1.0 + nu + sign * mu2 * (nu * nu / 2.0 + nu.powi(3) / 6.0));
                assert!(
                    (lambda_of_nu(&p, nu) - series).abs() < 1e-7,
                    "aτ={a_tau}, ν={nu}"
                );
            }
        }
    }

    #[test]
    fn lambda_oscillates_when_strongly_coupled() {
        let p = ColoredNoiseParams::from_a_tau(0.6).unwrap();
        let crosses = (0..2000)
            .map(|i| lambda_of_nu(&p, i as f64 * 0.01))
            .any(|v| v < 0.0);
        assert!(crosses);
    }

    #[test]
    fn lambda_derivative_matches_finite_difference() {
        for a_tau in [0.1, 0.25, 0.7, 3.0] {
            let p = ColoredNoiseParams::from_a_tau(a_tau).unwrap();
            for nu in [0.05, 0.4, 1.7, 5.0] {
                let h = 1e-6;
                let fd = (lambda_of_nu(&p, nu + h) - lambda_of_nu(&p, nu - h)) / (2.0 * h);
                assert!((fd - lambda_derivative(&p, nu)).abs() < 1e-7, "aτ={a_tau}");
            }
        }
    }

    #[test]
    fn colored_params_validated() {
        assert!(ColoredNoiseParams::new(0.0, 1.0).is_err());
        assert!(ColoredNoiseParams::new(1.0, -2.0).is_err());
    }

    #[test]
    fn intermediate_identity_and_errors() {
        let fam = ColoredNoise::new(ColoredNoiseParams::from_a_tau(2.0).unwrap());
        assert_eq!(
            intermediate_map(&fam, 1.2, 1.2).unwrap(),
            AffineMap::identity()
        );
        assert!(matches!(
            intermediate_map(&fam, 2.0, 1.0),
            Err(Error::Input(_))
        ));

        let singular = AffineMap::dephasing(0.0);
        assert!(matches!(
            divide(&singular, &AffineMap::identity(), 3.0),
            Err(Error::NonInvertible { .. })
        ));
        let ill = AffineMap::dephasing(1e-13);
        assert!(matches!(
            divide(&ill, &AffineMap::identity(), 3.0),
            Err(Error::NonInvertible { .. })
        ));
    }

    #[test]
    fn intermediate_composes_back() {
        let fam = ColoredNoise::new(ColoredNoiseParams::from_a_tau(1.5).unwrap());
        let (t1, t2) = (0.3, 2.9);
        let mid = intermediate_map(&fam, t1, t2).unwrap();
        let recomposed = fam.affine(t1).unwrap().then(&mid);
        let direct = fam.affine(t2).unwrap();
        assert!((recomposed.matrix - direct.matrix).abs().max() < 1e-9);
        assert!((recomposed.translation - direct.translation).norm() < 1e-9);
    }

    #[test]
    fn memoized_returns_same_values() {
        let fam = Memoized::new(ColoredNoise::new(
            ColoredNoiseParams::from_a_tau(2.0).unwrap(),
        ));
        let a = fam.coherence(0.77).unwrap();
        let b = fam.coherence(0.77).unwrap();
        assert_eq!(a, b);
        assert_eq!(fam.channel(0.5).unwrap(), fam.inner().channel(0.5).unwrap());
    }
}
