#![allow(dead_code)]

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unital_nm::qubit::{CMatrix2, QubitState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn unit_vector<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(normal(rng), normal(rng), normal(rng));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

/// Uniform in the Bloch ball of radius `max_radius`.
pub fn random_state<R: Rng>(rng: &mut R, max_radius: f64) -> QubitState {
    let r = max_radius * rng.gen::<f64>().cbrt();
    QubitState::from_bloch(unit_vector(rng) * r).unwrap()
}

pub fn random_pure<R: Rng>(rng: &mut R) -> QubitState {
    QubitState::from_bloch(unit_vector(rng)).unwrap()
}

/// Kraus operators of a Haar-like random channel: the `count` 2×2 blocks of
/// the orthonormal factor of a Gaussian (2·count)×2 matrix.
pub fn random_kraus<R: Rng>(rng: &mut R, count: usize) -> Vec<CMatrix2> {
    let g = DMatrix::from_fn(2 * count, 2, |_, _| {
        Complex64::new(normal(rng), normal(rng))
    });
    let q = g.qr().q();
    (0..count)
        .map(|k| CMatrix2::from_fn(|i, j| q[(2 * k + i, j)]))
        .collect()
}

/// Random unitary from the QR factor of a Gaussian 2×2 matrix.
pub fn random_unitary<R: Rng>(rng: &mut R) -> CMatrix2 {
    random_kraus(rng, 1).remove(0)
}
