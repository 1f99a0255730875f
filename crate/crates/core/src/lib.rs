//! Detection and quantification of non-Markovianity for unital qubit
//! dynamics.
//!
//! Unital channels never decrease the von Neumann entropy, so along a
//! divisible unital evolution the entropy is nondecreasing. Any temporary
//! decrease, equivalently any rise of the larger eigenvalue λ₊ of ρ(t),
//! witnesses back-flow of information from the environment. The degree
//! N_e is the total rise of λ₊, maximized over initial states.
//!
//! Modules:
//! - [`qubit`]: states, spectra, entropies, distances.
//! - [`channels`]: Kraus and affine channels, Choi matrices, divisibility,
//!   and the Ohmic phase-damping and colored-noise families.
//! - [`spectral`]: Ohmic-like spectral density and the dephasing exponent.
//! - [`measure`]: interval detection and the N_e / N_S degrees.
//! - [`exec`]: serial or rayon-backed maps (feature `parallel`).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod exec;
pub mod measure;
pub mod qubit;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
