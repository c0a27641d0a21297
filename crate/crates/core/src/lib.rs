//! Quantized hydrodynamics on the sphere.
//!
//! The crate implements the su(N) discretization of the 2-D Euler vorticity
//! equation on S² together with the machinery needed to measure how well the
//! finite-dimensional side tracks the continuous one:
//!
//! - [`wigner`]: exact 3j/6j symbols and associated Legendre functions
//! - [`sphere`]: band-limited functions, spectral operators, Poisson bracket
//! - [`quant`]: quantized harmonics T^N_lm, projection/embedding, matrix norms
//! - [`dynamics`]: isospectral time integration and conserved quantities
//! - [`curvature`]: sectional curvature on both sides and its convergence
//! - [`jacobi`]: reduced Jacobi (stability) equations on both sides
//! - [`report`]: convergence rows and log-log rate fitting
//! - [`rng`]: seeded band-limited test functions
//! - [`io`]: coefficient and matrix file formats

pub mod curvature;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod jacobi;
pub mod quant;
pub mod report;
pub mod rng;
pub mod sphere;
pub mod wigner;

pub use error::CoreError;

/// Quantization parameter ħ_N = 2/(N−1) used in the rescaled bracket
/// [·,·]_N = (1/ħ_N)[·,·]. Convergence rates are measured against it.
pub fn hbar(n: usize) -> f64 {
    assert!(n >= 2, "hbar needs N >= 2");
    2.0 / (n as f64 - 1.0)
}

/// Representation-theoretic scale 2/√(N²−1).
///
/// This is the constant for which the generator identities are exact:
/// [X¹,X²] = ħ̃ X³ (and cyclic), the double-commutator Laplacian, and
/// p_N-relatedness of ∇^⊥ with [X^i,·]/ħ̃. It agrees with [`hbar`] to O(ħ²).
pub fn hbar_rep(n: usize) -> f64 {
    assert!(n >= 2, "hbar_rep needs N >= 2");
    2.0 / (((n * n - 1) as f64).sqrt())
}
