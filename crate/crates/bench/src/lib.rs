//! Shared fixtures for the criterion benchmarks.

use ffg_core::fockspace::SystemParams;
use ffg_core::linalg::{c, CMat};

/// Monochromatic oscillator at the default coupling on `n` levels.
pub fn mono_params(n: usize) -> SystemParams {
    SystemParams {
        n_fock: n,
        ..SystemParams::default()
    }
}

/// Deterministic dense Hermitian matrix.
pub fn hermitian(n: usize) -> CMat {
    let a = CMat::from_fn(n, n, |i, j| {
        let x = ((i * 31 + j * 17) % 97) as f64 / 97.0 - 0.5;
        let y = ((i * 13 + j * 29) % 89) as f64 / 89.0 - 0.5;
        c(x, y)
    });
    (&a + a.adjoint()) * c(0.5, 0.0)
}
