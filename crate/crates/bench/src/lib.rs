//! Shared fixtures for the `qbattery` benchmarks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qbattery::{InitialAmplitudes, SystemParams};

/// Parameter sets spanning the memory ratios and coupling regimes.
pub fn regimes() -> Vec<(&'static str, SystemParams)> {
    [
        ("markovian_underdamped", 0.05, 0.01),
        ("balanced", 1.0, 1.0),
        ("confluent", 1.0, 0.5),
        ("non_markovian_overdamped", 10.0, 100.0),
    ]
    .into_iter()
    .map(|(name, gamma, r)| {
        (
            name,
            SystemParams::with_memory_ratio(1.0, 1.0, gamma, r, 0.5 * gamma).unwrap(),
        )
    })
    .collect()
}

pub fn charger_excited() -> InitialAmplitudes {
    InitialAmplitudes::charger_excited()
}

/// `n` points evenly spread over `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

/// Deterministic mixed state of dimension `d` with non-degenerate spectrum
/// and coherences, together with a non-diagonal Hamiltonian.
pub fn mixed_state(d: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let g = DMatrix::from_fn(d, d, |i, j| {
        Complex64::new(
            ((i * 7 + j * 3) % 5) as f64 + 0.5,
            (i as f64 - j as f64) * 0.3,
        )
    });
    let rho = &g * g.adjoint();
    let rho = &rho / rho.trace();
    let h = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.1, 0.05 * (i as f64 - j as f64))
        }
    });
    (rho, h)
}
