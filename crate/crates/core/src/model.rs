//! Physical parameters, regime classification and the Lorentzian reservoir.
//!
//! Units are ħ = 1. Each qubit (charger A, battery B) couples to its own
//! bosonic reservoir with the Lorentzian spectral density
//!
//! ```text
//! J(ω) = γ λ² / (2π [(ω₀ − ω − Δ)² + λ²])
//! ```
//!
//! whose correlation function is the exponential memory kernel
//! `k(τ) = ½ γ λ exp((−λ + iΔ) τ)` with Laplace image `½ γ λ / (s + λ − iΔ)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Tolerance on `|mu0|² + |nu0|² = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Physical constants of one simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Qubit transition frequency ω₀.
    pub omega0: f64,
    /// Charger–battery coupling κ.
    pub kappa: f64,
    /// Effective system–bath coupling γ.
    pub gamma: f64,
    /// Lorentzian width λ.
    pub lambda: f64,
    /// Detuning Δ between ω₀ and the bath central frequency.
    pub delta: f64,
}

impl SystemParams {
    /// Builds and validates a parameter set.
    pub fn new(omega0: f64, kappa: f64, gamma: f64, lambda: f64, delta: f64) -> Result<Self> {
        SystemParams {
            omega0,
            kappa,
            gamma,
            lambda,
            delta,
        }
        .validate()
    }

    /// Builds a parameter set from the memory ratio `R = γ/λ` instead of λ.
    pub fn with_memory_ratio(
        omega0: f64,
        kappa: f64,
        gamma: f64,
        memory_ratio: f64,
        delta: f64,
    ) -> Result<Self> {
        if !memory_ratio.is_finite() || memory_ratio <= 0.0 {
            return Err(invalid("R", "must be positive and finite"));
        }
        if gamma.is_finite() && gamma <= 0.0 {
            return Err(invalid(
                "gamma",
                "must be positive when the bath width is given as R",
            ));
        }
        Self::new(omega0, kappa, gamma, gamma / memory_ratio, delta)
    }

    /// Returns `self` unchanged when every invariant holds.
    pub fn validate(self) -> Result<Self> {
        let fields = [
            ("omega0", self.omega0),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("delta", self.delta),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.omega0 <= 0.0 {
            return Err(invalid("omega0", "must be positive"));
        }
        if self.gamma < 0.0 {
            return Err(invalid("gamma", "must be non-negative"));
        }
        if self.lambda <= 0.0 {
            return Err(invalid("lambda", "must be positive"));
        }
        if self.kappa < 0.0 {
            return Err(invalid("kappa", "must be non-negative"));
        }
        if !(self.gamma / self.lambda).is_finite() {
            return Err(invalid("lambda", "gives a non-finite memory ratio"));
        }
        Ok(self)
    }

    /// `R = γ/λ`.
    pub fn memory_ratio(&self) -> f64 {
        self.gamma / self.lambda
    }

    /// `λ − iΔ`, the complex decay constant of the kernel.
    pub fn kernel_rate(&self) -> Complex64 {
        Complex64::new(self.lambda, -self.delta)
    }

    /// Largest rate in the problem; sets the stiffness of time stepping.
    pub fn max_rate(&self) -> f64 {
        self.kappa
            .max(self.gamma)
            .max(self.lambda)
            .max(self.delta.abs())
    }

    /// Memory kernel `k(τ) = ½ γ λ e^{(−λ+iΔ)τ}`.
    pub fn memory_kernel(&self, tau: f64) -> Result<Complex64> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::InvalidTime(format!(
                "kernel lag must be >= 0, got {tau}"
            )));
        }
        let amplitude = 0.5 * self.gamma * self.lambda;
        Ok(amplitude * (-self.kernel_rate() * tau).exp())
    }

    /// Laplace image of the kernel, `½ γ λ / (s + λ − iΔ)`.
    pub fn kernel_laplace(&self, s: Complex64) -> Result<Complex64> {
        let shifted = s + self.kernel_rate();
        let scale = s.norm() + self.lambda + self.delta.abs();
        if shifted.norm() <= f64::EPSILON * scale {
            return Err(Error::KernelPole {
                re: -self.lambda,
                im: self.delta,
            });
        }
        Ok(0.5 * self.gamma * self.lambda / shifted)
    }

    /// Lorentzian spectral density, peaked at `ω = ω₀ − Δ` with height `γ/(2π)`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let offset = self.omega0 - omega - self.delta;
        self.gamma * self.lambda * self.lambda
            / (2.0 * PI * (offset * offset + self.lambda * self.lambda))
    }

    pub fn classify_regime(&self) -> RegimeReport {
        RegimeReport::from_ratios(self.memory_ratio(), self.damping_ratio())
    }

    /// `γ/κ`; infinite when the qubits are uncoupled.
    pub fn damping_ratio(&self) -> f64 {
        if self.kappa == 0.0 {
            f64::INFINITY
        } else {
            self.gamma / self.kappa
        }
    }
}

/// Initial charger and battery excitation amplitudes `μ(0)`, `ν(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialAmplitudes {
    pub mu0: Complex64,
    pub nu0: Complex64,
}

impl InitialAmplitudes {
    pub fn new(mu0: Complex64, nu0: Complex64) -> Result<Self> {
        let norm = mu0.norm_sqr() + nu0.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::UnnormalizedInit { norm });
        }
        Ok(InitialAmplitudes { mu0, nu0 })
    }

    /// Charger excited, battery empty.
    pub fn charger_excited() -> Self {
        InitialAmplitudes {
            mu0: Complex64::new(1.0, 0.0),
            nu0: Complex64::new(0.0, 0.0),
        }
    }

    /// Battery excited, charger empty.
    pub fn battery_excited() -> Self {
        InitialAmplitudes {
            mu0: Complex64::new(0.0, 0.0),
            nu0: Complex64::new(1.0, 0.0),
        }
    }

    pub fn swapped(self) -> Self {
        InitialAmplitudes {
            mu0: self.nu0,
            nu0: self.mu0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkovianityLabel {
    MarkovianLike,
    Intermediate,
    NonMarkovianLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingLabel {
    Underdamped,
    Intermediate,
    Overdamped,
    Uncoupled,
}

impl fmt::Display for MarkovianityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkovianityLabel::MarkovianLike => "markovian-like",
            MarkovianityLabel::Intermediate => "intermediate",
            MarkovianityLabel::NonMarkovianLike => "non-markovian-like",
        })
    }
}

impl fmt::Display for DampingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DampingLabel::Underdamped => "underdamped",
            DampingLabel::Intermediate => "intermediate",
            DampingLabel::Overdamped => "overdamped",
            DampingLabel::Uncoupled => "uncoupled",
        })
    }
}

/// Advisory labels for the memory ratio `γ/λ` and damping ratio `γ/κ`.
///
/// Both ratios use the same decade thresholds: below 0.1 is the weak side,
/// above 10 the strong side. Labels never gate any computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub memory_ratio: f64,
    pub damping_ratio: f64,
    pub markovianity: MarkovianityLabel,
    pub damping: DampingLabel,
}

impl RegimeReport {
    pub const LOW: f64 = 0.1;
    pub const HIGH: f64 = 10.0;

    pub fn from_ratios(memory_ratio: f64, damping_ratio: f64) -> Self {
        let markovianity = if memory_ratio < Self::LOW {
            MarkovianityLabel::MarkovianLike
        } else if memory_ratio > Self::HIGH {
            MarkovianityLabel::NonMarkovianLike
        } else {
            MarkovianityLabel::Intermediate
        };
        let damping = if damping_ratio.is_infinite() {
            DampingLabel::Uncoupled
        } else if damping_ratio < Self::LOW {
            DampingLabel::Underdamped
        } else if damping_ratio > Self::HIGH {
            DampingLabel::Overdamped
        } else {
            DampingLabel::Intermediate
        };
        RegimeReport {
            memory_ratio,
            damping_ratio,
            markovianity,
            damping,
        }
    }
}
