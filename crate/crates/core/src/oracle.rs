//! Fixed-step RK4 integration of the memory equations
//!
//! ```text
//! μ̇ = −iκν − ∫₀ᵗ k(t−t′) μ(t′) dt′,   ν̇ = −iκμ − ∫₀ᵗ k(t−t′) ν(t′) dt′.
//! ```
//!
//! For the exponential kernel each convolution `x(t) = ∫₀ᵗ k(t−t′) f(t′) dt′`
//! obeys `ẋ = (−λ + iΔ) x + ½γλ f` with `x(0) = 0`, so the integro-differential
//! system becomes a four-dimensional linear ODE. This path shares nothing with
//! the pole/residue solver and serves as its independent check.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laplace::{check_grid, AmplitudePair};
use crate::model::{InitialAmplitudes, SystemParams};

/// Upper bound on `step * max rate`.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Default step in units of the dominant coupling (κ, or γ when κ = 0).
pub const DEFAULT_SCALED_STEP: f64 = 1e-4;

/// `(μ, ν)` together with their running kernel convolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState {
    pub mu: Complex64,
    pub nu: Complex64,
    /// `∫₀ᵗ k(t−t′) μ(t′) dt′`
    pub memory_a: Complex64,
    /// `∫₀ᵗ k(t−t′) ν(t′) dt′`
    pub memory_b: Complex64,
}

impl Add for AugmentedState {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        AugmentedState {
            mu: self.mu + o.mu,
            nu: self.nu + o.nu,
            memory_a: self.memory_a + o.memory_a,
            memory_b: self.memory_b + o.memory_b,
        }
    }
}

impl Mul<f64> for AugmentedState {
    type Output = Self;
    fn mul(self, h: f64) -> Self {
        AugmentedState {
            mu: self.mu * h,
            nu: self.nu * h,
            memory_a: self.memory_a * h,
            memory_b: self.memory_b * h,
        }
    }
}

impl AugmentedState {
    pub fn initial(init: &InitialAmplitudes) -> Self {
        AugmentedState {
            mu: init.mu0,
            nu: init.nu0,
            memory_a: Complex64::new(0.0, 0.0),
            memory_b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn derivative(&self, p: &SystemParams) -> Self {
        let i_kappa = Complex64::new(0.0, p.kappa);
        let relax = -p.kernel_rate();
        let feed = 0.5 * p.gamma * p.lambda;
        AugmentedState {
            mu: -i_kappa * self.nu - self.memory_a,
            nu: -i_kappa * self.mu - self.memory_b,
            memory_a: relax * self.memory_a + feed * self.mu,
            memory_b: relax * self.memory_b + feed * self.nu,
        }
    }

    pub fn system_population(&self) -> f64 {
        self.mu.norm_sqr() + self.nu.norm_sqr()
    }

    fn rk4_step(&self, p: &SystemParams, h: f64) -> Self {
        let k1 = self.derivative(p);
        let k2 = (*self + k1 * (0.5 * h)).derivative(p);
        let k3 = (*self + k2 * (0.5 * h)).derivative(p);
        let k4 = (*self + k3 * h).derivative(p);
        *self + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
    }
}

/// States sampled on a time grid.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub times: Vec<f64>,
    pub states: Vec<AugmentedState>,
    /// Largest excess of `|μ|² + |ν|²` over its initial value seen at any internal step.
    pub max_norm_drift: f64,
}

impl OracleRun {
    pub fn amplitudes(&self) -> Vec<AmplitudePair> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&time, s)| AmplitudePair {
                time,
                mu: s.mu,
                nu: s.nu,
            })
            .collect()
    }
}

/// `1e-4` in units of κ (γ when uncoupled), clipped to the stability guard.
pub fn default_step(p: &SystemParams) -> f64 {
    let unit = if p.kappa > 0.0 {
        p.kappa
    } else if p.gamma > 0.0 {
        p.gamma
    } else {
        1.0
    };
    let step = DEFAULT_SCALED_STEP / unit;
    let rate = p.max_rate();
    if rate > 0.0 {
        step.min(STABILITY_LIMIT / rate)
    } else {
        step
    }
}

fn check_step(p: &SystemParams, step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    let rate = p.max_rate();
    // a few ulps of slack so that e.g. 1e-4 * 1000 passes
    if step * rate > STABILITY_LIMIT * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::StepTooLarge {
            step,
            max_step: STABILITY_LIMIT / rate,
        });
    }
    Ok(())
}

/// Integrates on the uniform grid `0, h, 2h, …, t_end` with `h ≤ step`
/// chosen so that the grid lands exactly on `t_end`.
pub fn integrate(
    p: &SystemParams,
    init: &InitialAmplitudes,
    t_end: f64,
    step: f64,
) -> Result<OracleRun> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidTime(format!(
            "t_end must be >= 0, got {t_end}"
        )));
    }
    check_step(p, step)?;
    let n = (t_end / step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
    if t_end == 0.0 {
        return integrate_on_grid(p, init, &grid[..1], step);
    }
    integrate_on_grid(p, init, &grid, step)
}

/// Integrates through an arbitrary increasing grid starting at 0, taking
/// equal substeps no larger than `max_step` between consecutive grid points.
pub fn integrate_on_grid(
    p: &SystemParams,
    init: &InitialAmplitudes,
    grid: &[f64],
    max_step: f64,
) -> Result<OracleRun> {
    check_step(p, max_step)?;
    check_grid(grid)?;
    let mut state = AugmentedState::initial(init);
    let norm0 = state.system_population();
    let mut drift = 0.0f64;
    let mut t = 0.0;
    let mut states = Vec::with_capacity(grid.len());
    for &target in grid {
        let span = target - t;
        if span > 0.0 {
            let n = (span / max_step).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                state = state.rk4_step(p, h);
                drift = drift.max(state.system_population() - norm0);
            }
        }
        t = target;
        states.push(state);
    }
    Ok(OracleRun {
        times: grid.to_vec(),
        states,
        max_norm_drift: drift,
    })
}
