//! Idle battery leaking into its own reservoir (no charger coupling).
//!
//! With `κ = 0` the battery amplitude has Laplace image `1/(s + k̃(s))` and
//!
//! ```text
//! |ν_sd(t)| = e^{−λt/2} |cosh(ξt/2) + ((λ − iΔ)/ξ) sinh(ξt/2)|,   ξ² = (λ − iΔ)² − 2γλ.
//! ```
//!
//! The combination is even in `ξ`, so either square-root branch gives the same
//! value. Evaluation avoids `cosh`/`sinh` overflow at long times by factoring
//! out the dominant exponential.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::SystemParams;
use crate::observables::ergotropy_from_population;

/// `|ξ|` below this fraction of `λ` uses the confluent form.
pub const CONFLUENT_TOL: f64 = 1e-10;
/// Number of samples on `[0, horizon]` when scanning for the last crossing.
pub const DISCHARGE_SAMPLES: usize = 10_000;
/// Default horizon `T_max = 100/γ`.
pub const DEFAULT_HORIZON_GAMMA_T: f64 = 100.0;

/// Reservoir parameters of the idle battery and the derived `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfDischargeParams {
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    /// Principal root of `(λ − iΔ)² − 2γλ`.
    pub xi: Complex64,
}

/// Result of [`SelfDischargeParams::discharge_time`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DischargeTime {
    /// Last time at which the ergotropy was still at or above the threshold.
    Crossed(f64),
    /// The ergotropy is still above the threshold at the horizon.
    AboveAtHorizon { horizon: f64 },
}

impl DischargeTime {
    pub fn time(&self) -> Option<f64> {
        match *self {
            DischargeTime::Crossed(t) => Some(t),
            DischargeTime::AboveAtHorizon { .. } => None,
        }
    }
}

/// `e^{−decay} |cosh y + k · sinh(y)/y|` with `k = c·y` finite as `y → 0`.
fn damped_cosh_sinh(decay: f64, y: Complex64, k: Complex64) -> f64 {
    if y.norm() < 1.0 {
        let sinhc = if y.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            y.sinh() / y
        };
        return (-decay).exp() * (y.cosh() + k * sinhc).norm();
    }
    // cosh y + c sinh y = e^{y} [(1 + c) + (1 − c) e^{−2y}] / 2, taken with Re y ≥ 0
    let y = if y.re < 0.0 { -y } else { y };
    let c = k / y;
    let bracket = 0.5 * ((1.0 + c) + (1.0 - c) * (-2.0 * y).exp());
    (y.re - decay).exp() * bracket.norm()
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(format!(
            "t must be finite and >= 0, got {t}"
        )));
    }
    Ok(())
}

impl SelfDischargeParams {
    pub fn new(gamma: f64, lambda: f64, delta: f64) -> Result<Self> {
        // reuse the shared validation; ω₀ and κ do not enter
        SystemParams::new(1.0, 0.0, gamma, lambda, delta)?;
        let rate = Complex64::new(lambda, -delta);
        let xi = (rate * rate - 2.0 * gamma * lambda).sqrt();
        Ok(SelfDischargeParams {
            gamma,
            lambda,
            delta,
            xi,
        })
    }

    pub fn from_system(p: &SystemParams) -> Result<Self> {
        Self::new(p.gamma, p.lambda, p.delta)
    }

    /// Same parameters with `ξ → −ξ`.
    pub fn with_flipped_branch(self) -> Self {
        SelfDischargeParams {
            xi: -self.xi,
            ..self
        }
    }

    fn kernel_rate(&self) -> Complex64 {
        Complex64::new(self.lambda, -self.delta)
    }

    /// `|ν_sd(t)|` for a battery that starts fully excited.
    pub fn amplitude(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let half_rate_t = self.kernel_rate() * (0.5 * t);
        if self.xi.norm() < CONFLUENT_TOL * self.lambda {
            return Ok((-0.5 * self.lambda * t).exp() * (1.0 + half_rate_t).norm());
        }
        let y = self.xi * (0.5 * t);
        Ok(damped_cosh_sinh(0.5 * self.lambda * t, y, half_rate_t).min(1.0))
    }

    /// Battery ergotropy in units of `W_max = ω₀`.
    pub fn ergotropy(&self, t: f64) -> Result<f64> {
        let a = self.amplitude(t)?;
        Ok(ergotropy_from_population(1.0, a * a))
    }

    /// Ergotropy (units of `W_max`) for a battery handed over with excited
    /// population `initial_population`; the idle dynamics is linear, so the
    /// amplitude is rescaled by `sqrt(initial_population)`.
    pub fn ergotropy_from(&self, initial_population: f64, t: f64) -> Result<f64> {
        if !(0.0..=1.0 + 1e-9).contains(&initial_population) {
            return Err(invalid("initial_population", "must lie in [0, 1]"));
        }
        let a = self.amplitude(t)?;
        Ok(ergotropy_from_population(
            1.0,
            initial_population.min(1.0) * a * a,
        ))
    }

    /// Default scan horizon `100/γ`.
    pub fn default_horizon(&self) -> f64 {
        DEFAULT_HORIZON_GAMMA_T / self.gamma
    }

    /// Last time `t* ≤ horizon` with `W_sd(t*) ≥ threshold · W_max`.
    ///
    /// The ergotropy is sampled densely; the final sample above threshold and
    /// its successor bracket the last crossing, which is then bisected to a
    /// relative width of 1e-6.
    pub fn discharge_time(&self, threshold: f64, horizon: Option<f64>) -> Result<DischargeTime> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(invalid("threshold", "must lie in (0, 1)"));
        }
        let horizon = match horizon {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(h) => {
                return Err(Error::InvalidTime(format!(
                    "horizon must be positive, got {h}"
                )))
            }
            None if self.gamma > 0.0 => self.default_horizon(),
            None => {
                return Ok(DischargeTime::AboveAtHorizon {
                    horizon: f64::INFINITY,
                })
            }
        };
        let n = DISCHARGE_SAMPLES;
        let at = |i: usize| horizon * i as f64 / n as f64;
        let above = |t: f64| -> Result<bool> { Ok(self.ergotropy(t)? >= threshold) };

        let mut last_above = 0;
        for i in 0..=n {
            if above(at(i))? {
                last_above = i;
            }
        }
        if last_above == n {
            return Ok(DischargeTime::AboveAtHorizon { horizon });
        }
        let (mut lo, mut hi) = (at(last_above), at(last_above + 1));
        while hi - lo > 1e-6 * hi {
            let mid = 0.5 * (lo + hi);
            if above(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(DischargeTime::Crossed(lo))
    }
}

/// Resonant (`Δ = 0`) amplitude written with the memory ratio `R = γ/λ`:
/// `e^{−γt/(2R)} |cosh(γt√(1−2R)/(2R)) + sinh(γt√(1−2R)/(2R))/√(1−2R)|`.
pub fn amplitude_sd_resonant(memory_ratio: f64, gamma: f64, t: f64) -> Result<f64> {
    if !(memory_ratio > 0.0) || !memory_ratio.is_finite() {
        return Err(invalid("R", "must be positive"));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", "must be non-negative"));
    }
    check_time(t)?;
    let decay = gamma * t / (2.0 * memory_ratio);
    let gap = 1.0 - 2.0 * memory_ratio;
    if gap.abs() < 1e-10 {
        return Ok((-decay).exp() * (1.0 + decay));
    }
    let root = Complex64::new(gap, 0.0).sqrt();
    let y = root * decay;
    // sinh(y)/root = decay · sinh(y)/y
    Ok(damped_cosh_sinh(decay, y, Complex64::new(decay, 0.0)).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::build_transfer;
    use crate::model::InitialAmplitudes;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn sd(gamma: f64, r: f64, delta: f64) -> SelfDischargeParams {
        SelfDischargeParams::new(gamma, gamma / r, delta).unwrap()
    }

    #[test]
    fn xi_reconstructs_and_branch_types() {
        let p = sd(1.0, 0.3, 0.7);
        let rate = Complex64::new(p.lambda, -p.delta);
        assert!((p.xi * p.xi - (rate * rate - 2.0 * p.gamma * p.lambda)).norm() < 1e-14);
        let p = sd(1.0, 0.2, 0.0);
        assert!(p.xi.re > 0.0 && p.xi.im == 0.0);
        let p = sd(1.0, 2.0, 0.0);
        assert!(p.xi.re == 0.0 && p.xi.im != 0.0);
    }

    #[test]
    fn starts_full() {
        for (r, d) in [(0.01, 0.0), (0.5, 0.0), (100.0, 2.0)] {
            assert_relative_eq!(sd(1.0, r, d).amplitude(0.0).unwrap(), 1.0, epsilon = 1e-15);
            assert_relative_eq!(sd(1.0, r, d).ergotropy(0.0).unwrap(), 1.0, epsilon = 1e-14);
        }
        assert!(sd(1.0, 1.0, 0.0).amplitude(-0.1).is_err());
    }

    #[test]
    fn critical_ratio_closed_form() {
        let p = SelfDischargeParams::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(p.xi.norm(), 0.0);
        assert_relative_eq!(p.amplitude(1.0).unwrap(), 2.0 / E, epsilon = 1e-15);
        for t in [0.3, 2.0, 7.5] {
            assert_relative_eq!(
                p.amplitude(t).unwrap(),
                (-t).exp() * (1.0 + t),
                max_relative = 1e-14
            );
        }
        assert_relative_eq!(
            amplitude_sd_resonant(0.5, 1.0, 1.0).unwrap(),
            2.0 / E,
            epsilon = 1e-15
        );
    }

    #[test]
    fn matches_uncoupled_pole_residue_solution() {
        let p = SystemParams::with_memory_ratio(1.0, 0.0, 1.0, 100.0, 0.0).unwrap();
        let form = build_transfer(&p, &InitialAmplitudes::charger_excited()).unwrap();
        let expected = form.evaluate(5.0).unwrap().mu.norm();
        let got = SelfDischargeParams::from_system(&p)
            .unwrap()
            .amplitude(5.0)
            .unwrap();
        assert!((got - expected).abs() < 1e-9);
    }

    #[test]
    fn resonant_weak_memory_is_exponential() {
        for i in 0..=50 {
            let t = 0.1 * i as f64;
            let v = amplitude_sd_resonant(1e-3, 1.0, t).unwrap();
            let markov = (-0.5 * t).exp();
            assert!(
                (v - markov).abs() <= 1e-3 * markov,
                "t {t}: {v} vs {markov}"
            );
        }
        assert!(amplitude_sd_resonant(0.0, 1.0, 1.0).is_err());
        assert!(amplitude_sd_resonant(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn resonant_matches_general_form() {
        for r in [0.01, 0.1, 0.3, 0.49, 0.51, 1.0, 10.0, 100.0] {
            let p = sd(1.0, r, 0.0);
            for i in 0..=100 {
                let t = 0.2 * i as f64;
                let a = p.amplitude(t).unwrap();
                let b = amplitude_sd_resonant(r, 1.0, t).unwrap();
                assert!((a - b).abs() < 1e-12, "R {r} t {t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn weak_memory_decay_is_monotone() {
        let p = sd(1.0, 0.01, 0.0);
        let mut prev = f64::INFINITY;
        for i in 0..=10_000 {
            let w = p.ergotropy(20.0 * i as f64 / 1e4).unwrap();
            assert!(w <= prev);
            prev = w;
        }
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn no_overflow_at_long_times() {
        let p = sd(1.0, 0.01, 0.0);
        let v = p.amplitude(p.default_horizon()).unwrap();
        assert!(v.is_finite() && v < 1e-3);
    }

    #[test]
    fn branch_continuity_across_critical_ratio() {
        for t in [0.5, 1.0, 3.0, 10.0] {
            let a = amplitude_sd_resonant(0.5 - 1e-6, 1.0, t).unwrap();
            let b = amplitude_sd_resonant(0.5 + 1e-6, 1.0, t).unwrap();
            assert!((a - b).abs() < 1e-4);
            let a = sd(1.0, 0.5 - 1e-6, 0.0).amplitude(t).unwrap();
            let b = sd(1.0, 0.5 + 1e-6, 0.0).amplitude(t).unwrap();
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn handoff_scales_population() {
        let p = sd(1.0, 10.0, 0.5);
        assert_relative_eq!(
            p.ergotropy_from(1.0, 0.7).unwrap(),
            p.ergotropy(0.7).unwrap()
        );
        assert_eq!(p.ergotropy_from(0.4, 0.0).unwrap(), 0.0);
        assert_relative_eq!(p.ergotropy_from(0.9, 0.0).unwrap(), 0.8, epsilon = 1e-15);
        assert!(p.ergotropy_from(1.5, 0.0).is_err());
    }

    #[test]
    fn discharge_time_ordering() {
        // still charged at the horizon counts as later than any crossing
        let t = |r: f64, d: f64| {
            let p = sd(1.0, r, d);
            p.discharge_time(0.5, None)
                .unwrap()
                .time()
                .unwrap_or(f64::INFINITY)
        };
        assert!(t(100.0, 0.0) > t(0.01, 0.0));
        for r in [0.01, 0.1, 1.0, 10.0, 100.0] {
            assert!(t(r, 2.0) >= t(r, 0.0), "R {r}");
        }
        assert!(t(0.01, 0.0) >= 0.0);
        assert!(sd(1.0, 100.0, 2.0)
            .discharge_time(0.5, None)
            .unwrap()
            .time()
            .is_none());
    }

    #[test]
    fn discharge_time_refines_crossing() {
        // Markov-like: |ν|² ≈ e^{−γt}, W ≥ ½ while 2e^{−t} − 1 ≥ ½ → t ≤ ln(4/3)
        let p = sd(1.0, 1e-4, 0.0);
        let t = p.discharge_time(0.5, Some(5.0)).unwrap().time().unwrap();
        assert!((p.ergotropy(t).unwrap() - 0.5).abs() < 1e-5);
        assert!((t - (4.0f64 / 3.0).ln()).abs() < 1e-3);
    }

    #[test]
    fn discharge_time_errors_and_horizon() {
        let p = sd(1.0, 10.0, 0.0);
        assert!(p.discharge_time(0.0, None).is_err());
        assert!(p.discharge_time(1.0, None).is_err());
        assert!(matches!(
            p.discharge_time(0.5, Some(1e-3)).unwrap(),
            DischargeTime::AboveAtHorizon { .. }
        ));
    }

    proptest! {
        #[test]
        fn branch_invariant(g in 0.01f64..5.0, l in 0.01f64..50.0, d in -5.0f64..5.0, t in 0.0f64..30.0) {
            let p = SelfDischargeParams::new(g, l, d).unwrap();
            let a = p.amplitude(t).unwrap();
            let b = p.with_flipped_branch().amplitude(t).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn decays_eventually(r in 0.01f64..100.0) {
            let p = sd(1.0, r, 0.0);
            let t = 50.0 * 1f64.max(2.0 * r);
            prop_assert!(p.amplitude(t).unwrap() < 1e-3);
        }
    }
}
