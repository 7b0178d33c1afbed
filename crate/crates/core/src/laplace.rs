//! Exact single-excitation amplitudes through their Laplace images.
//!
//! With the symmetric exponential kernel the combinations `z = μ + ν` and
//! `w = μ − ν` decouple:
//!
//! ```text
//! z̃(s) = z₀ (s + λ − iΔ) / Q₊(s),   w̃(s) = w₀ (s + λ − iΔ) / Q₋(s),
//! Q±(s) = s (s + λ − iΔ) + γλ/2 ± iκ (s + λ − iΔ).
//! ```
//!
//! The quartic common denominator of `μ̃` and `ν̃` is `Q₊ Q₋`, so its roots come
//! from two quadratics. Each quadratic contributes either two simple poles or
//! one double pole, and the time-domain amplitudes are finite sums of
//! `t^k e^{p t}` terms.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{InitialAmplitudes, SystemParams};

/// Poles closer than this (relative to `max(|p|, λ)`) are treated as one double pole.
pub const CONFLUENCE_TOL: f64 = 1e-8;

/// Largest tolerated `Σ|residue| / max(|μ₀|, |ν₀|)`.
pub const MAX_CONDITION: f64 = 1e12;

/// Positive real parts allowed on poles, relative to the problem's rate scale.
pub const POLE_REAL_TOL: f64 = 1e-9;

/// One pole of the transfer functions.
///
/// `residues_mu[k]` multiplies `t^k / k! · e^{p t}` in `μ(t)`; same for `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    pub multiplicity: usize,
    pub residues_mu: Vec<Complex64>,
    pub residues_nu: Vec<Complex64>,
}

/// Partial-fraction form of `μ̃(s)` and `ν̃(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleResidueForm {
    poles: Vec<Pole>,
}

/// Amplitudes at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub time: f64,
    pub mu: Complex64,
    pub nu: Complex64,
}

impl AmplitudePair {
    /// `|μ|² + |ν|²`; the rest of the population sits in the reservoirs.
    pub fn system_population(&self) -> f64 {
        self.mu.norm_sqr() + self.nu.norm_sqr()
    }
}

/// Roots of `s² + b s + c` without cancellation: the larger-magnitude root
/// comes from the quadratic formula, the other from the product `c`.
pub fn quadratic_roots(b: Complex64, c: Complex64) -> (Complex64, Complex64) {
    let sqrt_disc = (b * b - 4.0 * c).sqrt();
    // pick the sign that adds |b| and sqrt(disc) constructively
    let q = if (b.conj() * sqrt_disc).re >= 0.0 {
        -0.5 * (b + sqrt_disc)
    } else {
        -0.5 * (b - sqrt_disc)
    };
    if q.norm() == 0.0 {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    (q, c / q)
}

/// Partial fractions of `(s + a₀) / Q(s)` for one decoupled channel.
struct ChannelTerm {
    location: Complex64,
    residues: Vec<Complex64>,
}

fn channel_terms(p: &SystemParams, sign: f64) -> Vec<ChannelTerm> {
    let a0 = p.kernel_rate();
    let i_kappa = Complex64::new(0.0, sign * p.kappa);
    if p.gamma == 0.0 {
        // Q± = (s + a₀)(s ± iκ): the (s + a₀) factor cancels exactly
        return vec![ChannelTerm {
            location: -i_kappa,
            residues: vec![Complex64::new(1.0, 0.0)],
        }];
    }
    let b = a0 + i_kappa;
    let c = 0.5 * p.gamma * p.lambda + i_kappa * a0;
    let (p1, p2) = quadratic_roots(b, c);
    let scale = p1.norm().max(p2.norm()).max(p.lambda);
    if (p1 - p2).norm() < CONFLUENCE_TOL * scale {
        // (s + a₀)/(s − m)² = 1/(s − m) + (m + a₀)/(s − m)²
        let m = -0.5 * b;
        vec![ChannelTerm {
            location: m,
            residues: vec![Complex64::new(1.0, 0.0), m + a0],
        }]
    } else {
        vec![
            ChannelTerm {
                location: p1,
                residues: vec![(p1 + a0) / (p1 - p2)],
            },
            ChannelTerm {
                location: p2,
                residues: vec![(p2 + a0) / (p2 - p1)],
            },
        ]
    }
}

impl PoleResidueForm {
    /// Builds the pole/residue representation of `μ̃` and `ν̃`.
    pub fn build(p: &SystemParams, init: &InitialAmplitudes) -> Result<Self> {
        let z0 = init.mu0 + init.nu0;
        let w0 = init.mu0 - init.nu0;
        let rate_scale = p.max_rate().max(1e-300);

        let mut poles: Vec<Pole> = Vec::with_capacity(4);
        // μ = (z + w)/2, ν = (z − w)/2
        for (sign, weight, nu_sign) in [(1.0, 0.5 * z0, 1.0), (-1.0, 0.5 * w0, -1.0)] {
            for term in channel_terms(p, sign) {
                let mu_res: Vec<Complex64> = term.residues.iter().map(|r| weight * r).collect();
                let nu_res: Vec<Complex64> = mu_res.iter().map(|r| nu_sign * r).collect();
                let multiplicity = term.residues.len();
                let merge_tol = 1e-12 * rate_scale.max(term.location.norm());
                match poles.iter_mut().find(|q| {
                    q.multiplicity == multiplicity
                        && (q.location - term.location).norm() <= merge_tol
                }) {
                    Some(existing) => {
                        for k in 0..multiplicity {
                            existing.residues_mu[k] += mu_res[k];
                            existing.residues_nu[k] += nu_res[k];
                        }
                    }
                    None => poles.push(Pole {
                        location: term.location,
                        multiplicity,
                        residues_mu: mu_res,
                        residues_nu: nu_res,
                    }),
                }
            }
        }

        for pole in &poles {
            if pole.location.re > POLE_REAL_TOL * rate_scale {
                return Err(Error::GrowingMode {
                    re: pole.location.re,
                });
            }
        }
        let form = PoleResidueForm { poles };
        let condition = form.condition_estimate(init);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        Ok(form)
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    /// Sum of pole multiplicities (4 generically, 2 when the qubits are uncoupled).
    pub fn order(&self) -> usize {
        self.poles.iter().map(|p| p.multiplicity).sum()
    }

    /// `Σ|residue| / max(|μ₀|, |ν₀|)`: amplification of rounding in the pole sum.
    pub fn condition_estimate(&self, init: &InitialAmplitudes) -> f64 {
        let total: f64 = self
            .poles
            .iter()
            .flat_map(|p| p.residues_mu.iter().chain(p.residues_nu.iter()))
            .map(|r| r.norm())
            .sum();
        total / init.mu0.norm().max(init.nu0.norm())
    }

    /// Sums of first-order residues; by the initial-value theorem these are `(μ₀, ν₀)`.
    pub fn initial_values(&self) -> (Complex64, Complex64) {
        self.poles.iter().fold(
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            |(mu, nu), p| (mu + p.residues_mu[0], nu + p.residues_nu[0]),
        )
    }

    /// Inverse Laplace transform at time `t ≥ 0`.
    pub fn evaluate(&self, t: f64) -> Result<AmplitudePair> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidTime(format!(
                "time must be finite and >= 0, got {t}"
            )));
        }
        Ok(self.evaluate_unchecked(t))
    }

    fn evaluate_unchecked(&self, t: f64) -> AmplitudePair {
        let mut mu = Complex64::new(0.0, 0.0);
        let mut nu = Complex64::new(0.0, 0.0);
        for pole in &self.poles {
            let e = (pole.location * t).exp();
            let mut power = 1.0;
            let mut mu_poly = Complex64::new(0.0, 0.0);
            let mut nu_poly = Complex64::new(0.0, 0.0);
            for k in 0..pole.multiplicity {
                mu_poly += pole.residues_mu[k] * power;
                nu_poly += pole.residues_nu[k] * power;
                power *= t / (k + 1) as f64;
            }
            mu += mu_poly * e;
            nu += nu_poly * e;
        }
        AmplitudePair { time: t, mu, nu }
    }
}

/// Convenience wrapper for [`PoleResidueForm::build`].
pub fn build_transfer(p: &SystemParams, init: &InitialAmplitudes) -> Result<PoleResidueForm> {
    PoleResidueForm::build(p, init)
}

/// Checks that a time grid is non-negative, finite and strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(&first) = grid.first() {
        if !(first >= 0.0) {
            return Err(Error::InvalidTime(format!(
                "grid starts at {first}, must be >= 0"
            )));
        }
    }
    if let Some(bad) = grid.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidTime(format!("non-finite grid point {bad}")));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidTime(format!(
            "grid not strictly increasing at index {}: {} then {}",
            i + 1,
            grid[i],
            grid[i + 1]
        )));
    }
    Ok(())
}

/// Amplitudes on every point of `grid`.
pub fn amplitude_trajectory(
    p: &SystemParams,
    init: &InitialAmplitudes,
    grid: &[f64],
) -> Result<Vec<AmplitudePair>> {
    check_grid(grid)?;
    let form = PoleResidueForm::build(p, init)?;
    Ok(grid.iter().map(|&t| form.evaluate_unchecked(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_roots_widely_separated() {
        // s² + (1e8) s + 1 = 0: naive formula loses the small root entirely
        let (a, b) = quadratic_roots(c(1e8, 0.0), c(1.0, 0.0));
        let (big, small) = if a.norm() > b.norm() { (a, b) } else { (b, a) };
        assert_relative_eq!(big.re, -1e8, max_relative = 1e-15);
        assert_relative_eq!(small.re, -1e-8, max_relative = 1e-15);
    }

    #[test]
    fn quadratic_roots_satisfy_polynomial() {
        let b = c(0.3, -1.7);
        let cc = c(2.0, 0.4);
        let (r1, r2) = quadratic_roots(b, cc);
        for r in [r1, r2] {
            assert!((r * r + b * r + cc).norm() < 1e-14);
        }
    }

    #[test]
    fn uncoupled_charger_only_has_two_mu_poles() {
        let p = SystemParams::new(1.0, 0.0, 0.3, 2.0, 0.0).unwrap();
        let form = build_transfer(&p, &InitialAmplitudes::charger_excited()).unwrap();
        assert_eq!(form.order(), 2);
        let disc = (p.lambda * p.lambda - 2.0 * p.gamma * p.lambda).sqrt();
        let mut expected = [(-p.lambda + disc) / 2.0, (-p.lambda - disc) / 2.0];
        let mut got: Vec<f64> = form.poles().iter().map(|q| q.location.re).collect();
        got.sort_by(|a, b| b.partial_cmp(a).unwrap());
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (g, e) in got.iter().zip(expected) {
            assert_relative_eq!(*g, e, max_relative = 1e-14);
        }
        for q in form.poles() {
            assert!(q.residues_nu.iter().all(|r| r.norm() == 0.0));
        }
    }

    #[test]
    fn critical_memory_ratio_gives_double_pole() {
        let p = SystemParams::new(1.0, 0.0, 1.0, 2.0, 0.0).unwrap();
        let form = build_transfer(&p, &InitialAmplitudes::charger_excited()).unwrap();
        assert_eq!(form.poles().len(), 1);
        let pole = &form.poles()[0];
        assert_eq!(pole.multiplicity, 2);
        assert_relative_eq!(pole.location.re, -1.0, max_relative = 1e-15);
        // μ(t) = e^{−t}(1 + t)
        let a = form.evaluate(1.0).unwrap();
        assert_relative_eq!(a.mu.re, 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn closed_system_rabi() {
        let p = SystemParams::new(1.0, 1.3, 0.0, 0.5, 0.2).unwrap();
        let form = build_transfer(&p, &InitialAmplitudes::charger_excited()).unwrap();
        assert_eq!(form.order(), 2);
        let mut locs: Vec<f64> = form.poles().iter().map(|q| q.location.im).collect();
        locs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(locs, vec![-1.3, 1.3]);
        for t in [0.1, 0.7, 2.5] {
            let a = form.evaluate(t).unwrap();
            assert!((a.nu - c(0.0, -(1.3 * t).sin())).norm() < 1e-14);
            assert!((a.mu - c((1.3 * t).cos(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn evaluate_at_zero_reproduces_init() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let init = InitialAmplitudes::new(c(0.6 * s, 0.8 * s), c(0.0, -s)).unwrap();
        let p = SystemParams::new(1.0, 0.7, 0.4, 0.9, 0.3).unwrap();
        let form = build_transfer(&p, &init).unwrap();
        let a = form.evaluate(0.0).unwrap();
        assert!((a.mu - init.mu0).norm() < 1e-12);
        assert!((a.nu - init.nu0).norm() < 1e-12);
        let (mu0, nu0) = form.initial_values();
        assert!((mu0 - init.mu0).norm() < 1e-12);
        assert!((nu0 - init.nu0).norm() < 1e-12);
    }

    #[test]
    fn full_transfer_without_reservoir() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        let form = build_transfer(&p, &InitialAmplitudes::charger_excited()).unwrap();
        assert!((form.evaluate(FRAC_PI_2).unwrap().nu.norm_sqr() - 1.0).abs() < 1e-14);
        assert!(form.evaluate(-1.0).is_err());
    }

    #[test]
    fn weak_memory_loss_at_charging_time() {
        // γ = 0.05κ, R = 10
        let p = SystemParams::with_memory_ratio(1.0, 1.0, 0.05, 10.0, 0.0).unwrap();
        let form = build_transfer(&p, &InitialAmplitudes::charger_excited()).unwrap();
        let pop = form.evaluate(FRAC_PI_2).unwrap().nu.norm_sqr();
        assert!((pop - 0.99995).abs() < 5e-4, "{pop}");
    }

    #[test]
    fn trajectory_on_closed_grid() {
        let p = SystemParams::new(1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        let init = InitialAmplitudes::charger_excited();
        let traj = amplitude_trajectory(&p, &init, &[0.0, FRAC_PI_4, FRAC_PI_2]).unwrap();
        let pops: Vec<f64> = traj.iter().map(|a| a.nu.norm_sqr()).collect();
        assert!(pops[0].abs() < 1e-15);
        assert!((pops[1] - 0.5).abs() < 1e-15);
        assert!((pops[2] - 1.0).abs() < 1e-15);
        let single = amplitude_trajectory(&p, &init, &[0.0]).unwrap();
        assert_eq!(single[0].time, 0.0);
        assert_eq!(single[0].mu, c(1.0, 0.0));
    }

    #[test]
    fn trajectory_rejects_bad_grids() {
        let p = SystemParams::new(1.0, 1.0, 0.1, 1.0, 0.0).unwrap();
        let init = InitialAmplitudes::charger_excited();
        assert!(amplitude_trajectory(&p, &init, &[0.0, 1.0, 1.0]).is_err());
        assert!(amplitude_trajectory(&p, &init, &[0.0, 2.0, 1.0]).is_err());
        assert!(amplitude_trajectory(&p, &init, &[-0.5, 1.0]).is_err());
        assert!(amplitude_trajectory(&p, &init, &[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn near_confluent_parameters_stay_accurate() {
        // λ = 2γ(1 + ε): discriminant ~ ε; residues grow like 1/sqrt(ε)
        for eps in [1e-6, 1e-10, 1e-14, 1e-16] {
            let p = SystemParams::new(1.0, 0.0, 1.0, 2.0 * (1.0 + eps), 0.0).unwrap();
            let form = build_transfer(&p, &InitialAmplitudes::charger_excited()).unwrap();
            let v = form.evaluate(1.0).unwrap().mu.norm();
            assert!(
                (v - 2.0 / std::f64::consts::E).abs() < 1e-4,
                "eps {eps}: {v}"
            );
        }
    }

    #[test]
    fn bounded_over_long_horizon() {
        let p = SystemParams::with_memory_ratio(1.0, 1.0, 1.0, 100.0, 0.5).unwrap();
        let form = build_transfer(&p, &InitialAmplitudes::charger_excited()).unwrap();
        let horizon = 1e3 / p.gamma;
        for k in 0..=1000 {
            let a = form.evaluate(horizon * k as f64 / 1000.0).unwrap();
            assert!(a.system_population() <= 1.0 + 1e-9);
        }
        assert!(form.poles().iter().all(|q| q.location.re <= 1e-9));
    }

    fn arb_params() -> impl Strategy<Value = SystemParams> {
        (0.0f64..3.0, 0.0f64..5.0, 1e-3f64..5.0, -3.0f64..3.0)
            .prop_map(|(k, g, l, d)| SystemParams::new(1.0, k, g, l, d).unwrap())
    }

    fn arb_init() -> impl Strategy<Value = InitialAmplitudes> {
        (0.0f64..std::f64::consts::FRAC_PI_2, -PI..PI, -PI..PI).prop_map(|(theta, a, b)| {
            InitialAmplitudes::new(
                Complex64::from_polar(theta.cos(), a),
                Complex64::from_polar(theta.sin(), b),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn norm_never_exceeds_one(p in arb_params(), init in arb_init(), t in 0.0f64..50.0) {
            let form = build_transfer(&p, &init).unwrap();
            prop_assert!((form.evaluate(0.0).unwrap().system_population() - 1.0).abs() < 1e-9);
            prop_assert!(form.evaluate(t).unwrap().system_population() <= 1.0 + 1e-9);
        }

        #[test]
        fn swapping_initial_amplitudes_swaps_roles(p in arb_params(), init in arb_init(), t in 0.0f64..20.0) {
            let a = build_transfer(&p, &init).unwrap().evaluate(t).unwrap();
            let b = build_transfer(&p, &init.swapped()).unwrap().evaluate(t).unwrap();
            prop_assert!((a.mu - b.nu).norm() < 1e-12);
            prop_assert!((a.nu - b.mu).norm() < 1e-12);
        }

        #[test]
        fn closed_limit_matches_sine(kappa in 0.0f64..4.0, t in 0.0f64..20.0, phase in -PI..PI) {
            let p = SystemParams::new(1.0, kappa, 0.0, 1.0, 0.0).unwrap();
            let init = InitialAmplitudes::new(Complex64::from_polar(1.0, phase), c(0.0, 0.0)).unwrap();
            let a = build_transfer(&p, &init).unwrap().evaluate(t).unwrap();
            prop_assert!((a.nu.norm() - (kappa * t).sin().abs()).abs() < 1e-12);
        }
    }
}
