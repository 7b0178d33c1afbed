//! Energy, ergotropy, passive states and charging power.
//!
//! Energies are absolute (ħ = 1, so in units of frequency). The battery's
//! reduced state is diagonal in the `(|g⟩, |e⟩)` basis with excited
//! population `|ν|²`, which makes its ergotropy a thresholded linear function of
//! the population; [`general_ergotropy`] handles arbitrary finite-dimensional
//! states through the passive-state construction.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laplace::AmplitudePair;

/// Slack on `|amplitude| ≤ 1`.
pub const AMPLITUDE_TOL: f64 = 1e-9;
/// Tolerance for Hermiticity, unit trace and positivity checks.
pub const MATRIX_TOL: f64 = 1e-10;
/// Below this `|ΔE|` the work/energy ratio is undefined.
pub const RATIO_EPS: f64 = 1e-12;

/// Heaviside step with `Θ(0) = ½`.
pub fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

fn check_amplitude(a: Complex64) -> Result<f64> {
    let pop = a.norm_sqr();
    if !pop.is_finite() || a.norm() > 1.0 + AMPLITUDE_TOL {
        return Err(Error::InvalidInput(format!(
            "amplitude modulus {} exceeds 1",
            a.norm()
        )));
    }
    Ok(pop)
}

/// `E_B = ω₀ |ν|²`.
pub fn battery_energy(omega0: f64, nu: Complex64) -> Result<f64> {
    Ok(omega0 * check_amplitude(nu)?)
}

/// `E_A = ω₀ |μ|²`.
pub fn charger_energy(omega0: f64, mu: Complex64) -> Result<f64> {
    battery_energy(omega0, mu)
}

/// `W_B = Θ(|ν|² − ½) ω₀ (2|ν|² − 1)`.
pub fn battery_ergotropy(omega0: f64, nu: Complex64) -> Result<f64> {
    let pop = check_amplitude(nu)?;
    Ok(ergotropy_from_population(omega0, pop))
}

pub(crate) fn ergotropy_from_population(omega0: f64, pop: f64) -> f64 {
    let excess = 2.0 * pop - 1.0;
    heaviside(pop - 0.5) * omega0 * excess
}

/// Reduced battery state `|ν|² |e⟩⟨e| + (1 − |ν|²) |g⟩⟨g|`, ordered `(g, e)`.
pub fn battery_density_matrix(nu: Complex64) -> DMatrix<Complex64> {
    let pop = nu.norm_sqr();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0 - pop, 0.0),
        Complex64::new(pop, 0.0),
    ]))
}

/// `(ω₀/2) σ_z` in the `(g, e)` ordering.
pub fn qubit_hamiltonian(omega0: f64) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(-0.5 * omega0, 0.0),
        Complex64::new(0.5 * omega0, 0.0),
    ]))
}

/// Eigensystems of `H` (energies ascending) and `ρ` (populations descending).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub hamiltonian_eigenvalues: Vec<f64>,
    pub hamiltonian_eigenvectors: DMatrix<Complex64>,
    pub state_eigenvalues: Vec<f64>,
    pub state_eigenvectors: DMatrix<Complex64>,
}

fn check_hermitian(m: &DMatrix<Complex64>, name: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::InvalidInput(format!("{name} is not square")));
    }
    let n = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..n {
        for j in 0..=i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} has non-finite entries"
                )));
            }
            if (a - b.conj()).norm() > MATRIX_TOL * scale {
                return Err(Error::InvalidInput(format!(
                    "{name} is not Hermitian at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenpairs sorted by eigenvalue; ties keep the solver's column order.
fn sorted_eigen(m: &DMatrix<Complex64>, descending: bool) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| {
        let ord = eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]);
        if descending {
            ord.reverse()
        } else {
            ord
        }
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

impl SpectralDecomposition {
    /// Validates `ρ` (Hermitian, PSD, unit trace) and `H` (Hermitian, same size).
    pub fn new(rho: &DMatrix<Complex64>, hamiltonian: &DMatrix<Complex64>) -> Result<Self> {
        check_hermitian(rho, "density matrix")?;
        check_hermitian(hamiltonian, "Hamiltonian")?;
        if rho.shape() != hamiltonian.shape() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: state {:?}, Hamiltonian {:?}",
                rho.shape(),
                hamiltonian.shape()
            )));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > MATRIX_TOL || trace.im.abs() > MATRIX_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix trace {trace} != 1"
            )));
        }
        let (state_eigenvalues, state_eigenvectors) = sorted_eigen(rho, true);
        if let Some(&min) = state_eigenvalues.last() {
            if min < -MATRIX_TOL {
                return Err(Error::InvalidInput(format!(
                    "density matrix has negative eigenvalue {min:e}"
                )));
            }
        }
        let (hamiltonian_eigenvalues, hamiltonian_eigenvectors) = sorted_eigen(hamiltonian, false);
        Ok(SpectralDecomposition {
            hamiltonian_eigenvalues,
            hamiltonian_eigenvectors,
            state_eigenvalues,
            state_eigenvectors,
        })
    }

    /// `Σ_j r_j ε_j` with `r` descending and `ε` ascending.
    pub fn passive_energy(&self) -> f64 {
        self.state_eigenvalues
            .iter()
            .zip(&self.hamiltonian_eigenvalues)
            .map(|(r, e)| r * e)
            .sum()
    }

    /// `σ_ρ = Σ_j r_j |ε_j⟩⟨ε_j|`.
    pub fn passive_state(&self) -> DMatrix<Complex64> {
        let n = self.hamiltonian_eigenvalues.len();
        let mut sigma = DMatrix::zeros(n, n);
        for (j, &r) in self.state_eigenvalues.iter().enumerate() {
            let v = self.hamiltonian_eigenvectors.column(j);
            sigma += (v * v.adjoint()) * Complex64::new(r.max(0.0), 0.0);
        }
        sigma
    }
}

/// `tr(ρH)`.
pub fn mean_energy(rho: &DMatrix<Complex64>, hamiltonian: &DMatrix<Complex64>) -> f64 {
    (rho * hamiltonian).trace().re
}

/// Passive state of `ρ` with respect to `H`.
pub fn passive_state(
    rho: &DMatrix<Complex64>,
    hamiltonian: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    Ok(SpectralDecomposition::new(rho, hamiltonian)?.passive_state())
}

/// Maximum work extractable by a unitary: `tr(ρH) − tr(σ_ρ H)`.
pub fn general_ergotropy(
    rho: &DMatrix<Complex64>,
    hamiltonian: &DMatrix<Complex64>,
) -> Result<f64> {
    let spectral = SpectralDecomposition::new(rho, hamiltonian)?;
    let w = mean_energy(rho, hamiltonian) - spectral.passive_energy();
    // rounding can leave a tiny negative value for passive inputs
    Ok(w.max(0.0))
}

/// `W/ΔE`, or `None` when `|ΔE|` is too small to divide by.
pub fn work_energy_ratio(work: f64, delta_energy: f64) -> Option<f64> {
    if delta_energy.abs() > RATIO_EPS {
        Some(work / delta_energy)
    } else {
        None
    }
}

/// `(W(t) − W(t₀)) / (t − t₀)`.
pub fn average_power(w_t: f64, w_t0: f64, t: f64, t0: f64) -> Result<f64> {
    if !(t > t0) {
        return Err(Error::InvalidTime(format!(
            "average power needs t > t0, got t = {t}, t0 = {t0}"
        )));
    }
    Ok((w_t - w_t0) / (t - t0))
}

/// Transfer probability `sin²(κt)` of the lossless charger–battery pair.
pub fn closed_system_probability(kappa: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidTime(format!("t must be >= 0, got {t}")));
    }
    Ok((kappa * t).sin().powi(2))
}

/// Ideal charging time `π/(2κ)`; `None` when the qubits are uncoupled.
pub fn charging_time(kappa: f64) -> Option<f64> {
    (kappa > 0.0).then(|| std::f64::consts::FRAC_PI_2 / kappa)
}

/// Instantaneous power `dW/dt` on a uniform grid.
///
/// Second-order central differences inside smooth stretches, second-order
/// one-sided stencils at the ends and next to ergotropy kinks, where the
/// excited population crosses ½. A point with no admissible second-order
/// stencil falls back to a first-order difference on its smooth side.
pub fn instantaneous_power(
    times: &[f64],
    ergotropy: &[f64],
    population: &[f64],
) -> Result<Vec<f64>> {
    let n = times.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "power needs at least 3 points, got {n}"
        )));
    }
    if ergotropy.len() != n || population.len() != n {
        return Err(Error::InvalidInput(
            "power inputs have different lengths".into(),
        ));
    }
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::InvalidTime(
            "power needs an increasing time grid".into(),
        ));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(times[n - 1].abs()) {
            return Err(Error::InvalidTime(format!(
                "non-uniform grid at index {}",
                i + 1
            )));
        }
    }

    let charged: Vec<bool> = population.iter().map(|&p| p > 0.5).collect();
    // smooth(i, j): no threshold crossing between neighbours i and j
    let smooth = |a: usize, b: usize| charged[a] == charged[b];
    let w = ergotropy;
    let power = (0..n)
        .map(|i| {
            let left2 = i >= 2 && smooth(i - 2, i - 1) && smooth(i - 1, i);
            let left1 = i >= 1 && smooth(i - 1, i);
            let right2 = i + 2 < n && smooth(i, i + 1) && smooth(i + 1, i + 2);
            let right1 = i + 1 < n && smooth(i, i + 1);
            if left1 && right1 {
                (w[i + 1] - w[i - 1]) / (2.0 * h)
            } else if right2 {
                (-3.0 * w[i] + 4.0 * w[i + 1] - w[i + 2]) / (2.0 * h)
            } else if left2 {
                (3.0 * w[i] - 4.0 * w[i - 1] + w[i - 2]) / (2.0 * h)
            } else if right1 {
                (w[i + 1] - w[i]) / h
            } else if left1 {
                (w[i] - w[i - 1]) / h
            } else {
                0.0
            }
        })
        .collect();
    Ok(power)
}

/// Battery and charger observables at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub time: f64,
    pub energy_b: f64,
    pub energy_a: f64,
    pub ergotropy_b: f64,
    /// Ergotropy over stored energy `W_B / (E_B(t) − E_B(0))`.
    pub ratio: Option<f64>,
    pub power: Option<f64>,
}

/// Amplitudes together with their derived observables.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub omega0: f64,
    pub amplitudes: Vec<AmplitudePair>,
    pub records: Vec<ObservableRecord>,
}

impl Trajectory {
    /// Derives energies, ergotropy and ratio; power is filled in when the
    /// grid is uniform with at least 3 points.
    pub fn from_amplitudes(omega0: f64, amplitudes: Vec<AmplitudePair>) -> Result<Self> {
        let initial_energy = match amplitudes.first() {
            Some(a) => battery_energy(omega0, a.nu)?,
            None => 0.0,
        };
        let mut records = amplitudes
            .iter()
            .map(|a| {
                let energy_b = battery_energy(omega0, a.nu)?;
                let ergotropy_b = battery_ergotropy(omega0, a.nu)?;
                Ok(ObservableRecord {
                    time: a.time,
                    energy_b,
                    energy_a: charger_energy(omega0, a.mu)?,
                    ergotropy_b,
                    ratio: work_energy_ratio(ergotropy_b, energy_b - initial_energy),
                    power: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        if amplitudes.len() >= 3 {
            let times: Vec<f64> = amplitudes.iter().map(|a| a.time).collect();
            let work: Vec<f64> = records.iter().map(|r| r.ergotropy_b).collect();
            let pops: Vec<f64> = amplitudes.iter().map(|a| a.nu.norm_sqr()).collect();
            if let Ok(power) = instantaneous_power(&times, &work, &pops) {
                for (r, p) in records.iter_mut().zip(power) {
                    r.power = Some(p);
                }
            }
        }
        Ok(Trajectory {
            omega0,
            amplitudes,
            records,
        })
    }
}
