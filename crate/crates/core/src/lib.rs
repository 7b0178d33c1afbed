//! Exact charging and self-discharging dynamics of a two-qubit quantum battery.
//!
//! A charger qubit and a battery qubit exchange a single excitation at rate κ
//! while each leaks into its own Lorentzian bosonic reservoir (coupling γ,
//! width λ, detuning Δ). Within the single-excitation sector the reduced
//! dynamics is fully described by two complex amplitudes `μ(t)` (charger
//! excited) and `ν(t)` (battery excited).
//!
//! * [`model`]: parameters, memory kernel, spectral density, regime labels.
//! * [`laplace`]: exact amplitudes from the poles and residues of their Laplace images.
//! * [`oracle`]: independent RK4 integration of the memory equations.
//! * [`observables`]: energy, ergotropy, passive states, power.
//! * [`self_discharge`]: closed-form decay of an idle battery and its discharge time.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod laplace;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod self_discharge;

pub use error::{Error, Result};
pub use laplace::{amplitude_trajectory, build_transfer, AmplitudePair, Pole, PoleResidueForm};
pub use model::{DampingLabel, InitialAmplitudes, MarkovianityLabel, RegimeReport, SystemParams};
pub use observables::{ObservableRecord, SpectralDecomposition, Trajectory};
pub use oracle::{AugmentedState, OracleRun};
pub use self_discharge::{amplitude_sd_resonant, DischargeTime, SelfDischargeParams};

pub use num_complex::Complex64;
