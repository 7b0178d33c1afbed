//! Single runs: solve, derive observables, tabulate.

use num_complex::Complex64;
use qbattery::observables::{battery_energy, battery_ergotropy};
use qbattery::oracle::{default_step, integrate_on_grid};
use qbattery::{
    amplitude_trajectory, AmplitudePair, InitialAmplitudes, SelfDischargeParams, Trajectory,
};

use crate::config::{ConfigError, Mode, Observable, RunConfig, Solver};
use crate::table::{OutputTable, TableError};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: qbattery::Error,
    },
    #[error(transparent)]
    Table(#[from] TableError),
}

fn solver_context(cfg: &RunConfig, stage: &str) -> impl FnOnce(qbattery::Error) -> RunError {
    let p = cfg.params;
    let context = format!(
        "{stage} (omega0={}, kappa={}, gamma={}, lambda={}, delta={})",
        p.omega0, p.kappa, p.gamma, p.lambda, p.delta
    );
    move |source| RunError::Solver { context, source }
}

/// Executes one configuration and returns its table.
pub fn run_single(cfg: &RunConfig) -> Result<OutputTable, RunError> {
    let times = cfg.times()?;
    let scaled = cfg.scaled_times();
    let mut table = match cfg.mode {
        Mode::Charging => charging_table(cfg, &times, &scaled)?,
        Mode::SelfDischarge => self_discharge_table(cfg, &times, &scaled)?,
    };
    table.config_echo = cfg.echo();
    let mut meta = vec![
        ("artifact_version".to_string(), ARTIFACT_VERSION.to_string()),
        ("solver".to_string(), cfg.solver.to_string()),
    ];
    if cfg.solver != Solver::Analytic {
        meta.push((
            "oracle_step".to_string(),
            default_step(&cfg.params).to_string(),
        ));
    }
    meta.append(&mut table.meta);
    table.meta = meta;
    Ok(table)
}

fn oracle_amplitudes(
    cfg: &RunConfig,
    init: &InitialAmplitudes,
    times: &[f64],
) -> Result<Vec<AmplitudePair>, RunError> {
    let step = default_step(&cfg.params);
    let run =
        integrate_on_grid(&cfg.params, init, times, step).map_err(solver_context(cfg, "oracle"))?;
    Ok(run.amplitudes())
}

fn charging_table(cfg: &RunConfig, times: &[f64], scaled: &[f64]) -> Result<OutputTable, RunError> {
    let analytic = match cfg.solver {
        Solver::Oracle => None,
        _ => Some(
            amplitude_trajectory(&cfg.params, &cfg.init, times)
                .map_err(solver_context(cfg, "analytic"))?,
        ),
    };
    let oracle = match cfg.solver {
        Solver::Analytic => None,
        _ => Some(oracle_amplitudes(cfg, &cfg.init, times)?),
    };
    let primary = match (&analytic, &oracle) {
        (Some(a), _) => a.clone(),
        (None, Some(o)) => o.clone(),
        (None, None) => unreachable!("every solver choice produces amplitudes"),
    };
    let traj = Trajectory::from_amplitudes(cfg.params.omega0, primary)
        .map_err(solver_context(cfg, "observables"))?;

    let mut columns = vec!["t", "scaled_t"];
    for o in &cfg.outputs {
        match o {
            Observable::Mu => columns.extend(["re_mu", "im_mu"]),
            Observable::Nu => columns.extend(["re_nu", "im_nu"]),
            other => columns.push(other.as_str()),
        }
    }
    let both = analytic.is_some() && oracle.is_some();
    if both {
        columns.extend([
            "oracle_re_mu",
            "oracle_im_mu",
            "oracle_re_nu",
            "oracle_im_nu",
        ]);
    }
    let mut table = OutputTable::new(columns);

    let mut max_dev = 0.0f64;
    for (i, (a, r)) in traj.amplitudes.iter().zip(&traj.records).enumerate() {
        let mut row = vec![a.time, scaled[i]];
        for o in &cfg.outputs {
            match o {
                Observable::Mu => row.extend([a.mu.re, a.mu.im]),
                Observable::Nu => row.extend([a.nu.re, a.nu.im]),
                Observable::EnergyA => row.push(r.energy_a),
                Observable::EnergyB => row.push(r.energy_b),
                Observable::ErgotropyB => row.push(r.ergotropy_b),
                Observable::Ratio => row.push(r.ratio.unwrap_or(f64::NAN)),
                Observable::Power => row.push(r.power.unwrap_or(f64::NAN)),
                Observable::AbsNuSd => unreachable!("rejected for charging runs at parse time"),
            }
        }
        if let (true, Some(o)) = (both, &oracle) {
            let o = &o[i];
            row.extend([o.mu.re, o.mu.im, o.nu.re, o.nu.im]);
            max_dev = max_dev.max((a.mu - o.mu).norm()).max((a.nu - o.nu).norm());
        }
        table.push_row(row)?;
    }
    if both {
        table.add_meta("max_deviation", max_dev.to_string());
    }
    Ok(table)
}

fn self_discharge_table(
    cfg: &RunConfig,
    times: &[f64],
    scaled: &[f64],
) -> Result<OutputTable, RunError> {
    let omega0 = cfg.params.omega0;
    let pop0 = cfg.init.nu0.norm_sqr();
    let sd = SelfDischargeParams::from_system(&cfg.params)
        .map_err(solver_context(cfg, "self-discharge"))?;
    let analytic = match cfg.solver {
        Solver::Oracle => None,
        _ => Some(
            times
                .iter()
                .map(|&t| sd.amplitude(t))
                .collect::<qbattery::Result<Vec<f64>>>()
                .map_err(solver_context(cfg, "self-discharge"))?,
        ),
    };
    let oracle = match cfg.solver {
        Solver::Analytic => None,
        _ => Some(
            oracle_amplitudes(cfg, &InitialAmplitudes::battery_excited(), times)?
                .iter()
                .map(|a| a.nu.norm())
                .collect::<Vec<f64>>(),
        ),
    };
    let primary = analytic
        .as_ref()
        .or(oracle.as_ref())
        .expect("every solver choice produces amplitudes");

    let mut columns = vec!["t", "gamma_t"];
    columns.extend(cfg.outputs.iter().map(|o| o.as_str()));
    let both = analytic.is_some() && oracle.is_some();
    if both {
        columns.push("oracle_abs_nu_sd");
    }
    let mut table = OutputTable::new(columns);

    let mut max_dev = 0.0f64;
    for (i, (&t, &amp)) in times.iter().zip(primary).enumerate() {
        let nu = Complex64::new(pop0.sqrt() * amp, 0.0);
        let mut row = vec![t, scaled[i]];
        for o in &cfg.outputs {
            match o {
                Observable::AbsNuSd => row.push(amp),
                Observable::EnergyB => row
                    .push(battery_energy(omega0, nu).map_err(solver_context(cfg, "observables"))?),
                Observable::ErgotropyB => row.push(
                    battery_ergotropy(omega0, nu).map_err(solver_context(cfg, "observables"))?,
                ),
                other => unreachable!("{other} rejected for self-discharge runs at parse time"),
            }
        }
        if let (true, Some(o)) = (both, &oracle) {
            row.push(o[i]);
            max_dev = max_dev.max((amp - o[i]).abs());
        }
        table.push_row(row)?;
    }
    if both {
        table.add_meta("max_deviation", max_dev.to_string());
    }
    Ok(table)
}
