//! Datasets behind the charging, stored-energy and self-discharge figures
//! and the charging-probability table.
//!
//! Charging sets use `ω₀ = κ = 1`, `Δ = 0`, 2000 points over `κt ∈ [0, 4π]`.
//! Self-discharge sets use `ω₀ = γ = 1`, 2000 points over `γt ∈ [0, 20]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qbattery::{build_transfer, InitialAmplitudes, SystemParams};

use crate::config::{Grid, Mode, RunConfig, Solver, TimeUnit};
use crate::run::{run_single, RunError, ARTIFACT_VERSION};
use crate::table::{OutputTable, TableError};

/// Memory ratios of the charging curves.
pub const CHARGING_RATIOS: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
/// `γ/κ` of the underdamped, intermediate and overdamped panels.
pub const CHARGING_COUPLINGS: [f64; 3] = [0.05, 1.0, 10.0];
/// Memory ratios of the self-discharge curves, including the confluent `R = ½`.
pub const DISCHARGE_RATIOS: [f64; 6] = [0.01, 0.1, 0.5, 1.0, 10.0, 100.0];
/// `Δ/γ` of the self-discharge panels.
pub const DISCHARGE_DETUNINGS: [f64; 3] = [0.0, 0.5, 2.0];
/// Memory ratios of the probability table, at `γ = 0.05κ`.
pub const TABLE_RATIOS: [f64; 4] = [0.01, 0.1, 10.0, 100.0];
pub const TABLE_COUPLING: f64 = 0.05;

pub const CURVE_POINTS: usize = 2000;
pub const CHARGING_SPAN: f64 = 4.0 * PI;
pub const DISCHARGE_SPAN: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    TableP,
}

impl Figure {
    pub fn as_str(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::TableP => "table-p",
        }
    }
}

impl FromStr for Figure {
    type Err = ReproduceError;

    fn from_str(s: &str) -> Result<Self, ReproduceError> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "table-p" => Ok(Figure::TableP),
            other => Err(ReproduceError::UnknownFigure(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReproduceError {
    #[error("unknown dataset {0:?}, expected fig2, fig3, fig4 or table-p")]
    UnknownFigure(String),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("solver: {0}")]
    Solver(#[from] qbattery::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn write(path: PathBuf, text: String) -> Result<PathBuf, ReproduceError> {
    fs::write(&path, text).map_err(|source| ReproduceError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// One curve of a figure: its panel value, memory ratio and run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub panel: f64,
    pub memory_ratio: f64,
    pub config: RunConfig,
}

/// Curves of a figure dataset in panel-major order; empty for `table-p`.
pub fn curves(figure: Figure) -> Vec<Curve> {
    match figure {
        Figure::Fig2 | Figure::Fig3 => CHARGING_COUPLINGS
            .iter()
            .flat_map(|&g| CHARGING_RATIOS.iter().map(move |&r| (g, r)))
            .map(|(g, r)| Curve {
                panel: g,
                memory_ratio: r,
                config: RunConfig {
                    mode: Mode::Charging,
                    params: SystemParams::with_memory_ratio(1.0, 1.0, g, r, 0.0)
                        .expect("fixed parameters are valid"),
                    init: InitialAmplitudes::charger_excited(),
                    grid: Grid {
                        t_max: CHARGING_SPAN,
                        n_points: CURVE_POINTS,
                    },
                    solver: Solver::Analytic,
                    outputs: Mode::Charging.observables().to_vec(),
                    time_unit: TimeUnit::KappaT,
                },
            })
            .collect(),
        Figure::Fig4 => DISCHARGE_DETUNINGS
            .iter()
            .flat_map(|&d| DISCHARGE_RATIOS.iter().map(move |&r| (d, r)))
            .map(|(d, r)| Curve {
                panel: d,
                memory_ratio: r,
                config: RunConfig {
                    mode: Mode::SelfDischarge,
                    params: SystemParams::with_memory_ratio(1.0, 0.0, 1.0, r, d)
                        .expect("fixed parameters are valid"),
                    init: InitialAmplitudes::battery_excited(),
                    grid: Grid {
                        t_max: DISCHARGE_SPAN,
                        n_points: CURVE_POINTS,
                    },
                    solver: Solver::Analytic,
                    outputs: Mode::SelfDischarge.observables().to_vec(),
                    time_unit: TimeUnit::GammaT,
                },
            })
            .collect(),
        Figure::TableP => Vec::new(),
    }
}

/// Charging probability table at `τ_ch = π/(2κ)`.
///
/// `ergotropy_fraction` is `W_B(τ_ch)/W_max = 2|ν|² − 1`.
pub fn probability_table() -> Result<OutputTable, ReproduceError> {
    let mut table = OutputTable::new([
        "R",
        "gamma_over_kappa",
        "tau_ch",
        "abs_nu_sq",
        "ergotropy_fraction",
    ]);
    for r in TABLE_RATIOS {
        let p = SystemParams::with_memory_ratio(1.0, 1.0, TABLE_COUPLING, r, 0.0)?;
        let form = build_transfer(&p, &InitialAmplitudes::charger_excited())?;
        let tau = FRAC_PI_2 / p.kappa;
        let pop = form.evaluate(tau)?.nu.norm_sqr();
        table.push_row(vec![
            r,
            TABLE_COUPLING,
            tau,
            pop,
            (2.0 * pop - 1.0).max(0.0),
        ])?;
    }
    table.add_meta("artifact_version", ARTIFACT_VERSION);
    table.add_meta("dataset", Figure::TableP.as_str());
    Ok(table)
}

fn curve_file(figure: Figure, panel: usize, curve: usize) -> String {
    format!("{}_panel{panel}_curve{curve}.csv", figure.as_str())
}

/// Writes the dataset for `figure` into `out_dir` and returns the paths.
///
/// Figures produce one CSV per curve plus `<id>_index.csv` listing each
/// curve's panel value, memory ratio and file.
pub fn reproduce(figure: Figure, out_dir: &Path) -> Result<Vec<PathBuf>, ReproduceError> {
    fs::create_dir_all(out_dir).map_err(|source| ReproduceError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    if figure == Figure::TableP {
        let table = probability_table()?;
        return Ok(vec![write(
            out_dir.join("table-p.csv"),
            table.to_csv_string(),
        )?]);
    }

    let panel_key = match figure {
        Figure::Fig4 => "delta_over_gamma",
        _ => "gamma_over_kappa",
    };
    let per_panel = match figure {
        Figure::Fig4 => DISCHARGE_RATIOS.len(),
        _ => CHARGING_RATIOS.len(),
    };
    let mut index = format!(
        "#meta artifact_version = {ARTIFACT_VERSION}\n#meta dataset = {}\npanel,curve,{panel_key},R,file\n",
        figure.as_str()
    );
    let mut paths = Vec::new();
    for (i, curve) in curves(figure).iter().enumerate() {
        let (panel, k) = (i / per_panel, i % per_panel);
        let mut table = run_single(&curve.config)?;
        table.add_meta("dataset", figure.as_str());
        let name = curve_file(figure, panel, k);
        paths.push(write(out_dir.join(&name), table.to_csv_string())?);
        index.push_str(&format!(
            "{panel},{k},{},{},{name}\n",
            curve.panel, curve.memory_ratio
        ));
    }
    paths.push(write(
        out_dir.join(format!("{}_index.csv", figure.as_str())),
        index,
    )?);
    Ok(paths)
}
