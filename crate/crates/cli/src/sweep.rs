//! Cartesian parameter sweeps on a bounded worker pool.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{ConfigError, SweepConfig};
use crate::run::{run_single, ARTIFACT_VERSION};
use crate::table::format_value;

pub const INDEX_FILE: &str = "index.csv";

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Result of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub index: usize,
    pub tuple: Vec<f64>,
    /// File name relative to the output directory, on success.
    pub file: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub outcomes: Vec<PointOutcome>,
}

impl SweepReport {
    pub fn failures(&self) -> impl Iterator<Item = &PointOutcome> {
        self.outcomes.iter().filter(|o| o.error.is_some())
    }

    pub fn is_complete(&self) -> bool {
        self.failures().next().is_none()
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\"").replace('\n', " "))
    } else {
        field.to_string()
    }
}

fn file_name(index: usize, size: usize) -> String {
    let width = (size.saturating_sub(1)).to_string().len().max(4);
    format!("point_{index:0width$}.csv")
}

/// Runs every grid point with `jobs` workers, writing one table per point
/// into `out_dir` and then an index mapping tuples to files. Failed points
/// are recorded in the index and the report; other outputs are kept.
pub fn run_sweep(
    cfg: &SweepConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<SweepReport, SweepError> {
    let size = cfg.size();
    if size > cfg.cap {
        return Err(ConfigError::CapExceeded { size, cap: cfg.cap }.into());
    }
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?;

    let tuples = cfg.tuples();
    let outcomes: Vec<PointOutcome> = pool.install(|| {
        tuples
            .into_par_iter()
            .enumerate()
            .map(|(index, tuple)| {
                let name = file_name(index, size);
                let result = cfg
                    .point(&tuple)
                    .map_err(|e| e.to_string())
                    .and_then(|run| run_single(&run).map_err(|e| e.to_string()))
                    .and_then(|table| {
                        let path = out_dir.join(&name);
                        fs::write(&path, table.to_csv_string())
                            .map_err(|e| format!("{}: {e}", path.display()))
                    });
                let (file, error) = match result {
                    Ok(()) => (Some(name), None),
                    Err(e) => (None, Some(e)),
                };
                PointOutcome {
                    index,
                    tuple,
                    file,
                    error,
                }
            })
            .collect()
    });

    let mut index =
        format!("#meta artifact_version = {ARTIFACT_VERSION}\n#meta points = {size}\nindex");
    for axis in &cfg.axes {
        index.push(',');
        index.push_str(axis.param.as_str());
    }
    index.push_str(",file,status,message\n");
    for o in &outcomes {
        let mut cells = vec![o.index.to_string()];
        cells.extend(o.tuple.iter().map(|&v| format_value(v)));
        cells.push(o.file.clone().unwrap_or_default());
        cells.push(if o.error.is_some() { "failed" } else { "ok" }.to_string());
        cells.push(quote(o.error.as_deref().unwrap_or("")));
        index.push_str(&cells.join(","));
        index.push('\n');
    }
    let index_path = out_dir.join(INDEX_FILE);
    fs::write(&index_path, index).map_err(io_error(&index_path))?;
    Ok(SweepReport { outcomes })
}
