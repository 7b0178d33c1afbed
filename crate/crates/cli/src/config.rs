//! Line-oriented `key = value` configuration for single runs and sweeps.
//!
//! Blank lines and text after `#` are ignored. Numeric values accept plain
//! decimals and multiples of `pi` such as `4*pi` or `pi/2`.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use qbattery::{InitialAmplitudes, SystemParams};

/// Default bound on the number of points in a sweep.
pub const DEFAULT_SWEEP_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{key}: {message}")]
    Range { key: String, message: String },
    #[error("over-determined: R vs lambda")]
    OverDetermined,
    #[error("missing required key {0}")]
    Missing(&'static str),
    #[error("sweep has {size} points, exceeding the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
}

fn range(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        key: key.to_string(),
        message: message.into(),
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax {
        line,
        message: message.into(),
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(
                        "unknown value {s:?}, expected one of: {}",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

keyword_enum!(Solver {
    Analytic => "analytic",
    Oracle => "oracle",
    Both => "both",
});

keyword_enum!(TimeUnit {
    KappaT => "kappa_t",
    GammaT => "gamma_t",
});

keyword_enum!(Mode {
    Charging => "charging",
    SelfDischarge => "self_discharge",
});

keyword_enum!(Observable {
    Mu => "mu",
    Nu => "nu",
    EnergyA => "energy_A",
    EnergyB => "energy_B",
    ErgotropyB => "ergotropy_B",
    Ratio => "ratio",
    Power => "power",
    AbsNuSd => "abs_nu_sd",
});

keyword_enum!(SweepParam {
    Omega0 => "omega0",
    Kappa => "kappa",
    Gamma => "gamma",
    Lambda => "lambda",
    Ratio => "R",
    Delta => "delta",
});

impl Mode {
    /// Observables a run of this mode can emit, in column order.
    pub fn observables(self) -> &'static [Observable] {
        use Observable::*;
        match self {
            Mode::Charging => &[Mu, Nu, EnergyA, EnergyB, ErgotropyB, Ratio, Power],
            Mode::SelfDischarge => &[AbsNuSd, EnergyB, ErgotropyB],
        }
    }

    fn default_time_unit(self) -> TimeUnit {
        match self {
            Mode::Charging => TimeUnit::KappaT,
            Mode::SelfDischarge => TimeUnit::GammaT,
        }
    }

    fn default_init(self) -> InitialAmplitudes {
        match self {
            Mode::Charging => InitialAmplitudes::charger_excited(),
            Mode::SelfDischarge => InitialAmplitudes::battery_excited(),
        }
    }
}

/// Uniform output grid; `t_max` is expressed in the run's time unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub t_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// `kappa` is zero for self-discharge runs.
    pub params: SystemParams,
    pub init: InitialAmplitudes,
    pub grid: Grid,
    pub solver: Solver,
    /// Requested observables in column order.
    pub outputs: Vec<Observable>,
    pub time_unit: TimeUnit,
}

impl RunConfig {
    /// Rate that converts physical time into the configured time unit.
    pub fn time_scale(&self) -> Result<f64, ConfigError> {
        let (key, rate) = match self.time_unit {
            TimeUnit::KappaT => ("kappa", self.params.kappa),
            TimeUnit::GammaT => ("gamma", self.params.gamma),
        };
        if rate > 0.0 {
            Ok(rate)
        } else {
            Err(range(
                "time_unit",
                format!("{} needs a positive {key}", self.time_unit),
            ))
        }
    }

    /// Sample times in the configured unit, `i·t_max/(n−1)`.
    pub fn scaled_times(&self) -> Vec<f64> {
        let n = self.grid.n_points;
        (0..n)
            .map(|i| self.grid.t_max * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Physical sample times.
    pub fn times(&self) -> Result<Vec<f64>, ConfigError> {
        let scale = self.time_scale()?;
        Ok(self.scaled_times().into_iter().map(|t| t / scale).collect())
    }

    /// Config as `key = value` lines that parse back to an equal value.
    pub fn echo(&self) -> Vec<String> {
        let p = &self.params;
        let mut lines = vec![
            format!("mode = {}", self.mode),
            format!("omega0 = {}", p.omega0),
        ];
        if self.mode == Mode::Charging {
            lines.push(format!("kappa = {}", p.kappa));
        }
        lines.extend([
            format!("gamma = {}", p.gamma),
            format!("lambda = {}", p.lambda),
            format!("delta = {}", p.delta),
            format!("mu0_re = {}", self.init.mu0.re),
            format!("mu0_im = {}", self.init.mu0.im),
            format!("nu0_re = {}", self.init.nu0.re),
            format!("nu0_im = {}", self.init.nu0.im),
            format!("t_max = {}", self.grid.t_max),
            format!("n_points = {}", self.grid.n_points),
            format!("solver = {}", self.solver),
            format!("time_unit = {}", self.time_unit),
            format!(
                "outputs = {}",
                self.outputs
                    .iter()
                    .map(|o| o.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        ]);
        lines
    }

    /// Rebuilds a config from the `#cfg` lines of a table header.
    pub fn from_echo(text: &str) -> Result<Self, ConfigError> {
        let body: String = text
            .lines()
            .filter_map(|l| l.strip_prefix("#cfg "))
            .map(|l| format!("{l}\n"))
            .collect();
        match parse_config(&body)? {
            Config::Run(cfg) => Ok(cfg),
            Config::Sweep(_) => Err(range("config", "echo describes a sweep")),
        }
    }
}

/// One sweep axis: a parameter and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Run settings with each swept parameter at its first value.
    pub base: RunConfig,
    /// Memory ratio held fixed while other parameters vary, when the bath
    /// width was given as `R` rather than `lambda`.
    pub fixed_ratio: Option<f64>,
    pub axes: Vec<Axis>,
    pub out_dir: Option<PathBuf>,
    pub cap: usize,
}

impl SweepConfig {
    /// Wraps a single run as a sweep with no axes.
    pub fn single(base: RunConfig) -> Self {
        SweepConfig {
            base,
            fixed_ratio: None,
            axes: Vec::new(),
            out_dir: None,
            cap: DEFAULT_SWEEP_CAP,
        }
    }

    /// Number of grid points; an empty axis list is a single run.
    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Parameter tuples in row-major order, last axis fastest.
    pub fn tuples(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut next = prefix.clone();
                        next.push(v);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// Run config for one tuple from [`SweepConfig::tuples`].
    pub fn point(&self, tuple: &[f64]) -> Result<RunConfig, ConfigError> {
        let p = self.base.params;
        let (mut omega0, mut kappa, mut gamma, mut lambda, mut delta) =
            (p.omega0, p.kappa, p.gamma, p.lambda, p.delta);
        let mut ratio = self.fixed_ratio;
        for (axis, &v) in self.axes.iter().zip(tuple) {
            match axis.param {
                SweepParam::Omega0 => omega0 = v,
                SweepParam::Kappa => kappa = v,
                SweepParam::Gamma => gamma = v,
                SweepParam::Lambda => lambda = v,
                SweepParam::Ratio => ratio = Some(v),
                SweepParam::Delta => delta = v,
            }
        }
        let params = match ratio {
            Some(r) => SystemParams::with_memory_ratio(omega0, kappa, gamma, r, delta),
            None => SystemParams::new(omega0, kappa, gamma, lambda, delta),
        }
        .map_err(physics_error)?;
        let cfg = RunConfig {
            params,
            ..self.base.clone()
        };
        cfg.time_scale()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Run(RunConfig),
    Sweep(SweepConfig),
}

fn physics_error(e: qbattery::Error) -> ConfigError {
    match e {
        qbattery::Error::InvalidParameter { field, reason } => range(field, reason),
        other => range("params", other.to_string()),
    }
}

/// Parses a real number, allowing `pi`, `k*pi`, and an optional `/d`.
pub fn parse_real(text: &str) -> Option<f64> {
    let text = text.trim();
    let (head, den) = match text.split_once('/') {
        Some((h, d)) => (h.trim(), Some(d.trim().parse::<f64>().ok()?)),
        None => (text, None),
    };
    let num = if head == "pi" {
        PI
    } else if let Some(k) = head.strip_suffix("pi") {
        k.trim().strip_suffix('*')?.trim().parse::<f64>().ok()? * PI
    } else {
        head.parse::<f64>().ok()?
    };
    let value = match den {
        Some(d) => num / d,
        None => num,
    };
    value.is_finite().then_some(value)
}

const RUN_KEYS: [&str; 17] = [
    "mode",
    "omega0",
    "kappa",
    "gamma",
    "lambda",
    "R",
    "delta",
    "t_max",
    "n_points",
    "mu0_re",
    "mu0_im",
    "nu0_re",
    "nu0_im",
    "solver",
    "time_unit",
    "outputs",
    "out_dir",
];

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Entries(Vec<Entry>);

impl Entries {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.0.iter().find(|e| e.key == key)
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|e| {
                parse_real(&e.value).ok_or_else(|| {
                    syntax(e.line, format!("{key}: not a finite number: {:?}", e.value))
                })
            })
            .transpose()
    }

    fn keyword<T: FromStr<Err = String>>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|e| {
                e.value
                    .parse::<T>()
                    .map_err(|m| syntax(e.line, format!("{key}: {m}")))
            })
            .transpose()
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected `key = value`, got {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let known = RUN_KEYS.contains(&key)
            || key == "sweep_cap"
            || key
                .strip_prefix("sweep.")
                .is_some_and(|p| p.parse::<SweepParam>().is_ok());
        if !known {
            return Err(syntax(line, format!("unknown key {key:?}")));
        }
        if value.is_empty() {
            return Err(syntax(line, format!("{key}: empty value")));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(syntax(
                line,
                format!("duplicate key {key:?}, first set on line {}", prev.line),
            ));
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(Entries(entries))
}

/// Parses configuration text into a single run or a sweep.
///
/// Any `sweep.<param>`, `sweep_cap` or `out_dir` key makes the result a
/// sweep; without axes the sweep is a single run.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let entries = tokenize(text)?;

    let mut axes = Vec::new();
    for e in &entries.0 {
        if let Some(name) = e.key.strip_prefix("sweep.") {
            let param: SweepParam = name.parse().map_err(|m: String| syntax(e.line, m))?;
            let values = e
                .value
                .split(',')
                .map(|v| {
                    parse_real(v).ok_or_else(|| {
                        syntax(
                            e.line,
                            format!("{}: not a finite number: {:?}", e.key, v.trim()),
                        )
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            axes.push(Axis { param, values });
        }
    }
    let swept = |param: SweepParam| axes.iter().find(|a| a.param == param).map(|a| a.values[0]);
    let value = |key: &str, param: SweepParam| -> Result<Option<f64>, ConfigError> {
        match (entries.real(key)?, swept(param)) {
            (Some(_), Some(_)) => Err(range(key, "given both as a value and as a sweep axis")),
            (v, s) => Ok(v.or(s)),
        }
    };

    let mode = entries.keyword::<Mode>("mode")?.unwrap_or(Mode::Charging);
    let omega0 = value("omega0", SweepParam::Omega0)?.unwrap_or(1.0);
    let kappa = value("kappa", SweepParam::Kappa)?;
    let kappa = match mode {
        Mode::Charging => kappa.unwrap_or(1.0),
        Mode::SelfDischarge => match kappa {
            Some(k) if k != 0.0 => {
                return Err(range(
                    "kappa",
                    "self_discharge runs have no charger coupling",
                ))
            }
            _ => 0.0,
        },
    };
    let gamma = value("gamma", SweepParam::Gamma)?.ok_or(ConfigError::Missing("gamma"))?;
    let lambda = value("lambda", SweepParam::Lambda)?;
    let ratio = value("R", SweepParam::Ratio)?;
    let delta = value("delta", SweepParam::Delta)?.unwrap_or(0.0);
    let params = match (lambda, ratio) {
        (Some(_), Some(_)) => return Err(ConfigError::OverDetermined),
        (Some(l), None) => SystemParams::new(omega0, kappa, gamma, l, delta),
        (None, Some(r)) => SystemParams::with_memory_ratio(omega0, kappa, gamma, r, delta),
        (None, None) => return Err(ConfigError::Missing("lambda or R")),
    }
    .map_err(physics_error)?;

    let init_keys = ["mu0_re", "mu0_im", "nu0_re", "nu0_im"];
    let init = if init_keys.iter().any(|k| entries.get(k).is_some()) {
        let mut c = [0.0; 4];
        for (slot, key) in c.iter_mut().zip(init_keys) {
            *slot = entries.real(key)?.unwrap_or(0.0);
        }
        InitialAmplitudes::new(Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3]))
            .map_err(|e| range("init", e.to_string()))?
    } else {
        mode.default_init()
    };

    let t_max = entries
        .real("t_max")?
        .ok_or(ConfigError::Missing("t_max"))?;
    if !(t_max > 0.0) {
        return Err(range("t_max", "must be positive"));
    }
    let n_points = match entries.get("n_points") {
        None => return Err(ConfigError::Missing("n_points")),
        Some(e) => match e.value.parse::<usize>() {
            Ok(n) if n >= 2 => n,
            _ => {
                return Err(range(
                    "n_points",
                    format!("must be an integer >= 2, got {}", e.value),
                ))
            }
        },
    };

    let solver = entries
        .keyword::<Solver>("solver")?
        .unwrap_or(Solver::Analytic);
    let time_unit = entries
        .keyword::<TimeUnit>("time_unit")?
        .unwrap_or(mode.default_time_unit());
    let outputs = match entries.get("outputs") {
        None => mode.observables().to_vec(),
        Some(e) => {
            let mut requested = Vec::new();
            for name in e.value.split(',') {
                let o: Observable = name
                    .trim()
                    .parse()
                    .map_err(|m: String| syntax(e.line, format!("outputs: {m}")))?;
                if !mode.observables().contains(&o) {
                    return Err(range(
                        "outputs",
                        format!("{o} is not available in {mode} mode"),
                    ));
                }
                requested.push(o);
            }
            mode.observables()
                .iter()
                .copied()
                .filter(|o| requested.contains(o))
                .collect()
        }
    };

    let base = RunConfig {
        mode,
        params,
        init,
        grid: Grid { t_max, n_points },
        solver,
        outputs,
        time_unit,
    };
    base.time_scale()?;

    let is_sweep =
        !axes.is_empty() || entries.get("sweep_cap").is_some() || entries.get("out_dir").is_some();
    if !is_sweep {
        return Ok(Config::Run(base));
    }
    if mode == Mode::SelfDischarge && swept(SweepParam::Kappa).is_some() {
        return Err(range(
            "sweep.kappa",
            "self_discharge runs have no charger coupling",
        ));
    }
    let cap = match entries.get("sweep_cap") {
        None => DEFAULT_SWEEP_CAP,
        Some(e) => e
            .value
            .parse::<usize>()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| {
                range(
                    "sweep_cap",
                    format!("must be a positive integer, got {}", e.value),
                )
            })?,
    };
    let sweep = SweepConfig {
        base,
        fixed_ratio: if swept(SweepParam::Ratio).is_some() {
            None
        } else {
            ratio
        },
        axes,
        out_dir: entries.get("out_dir").map(|e| PathBuf::from(&e.value)),
        cap,
    };
    let size = sweep
        .axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()))
        .unwrap_or(usize::MAX);
    if size > cap {
        return Err(ConfigError::CapExceeded { size, cap });
    }
    Ok(Config::Sweep(sweep))
}
