//! Run configuration: TOML text with `[system]`, `[drive]` and `[run]`
//! sections, command-line overrides, defaults and validation.
//!
//! Keys (all optional):
//!
//! ```toml
//! [system]
//! units = "relative"       # or "absolute"
//! # relative: rates in units of the total cavity decay rate
//! g = 2.4
//! side_ratio = 0.5         # kappa_s / kappa
//! gamma_par = 0.1
//! gamma_star = 0.0
//! qd_detuning = 0.0        # (omega_x - omega_c) / kappa_tot
//! # absolute: kappa, kappa_s, g and gamma_par required
//! # kappa = 1.0
//! # kappa_s = 0.5
//! # omega_c = 0.0
//! # omega_x = 0.0
//!
//! [drive]
//! powers = [0.001, 0.05, 0.4, 2.0]   # input power per cavity lifetime
//! omega_min = -4.0                    # detuning in units of kappa_tot
//! omega_max = 4.0
//! omega_points = 201
//! omega_detuning = 0.0                # fixed detuning of power-sweep
//!
//! [run]
//! topology = "single-sided"           # or "double-sided"
//! methods = ["semiclassical", "master_equation"]
//! cavities = ["hot", "cold"]
//! branch_mode = "power-continued"     # frequency-continued, lower, upper
//! frame = "auto"                      # fock, displaced
//! cutoff_cap = 512
//! tolerance = 1e-10
//! cutoff_rel_change = 1e-6
//! tail_population = 1e-8
//! window_threshold = -0.95
//! nmax = 3
//! output = "qdcavity"                 # path prefix of the output files
//! workers = 0                         # 0: one per core
//! ```

use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qdcavity_core::liouvillian::{FieldFrame, SteadyStateOptions};
use qdcavity_core::semiclassical::BranchMode;
use qdcavity_core::spectra::{Cavity, Method, SweepOptions, DEFAULT_WINDOW_THRESHOLD};
use qdcavity_core::{Error as CoreError, SystemParams, Topology};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    #[default]
    Relative,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyName {
    SingleSided,
    DoubleSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
pub enum MethodName {
    #[serde(rename = "semiclassical")]
    #[value(name = "semiclassical")]
    Semiclassical,
    #[serde(rename = "master_equation")]
    #[value(name = "master_equation")]
    MasterEquation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CavityName {
    Hot,
    Cold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BranchName {
    PowerContinued,
    FrequencyContinued,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FrameName {
    Auto,
    Fock,
    Displaced,
}

impl From<TopologyName> for Topology {
    fn from(t: TopologyName) -> Self {
        match t {
            TopologyName::SingleSided => Topology::SingleSided,
            TopologyName::DoubleSided => Topology::DoubleSided,
        }
    }
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Semiclassical => Method::Semiclassical,
            MethodName::MasterEquation => Method::MasterEquation,
        }
    }
}

impl From<CavityName> for Cavity {
    fn from(c: CavityName) -> Self {
        match c {
            CavityName::Hot => Cavity::Hot,
            CavityName::Cold => Cavity::Cold,
        }
    }
}

impl From<BranchName> for BranchMode {
    fn from(b: BranchName) -> Self {
        match b {
            BranchName::PowerContinued => BranchMode::PowerContinued,
            BranchName::FrequencyContinued => BranchMode::FrequencyContinued,
            BranchName::Lower => BranchMode::Lower,
            BranchName::Upper => BranchMode::Upper,
        }
    }
}

impl From<FrameName> for FieldFrame {
    fn from(f: FrameName) -> Self {
        match f {
            FrameName::Auto => FieldFrame::Auto,
            FrameName::Fock => FieldFrame::Fock,
            FrameName::Displaced => FieldFrame::Displaced,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub units: Option<Units>,
    pub g: Option<f64>,
    pub side_ratio: Option<f64>,
    pub gamma_par: Option<f64>,
    pub gamma_star: Option<f64>,
    pub qd_detuning: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_s: Option<f64>,
    pub omega_c: Option<f64>,
    pub omega_x: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub powers: Option<Vec<f64>>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub omega_points: Option<usize>,
    pub omega_detuning: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub topology: Option<TopologyName>,
    pub methods: Option<Vec<MethodName>>,
    pub cavities: Option<Vec<CavityName>>,
    pub branch_mode: Option<BranchName>,
    pub frame: Option<FrameName>,
    pub cutoff_cap: Option<usize>,
    pub tolerance: Option<f64>,
    pub cutoff_rel_change: Option<f64>,
    pub tail_population: Option<f64>,
    pub window_threshold: Option<f64>,
    pub nmax: Option<usize>,
    pub output: Option<String>,
    pub workers: Option<usize>,
}

/// The configuration as written, before defaults are filled in.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub run: RunSection,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

pub const DEFAULT_POWERS: [f64; 4] = [1e-3, 0.05, 0.4, 2.0];
pub const DEFAULT_OMEGA_MIN: f64 = -4.0;
pub const DEFAULT_OMEGA_MAX: f64 = 4.0;
pub const DEFAULT_OMEGA_POINTS: usize = 201;
pub const DEFAULT_NMAX: usize = 3;
pub const DEFAULT_OUTPUT: &str = "qdcavity";

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: Units,
    pub params: SystemParams,
    pub powers: Vec<f64>,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub omega_detuning: f64,
    pub methods: Vec<Method>,
    pub cavities: Vec<Cavity>,
    pub options: SweepOptions,
    pub window_threshold: f64,
    pub nmax: usize,
    pub output: String,
    pub workers: usize,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    FileConfig::parse(text)?.resolve()
}

fn finite(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, "must be finite"))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64, ConfigError> {
    if finite(key, v)? < 0.0 {
        return Err(invalid(key, "must be non-negative"));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if finite(key, v)? <= 0.0 {
        return Err(invalid(key, "must be positive"));
    }
    Ok(v)
}

fn forbid(key: &str, value: Option<f64>, units: &str) -> Result<(), ConfigError> {
    match value {
        Some(_) => Err(invalid(key, format!("not used with units = \"{units}\""))),
        None => Ok(()),
    }
}

fn distinct<T: PartialEq + Copy, U: From<T>>(key: &str, items: &[T]) -> Result<Vec<U>, ConfigError> {
    if items.is_empty() {
        return Err(invalid(key, "must not be empty"));
    }
    for (k, a) in items.iter().enumerate() {
        if items[..k].contains(a) {
            return Err(invalid(key, "contains a duplicate entry"));
        }
    }
    Ok(items.iter().map(|&x| U::from(x)).collect())
}

fn system_params(s: &SystemSection, topology: Topology) -> Result<(Units, SystemParams), ConfigError> {
    let units = s.units.unwrap_or_default();
    let params = match units {
        Units::Relative => {
            forbid("system.kappa", s.kappa, "relative")?;
            forbid("system.kappa_s", s.kappa_s, "relative")?;
            forbid("system.omega_c", s.omega_c, "relative")?;
            forbid("system.omega_x", s.omega_x, "relative")?;
            let d = SystemParams::defaults(topology);
            SystemParams::normalized(
                topology,
                non_negative("system.g", s.g.unwrap_or(d.g))?,
                non_negative("system.side_ratio", s.side_ratio.unwrap_or(d.kappa_s / d.kappa))?,
                non_negative("system.gamma_par", s.gamma_par.unwrap_or(d.gamma_par))?,
                non_negative("system.gamma_star", s.gamma_star.unwrap_or(d.gamma_star))?,
                finite("system.qd_detuning", s.qd_detuning.unwrap_or(d.omega_x - d.omega_c))?,
            )
        }
        Units::Absolute => {
            forbid("system.side_ratio", s.side_ratio, "absolute")?;
            forbid("system.qd_detuning", s.qd_detuning, "absolute")?;
            let required =
                |key: &str, v: Option<f64>| v.ok_or_else(|| invalid(key, "required with units = \"absolute\""));
            let omega_c = finite("system.omega_c", s.omega_c.unwrap_or(0.0))?;
            SystemParams {
                omega_c,
                omega_x: finite("system.omega_x", s.omega_x.unwrap_or(omega_c))?,
                g: non_negative("system.g", required("system.g", s.g)?)?,
                kappa: non_negative("system.kappa", required("system.kappa", s.kappa)?)?,
                kappa_s: non_negative("system.kappa_s", required("system.kappa_s", s.kappa_s)?)?,
                gamma_par: non_negative("system.gamma_par", required("system.gamma_par", s.gamma_par)?)?,
                gamma_star: non_negative("system.gamma_star", s.gamma_star.unwrap_or(0.0))?,
                topology,
            }
        }
    };
    params.validate().map_err(|e| match e {
        CoreError::InvalidParameter { name, reason } => invalid(&format!("system.{name}"), reason),
        other => invalid("system", other),
    })?;
    if params.kappa_total() <= 0.0 {
        return Err(invalid("system.kappa", "total cavity decay rate must be positive"));
    }
    Ok((units, params))
}

impl FileConfig {
    /// Fill defaults and validate every key.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let (d, r) = (&self.drive, &self.run);
        let topology: Topology = r.topology.unwrap_or(TopologyName::SingleSided).into();
        let (units, params) = system_params(&self.system, topology)?;

        let powers = d.powers.clone().unwrap_or_else(|| DEFAULT_POWERS.to_vec());
        if powers.is_empty() {
            return Err(invalid("drive.powers", "must not be empty"));
        }
        for &p in &powers {
            non_negative("drive.powers", p)?;
        }
        let omega_min = finite("drive.omega_min", d.omega_min.unwrap_or(DEFAULT_OMEGA_MIN))?;
        let omega_max = finite("drive.omega_max", d.omega_max.unwrap_or(DEFAULT_OMEGA_MAX))?;
        if omega_max <= omega_min {
            return Err(invalid("drive.omega_max", "must exceed drive.omega_min"));
        }
        let omega_points = d.omega_points.unwrap_or(DEFAULT_OMEGA_POINTS);
        if omega_points < 2 {
            return Err(invalid("drive.omega_points", "must be at least 2"));
        }
        let omega_detuning = finite("drive.omega_detuning", d.omega_detuning.unwrap_or(0.0))?;

        let methods = distinct::<_, Method>(
            "run.methods",
            r.methods
                .as_deref()
                .unwrap_or(&[MethodName::Semiclassical, MethodName::MasterEquation]),
        )?;
        let cavities = distinct::<_, Cavity>(
            "run.cavities",
            r.cavities.as_deref().unwrap_or(&[CavityName::Hot, CavityName::Cold]),
        )?;

        let base = SteadyStateOptions::default();
        let cutoff_cap = r.cutoff_cap.unwrap_or(base.cutoff_cap);
        if cutoff_cap == 0 {
            return Err(invalid("run.cutoff_cap", "must be at least 1"));
        }
        let steady_state = SteadyStateOptions {
            tolerance: positive("run.tolerance", r.tolerance.unwrap_or(base.tolerance))?,
            cutoff_cap,
            cutoff_rel_change: positive(
                "run.cutoff_rel_change",
                r.cutoff_rel_change.unwrap_or(base.cutoff_rel_change),
            )?,
            tail_population: positive("run.tail_population", r.tail_population.unwrap_or(base.tail_population))?,
            frame: r.frame.map(Into::into).unwrap_or(base.frame),
            ..base
        };
        let options = SweepOptions {
            branch_mode: r.branch_mode.map(Into::into).unwrap_or_default(),
            steady_state,
        };

        let window_threshold = finite(
            "run.window_threshold",
            r.window_threshold.unwrap_or(DEFAULT_WINDOW_THRESHOLD),
        )?;
        if !(-1.0..=1.0).contains(&window_threshold) {
            return Err(invalid("run.window_threshold", "must lie in [-1, 1]"));
        }
        let nmax = r.nmax.unwrap_or(DEFAULT_NMAX);
        if nmax == 0 {
            return Err(invalid("run.nmax", "must be at least 1"));
        }
        let output = r.output.clone().unwrap_or_else(|| DEFAULT_OUTPUT.to_string());
        if output.is_empty() {
            return Err(invalid("run.output", "must not be empty"));
        }

        Ok(RunConfig {
            units,
            params,
            powers,
            omega_min,
            omega_max,
            omega_points,
            omega_detuning,
            methods,
            cavities,
            options,
            window_threshold,
            nmax,
            output,
            workers: r.workers.unwrap_or(0),
        })
    }
}

impl RunConfig {
    /// Resolved settings as `key=value` pairs, in a fixed order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let ss = &self.options.steady_state;
        let list = |items: Vec<&str>| items.join(",");
        let out: Vec<(&str, String)> = vec![
            (
                "system.units",
                match self.units {
                    Units::Relative => "relative",
                    Units::Absolute => "absolute",
                }
                .into(),
            ),
            (
                "system.topology",
                match p.topology {
                    Topology::SingleSided => "single-sided",
                    Topology::DoubleSided => "double-sided",
                }
                .into(),
            ),
            ("system.omega_c", p.omega_c.to_string()),
            ("system.omega_x", p.omega_x.to_string()),
            ("system.g", p.g.to_string()),
            ("system.kappa", p.kappa.to_string()),
            ("system.kappa_s", p.kappa_s.to_string()),
            ("system.kappa_total", p.kappa_total().to_string()),
            ("system.gamma_par", p.gamma_par.to_string()),
            ("system.gamma_star", p.gamma_star.to_string()),
            (
                "system.critical_photon_number",
                p.critical_photon_number().map(|v| v.to_string()).unwrap_or_default(),
            ),
            (
                "drive.powers",
                self.powers.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
            ),
            ("drive.omega_min", self.omega_min.to_string()),
            ("drive.omega_max", self.omega_max.to_string()),
            ("drive.omega_points", self.omega_points.to_string()),
            ("drive.omega_detuning", self.omega_detuning.to_string()),
            ("run.methods", list(self.methods.iter().map(|m| m.as_str()).collect())),
            ("run.cavities", list(self.cavities.iter().map(|c| c.as_str()).collect())),
            (
                "run.branch_mode",
                match self.options.branch_mode {
                    BranchMode::PowerContinued => "power-continued",
                    BranchMode::FrequencyContinued => "frequency-continued",
                    BranchMode::Lower => "lower",
                    BranchMode::Upper => "upper",
                }
                .into(),
            ),
            (
                "run.frame",
                match ss.frame {
                    FieldFrame::Auto => "auto",
                    FieldFrame::Fock => "fock",
                    FieldFrame::Displaced => "displaced",
                }
                .into(),
            ),
            ("run.cutoff_cap", ss.cutoff_cap.to_string()),
            ("run.tolerance", ss.tolerance.to_string()),
            ("run.cutoff_rel_change", ss.cutoff_rel_change.to_string()),
            ("run.tail_population", ss.tail_population.to_string()),
            ("run.direct_limit", ss.direct_limit.to_string()),
            ("run.gmres_restart", ss.gmres_restart.to_string()),
            ("run.gmres_max_iter", ss.gmres_max_iter.to_string()),
            ("run.window_threshold", self.window_threshold.to_string()),
            ("run.nmax", self.nmax.to_string()),
            ("run.output", self.output.clone()),
            ("run.workers", self.workers.to_string()),
        ];
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}
