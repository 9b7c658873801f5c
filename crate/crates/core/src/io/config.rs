//! Experiment configuration, stored as TOML with `[system]`, `[dictionary]`,
//! `[edmd]` and `[output]` sections.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::numerics::DEFAULT_RTOL;
use crate::{Error, Result};

/// Environment variable overriding `output.dir`.
pub const ENV_OUTPUT_DIR: &str = "KOOPMAN_OUTPUT_DIR";
/// Environment variable fixing the worker-thread count.
pub const ENV_WORKERS: &str = "KOOPMAN_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub dictionary: DictionaryConfig,
    #[serde(default)]
    pub edmd: EdmdConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    0
}
fn default_n_traj() -> usize {
    1000
}
fn default_samples() -> usize {
    11
}
fn default_duffing_dt() -> f64 {
    0.25
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemConfig {
    Lti {
        m: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    Duffing {
        #[serde(default = "default_n_traj")]
        n_traj: usize,
        #[serde(default = "default_samples")]
        samples_per_traj: usize,
        #[serde(default = "default_duffing_dt")]
        delta_t: f64,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    DoubleWell {
        sigma: f64,
        m: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    SwissRoll {
        epsilon: Option<f64>,
        m: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    ExternalFile {
        path: PathBuf,
        delta_t: Option<f64>,
    },
}

impl SystemConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SystemConfig::Lti { .. } => "lti",
            SystemConfig::Duffing { .. } => "duffing",
            SystemConfig::DoubleWell { .. } => "double-well",
            SystemConfig::SwissRoll { .. } => "swiss-roll",
            SystemConfig::ExternalFile { .. } => "external-file",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            SystemConfig::Lti { seed, .. }
            | SystemConfig::Duffing { seed, .. }
            | SystemConfig::DoubleWell { seed, .. }
            | SystemConfig::SwissRoll { seed, .. } => Some(seed),
            SystemConfig::ExternalFile { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DictionaryConfig {
    Hermite {
        max_order: usize,
        /// Additional multi-indices appended after the full tensor set.
        #[serde(default)]
        extra_terms: Vec<Vec<u32>>,
    },
    ThinPlate {
        centers: usize,
        #[serde(default = "yes")]
        include_constant: bool,
        /// Defaults to the system seed.
        kmeans_seed: Option<u64>,
    },
    SpectralElement {
        order: usize,
        /// Split boxes holding more points than this; required unless `uniform`.
        max_points: Option<usize>,
        max_depth: u32,
        /// Subdivide every occupied box to `max_depth` regardless of counts.
        #[serde(default)]
        uniform: bool,
        /// Root box; the data bounding box when omitted.
        lo: Option<Vec<f64>>,
        hi: Option<Vec<f64>>,
        /// Full tensor products; defaults to true in 1D only.
        tensor: Option<bool>,
    },
    State,
    FourierPair {
        k_param: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdmdConfig {
    pub rtol: f64,
    pub modes: bool,
}

impl Default for EdmdConfig {
    fn default() -> Self {
        EdmdConfig { rtol: DEFAULT_RTOL, modes: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub archive: String,
    pub report: String,
    /// Also write the generated snapshots under this name.
    pub snapshots: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), archive: "archive.json".into(), report: "report.csv".into(), snapshots: None }
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::input(msg()))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Hex SHA-256 of the canonical TOML form with the output section reset,
    /// so only settings that determine the results contribute.
    pub fn hash(&self) -> Result<String> {
        let canonical = ExperimentConfig { output: OutputConfig::default(), ..self.clone() };
        let digest = Sha256::digest(canonical.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    /// Apply [`ENV_OUTPUT_DIR`] when it is set.
    pub fn apply_env(&mut self) {
        if let Ok(dir) = std::env::var(ENV_OUTPUT_DIR) {
            if !dir.is_empty() {
                self.output.dir = PathBuf::from(dir);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.system {
            SystemConfig::Lti { m, .. } => require(*m >= 1, || "system.m must be at least 1".into())?,
            SystemConfig::Duffing { n_traj, samples_per_traj, delta_t, .. } => {
                require(*n_traj >= 1, || "system.n_traj must be at least 1".into())?;
                require(*samples_per_traj >= 2, || "system.samples_per_traj must be at least 2".into())?;
                require(*delta_t > 0.0 && delta_t.is_finite(), || format!("system.delta_t must be positive, got {delta_t}"))?;
            }
            SystemConfig::DoubleWell { sigma, m, .. } => {
                require(*sigma >= 0.0 && sigma.is_finite(), || format!("system.sigma must be nonnegative, got {sigma}"))?;
                require(*m >= 1, || "system.m must be at least 1".into())?;
            }
            SystemConfig::SwissRoll { epsilon, m, .. } => {
                if let Some(e) = epsilon {
                    require(*e > 0.0 && e.is_finite(), || format!("system.epsilon must be positive, got {e}"))?;
                }
                require(*m >= 1, || "system.m must be at least 1".into())?;
            }
            SystemConfig::ExternalFile { path, delta_t } => {
                require(path.is_file(), || format!("system.path {} is not a readable file", path.display()))?;
                if let Some(dt) = delta_t {
                    require(*dt > 0.0 && dt.is_finite(), || format!("system.delta_t must be positive, got {dt}"))?;
                }
            }
        }
        match &self.dictionary {
            DictionaryConfig::Hermite { max_order, .. } => {
                require(*max_order <= 64, || "dictionary.max_order must be at most 64".into())?
            }
            DictionaryConfig::ThinPlate { centers, .. } => {
                require(*centers >= 1, || "dictionary.centers must be at least 1".into())?
            }
            DictionaryConfig::SpectralElement { max_points, uniform, lo, hi, .. } => {
                require(*uniform || max_points.is_some_and(|p| p >= 1), || {
                    "dictionary.max_points must be at least 1 unless uniform".into()
                })?;
                require(lo.is_some() == hi.is_some(), || "dictionary.lo and dictionary.hi go together".into())?;
            }
            DictionaryConfig::State => {}
            DictionaryConfig::FourierPair { k_param } => {
                require(*k_param >= 2 && k_param % 2 == 0, || "dictionary.k_param must be even and >= 2".into())?
            }
        }
        let rtol = self.edmd.rtol;
        require(rtol > 0.0 && rtol < 1.0, || format!("edmd.rtol must lie in (0, 1), got {rtol}"))?;
        require(!self.output.archive.is_empty() && !self.output.report.is_empty(), || "output file names must be nonempty".into())
    }
}

/// Configurations shipped with the crate, by name.
pub fn bundled_config(name: &str) -> Option<&'static str> {
    match name {
        "lti" => Some(include_str!("../../configs/lti.config")),
        "duffing" => Some(include_str!("../../configs/duffing.config")),
        "double-well" | "double_well" => Some(include_str!("../../configs/double_well.config")),
        "swiss-roll" | "swiss_roll" => Some(include_str!("../../configs/swiss_roll.config")),
        _ => None,
    }
}
