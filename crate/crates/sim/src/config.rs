//! Experiment configuration.
//!
//! A config can come from a TOML file, from command-line flags or both; flags
//! override the file. Every field has a default, so an empty file is valid.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mmbcast_core::mmb::{InjectionPolicy, InjectionRate};
use mmbcast_core::{TminMode, TopologyKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Radio,
    Sinr,
    Hop,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Radio => "radio",
            MatrixKind::Sinr => "sinr",
            MatrixKind::Hop => "hop",
        })
    }
}

impl FromStr for MatrixKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radio" => Ok(MatrixKind::Radio),
            "sinr" => Ok(MatrixKind::Sinr),
            "hop" => Ok(MatrixKind::Hop),
            _ => Err(SimError::Config(format!("unknown matrix kind `{s}`"))),
        }
    }
}

/// Serializes through `Display` and `FromStr`.
mod text {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SinrConfig {
    pub beta: f64,
    pub noise: f64,
    pub path_loss: f64,
    /// Transmission power; by default twice the least power that makes every
    /// link feasible.
    pub power: Option<f64>,
}

impl Default for SinrConfig {
    fn default() -> Self {
        SinrConfig {
            beta: 1.0,
            noise: 1.0,
            path_loss: 3.0,
            power: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    #[serde(with = "text")]
    pub topology: TopologyKind,
    pub n: usize,
    #[serde(with = "text")]
    pub matrix: MatrixKind,
    /// Degradation distance; derived from the topology when absent.
    pub alpha: Option<u32>,
    pub sinr: SinrConfig,
    pub source_probability: f64,
    #[serde(with = "text")]
    pub rate: InjectionRate,
    #[serde(with = "text")]
    pub policy: InjectionPolicy,
    pub slots: u64,
    pub seed: u64,
    #[serde(with = "text")]
    pub tmin_mode: TminMode,
    /// Initial queue of the preloaded source; `2Δδ` when absent.
    pub preload: Option<u64>,
    pub snapshot_every: u64,
    /// Read the network from this file instead of generating it.
    pub network_file: Option<PathBuf>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: TopologyKind::OverlapTrees,
            n: 16,
            matrix: MatrixKind::Hop,
            alpha: None,
            sinr: SinrConfig::default(),
            source_probability: 1.0 / 3.0,
            rate: InjectionRate::One,
            policy: InjectionPolicy::Uniform,
            slots: 1_000_000,
            seed: 1,
            tmin_mode: TminMode::SingleBfs,
            preload: None,
            snapshot_every: 1000,
            network_file: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|source| SimError::ConfigFile {
            path: path.to_owned(),
            source,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(SimError::Config("n must be at least 2".into()));
        }
        if !(self.source_probability > 0.0 && self.source_probability <= 1.0) {
            return Err(SimError::Config(
                "source probability must lie in (0, 1]".into(),
            ));
        }
        if self.slots == 0 || self.slots > u64::from(u32::MAX) {
            return Err(SimError::Config("slots must lie in [1, 2^32)".into()));
        }
        if self.snapshot_every == 0 {
            return Err(SimError::Config(
                "snapshot interval must be positive".into(),
            ));
        }
        if self.alpha == Some(0) {
            return Err(SimError::Config("alpha must be positive".into()));
        }
        if let InjectionRate::Fixed(p) = self.rate {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Config("rate must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the TOML form. The output
    /// directory is not part of it.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Degradation distance used by the benchmark experiments, at least 1.
pub fn alpha_rule(kind: TopologyKind, n: usize) -> u32 {
    let log = (n as f64).log2();
    let a = match kind {
        TopologyKind::Bipartite => log.sqrt(),
        TopologyKind::Path => log,
        TopologyKind::OverlapTrees | TopologyKind::RandomConnected => log / 2.0,
    };
    (a.ceil() as u32).max(1)
}
