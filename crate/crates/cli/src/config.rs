//! Configuration file handling and artifact provenance.
//!
//! A single JSON file can pre-set any command parameter: global settings at
//! the top level plus one optional block per subcommand. Command-line flags
//! override the file, and built-in defaults fill whatever remains. Every
//! artifact embeds a [`Provenance`] header naming the tool version and a
//! SHA-256 digest of the fully resolved configuration, so identical requests
//! are recognisable byte-for-byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, Convention, Engine, Family, Lift};

/// On-disk configuration schema. Unknown keys are rejected so typos surface
/// as errors instead of silently falling back to defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub convention: Option<Convention>,
    pub engine: Option<Engine>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub modes: ModesFile,
    #[serde(default)]
    pub simulate: SimulateFile,
    #[serde(default)]
    pub thermal: ThermalFile,
    #[serde(default)]
    pub limits: LimitsFile,
    #[serde(default)]
    pub isolines: IsolinesFile,
    #[serde(default)]
    pub oracle: OracleFile,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesFile {
    pub family: Option<Family>,
    pub potential_file: Option<PathBuf>,
    pub n_grid: Option<usize>,
    pub half_box: Option<f64>,
    pub barrier_height: Option<f64>,
    pub barrier_half_width: Option<f64>,
    pub sigma: Option<f64>,
    pub omega: Option<f64>,
    pub mass: Option<f64>,
    pub step: Option<f64>,
    pub unchecked: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub delta_e: Option<f64>,
    pub v0: Option<f64>,
    pub n_total: Option<f64>,
    pub z0: Option<f64>,
    pub theta0: Option<f64>,
    pub f: Option<f64>,
    pub periods: Option<f64>,
    pub samples: Option<usize>,
    pub steps_per_period: Option<u32>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalFile {
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub x_range: Option<String>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsFile {
    #[serde(rename = "deltaE_over_hbar")]
    pub delta_e_over_hbar: Option<f64>,
    pub v: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsolinesFile {
    pub f_values: Option<Vec<f64>>,
    pub v: Option<f64>,
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleFile {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub delta_e: Option<f64>,
    pub v0: Option<f64>,
    pub lift: Option<Lift>,
    pub x: Option<f64>,
    pub kick_frac: Option<f64>,
    pub c0_re: Option<f64>,
    pub c0_im: Option<f64>,
    pub c1_re: Option<f64>,
    pub c1_im: Option<f64>,
    pub periods: Option<f64>,
    pub samples: Option<usize>,
}

/// Reads and validates the config file, or returns defaults when none was
/// given.
pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))
}

/// Three-way precedence: command-line flag, then config file, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Header embedded in every artifact: which tool produced it, and a digest of
/// the fully resolved configuration that did.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
}

/// Builds the provenance header for a resolved configuration.
pub fn provenance<C: Serialize>(resolved: &C) -> Provenance {
    let canonical = serde_json::to_string(resolved).expect("resolved config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    Provenance {
        tool: "josephson-kit",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: format!("{:x}", hasher.finalize()),
    }
}
