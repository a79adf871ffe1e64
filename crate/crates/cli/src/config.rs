//! Run configuration files.
//!
//! Configs are TOML with three sections, `[market]`, `[run]` and an optional
//! `[override]`. Unknown keys anywhere are rejected. A run manifest (JSON)
//! written by any subcommand is accepted in place of a config and replays
//! the run it describes.

use std::fs;
use std::path::{Path, PathBuf};

use ntband_core::{MarketParams, Matrix, StrategyKind, StrategySpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Seed used when a config does not name one.
pub const DEFAULT_SEED: u64 = 20_080_101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, rename = "override", skip_serializing_if = "Option::is_none")]
    pub overrides: Option<OverrideSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub r: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Full correlation matrix, one array per row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<f64>>>,
    /// Upper triangle including the diagonal: row i holds ρ_ii … ρ_in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_upper: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub k: f64,
    pub horizon: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub strategy: String,
    pub paths: usize,
    pub seed: u64,
    pub recording_points: usize,
    pub output: PathBuf,
    /// Path index traced by `trades`.
    pub path: u64,
    /// Worker threads for ensembles; 0 picks the machine's parallelism.
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            strategy: "banded".into(),
            paths: 4000,
            seed: DEFAULT_SEED,
            recording_points: ntband_core::ensemble::DEFAULT_RECORDING_POINTS,
            output: PathBuf::from("out"),
            path: 0,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideSection {
    /// Target weights replacing Ω⁻¹μ̂.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Band coefficients αᵢ/(k^{1/3}Π) for `banded-custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<f64>>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub workers: Option<usize>,
}

/// A config after validation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub params: MarketParams,
    pub strategy: StrategySpec,
}

#[derive(Deserialize)]
struct ManifestEnvelope {
    config: RunConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a TOML config, or the `config` field of a JSON manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: ManifestEnvelope =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Ok(m.config)
        } else {
            Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn apply(&mut self, o: &CliOverrides) {
        if let Some(out) = &o.out {
            self.run.output = out.clone();
        }
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        if let Some(paths) = o.paths {
            self.run.paths = paths;
        }
        if let Some(workers) = o.workers {
            self.run.workers = workers;
        }
    }

    /// Full correlation rows, whichever way they were written.
    pub fn correlation_rows(&self) -> Result<Vec<Vec<f64>>, CliError> {
        let n = self.market.sigma.len();
        match (&self.market.rho, &self.market.rho_upper) {
            (Some(_), Some(_)) => Err(CliError::Config("give either `rho` or `rho_upper`, not both".into())),
            (Some(rows), None) => Ok(rows.clone()),
            (None, Some(upper)) => {
                if upper.len() != n {
                    return Err(CliError::Config(format!("rho_upper has {} rows, expected {n}", upper.len())));
                }
                let mut full = vec![vec![0.0; n]; n];
                for (i, row) in upper.iter().enumerate() {
                    if row.len() != n - i {
                        return Err(CliError::Config(format!(
                            "rho_upper row {i} has {} entries, expected {}",
                            row.len(),
                            n - i
                        )));
                    }
                    for (off, &v) in row.iter().enumerate() {
                        full[i][i + off] = v;
                        full[i + off][i] = v;
                    }
                }
                Ok(full)
            }
            (None, None) if n == 1 => Ok(vec![vec![1.0]]),
            (None, None) => Err(CliError::Config("`rho` is required with more than one asset".into())),
        }
    }

    /// Validates the whole config. Nothing is written anywhere before this
    /// succeeds.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let rows = self.correlation_rows()?;
        let rho = Matrix::from_rows(&rows).map_err(|e| CliError::Config(format!("rho: {e}")))?;
        let m = &self.market;
        let params = MarketParams::new(m.r, m.mu.clone(), m.sigma.clone(), rho, m.k, m.horizon, m.dt)?;

        let kind: StrategyKind =
            self.run.strategy.parse().map_err(|e: ntband_core::Error| CliError::Config(e.to_string()))?;
        let overrides = self.overrides.clone().unwrap_or_default();
        let kind = match (kind, overrides.widths) {
            (StrategyKind::BandedCustomWidths(_), Some(w)) => StrategyKind::BandedCustomWidths(w),
            (StrategyKind::BandedCustomWidths(_), None) => {
                return Err(CliError::Config("strategy `banded-custom` needs `override.widths`".into()))
            }
            (_, Some(_)) => {
                return Err(CliError::Config("`override.widths` only applies to strategy `banded-custom`".into()))
            }
            (k, None) => k,
        };
        let mut strategy = StrategySpec::new(kind);
        if let Some(w) = overrides.weights {
            strategy = strategy.with_weights(w);
        }
        strategy.validate(params.n_assets()).map_err(|e| CliError::Config(e.to_string()))?;

        if self.run.recording_points == 0 {
            return Err(CliError::Config("`run.recording_points` must be at least 1".into()));
        }
        Ok(Resolved { config: self.clone(), params, strategy })
    }

    /// Same as [`resolve`](Self::resolve), additionally requiring an ensemble
    /// of at least two paths.
    pub fn resolve_ensemble(&self) -> Result<Resolved, CliError> {
        if self.run.paths < 2 {
            return Err(CliError::Config(format!(
                "`run.paths` = {} but the standard error needs at least 2 paths",
                self.run.paths
            )));
        }
        self.resolve()
    }
}
