//! CSV and JSON outputs.
//!
//! Numbers are written with 12 significant digits. Every data file gets a
//! sibling `<stem>.manifest.json` recording the resolved config, so a run can
//! be replayed byte for byte (only the timestamp changes).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ntband_core::strategy::{ltgm_width_coefficients, uncorrelated_width_coefficients};
use ntband_core::{DifferenceSeries, EnsembleSummary, LtgmModel, MarketParams, PathResult, PortfolioState, TradeEvent};
use serde::Serialize;

use crate::config::RunConfig;

/// Width coefficients αᵢ/(k^{1/3}Π) published for the reference two-asset
/// market (r = 1, μ = (1.3, 1.5), σ = (1, 1), ρ₁₂ = 0.5): correct widths, then
/// widths computed ignoring the correlation.
pub const REPORTED_WIDTHS: [f64; 2] = [0.167, 0.710];
pub const REPORTED_UNCORRELATED_WIDTHS: [f64; 2] = [0.508, 0.760];

pub const SUMMARY_HEADER: &str = "t,mean_log_wealth,sem,n_paths";
pub const TRADES_HEADER: &str = "t,asset,side,amount,cost";
pub const DIFFERENCE_HEADER: &str = "t,mean_a,mean_b,difference,sem";

/// Formats `x` with 12 significant digits in plain decimal notation,
/// switching to exponent notation outside [1e-6, 1e15).
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-6..15).contains(&mag) {
        return format!("{x:.11e}");
    }
    let s = format!("{:.*}", (11 - mag).max(0) as usize, x);
    // Rounding can carry into a new leading digit (9.99… -> 10.0…).
    let digits = s.chars().filter(char::is_ascii_digit).skip_while(|c| *c == '0').count();
    if digits > 12 && mag < 11 {
        format!("{:.*}", (10 - mag).max(0) as usize, x)
    } else {
        s
    }
}

pub fn summary_csv(summary: &EnsembleSummary) -> String {
    let mut out = String::with_capacity(64 * summary.times.len());
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for i in 0..summary.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(summary.times[i]),
            fmt_sig(summary.mean[i]),
            fmt_sig(summary.sem[i]),
            summary.n_paths
        );
    }
    out
}

pub fn trades_csv(trades: &[TradeEvent]) -> String {
    let mut out = String::from(TRADES_HEADER);
    out.push('\n');
    for e in trades {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig(e.t),
            e.asset + 1,
            e.side.as_str(),
            fmt_sig(e.amount),
            fmt_sig(e.cost)
        );
    }
    out
}

/// Per-tick bond, holdings and wealth.
pub fn series_csv(states: &[PortfolioState]) -> String {
    let n = states.first().map_or(0, |s| s.holdings.len());
    let mut out = String::from("t,bond");
    for i in 1..=n {
        let _ = write!(out, ",a{i}");
    }
    out.push_str(",wealth\n");
    for s in states {
        let _ = write!(out, "{},{}", fmt_sig(s.t), fmt_sig(s.bond));
        for a in &s.holdings {
            let _ = write!(out, ",{}", fmt_sig(*a));
        }
        let _ = writeln!(out, ",{}", fmt_sig(s.wealth()));
    }
    out
}

pub fn difference_csv(d: &DifferenceSeries) -> String {
    let mut out = String::from(DIFFERENCE_HEADER);
    out.push('\n');
    for i in 0..d.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig(d.times[i]),
            fmt_sig(d.mean_a[i]),
            fmt_sig(d.mean_b[i]),
            fmt_sig(d.difference[i]),
            fmt_sig(d.sem[i])
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandRow {
    /// 1-based asset number.
    pub asset: usize,
    pub weight: f64,
    pub alpha_over_k13_pi: f64,
    /// Half-width at Π = 1 for the table's cost rate.
    pub alpha: f64,
    pub alpha_uncorrelated: f64,
    pub paper_reported: Option<f64>,
    pub paper_reported_uncorrelated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandTable {
    pub k: f64,
    pub bond_weight: f64,
    pub growth_rate: f64,
    pub assets: Vec<BandRow>,
}

/// True for the two-asset market whose widths were published.
pub fn is_reference_market(params: &MarketParams) -> bool {
    params.n_assets() == 2
        && params.r() == 1.0
        && params.mu() == [1.3, 1.5]
        && params.sigma() == [1.0, 1.0]
        && params.rho()[(0, 1)] == 0.5
}

pub fn band_table(params: &MarketParams, k: f64) -> ntband_core::Result<BandTable> {
    let model = LtgmModel::new(params)?;
    let coeffs = ltgm_width_coefficients(params)?;
    let uncorrelated = uncorrelated_width_coefficients(params)?;
    let reference = is_reference_market(params);
    let k13 = k.cbrt();
    let assets = (0..params.n_assets())
        .map(|i| BandRow {
            asset: i + 1,
            weight: model.weights()[i],
            alpha_over_k13_pi: coeffs[i],
            alpha: coeffs[i] * k13,
            alpha_uncorrelated: uncorrelated[i],
            paper_reported: reference.then(|| REPORTED_WIDTHS[i]),
            paper_reported_uncorrelated: reference.then(|| REPORTED_UNCORRELATED_WIDTHS[i]),
        })
        .collect();
    Ok(BandTable { k, bond_weight: model.bond_weight(), growth_rate: model.growth(), assets })
}

pub fn band_table_json(table: &BandTable) -> String {
    let mut s = serde_json::to_string_pretty(table).expect("band table serializes");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub version: &'static str,
    pub timestamp: u64,
    pub command: &'a str,
    pub rng: &'static str,
    pub outputs: Vec<String>,
    pub config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_config: Option<&'a RunConfig>,
}

pub const RNG_DESCRIPTION: &str =
    "ChaCha8Rng::seed_from_u64(seed), stream = path index; n StandardNormal (ziggurat) draws per tick in asset order";

impl<'a> RunManifest<'a> {
    pub fn new(command: &'a str, config: &'a RunConfig, outputs: &[&Path]) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Self {
            version: env!("CARGO_PKG_VERSION"),
            timestamp,
            command,
            rng: RNG_DESCRIPTION,
            outputs: outputs.iter().map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned()).collect(),
            config,
            baseline_config: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn manifest_path(data_file: &Path) -> PathBuf {
    let stem = data_file.file_stem().unwrap_or_default().to_string_lossy();
    data_file.with_file_name(format!("{stem}.manifest.json"))
}

/// Writes every file through a temporary sibling and a rename, so readers
/// never see a half-written file.
pub fn write_files(files: &[(PathBuf, String)]) -> io::Result<()> {
    for (path, _) in files {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
    }
    for (path, contents) in files {
        let tmp = path.with_extension("tmp~");
        fs::write(&tmp, contents)?;
        fs::rename(&tmp, path)?;
    }
    Ok(())
}

fn write_with_manifest(path: &Path, contents: String, manifest: &RunManifest<'_>) -> io::Result<()> {
    write_files(&[(path.to_path_buf(), contents), (manifest_path(path), manifest.to_json())])
}

pub fn write_summary_csv(summary: &EnsembleSummary, path: &Path, manifest: &RunManifest<'_>) -> io::Result<()> {
    write_with_manifest(path, summary_csv(summary), manifest)
}

pub fn write_trades_csv(result: &PathResult, path: &Path, manifest: &RunManifest<'_>) -> io::Result<()> {
    write_with_manifest(path, trades_csv(&result.trades), manifest)
}

pub fn write_band_table(params: &MarketParams, k: f64, path: &Path, manifest: &RunManifest<'_>) -> io::Result<()> {
    let table = band_table(params, k).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
    write_with_manifest(path, band_table_json(&table), manifest)
}
