//! The four subcommands. Each validates its whole input before touching the
//! output directory and returns the process exit code.

use std::path::PathBuf;

use ntband_core::strategy::ltgm_brackets;
use ntband_core::{compare, run_path, LtgmModel, PathOptions, PathStatus, RecordingGrid};

use crate::config::{Resolved, RunConfig};
use crate::error::{CliError, EXIT_BANKRUPT};
use crate::parallel;
use crate::report::{self, RunManifest};

pub const BAND_TABLE_FILE: &str = "band_table.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const DIFFERENCE_FILE: &str = "difference.csv";
pub const TRADES_FILE: &str = "trades.csv";
pub const SERIES_FILE: &str = "series.csv";

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn options(cfg: &RunConfig) -> PathOptions {
    PathOptions { recording_points: cfg.run.recording_points, ..PathOptions::default() }
}

/// Frictionless weights, growth rate and band coefficients.
pub fn cmd_weights(cfg: &RunConfig, quiet: bool) -> Result<i32, CliError> {
    let Resolved { params, .. } = cfg.resolve()?;
    let model = LtgmModel::new(&params)?;
    let table = report::band_table(&params, params.k())?;
    for (i, b) in ltgm_brackets(&params)?.iter().enumerate() {
        if *b < 0.0 {
            eprintln!("warning: width bracket for asset {} is negative ({b:e}); using its absolute value", i + 1);
        }
    }

    let path = cfg.run.output.join(BAND_TABLE_FILE);
    let manifest = RunManifest::new("weights", cfg, &[&path]);
    report::write_band_table(&params, params.k(), &path, &manifest)?;

    if !quiet {
        let coeffs: Vec<f64> = table.assets.iter().map(|a| a.alpha_over_k13_pi).collect();
        let uncorrelated: Vec<f64> = table.assets.iter().map(|a| a.alpha_uncorrelated).collect();
        println!("weights p            = {}", fmt_vec(model.weights()));
        println!("bond weight q        = {:.4}", model.bond_weight());
        println!("growth rate g        = {:.4}", model.growth());
        println!("alpha / (k^1/3 Pi)   = {}", fmt_vec(&coeffs));
        println!("  ignoring rho       = {}", fmt_vec(&uncorrelated));
        if report::is_reference_market(&params) {
            println!(
                "  published          = {} / {}",
                fmt_vec(&report::REPORTED_WIDTHS),
                fmt_vec(&report::REPORTED_UNCORRELATED_WIDTHS)
            );
        }
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn bankrupt_warning(aborted: usize, total: usize) -> i32 {
    if aborted > 0 {
        eprintln!("WARNING: {aborted} of {total} paths went bankrupt and were excluded from the statistics");
        EXIT_BANKRUPT
    } else {
        0
    }
}

/// Ensemble run of the configured strategy.
pub fn cmd_simulate(cfg: &RunConfig, quiet: bool) -> Result<i32, CliError> {
    let r = cfg.resolve_ensemble()?;
    let model = LtgmModel::new(&r.params)?;
    let summary = parallel::run_ensemble(
        &r.params,
        &r.strategy,
        &model,
        cfg.run.seed,
        cfg.run.paths,
        &options(cfg),
        cfg.run.workers,
    )?;

    let path = cfg.run.output.join(SUMMARY_FILE);
    let manifest = RunManifest::new("simulate", cfg, &[&path]);
    report::write_summary_csv(&summary, &path, &manifest)?;
    if !quiet {
        println!(
            "{}: mean log wealth at t = {} is {:.6} ± {:.6} (S = {})",
            r.strategy.kind,
            summary.times.last().copied().unwrap_or(0.0),
            summary.final_mean(),
            summary.final_sem(),
            summary.n_paths
        );
        println!("wrote {}", path.display());
    }
    Ok(bankrupt_warning(summary.aborted, summary.total_paths()))
}

/// Difference of two ensembles, `a − b`.
pub fn cmd_compare(a: &RunConfig, b: &RunConfig, quiet: bool) -> Result<i32, CliError> {
    let ra = a.resolve_ensemble()?;
    let rb = b.resolve_ensemble()?;
    let ga = RecordingGrid::new(&ra.params, a.run.recording_points)?;
    let gb = RecordingGrid::new(&rb.params, b.run.recording_points)?;
    if ga.times() != gb.times() {
        return Err(CliError::GridMismatch("the two configs have different recording grids".into()));
    }
    if a.run.paths != b.run.paths {
        return Err(CliError::GridMismatch(format!("path counts differ ({} vs {})", a.run.paths, b.run.paths)));
    }
    if a.run.seed != b.run.seed {
        return Err(CliError::GridMismatch("base seeds differ; a paired comparison needs the same seed".into()));
    }

    let run = |r: &Resolved, cfg: &RunConfig| -> Result<_, CliError> {
        let model = LtgmModel::new(&r.params)?;
        parallel::run_ensemble(
            &r.params,
            &r.strategy,
            &model,
            cfg.run.seed,
            cfg.run.paths,
            &options(cfg),
            a.run.workers,
        )
    };
    let sa = run(&ra, a)?;
    let sb = run(&rb, b)?;
    let diff = compare(&sa, &sb)?;

    let path = a.run.output.join(DIFFERENCE_FILE);
    let mut manifest = RunManifest::new("compare", a, &[&path]);
    manifest.baseline_config = Some(b);
    report::write_files(&[
        (path.clone(), report::difference_csv(&diff)),
        (report::manifest_path(&path), manifest.to_json()),
    ])?;
    if !quiet {
        println!(
            "{} − {}: final difference {:.6} ± {:.6} ({} SEM over {} paths)",
            ra.strategy.kind,
            rb.strategy.kind,
            diff.final_difference(),
            diff.final_sem(),
            if diff.paired { "paired" } else { "unpaired" },
            diff.n_paths
        );
        println!("wrote {}", path.display());
    }
    Ok(bankrupt_warning(sa.aborted + sb.aborted, sa.total_paths() + sb.total_paths()))
}

/// Trade ledger and per-tick portfolio of one seeded path.
pub fn cmd_trades(cfg: &RunConfig, quiet: bool) -> Result<i32, CliError> {
    let r = cfg.resolve()?;
    let model = LtgmModel::new(&r.params)?;
    let opts = PathOptions { record_trades: true, record_states: true, ..options(cfg) };
    let result = run_path(&r.params, &r.strategy, &model, cfg.run.seed, cfg.run.path, &opts)?;

    let trades: PathBuf = cfg.run.output.join(TRADES_FILE);
    let series: PathBuf = cfg.run.output.join(SERIES_FILE);
    let manifest = RunManifest::new("trades", cfg, &[&trades, &series]);
    let json = manifest.to_json();
    report::write_files(&[
        (trades.clone(), report::trades_csv(&result.trades)),
        (report::manifest_path(&trades), json.clone()),
        (series.clone(), report::series_csv(&result.states)),
        (report::manifest_path(&series), json),
    ])?;
    if !quiet {
        let buys = result.trades.iter().filter(|e| e.side == ntband_core::Side::Buy).count();
        println!(
            "path {}: {} trades ({} buys, {} sells), total cost {:.6}, final wealth {:.6}",
            cfg.run.path,
            result.trades.len(),
            buys,
            result.trades.len() - buys,
            result.audit.costs,
            result.final_state.wealth()
        );
        println!("wrote {} and {}", trades.display(), series.display());
    }
    Ok(match result.status {
        PathStatus::Completed => 0,
        PathStatus::Bankrupt { t } => {
            eprintln!("WARNING: the path went bankrupt at t = {t}");
            EXIT_BANKRUPT
        }
    })
}
