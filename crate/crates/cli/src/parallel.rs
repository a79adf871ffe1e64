//! Multi-threaded ensembles.
//!
//! Paths are farmed out to a rayon pool and collected back in path-index
//! order, so the summary is identical for any worker count.

use ntband_core::{
    run_path, EnsembleSummary, MarketParams, PathOptions, PathResult, RecordingGrid, StrategySpec, UtilityModel,
};
use rayon::prelude::*;

use crate::error::CliError;

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Io(std::io::Error::other(e)))
}

/// Runs paths `0..paths` and maps each result through `f`, returning the
/// mapped values in path order.
pub fn map_paths<U, T, F>(
    params: &MarketParams,
    strategy: &StrategySpec,
    utility: &U,
    base_seed: u64,
    paths: usize,
    options: &PathOptions,
    workers: usize,
    f: F,
) -> Result<Vec<T>, CliError>
where
    U: UtilityModel + Sync + ?Sized,
    T: Send,
    F: Fn(PathResult) -> T + Sync,
{
    let results: ntband_core::Result<Vec<T>> = pool(workers)?.install(|| {
        (0..paths as u64)
            .into_par_iter()
            .map(|i| run_path(params, strategy, utility, base_seed, i, options).map(&f))
            .collect()
    });
    Ok(results?)
}

/// Parallel counterpart of [`ntband_core::run_ensemble`]; same result for any
/// `workers` (0 uses rayon's default).
pub fn run_ensemble<U: UtilityModel + Sync + ?Sized>(
    params: &MarketParams,
    strategy: &StrategySpec,
    utility: &U,
    base_seed: u64,
    paths: usize,
    options: &PathOptions,
    workers: usize,
) -> Result<EnsembleSummary, CliError> {
    if paths < 2 {
        return Err(CliError::Config(format!("path count {paths} is below 2")));
    }
    let grid = RecordingGrid::new(params, options.recording_points)?;
    let options = PathOptions { record_trades: false, record_states: false, ..*options };
    let outcomes = map_paths(params, strategy, utility, base_seed, paths, &options, workers, |r| {
        r.completed().then_some(r.log_wealth)
    })?;
    Ok(EnsembleSummary::from_paths(grid.times().to_vec(), base_seed, outcomes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ntband_core::{LtgmModel, Matrix, StrategyKind};

    #[test]
    fn matches_sequential_engine() {
        let rho = Matrix::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap();
        let params = MarketParams::new(1.0, vec![1.3, 1.5], vec![1.0, 1.0], rho, 0.005, 1.0, 0.01).unwrap();
        let model = LtgmModel::new(&params).unwrap();
        let spec = StrategySpec::new(StrategyKind::Banded);
        let opts = PathOptions::default();
        let seq = ntband_core::run_ensemble(&params, &spec, &model, 8, 64, &opts).unwrap();
        for workers in [1, 3, 8] {
            assert_eq!(run_ensemble(&params, &spec, &model, 8, 64, &opts, workers).unwrap(), seq);
        }
    }
}
