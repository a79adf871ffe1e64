//! Monte Carlo engine: single seeded paths and their ensemble statistics.
//!
//! Path `i` of an ensemble with base seed `s` draws from ChaCha8 keyed by
//! `ChaCha8Rng::seed_from_u64(s)` on stream `i`. Each tick consumes exactly
//! `n` standard normals (ziggurat, `rand_distr::StandardNormal`) in asset
//! order, whatever the strategy, so two strategies run with the same base
//! seed see identical noise.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{euler_step_in_place, MarketParams, PortfolioState};
use crate::strategy::{band_widths_for_model, rebalance_in_place, BandPolicy, RegionLabel, TradeEvent, UtilityModel};

/// Default number of recording intervals between t = 0 and the horizon.
pub const DEFAULT_RECORDING_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    /// Rebalance onto the optimal curve every tick, free of charge.
    Frictionless,
    /// Log-growth no-transaction bands.
    Banded,
    /// Bands with user-supplied coefficients: αᵢ = cᵢ · k^{1/3} · Π.
    BandedCustomWidths(Vec<f64>),
    /// Rebalance onto the optimal curve every tick, paying k.
    NaiveRebalance,
    BuyAndHold,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Frictionless => "frictionless",
            StrategyKind::Banded => "banded",
            StrategyKind::BandedCustomWidths(_) => "banded-custom",
            StrategyKind::NaiveRebalance => "naive",
            StrategyKind::BuyAndHold => "buy-and-hold",
        }
    }
}

/// A strategy plus an optional override of the target weights. Without an
/// override the target curve comes from the utility model.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub weights: Option<Vec<f64>>,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind) -> Self {
        Self { kind, weights: None }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(w) = &self.weights {
            if w.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: w.len() });
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::ConfigError("target weights must be finite".into()));
            }
        }
        if let StrategyKind::BandedCustomWidths(c) = &self.kind {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
            if c.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::ConfigError("custom width coefficients must be non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Parses the strategy names used in configuration files. Custom-width
/// strategies parse with empty coefficients that the caller fills in.
impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "frictionless" => StrategyKind::Frictionless,
            "banded" => StrategyKind::Banded,
            "banded-custom" => StrategyKind::BandedCustomWidths(Vec::new()),
            "naive" => StrategyKind::NaiveRebalance,
            "buy-and-hold" => StrategyKind::BuyAndHold,
            other => return Err(Error::ConfigError(format!("unknown strategy '{other}'"))),
        })
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathOptions {
    /// Recording intervals; the grid also contains t = 0.
    pub recording_points: usize,
    /// Keep every trade in [`PathResult::trades`].
    pub record_trades: bool,
    /// Keep the pre-trade state of every tick in [`PathResult::states`].
    pub record_states: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self { recording_points: DEFAULT_RECORDING_POINTS, record_trades: false, record_states: false }
    }
}

/// Step indices at which log-wealth is recorded, evenly spread over
/// `[0, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingGrid {
    steps: Vec<u64>,
    times: Vec<f64>,
}

impl RecordingGrid {
    pub fn new(params: &MarketParams, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::ConfigError("at least one recording point is required".into()));
        }
        let total = params.steps();
        let points = (points as u64).min(total);
        let mut steps: Vec<u64> =
            (0..=points).map(|j| libm::round(j as f64 * total as f64 / points as f64) as u64).collect();
        steps.dedup();
        let times = steps.iter().map(|&m| m as f64 * params.dt()).collect();
        Ok(Self { steps, times })
    }

    pub fn steps(&self) -> &[u64] {
        &self.steps
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathStatus {
    Completed,
    Bankrupt { t: f64 },
}

/// Bookkeeping kept alongside every path so cost accounting and band
/// placement can be checked after the fact.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathAudit {
    /// Π₀ plus the sum of wealth increments produced by the dynamics alone.
    pub dynamics_wealth: f64,
    /// Σ amount over all trades.
    pub traded: f64,
    /// Σ cost over all trades.
    pub costs: f64,
    pub trade_count: u64,
    /// Largest |Aᵢ − boundary| right after a trade on asset i.
    pub max_boundary_gap: f64,
    /// Assets left outside their band after a rebalance (should stay 0).
    pub post_trade_violations: u64,
    /// Trades on assets that were inside the closed band (should stay 0).
    pub trades_inside_band: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub path_index: u64,
    /// log Π at each recording time reached.
    pub log_wealth: Vec<f64>,
    pub trades: Vec<TradeEvent>,
    pub states: Vec<PortfolioState>,
    pub status: PathStatus,
    pub final_state: PortfolioState,
    pub audit: PathAudit,
}

impl PathResult {
    pub fn completed(&self) -> bool {
        self.status == PathStatus::Completed
    }
}

/// The generator for path `path_index` of an ensemble seeded with
/// `base_seed`.
pub fn path_rng(base_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(path_index);
    rng
}

enum WidthRule {
    None,
    Model,
    Coefficients(Vec<f64>),
}

struct Resolved {
    trades: bool,
    cost: f64,
    widths: WidthRule,
}

fn resolve(params: &MarketParams, strategy: &StrategySpec) -> Resolved {
    let k = params.k();
    match &strategy.kind {
        StrategyKind::Frictionless => Resolved { trades: true, cost: 0.0, widths: WidthRule::None },
        StrategyKind::NaiveRebalance => Resolved { trades: true, cost: k, widths: WidthRule::None },
        StrategyKind::BuyAndHold => Resolved { trades: false, cost: k, widths: WidthRule::None },
        StrategyKind::Banded => Resolved { trades: true, cost: k, widths: WidthRule::Model },
        StrategyKind::BandedCustomWidths(c) => {
            let k13 = libm::cbrt(k);
            Resolved { trades: true, cost: k, widths: WidthRule::Coefficients(c.iter().map(|x| x * k13).collect()) }
        }
    }
}

fn target_curve<U: UtilityModel + ?Sized>(strategy: &StrategySpec, utility: &U, wealth: f64, t: f64, out: &mut [f64]) {
    match &strategy.weights {
        Some(w) => {
            for (o, x) in out.iter_mut().zip(w) {
                *o = wealth * x;
            }
        }
        None => utility.optimal_holdings(wealth, t, out),
    }
}

/// Runs one path from Π₀ = 1 on the strategy's target curve.
///
/// Each tick first trades on the state left by the previous step (with the
/// target and widths frozen at the pre-trade wealth), then advances the
/// dynamics. Ruin ends the path with [`PathStatus::Bankrupt`] rather than an
/// error.
pub fn run_path<U: UtilityModel + ?Sized>(
    params: &MarketParams,
    strategy: &StrategySpec,
    utility: &U,
    base_seed: u64,
    path_index: u64,
    options: &PathOptions,
) -> Result<PathResult> {
    let n = params.n_assets();
    strategy.validate(n)?;
    if utility.n_assets() != n {
        return Err(Error::DimensionMismatch { expected: n, found: utility.n_assets() });
    }
    let grid = RecordingGrid::new(params, options.recording_points)?;
    let rule = resolve(params, strategy);
    let mut rng = path_rng(base_seed, path_index);

    let mut initial = vec![0.0; n];
    target_curve(strategy, utility, 1.0, 0.0, &mut initial);
    let bond = 1.0 - initial.iter().sum::<f64>();
    let mut state = PortfolioState::new(bond, initial);

    let mut policy = BandPolicy { center: vec![0.0; n], half_width: vec![0.0; n], cost: rule.cost };
    let mut labels = vec![RegionLabel::NoTransaction; n];
    let mut iid = vec![0.0; n];
    let mut z = vec![0.0; n];

    let mut log_wealth = Vec::with_capacity(grid.len());
    let mut trades = Vec::new();
    let mut states = Vec::new();
    let mut audit = PathAudit { dynamics_wealth: state.wealth(), ..PathAudit::default() };
    let mut next_record = 0usize;
    let mut status = PathStatus::Completed;
    let total = params.steps();

    loop {
        let wealth = state.wealth();
        if grid.steps.get(next_record) == Some(&state.step) {
            log_wealth.push(libm::log(wealth));
            next_record += 1;
        }
        if options.record_states {
            states.push(state.clone());
        }
        if state.step == total {
            break;
        }

        if rule.trades {
            target_curve(strategy, utility, wealth, state.t, &mut policy.center);
            match &rule.widths {
                WidthRule::None => {}
                WidthRule::Model => {
                    let w = band_widths_for_model(params, utility, rule.cost, wealth, state.t)?;
                    policy.half_width.copy_from_slice(&w);
                }
                WidthRule::Coefficients(c) => {
                    for (h, ci) in policy.half_width.iter_mut().zip(c) {
                        *h = ci * wealth;
                    }
                }
            }
            for (i, l) in labels.iter_mut().enumerate() {
                let a = state.holdings[i];
                *l = if a > policy.upper(i) {
                    RegionLabel::Sale
                } else if a < policy.lower(i) {
                    RegionLabel::Purchase
                } else {
                    RegionLabel::NoTransaction
                };
            }
            let outcome = rebalance_in_place(&mut state, &policy, |e| {
                audit.trade_count += 1;
                audit.costs += e.cost;
                if labels[e.asset] == RegionLabel::NoTransaction {
                    audit.trades_inside_band += 1;
                }
                if options.record_trades {
                    trades.push(e);
                }
            });
            match outcome {
                Ok(traded) => audit.traded += traded,
                Err(Error::NonPositiveWealth { t, .. }) => {
                    status = PathStatus::Bankrupt { t };
                    break;
                }
                Err(e) => return Err(e),
            }
            for (i, l) in labels.iter().enumerate() {
                let a = state.holdings[i];
                let gap = match l {
                    RegionLabel::Sale => (a - policy.upper(i)).abs(),
                    RegionLabel::Purchase => (a - policy.lower(i)).abs(),
                    RegionLabel::NoTransaction => 0.0,
                };
                audit.max_boundary_gap = audit.max_boundary_gap.max(gap);
                if a > policy.upper(i) || a < policy.lower(i) {
                    audit.post_trade_violations += 1;
                }
            }
        }

        for x in iid.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
        params.cholesky().correlate_into(&iid, &mut z)?;
        let before = state.wealth();
        match euler_step_in_place(&mut state, params, &z) {
            Ok(()) => audit.dynamics_wealth += state.wealth() - before,
            Err(Error::NonPositiveWealth { t, .. }) => {
                status = PathStatus::Bankrupt { t };
                break;
            }
            Err(e) => return Err(e),
        }
    }

    Ok(PathResult { path_index, log_wealth, trades, states, status, final_state: state, audit })
}

/// Mean and standard error of log Π on the recording grid.
///
/// Per-path trajectories of completed paths are kept so that two ensembles
/// sharing a base seed can be compared path by path.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub sem: Vec<f64>,
    /// Completed paths contributing to `mean` and `sem`.
    pub n_paths: usize,
    /// Bankrupt paths, excluded from the statistics.
    pub aborted: usize,
    pub base_seed: u64,
    /// log Π per path index; `None` for aborted paths.
    pub paths: Vec<Option<Vec<f64>>>,
}

impl EnsembleSummary {
    /// Builds the summary from per-path outcomes listed in path-index order.
    /// Reductions run in that order, so the result does not depend on how the
    /// paths were scheduled.
    pub fn from_paths(times: Vec<f64>, base_seed: u64, paths: Vec<Option<Vec<f64>>>) -> Result<Self> {
        if paths.len() < 2 {
            return Err(Error::ConfigError("an ensemble needs at least 2 paths".into()));
        }
        let completed: Vec<&Vec<f64>> = paths.iter().flatten().collect();
        if let Some(bad) = completed.iter().find(|p| p.len() != times.len()) {
            return Err(Error::DimensionMismatch { expected: times.len(), found: bad.len() });
        }
        let (mean, sem) = column_stats(&completed, times.len());
        Ok(Self {
            n_paths: completed.len(),
            aborted: paths.len() - completed.len(),
            times,
            mean,
            sem,
            base_seed,
            paths,
        })
    }

    pub fn total_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_sem(&self) -> f64 {
        self.sem.last().copied().unwrap_or(f64::NAN)
    }
}

/// Column means and SEMs (sample standard deviation / √S). Fewer than two
/// rows give NaN.
fn column_stats(rows: &[&Vec<f64>], cols: usize) -> (Vec<f64>, Vec<f64>) {
    let s = rows.len();
    let mut mean = vec![0.0; cols];
    let mut sem = vec![f64::NAN; cols];
    if s == 0 {
        return (vec![f64::NAN; cols], sem);
    }
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= s as f64;
    }
    if s >= 2 {
        let mut ss = vec![0.0; cols];
        for row in rows {
            for ((acc, v), m) in ss.iter_mut().zip(row.iter()).zip(&mean) {
                let d = v - m;
                *acc += d * d;
            }
        }
        for (e, acc) in sem.iter_mut().zip(ss) {
            *e = libm::sqrt(acc / (s as f64 - 1.0)) / libm::sqrt(s as f64);
        }
    }
    (mean, sem)
}

/// Runs `paths` seeded paths one after another and summarizes them.
pub fn run_ensemble<U: UtilityModel + ?Sized>(
    params: &MarketParams,
    strategy: &StrategySpec,
    utility: &U,
    base_seed: u64,
    paths: usize,
    options: &PathOptions,
) -> Result<EnsembleSummary> {
    if paths < 2 {
        return Err(Error::ConfigError(format!("path count {paths} is below 2")));
    }
    let grid = RecordingGrid::new(params, options.recording_points)?;
    let options = PathOptions { record_trades: false, record_states: false, ..*options };
    let outcomes = (0..paths as u64)
        .map(|i| {
            run_path(params, strategy, utility, base_seed, i, &options).map(|r| r.completed().then_some(r.log_wealth))
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleSummary::from_paths(grid.times.clone(), base_seed, outcomes)
}

/// Per-time difference of two ensembles' mean log-wealth.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSeries {
    pub times: Vec<f64>,
    pub mean_a: Vec<f64>,
    pub mean_b: Vec<f64>,
    pub difference: Vec<f64>,
    pub sem: Vec<f64>,
    /// Whether `sem` comes from path-by-path differences under common random
    /// numbers.
    pub paired: bool,
    /// Paths entering the difference (both completed, when paired).
    pub n_paths: usize,
}

impl DifferenceSeries {
    pub fn final_difference(&self) -> f64 {
        self.difference.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_sem(&self) -> f64 {
        self.sem.last().copied().unwrap_or(f64::NAN)
    }
}

/// `a − b` per recording time. With a shared base seed the paths are paired
/// index by index and the SEM is that of the per-path differences; otherwise
/// the two SEMs are combined in quadrature.
pub fn compare(a: &EnsembleSummary, b: &EnsembleSummary) -> Result<DifferenceSeries> {
    if a.times != b.times {
        return Err(Error::GridMismatch(String::from("recording grids differ")));
    }
    if a.total_paths() != b.total_paths() {
        return Err(Error::GridMismatch(format!("path counts differ ({} vs {})", a.total_paths(), b.total_paths())));
    }
    let cols = a.times.len();
    if a.base_seed == b.base_seed {
        let diffs: Vec<Vec<f64>> = a
            .paths
            .iter()
            .zip(&b.paths)
            .filter_map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(p, q)| p - q).collect()),
                _ => None,
            })
            .collect();
        let rows: Vec<&Vec<f64>> = diffs.iter().collect();
        let (difference, sem) = column_stats(&rows, cols);
        Ok(DifferenceSeries {
            times: a.times.clone(),
            mean_a: a.mean.clone(),
            mean_b: b.mean.clone(),
            difference,
            sem,
            paired: true,
            n_paths: rows.len(),
        })
    } else {
        let difference = a.mean.iter().zip(&b.mean).map(|(x, y)| x - y).collect();
        let sem = a.sem.iter().zip(&b.sem).map(|(x, y)| libm::sqrt(x * x + y * y)).collect();
        Ok(DifferenceSeries {
            times: a.times.clone(),
            mean_a: a.mean.clone(),
            mean_b: b.mean.clone(),
            difference,
            sem,
            paired: false,
            n_paths: a.n_paths.min(b.n_paths),
        })
    }
}
