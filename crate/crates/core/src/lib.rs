//! Multi-asset portfolio rules under proportional transaction costs.
//!
//! The crate computes the frictionless log-optimal allocation, the
//! perturbative no-transaction band widths around it, and simulates
//! correlated geometric Brownian markets to check both. It is `no_std` and
//! needs only `alloc`; file formats and the command line live in the
//! `ntband` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ensemble;
pub mod error;
pub mod mat;
pub mod model;
pub mod strategy;

pub use ensemble::{
    compare, path_rng, run_ensemble, run_path, DifferenceSeries, EnsembleSummary, PathAudit, PathOptions, PathResult,
    PathStatus, RecordingGrid, StrategyKind, StrategySpec,
};
pub use error::{Error, Result};
pub use mat::{build_covariance, cholesky, correlated_normals, solve_spd, CholeskyFactor, CovarianceMatrix, Matrix};
pub use model::{euler_step, pure_bond_growth, MarketParams, PortfolioState};
pub use strategy::{
    band_width_general, band_width_ltgm, classify, d_matrix, expected_log_payoff, ltgm_value, optimal_weights,
    rebalance, BandPolicy, LtgmModel, RegionLabel, Side, TradeEvent, UtilityModel,
};
