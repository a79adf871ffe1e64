//! Frictionless optimum, band widths and the band trade rule.

mod bands;
mod trade;
mod utility;

pub use bands::{
    band_width_general, band_width_ltgm, band_widths_for_model, d_matrix, ltgm_brackets, ltgm_width_coefficients,
    uncorrelated_width_coefficients, DMatrix,
};
pub use trade::{classify, rebalance, rebalance_in_place, BandPolicy, RegionLabel, Side, TradeEvent};
pub use utility::{expected_log_payoff, log_growth_rate, ltgm_value, optimal_weights, LtgmModel, UtilityModel};
