use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat::{self, dot};
use crate::model::MarketParams;

/// Frictionless value function H₀ together with the optimal holdings curve.
///
/// Implementors supply H₀ and its first two wealth derivatives; the library
/// never solves for H₀ itself. Built-in models have no running utility.
pub trait UtilityModel {
    fn n_assets(&self) -> usize;

    /// H₀(Π, t)
    fn value(&self, wealth: f64, t: f64) -> f64;

    /// ∂H₀/∂Π
    fn marginal_value(&self, wealth: f64, t: f64) -> f64;

    /// ∂²H₀/∂Π²
    fn value_curvature(&self, wealth: f64, t: f64) -> f64;

    /// A*(Π, t), written into `out`.
    fn optimal_holdings(&self, wealth: f64, t: f64, out: &mut [f64]);

    /// ∂A*/∂Π. Defaults to a central difference with step `1e-6 · Π`.
    fn holdings_sensitivity(&self, wealth: f64, t: f64, out: &mut [f64]) {
        let h = 1e-6 * wealth;
        let n = self.n_assets();
        let mut up = vec![0.0; n];
        let mut down = vec![0.0; n];
        self.optimal_holdings(wealth + h, t, &mut up);
        self.optimal_holdings(wealth - h, t, &mut down);
        for i in 0..n {
            out[i] = (up[i] - down[i]) / (2.0 * h);
        }
    }

    /// F(Π), the utility of terminal wealth.
    fn terminal_utility(&self, wealth: f64) -> f64;

    /// I(Π)
    fn running_utility(&self, _wealth: f64) -> f64 {
        0.0
    }
}

/// Kelly weights p = Ω⁻¹μ̂, so that A* = Π·p.
pub fn optimal_weights(params: &MarketParams) -> Result<Vec<f64>> {
    mat::solve_spd(params.omega(), params.mu_hat())
}

/// Long-term growth model: maximize E[log Π(T)].
///
/// H₀(Π, t) = log Π + g (T − t) with g = r + ½ μ̂·Ω⁻¹μ̂, and A* = Π·p.
#[derive(Debug, Clone, PartialEq)]
pub struct LtgmModel {
    weights: Vec<f64>,
    bond_weight: f64,
    growth: f64,
    horizon: f64,
}

impl LtgmModel {
    pub fn new(params: &MarketParams) -> Result<Self> {
        let weights = optimal_weights(params)?;
        let bond_weight = 1.0 - weights.iter().sum::<f64>();
        let growth = params.r() + 0.5 * dot(params.mu_hat(), &weights);
        Ok(Self { weights, bond_weight, growth, horizon: params.horizon() })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// q = 1 − Σpᵢ
    pub fn bond_weight(&self) -> f64 {
        self.bond_weight
    }

    /// r + ½ μ̂·Ω⁻¹μ̂
    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

impl UtilityModel for LtgmModel {
    fn n_assets(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, wealth: f64, t: f64) -> f64 {
        libm::log(wealth) + self.growth * (self.horizon - t)
    }

    fn marginal_value(&self, wealth: f64, _t: f64) -> f64 {
        1.0 / wealth
    }

    fn value_curvature(&self, wealth: f64, _t: f64) -> f64 {
        -1.0 / (wealth * wealth)
    }

    fn optimal_holdings(&self, wealth: f64, _t: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.weights) {
            *o = wealth * p;
        }
    }

    fn holdings_sensitivity(&self, _wealth: f64, _t: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.weights);
    }

    fn terminal_utility(&self, wealth: f64) -> f64 {
        libm::log(wealth)
    }
}

/// Optimal LTGM value log Π + (r + ½ μ̂·Ω⁻¹μ̂)(T − t).
pub fn ltgm_value(pi: f64, t: f64, params: &MarketParams) -> Result<f64> {
    if !(pi > 0.0) {
        return Err(Error::DomainError(format!("wealth {pi} must be positive")));
    }
    if !(0.0..=params.horizon()).contains(&t) {
        return Err(Error::DomainError(format!("time {t} outside [0, {}]", params.horizon())));
    }
    Ok(LtgmModel::new(params)?.value(pi, t))
}

/// Drift of log Π for a portfolio held at constant weights `p` (bond weight
/// q = 1 − Σpᵢ): rq + μ·p − ½ pᵀΩp.
pub fn log_growth_rate(params: &MarketParams, weights: &[f64]) -> Result<f64> {
    let n = params.n_assets();
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
    }
    let q = 1.0 - weights.iter().sum::<f64>();
    let beta2 = params.omega().matrix().bilinear(weights, weights);
    Ok(params.r() * q + dot(params.mu(), weights) - 0.5 * beta2)
}

/// E[log Π(T)] for constant weights, continuously rebalanced without cost.
pub fn expected_log_payoff(params: &MarketParams, pi0: f64, weights: &[f64]) -> Result<f64> {
    if !(pi0 > 0.0) {
        return Err(Error::DomainError(format!("initial wealth {pi0} must be positive")));
    }
    Ok(libm::log(pi0) + log_growth_rate(params, weights)? * params.horizon())
}
