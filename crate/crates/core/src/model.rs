//! Market parameters, portfolio state and the level-Euler asset dynamics.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mat::{self, CholeskyFactor, CovarianceMatrix, Matrix};

/// Constant-coefficient market: a bond compounding at `r` and `n` correlated
/// geometric Brownian motions.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams {
    r: f64,
    mu: Vec<f64>,
    sigma: Vec<f64>,
    rho: Matrix,
    k: f64,
    horizon: f64,
    dt: f64,
    omega: CovarianceMatrix,
    mu_hat: Vec<f64>,
    chol: CholeskyFactor,
    steps: u64,
}

impl MarketParams {
    /// Validates everything up front, including positive definiteness of Ω.
    pub fn new(r: f64, mu: Vec<f64>, sigma: Vec<f64>, rho: Matrix, k: f64, horizon: f64, dt: f64) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(Error::InvalidParameter("at least one risky asset is required".into()));
        }
        if mu.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: mu.len() });
        }
        if !r.is_finite() || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParameter("rates and drifts must be finite".into()));
        }
        if !(k.is_finite() && (0.0..1.0).contains(&k)) {
            return Err(Error::InvalidParameter(format!("cost rate k = {k} must lie in [0, 1)")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon = {horizon} must be positive")));
        }
        let steps = libm::round(horizon / dt);
        if steps < 1.0 || horizon / dt < 1.0 {
            return Err(Error::InvalidParameter(format!("horizon / dt = {} must be at least 1", horizon / dt)));
        }
        if steps > u32::MAX as f64 {
            return Err(Error::InvalidParameter("too many time steps".into()));
        }
        let omega = mat::build_covariance(&sigma, &rho)?;
        let chol = mat::cholesky(&omega)?;
        let mu_hat = mu.iter().map(|m| m - r).collect();
        Ok(Self { r, mu, sigma, rho, k, horizon, dt, omega, mu_hat, chol, steps: steps as u64 })
    }

    /// Same market with a different cost rate.
    pub fn with_cost(&self, k: f64) -> Result<Self> {
        self.rebuild(|p| p.k = k)
    }

    /// Same market with a different time step.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        self.rebuild(|p| p.dt = dt)
    }

    /// Same market with a different horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        self.rebuild(|p| p.horizon = horizon)
    }

    /// Same market with a different correlation matrix.
    pub fn with_rho(&self, rho: Matrix) -> Result<Self> {
        self.rebuild(|p| p.rho = rho)
    }

    fn rebuild(&self, f: impl FnOnce(&mut Self)) -> Result<Self> {
        let mut p = self.clone();
        f(&mut p);
        Self::new(p.r, p.mu, p.sigma, p.rho, p.k, p.horizon, p.dt)
    }

    pub fn n_assets(&self) -> usize {
        self.sigma.len()
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
    pub fn rho(&self) -> &Matrix {
        &self.rho
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn omega(&self) -> &CovarianceMatrix {
        &self.omega
    }
    /// Excess drifts μᵢ − r.
    pub fn mu_hat(&self) -> &[f64] {
        &self.mu_hat
    }
    pub fn cholesky(&self) -> &CholeskyFactor {
        &self.chol
    }
    /// Number of Euler steps, round(T / dt).
    pub fn steps(&self) -> u64 {
        self.steps
    }
}

/// Bond value, risky holdings and the simulation clock.
///
/// The clock is an integer step count; `t` is always `step · dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioState {
    pub step: u64,
    pub t: f64,
    pub bond: f64,
    pub holdings: Vec<f64>,
}

impl PortfolioState {
    pub fn new(bond: f64, holdings: Vec<f64>) -> Self {
        Self { step: 0, t: 0.0, bond, holdings }
    }

    /// Π = B + ΣAᵢ
    pub fn wealth(&self) -> f64 {
        self.bond + self.holdings.iter().sum::<f64>()
    }

    pub(crate) fn check_wealth(&self) -> Result<f64> {
        let w = self.wealth();
        if w > 0.0 {
            Ok(w)
        } else {
            Err(Error::NonPositiveWealth { t: self.t, wealth: w })
        }
    }
}

/// One explicit Euler step on levels:
///
/// ```text
/// B  <- B  + r B dt
/// Aᵢ <- Aᵢ + μᵢ Aᵢ dt + σᵢ Aᵢ √dt zᵢ
/// ```
///
/// `z` must already carry the asset correlation. Individual holdings may go
/// negative; only a non-positive total wealth aborts the path.
pub fn euler_step(state: &PortfolioState, params: &MarketParams, z: &[f64]) -> Result<PortfolioState> {
    let mut next = state.clone();
    euler_step_in_place(&mut next, params, z)?;
    Ok(next)
}

pub(crate) fn euler_step_in_place(state: &mut PortfolioState, params: &MarketParams, z: &[f64]) -> Result<()> {
    let n = params.n_assets();
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: z.len() });
    }
    if state.holdings.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: state.holdings.len() });
    }
    let dt = params.dt();
    if state.step >= params.steps() {
        return Err(Error::HorizonExceeded { t: state.t + dt, horizon: params.horizon() });
    }
    let sqrt_dt = libm::sqrt(dt);
    state.bond += params.r() * state.bond * dt;
    for i in 0..n {
        let a = state.holdings[i];
        state.holdings[i] = a + params.mu()[i] * a * dt + params.sigma()[i] * a * sqrt_dt * z[i];
    }
    state.step += 1;
    state.t = state.step as f64 * dt;
    state.check_wealth()?;
    Ok(())
}

/// Continuous compounding π₀·e^{rt}; the exact answer for an all-bond book.
pub fn pure_bond_growth(pi0: f64, params: &MarketParams, t: f64) -> f64 {
    pi0 * libm::exp(params.r() * t)
}
