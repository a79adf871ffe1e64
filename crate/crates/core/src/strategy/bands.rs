//! No-transaction band half-widths.
//!
//! Two independent routes are provided: the general one goes through the
//! D-matrix and the supplied H₀ derivatives, while [`band_width_ltgm`] is the
//! closed form for the log-growth model. They must agree.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::utility::{optimal_weights, UtilityModel};
use crate::error::{Error, Result};
use crate::mat::{dot, Matrix};
use crate::model::MarketParams;

/// D_ij coefficients of the leading-order diffusion operator in band
/// coordinates (units of wealth² per unit time).
#[derive(Debug, Clone, PartialEq)]
pub struct DMatrix(Matrix);

impl DMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.0.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// D_ij = ½ A'ᵢA'ⱼ (A*ᵀΩA*) + ½ Ω_ij A*ᵢA*ⱼ − A'ᵢ Σ_h Ω_ih A*ᵢA*_h,
/// where A' = ∂A*/∂Π, all evaluated on the optimal curve at (Π, t).
pub fn d_matrix<U: UtilityModel + ?Sized>(params: &MarketParams, utility: &U, pi: f64, t: f64) -> Result<DMatrix> {
    let n = params.n_assets();
    if utility.n_assets() != n {
        return Err(Error::DimensionMismatch { expected: n, found: utility.n_assets() });
    }
    let omega = params.omega().matrix();
    let mut a = vec![0.0; n];
    let mut da = vec![0.0; n];
    utility.optimal_holdings(pi, t, &mut a);
    utility.holdings_sensitivity(pi, t, &mut da);

    let quad = omega.bilinear(&a, &a);
    let omega_a: Vec<f64> = (0..n).map(|i| dot(omega.row(i), &a)).collect();
    let mut d = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = 0.5 * da[i] * da[j] * quad + 0.5 * omega[(i, j)] * a[i] * a[j] - da[i] * a[i] * omega_a[i];
        }
    }
    Ok(DMatrix(d))
}

/// α_{i+} = |3 D_ii / σᵢ² · H₀'/H₀''|^{1/3} · k^{1/3}
pub fn band_width_general(d_ii: f64, sigma_i: f64, dh0_dpi: f64, d2h0_dpi2: f64, k: f64) -> Result<f64> {
    if !(sigma_i > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma_i} must be positive")));
    }
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!("cost rate k = {k} must be non-negative")));
    }
    if d2h0_dpi2 == 0.0 {
        return Err(Error::SingularCurvature { wealth: f64::NAN });
    }
    let inner = 3.0 * d_ii / (sigma_i * sigma_i) * dh0_dpi / d2h0_dpi2;
    Ok(libm::cbrt(inner.abs()) * libm::cbrt(k))
}

/// Widths for every asset through the general route, using the model's own
/// H₀ derivatives at (Π, t).
pub fn band_widths_for_model<U: UtilityModel + ?Sized>(
    params: &MarketParams,
    utility: &U,
    k: f64,
    pi: f64,
    t: f64,
) -> Result<Vec<f64>> {
    let d = d_matrix(params, utility, pi, t)?;
    let dh0 = utility.marginal_value(pi, t);
    let d2h0 = utility.value_curvature(pi, t);
    if d2h0 == 0.0 {
        return Err(Error::SingularCurvature { wealth: pi });
    }
    params.sigma().iter().enumerate().map(|(i, &s)| band_width_general(d.get(i, i), s, dh0, d2h0, k)).collect()
}

/// The per-asset bracket ½(μ̂·Ω⁻¹μ̂ + σᵢ²)pᵢ² − μ̂ᵢpᵢ² of the log-growth
/// width formula. It is non-negative for any valid market; the width takes
/// its absolute value regardless.
pub fn ltgm_brackets(params: &MarketParams) -> Result<Vec<f64>> {
    let p = optimal_weights(params)?;
    let m = dot(params.mu_hat(), &p);
    Ok(params
        .sigma()
        .iter()
        .zip(params.mu_hat())
        .zip(&p)
        .map(|((s, mh), pi)| 0.5 * (m + s * s) * pi * pi - mh * pi * pi)
        .collect())
}

/// Closed-form log-growth half-widths
/// α_{i+} = Π · {3k/σᵢ² · |½(μ̂·Ω⁻¹μ̂ + σᵢ²)pᵢ² − μ̂ᵢpᵢ²|}^{1/3}.
pub fn band_width_ltgm(params: &MarketParams, k: f64, pi: f64) -> Result<Vec<f64>> {
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!("cost rate k = {k} must be non-negative")));
    }
    if !(pi > 0.0) {
        return Err(Error::DomainError(format!("wealth {pi} must be positive")));
    }
    let brackets = ltgm_brackets(params)?;
    Ok(params.sigma().iter().zip(&brackets).map(|(s, b)| pi * libm::cbrt(3.0 * k / (s * s) * b.abs())).collect())
}

/// α_{i+} / (k^{1/3} Π) for the log-growth model.
pub fn ltgm_width_coefficients(params: &MarketParams) -> Result<Vec<f64>> {
    band_width_ltgm(params, 1.0, 1.0)
}

/// Width coefficients obtained by pretending the assets are uncorrelated:
/// the same closed form evaluated with ρ = I, so pᵢ = μ̂ᵢ/σᵢ².
pub fn uncorrelated_width_coefficients(params: &MarketParams) -> Result<Vec<f64>> {
    let diag = params.with_rho(Matrix::identity(params.n_assets()))?;
    ltgm_width_coefficients(&diag)
}
