use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::PortfolioState;

/// Which side of the band an asset sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    Sale,
    Purchase,
    NoTransaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

/// One realized purchase or sale. `cost` is always `k · amount`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeEvent {
    pub t: f64,
    pub asset: usize,
    pub side: Side,
    pub amount: f64,
    pub cost: f64,
}

/// Symmetric bands `[A*ᵢ − αᵢ, A*ᵢ + αᵢ]` evaluated at one (Π, t), plus the
/// cost rate charged on trades.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPolicy {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
    pub cost: f64,
}

impl BandPolicy {
    pub fn new(center: Vec<f64>, half_width: Vec<f64>, cost: f64) -> Result<Self> {
        if center.len() != half_width.len() {
            return Err(Error::DimensionMismatch { expected: center.len(), found: half_width.len() });
        }
        if half_width.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("band half-widths must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&cost) {
            return Err(Error::InvalidParameter("cost rate must lie in [0, 1)".into()));
        }
        Ok(Self { center, half_width, cost })
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.center[i] + self.half_width[i]
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.center[i] - self.half_width[i]
    }

    fn label(&self, i: usize, holding: f64) -> RegionLabel {
        if holding > self.upper(i) {
            RegionLabel::Sale
        } else if holding < self.lower(i) {
            RegionLabel::Purchase
        } else {
            RegionLabel::NoTransaction
        }
    }
}

/// Per-asset region. The band is closed: a holding exactly on a boundary
/// needs no trade.
pub fn classify(state: &PortfolioState, policy: &BandPolicy) -> Vec<RegionLabel> {
    state.holdings.iter().enumerate().map(|(i, &a)| policy.label(i, a)).collect()
}

/// Moves every out-of-band holding to its nearest boundary, all assets in the
/// same tick. Sales credit `(1 − k)·amount` to the bond and purchases debit
/// `(1 + k)·amount`, so wealth drops by exactly `k·Σ amount`.
pub fn rebalance(state: &PortfolioState, policy: &BandPolicy) -> Result<(PortfolioState, Vec<TradeEvent>)> {
    let mut next = state.clone();
    let mut events = Vec::new();
    rebalance_in_place(&mut next, policy, |e| events.push(e))?;
    Ok((next, events))
}

/// In-place form of [`rebalance`]; reports each trade to `on_trade` and
/// returns the total amount traded.
pub fn rebalance_in_place(
    state: &mut PortfolioState,
    policy: &BandPolicy,
    mut on_trade: impl FnMut(TradeEvent),
) -> Result<f64> {
    let n = state.holdings.len();
    if policy.center.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: policy.center.len() });
    }
    let k = policy.cost;
    let mut traded = 0.0;
    for i in 0..n {
        let a = state.holdings[i];
        let (side, target) = match policy.label(i, a) {
            RegionLabel::NoTransaction => continue,
            RegionLabel::Sale => (Side::Sell, policy.upper(i)),
            RegionLabel::Purchase => (Side::Buy, policy.lower(i)),
        };
        let amount = match side {
            Side::Sell => a - target,
            Side::Buy => target - a,
        };
        match side {
            Side::Sell => state.bond += (1.0 - k) * amount,
            Side::Buy => state.bond -= (1.0 + k) * amount,
        }
        state.holdings[i] = target;
        traded += amount;
        on_trade(TradeEvent { t: state.t, asset: i, side, amount, cost: k * amount });
    }
    state.check_wealth()?;
    Ok(traded)
}
