//! Monte Carlo pricing under the auxiliary measure.
//!
//! A claim paying `X` at `t` is worth `E^𝕄[D_t X]` at time zero, where `D_t`
//! is the pricing-kernel bracket. Paths simulated under another measure are
//! reweighted by `d𝕄/dQ`.

use super::bond::BondModel;
use crate::error::{invalid, Error, Result};
use crate::lrb::{BridgeSpec, Measure};
use crate::numerics::stats::{Accumulator, Estimate};

/// Smallest accepted number of paths.
pub const MIN_PATHS: usize = 100;

/// Instruments with unit notional and unit accrual.
#[derive(Debug, Clone, PartialEq)]
pub enum Instrument {
    Bond { maturity: f64 },
    /// Pays `(K - P_tT)⁺` at `t`.
    Caplet { expiry: f64, maturity: f64, strike: f64 },
    /// Payer swaption exercised at `expiry = T_0` into the swap on `resets`.
    Swaption { expiry: f64, resets: Vec<f64>, strike: f64 },
    /// Pays the asset's terminal cash flow `S_TT`.
    AssetClaim { maturity: f64 },
}

impl Instrument {
    /// Time at which the payoff is fixed.
    pub fn expiry(&self) -> f64 {
        match *self {
            Instrument::Bond { maturity } | Instrument::AssetClaim { maturity } => maturity,
            Instrument::Caplet { expiry, .. } | Instrument::Swaption { expiry, .. } => expiry,
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        match self {
            Instrument::Bond { maturity } | Instrument::AssetClaim { maturity } => {
                if !(*maturity >= 0.0 && *maturity < horizon) {
                    return Err(Error::TimeOutOfRange { t: *maturity, horizon });
                }
            }
            Instrument::Caplet { expiry, maturity, strike } => {
                if !(*strike > 0.0) {
                    return Err(invalid("strike", format!("must be positive, got {strike}")));
                }
                if !(*expiry >= 0.0 && expiry < maturity) {
                    return Err(invalid("maturity", format!("need 0 <= t < T, got t = {expiry}, T = {maturity}")));
                }
                if !(*maturity < horizon) {
                    return Err(Error::TimeOutOfRange { t: *maturity, horizon });
                }
            }
            Instrument::Swaption { expiry, resets, strike } => {
                if !(*strike > 0.0) {
                    return Err(invalid("strike", format!("must be positive, got {strike}")));
                }
                super::options::check_schedule(*expiry, resets, horizon)?;
            }
        }
        Ok(())
    }
}

/// A model that can value instrument payoffs pathwise.
pub trait ClaimModel: Sync {
    fn bridge(&self) -> &BridgeSpec;

    /// `D_t · payoff` at the instrument's expiry `t` given the bridge state.
    fn weighted_payoff(&self, instrument: &Instrument, state: &[f64]) -> Result<f64>;
}

impl ClaimModel for BondModel {
    fn bridge(&self) -> &BridgeSpec {
        BondModel::bridge(self)
    }

    fn weighted_payoff(&self, instrument: &Instrument, state: &[f64]) -> Result<f64> {
        let t = instrument.expiry();
        let a = self.factor_values(t, state)?;
        let den = super::bond::positive_denominator(self.affine(t, &a), t)?;
        Ok(match instrument {
            Instrument::Bond { .. } => den,
            Instrument::Caplet { maturity, strike, .. } => (strike * den - self.affine(*maturity, &a)).max(0.0),
            Instrument::Swaption { resets, strike, .. } => {
                let last = *resets.last().expect("validated schedule");
                let fixed: f64 = resets.iter().map(|&x| self.affine(x, &a)).sum();
                (den - self.affine(last, &a) - strike * fixed).max(0.0)
            }
            Instrument::AssetClaim { .. } => {
                return Err(Error::Unsupported("an asset claim on a bond model".into()));
            }
        })
    }
}

/// Price under the auxiliary measure `𝕄`.
pub fn mc_price<M: ClaimModel + ?Sized>(instrument: &Instrument, model: &M, n_paths: usize, seed: u64) -> Result<Estimate> {
    mc_price_under(instrument, model, Measure::M, n_paths, seed)
}

/// Price from paths simulated under `measure`, reweighted by `d𝕄/d(measure)`.
pub fn mc_price_under<M: ClaimModel + ?Sized>(
    instrument: &Instrument,
    model: &M,
    measure: Measure,
    n_paths: usize,
    seed: u64,
) -> Result<Estimate> {
    if n_paths < MIN_PATHS {
        return Err(invalid("n_paths", format!("need at least {MIN_PATHS}, got {n_paths}")));
    }
    let bridge = model.bridge();
    instrument.validate(bridge.horizon())?;
    let t = instrument.expiry();
    let grid = if t > 0.0 { vec![0.0, t] } else { vec![0.0] };
    let values = bridge.map_paths(measure, &grid, seed, n_paths, |path| {
        let state = path.state(path.len() - 1);
        let v = model.weighted_payoff(instrument, state)?;
        if measure == Measure::M {
            return Ok(v);
        }
        let lw = bridge.log_density_ratio(measure, t, state)? - bridge.log_density_ratio(Measure::M, t, state)?;
        Ok(v * lw.exp())
    })?;
    let mut acc = Accumulator::new();
    for v in values {
        acc.push(v?);
    }
    Ok(acc.estimate())
}
