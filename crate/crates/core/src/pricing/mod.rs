//! Bonds, rates, options and general assets.

mod asset;
mod bond;
mod curve;
mod mc;
mod options;

pub use asset::{AssetModel, HeavyTailParams};
pub use bond::{derivative, BondModel, FactorTerm, ProductTerm, FD_STEP};
pub use curve::DiscountCurve;
pub use mc::{mc_price, mc_price_under, ClaimModel, Instrument, MIN_PATHS};
pub use options::{
    branch, caplet_loadings, caplet_price_closed, check_schedule, swaption_loadings, swaption_price_closed, threshold_price,
    Branch, ClosedFormKind, ZERO_BRANCH_TOL,
};
