//! Reference instances of every factor family on a five-year horizon.

use crate::error::Result;
use crate::kernel::{F0F1Family, FactorKind, KernelModel, RationalFactorModel};
use crate::lrb::{BridgeSpec, Component, LevyLaw, Measure, PriorBlock, TerminalPrior};
use crate::pricing::BondModel;

pub const CATALOG_HORIZON: f64 = 5.0;

/// A kernel of one factor and the bond model it induces.
#[derive(Debug, Clone)]
pub struct CatalogModel {
    pub name: &'static str,
    pub kernel: KernelModel,
    pub bond: BondModel,
}

impl CatalogModel {
    pub fn factor(&self) -> &RationalFactorModel {
        self.kernel.factor(0)
    }

    pub fn bridge(&self) -> &BridgeSpec {
        self.bond.bridge()
    }

    /// Measure under which `A_t` is a martingale.
    pub fn aux_measure(&self) -> Measure {
        if self.factor().kind().is_gaussian() {
            Measure::M
        } else {
            Measure::L
        }
    }

    /// Latest time at which `A_t` has a finite second moment under the
    /// auxiliary measure, scaled back from the horizon.
    pub fn max_test_time(&self) -> f64 {
        match self.factor().kind() {
            FactorKind::ExpQuadratic { .. } => 0.45 * CATALOG_HORIZON,
            _ => 0.9 * CATALOG_HORIZON,
        }
    }
}

/// Brownian information bridged to zero under the auxiliary measure.
pub fn gaussian_bridge(u: f64) -> Result<BridgeSpec> {
    let prior = TerminalPrior::scalar(&[-1.0, 0.5, 2.0], &[0.3, 0.4, 0.3])?;
    BridgeSpec::single(u, Component::information(0.4).bridged_to_zero(), prior)
}

/// Prior on the terminal coordinate matching the 𝕃-law of `L_U`: one atom
/// per probability bin, uniform bins in the bulk and halving bins in both
/// tails, each weighted by its 𝕃-mass. Real-world paths then cover the
/// auxiliary law, so `ℓ_t`-weighted means stay well conditioned.
pub fn matched_prior(comp: &Component, u: f64) -> Result<TerminalPrior> {
    const BULK: usize = 16;
    const TAIL: i32 = 20;
    let eps = 1.0 / BULK as f64;
    let mut edges = vec![0.0];
    edges.extend((0..TAIL).rev().map(|j| eps * 0.5f64.powi(j + 1)));
    edges.extend((0..=BULK - 2).map(|k| eps + k as f64 * (1.0 - 2.0 * eps) / (BULK - 2) as f64));
    edges.extend((0..TAIL).map(|j| 1.0 - eps * 0.5f64.powi(j + 1)));
    edges.push(1.0);
    let scale = comp.pinned_terminal(u, 1.0);
    let mut atoms = Vec::with_capacity(edges.len() - 1);
    let mut probs = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        atoms.push(vec![comp.law.quantile(u, 0.5 * (w[0] + w[1]))? / scale]);
        probs.push(w[1] - w[0]);
    }
    TerminalPrior::new(atoms, probs)
}

/// Independent components, each with its matched prior.
pub fn matched_bridge(u: f64, comps: Vec<Component>) -> Result<BridgeSpec> {
    let blocks = comps
        .iter()
        .enumerate()
        .map(|(i, c)| Ok(PriorBlock { components: vec![i], prior: matched_prior(c, u)? }))
        .collect::<Result<Vec<_>>>()?;
    BridgeSpec::with_blocks(u, comps, blocks, None)
}

fn build(name: &'static str, kind: FactorKind, bridge: BridgeSpec, family: F0F1Family) -> Result<CatalogModel> {
    let inputs = (0..kind.arity()).collect();
    let factor = RationalFactorModel::new(kind, bridge.horizon(), inputs)?;
    let kernel = KernelModel::from_family(factor, family)?;
    let bond = BondModel::from_kernel(&kernel, bridge)?;
    Ok(CatalogModel { name, kernel, bond })
}

/// One instance per factor family, all with `f0 = e^{-0.02 t}` and
/// `f1 = 0.002 / ln(2 + t)`.
pub fn catalog() -> Result<Vec<CatalogModel>> {
    let u = CATALOG_HORIZON;
    let family = F0F1Family::new(0.02, 0.002, 2.0)?;
    let gamma = |m: f64| -> Result<Component> { Ok(Component::subordinator(LevyLaw::gamma(m)?)) };
    let info = || Component::information(0.5);
    Ok(vec![
        build("quadratic", FactorKind::Quadratic, gaussian_bridge(u)?, family)?,
        build("exp_quadratic", FactorKind::ExpQuadratic { eta: 1.0 }, gaussian_bridge(u)?, family)?,
        build(
            "exp_linear_two_factor",
            FactorKind::ExpLinearTwoFactor { a: 0.3, c: 0.4, m: 1.5 },
            matched_bridge(u, vec![info(), gamma(1.5)?])?,
            family,
        )?,
        build(
            "debt",
            FactorKind::Debt { a: 0.5, c: 0.3, m: 1.5 },
            matched_bridge(u, vec![info(), gamma(1.5)?])?,
            family,
        )?,
        build(
            "heavy_tail_numerator",
            FactorKind::HeavyTailNumerator { kappa: 0.7, c: 0.3, m: 1.0, alpha: 1.3 },
            matched_bridge(u, vec![Component::subordinator(LevyLaw::stable_half(1.3)?), gamma(1.0)?])?,
            family,
        )?,
        build(
            "exp_linear_discount",
            FactorKind::ExpLinearDiscount { eta: 0.4, a: 0.3, q: 1.2 },
            matched_bridge(u, vec![gamma(1.2)?, info()])?,
            family,
        )?,
        build(
            "contagion",
            FactorKind::Contagion {
                a: 0.5,
                weights: vec![0.3, 0.2],
                rates: vec![1.0, 1.0],
                power: 3.0,
            },
            matched_bridge(u, vec![info(), gamma(1.0)?, gamma(1.0)?])?,
            family,
        )?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_covers_every_family() {
        let names: Vec<_> = catalog().unwrap().iter().map(|m| m.factor().kind().name()).collect();
        assert_eq!(names.len(), 7);
        let mut unique = names.clone();
        unique.dedup();
        assert_eq!(unique, names);
    }
}
