//! General assets `S_tT = (S0(T) + b1(T) A1_t) / (P0(t) + Σ Λ_i(t, t))`.

use std::sync::Arc;

use super::bond::{positive_denominator, BondModel};
use super::mc::{ClaimModel, Instrument};
use crate::error::{invalid, Error, Result};
use crate::kernel::{Coefficient, FactorKind, KernelModel, KernelTerm, ModelCurve, RationalFactorModel, SharedFn};
use crate::lrb::BridgeSpec;

/// An asset priced against a bond model's discount bracket. The numerator
/// may change sign.
#[derive(Debug, Clone)]
pub struct AssetModel {
    s0: SharedFn,
    b1: SharedFn,
    numerator: RationalFactorModel,
    discount: BondModel,
}

/// Parameters of the heavy-tailed equity example on the components
/// `[stable, gamma (rate m), gamma (rate q), brownian]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTailParams {
    pub kappa: f64,
    pub c: f64,
    pub m: f64,
    pub alpha: f64,
    pub eta: f64,
    pub a: f64,
    pub q: f64,
}

impl AssetModel {
    pub fn new(s0: SharedFn, b1: SharedFn, numerator: RationalFactorModel, discount: BondModel) -> Result<Self> {
        numerator.check_bridge(discount.bridge())?;
        Ok(Self {
            s0,
            b1,
            numerator,
            discount,
        })
    }

    /// Asset whose numerator is calibrated through `g0`, `g1`:
    /// `S0(T) = (g0(T) + k(T) g1(T)) / π0`, `b1(T) = k(T) g1(T) / π0`, with
    /// `k` the numerator factor's shape and `π0` the kernel's.
    pub fn from_kernel(
        kernel: &KernelModel,
        bridge: BridgeSpec,
        numerator: RationalFactorModel,
        g0: SharedFn,
        g1: SharedFn,
    ) -> Result<Self> {
        let shape = numerator.coefficient_shape();
        let pi0 = kernel.pi0();
        let s0 = ModelCurve::new(g0, vec![(shape, g1.clone())], pi0);
        let b1 = Coefficient::new(shape, g1, pi0);
        let discount = BondModel::from_kernel(kernel, bridge)?;
        Self::new(Arc::new(s0), Arc::new(b1), numerator, discount)
    }

    /// Exponential-quadratic numerator on component 0 discounted by a
    /// quadratic kernel on component 1; both components Brownian bridges to
    /// zero under the auxiliary measure.
    pub fn s_example(bridge: BridgeSpec, eta: f64, f0: SharedFn, f1: SharedFn, g0: SharedFn, g1: SharedFn) -> Result<Self> {
        let u = bridge.horizon();
        let numerator = RationalFactorModel::new(FactorKind::ExpQuadratic { eta }, u, vec![0])?;
        let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![1])?;
        let kernel = KernelModel::new(f0, vec![KernelTerm { factor, f1 }])?;
        Self::from_kernel(&kernel, bridge, numerator, g0, g1)
    }

    /// Stable/gamma numerator with a gamma/Brownian exponential-linear
    /// discount factor.
    pub fn heavy_tail(bridge: BridgeSpec, p: HeavyTailParams, f0: SharedFn, f1: SharedFn, g0: SharedFn, g1: SharedFn) -> Result<Self> {
        let u = bridge.horizon();
        let numerator = RationalFactorModel::new(
            FactorKind::HeavyTailNumerator {
                kappa: p.kappa,
                c: p.c,
                m: p.m,
                alpha: p.alpha,
            },
            u,
            vec![0, 1],
        )?;
        let factor = RationalFactorModel::new(FactorKind::ExpLinearDiscount { eta: p.eta, a: p.a, q: p.q }, u, vec![2, 3])?;
        let kernel = KernelModel::new(f0, vec![KernelTerm { factor, f1 }])?;
        Self::from_kernel(&kernel, bridge, numerator, g0, g1)
    }

    pub fn discount(&self) -> &BondModel {
        &self.discount
    }

    pub fn numerator_factor(&self) -> &RationalFactorModel {
        &self.numerator
    }

    pub fn s0(&self) -> &SharedFn {
        &self.s0
    }

    pub fn b1(&self) -> &SharedFn {
        &self.b1
    }

    pub fn horizon(&self) -> f64 {
        self.discount.horizon()
    }

    /// `S0(T) + b1(T) A1_t`.
    pub fn numerator(&self, t: f64, maturity: f64, state: &[f64]) -> Result<f64> {
        Ok(self.s0.value(maturity) + self.b1.value(maturity) * self.numerator.eval_a(t, state)?)
    }

    /// `S_tT` at bridge state `state`.
    pub fn asset_price(&self, t: f64, maturity: f64, state: &[f64]) -> Result<f64> {
        if !(t >= 0.0 && t <= maturity) {
            return Err(invalid("t", format!("need 0 <= t <= T, got t = {t}, T = {maturity}")));
        }
        if !(maturity < self.horizon()) {
            return Err(Error::TimeOutOfRange {
                t: maturity,
                horizon: self.horizon(),
            });
        }
        let den = self.discount.denominator(t, state)?;
        if t == 0.0 {
            return Ok(self.s0.value(maturity));
        }
        Ok(self.numerator(t, maturity, state)? / positive_denominator(den, t)?)
    }
}

impl ClaimModel for AssetModel {
    fn bridge(&self) -> &BridgeSpec {
        self.discount.bridge()
    }

    fn weighted_payoff(&self, instrument: &Instrument, state: &[f64]) -> Result<f64> {
        match instrument {
            Instrument::AssetClaim { maturity } => {
                self.discount.denominator(*maturity, state)?;
                self.numerator(*maturity, *maturity, state)
            }
            other => self.discount.weighted_payoff(other, state),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Constant, ExpDecay, InverseLog, TimeFn};
    use crate::lrb::{Component, LevyLaw, Measure, TerminalPrior};
    use crate::pricing::mc::mc_price_under;

    fn two_brownian(u: f64) -> BridgeSpec {
        let comps = vec![
            Component::information(0.5).bridged_to_zero(),
            Component::information(0.3).bridged_to_zero(),
        ];
        let prior = TerminalPrior::new(
            vec![vec![-1.0, 0.0], vec![0.5, 1.0], vec![1.5, -0.5]],
            vec![0.3, 0.4, 0.3],
        )
        .unwrap();
        BridgeSpec::new(u, comps, prior).unwrap()
    }

    fn example(g1: f64) -> AssetModel {
        AssetModel::s_example(
            two_brownian(4.0),
            1.0,
            Arc::new(ExpDecay { scale: 1.0, rate: 0.03 }),
            Arc::new(InverseLog { beta: 0.01, gamma: 50.0 }),
            Arc::new(ExpDecay { scale: 1.0, rate: 0.05 }),
            Arc::new(ExpDecay { scale: g1, rate: 0.05 }),
        )
        .unwrap()
    }

    #[test]
    fn s_example_formula() {
        let m = example(0.2);
        let u: f64 = 4.0;
        let (t, big): (f64, f64) = (1.2, 3.0);
        let (l1, l2) = (0.7, -0.4);
        let f1 = InverseLog { beta: 0.01, gamma: 50.0 };
        let pi0 = 1.0 + f1.value(0.0) * u.powi(3) / 12.0;
        let g1 = 0.2 * (-0.05 * big).exp();
        let g0 = (-0.05 * big).exp();
        let k1 = (u - big) * u.sqrt();
        let s0 = (g0 + k1 * g1) / pi0;
        let a1 = (1.0 - t / u).sqrt() * (l1 * l1 / (2.0 * (u - t))).exp() - 1.0;
        let p0 = m.discount().curve().value(t);
        let b2 = (u - t).powi(4) * f1.value(t) / (4.0 * u * pi0);
        let a2 = u * l2 * l2 / ((u - t) * (u - t)) - t / (u - t);
        let expected = (s0 + k1 * g1 / pi0 * a1) / (p0 + b2 * a2);
        let got = m.asset_price(t, big, &[l1, l2]).unwrap();
        assert!((got - expected).abs() < 1e-14 * expected.abs(), "{got} vs {expected}");
        assert_eq!(m.asset_price(0.0, big, &[0.0, 0.0]).unwrap(), s0);
    }

    #[test]
    fn zero_numerator_weight_is_pure_discounting() {
        let m = AssetModel::s_example(
            two_brownian(4.0),
            1.0,
            Arc::new(ExpDecay { scale: 1.0, rate: 0.03 }),
            Arc::new(InverseLog { beta: 0.01, gamma: 50.0 }),
            Arc::new(ExpDecay { scale: 1.0, rate: 0.05 }),
            Arc::new(Constant(0.0)),
        )
        .unwrap();
        let state = [1.3, 0.2];
        let den = m.discount().denominator(2.0, &state).unwrap();
        let v = m.asset_price(2.0, 3.0, &state).unwrap();
        assert!((v - m.s0().value(3.0) / den).abs() < 1e-15);
    }

    #[test]
    fn deflated_asset_is_a_martingale() {
        let m = example(0.2);
        let inst = Instrument::AssetClaim { maturity: 1.5 };
        let e = mc_price_under(&inst, &m, Measure::P, 40_000, 5).unwrap();
        assert!(e.within(m.s0().value(1.5), 4.0), "{e:?} vs {}", m.s0().value(1.5));
    }

    #[test]
    fn heavy_tail_builder() {
        let u = 3.0;
        let comps = vec![
            Component::subordinator(LevyLaw::StableHalf { alpha: 0.8 }),
            Component::subordinator(LevyLaw::Gamma { m: 1.0 }),
            Component::subordinator(LevyLaw::Gamma { m: 2.0 }),
            Component::information(0.5),
        ];
        let prior = TerminalPrior::new(
            vec![vec![1.0, 2.0, 4.0, 0.5], vec![2.0, 3.0, 6.0, -0.5]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let bridge = BridgeSpec::new(u, comps, prior).unwrap();
        let p = HeavyTailParams {
            kappa: 0.3,
            c: 0.2,
            m: 1.0,
            alpha: 0.8,
            eta: 0.1,
            a: 0.2,
            q: 2.0,
        };
        let f1 = InverseLog { beta: 0.01, gamma: 50.0 };
        let m = AssetModel::heavy_tail(
            bridge,
            p,
            Arc::new(ExpDecay { scale: 1.0, rate: 0.03 }),
            Arc::new(f1),
            Arc::new(ExpDecay { scale: 1.0, rate: 0.05 }),
            Arc::new(ExpDecay { scale: 0.3, rate: 0.05 }),
        )
        .unwrap();
        let big: f64 = 2.0;
        let s0 = ((-0.05 * big).exp() + (u - big) * (u - big) * 0.3 * (-0.05 * big).exp()) / (1.0 + u * u * f1.value(0.0));
        assert!((m.s0().value(big) - s0).abs() < 1e-15);
        assert!(m.asset_price(1.0, big, &[0.5, 0.7, 1.1, 0.2]).unwrap().is_finite());
    }
}
