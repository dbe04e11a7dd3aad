//! Discount bonds `P_tT = (P0(T) + Σ Λ_i(t, T)) / (P0(t) + Σ Λ_i(t, t))`
//! where each `Λ_i` is a product `Π b_j(T) A_j(t)` of rational factors.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::kernel::{KernelModel, RationalFactorModel, SharedFn, TimeFn};
use crate::lrb::BridgeSpec;

/// Relative step of centred differences used when a time function has no
/// analytic derivative.
pub const FD_STEP: f64 = 1e-5;

/// A factor with its coefficient function `b(t)`.
#[derive(Debug, Clone)]
pub struct FactorTerm {
    pub factor: RationalFactorModel,
    pub b: SharedFn,
}

/// `Λ(t, T) = Π_j b_j(T) A_j(t)` over factors driven by distinct components.
#[derive(Debug, Clone)]
pub struct ProductTerm {
    pub factors: Vec<FactorTerm>,
}

impl ProductTerm {
    pub fn single(factor: RationalFactorModel, b: SharedFn) -> Self {
        Self {
            factors: vec![FactorTerm { factor, b }],
        }
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    fn coefficient(&self, t: f64) -> f64 {
        self.factors.iter().map(|f| f.b.value(t)).product()
    }

    fn coefficient_derivative(&self, t: f64, horizon: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (j, f) in self.factors.iter().enumerate() {
            let mut v = derivative(f.b.as_ref(), t, horizon)?;
            for (k, g) in self.factors.iter().enumerate() {
                if k != j {
                    v *= g.b.value(t);
                }
            }
            acc += v;
        }
        Ok(acc)
    }
}

/// First derivative of `f`: analytic when available, else a centred
/// difference with step `FD_STEP · horizon` that must stay inside `[0, U)`.
pub fn derivative(f: &dyn TimeFn, t: f64, horizon: f64) -> Result<f64> {
    if let Some(d) = f.derivative(t) {
        return Ok(d);
    }
    let h = FD_STEP * horizon;
    if t - h < 0.0 || t + h >= horizon {
        return Err(invalid("t", format!("cannot difference at t = {t}: too close to the grid boundary")));
    }
    Ok((f.value(t + h) - f.value(t - h)) / (2.0 * h))
}

/// A bond-pricing model built from an initial curve and product terms.
#[derive(Debug, Clone)]
pub struct BondModel {
    curve: SharedFn,
    terms: Vec<ProductTerm>,
    bridge: BridgeSpec,
    horizon: f64,
}

impl BondModel {
    pub fn new(curve: SharedFn, terms: Vec<ProductTerm>, bridge: BridgeSpec) -> Result<Self> {
        let horizon = bridge.horizon();
        let p00 = curve.value(0.0);
        if (p00 - 1.0).abs() > 1e-12 {
            return Err(invalid("curve", format!("P(0, 0) must be 1, got {p00}")));
        }
        for term in &terms {
            if term.factors.is_empty() {
                return Err(invalid("terms", "a product term needs at least one factor"));
            }
            let mut used: Vec<usize> = Vec::new();
            for f in &term.factors {
                f.factor.check_bridge(&bridge)?;
                for &i in f.factor.inputs() {
                    if used.contains(&i) {
                        return Err(Error::ModelViolation(format!(
                            "factors multiplied in one term share component {i}"
                        )));
                    }
                }
                used.extend_from_slice(f.factor.inputs());
            }
            if let Some(corr) = bridge.correlation() {
                for (a, fa) in term.factors.iter().enumerate() {
                    for fb in &term.factors[a + 1..] {
                        for &i in fa.factor.inputs() {
                            for &j in fb.factor.inputs() {
                                if i < corr.dim() && j < corr.dim() && corr.rho(i, j) != 0.0 {
                                    return Err(Error::ModelViolation(format!(
                                        "factors multiplied in one term are correlated through components {i} and {j}"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            curve,
            terms,
            bridge,
            horizon,
        })
    }

    /// First-order model of a pricing kernel: one term per kernel factor.
    pub fn from_kernel(kernel: &KernelModel, bridge: BridgeSpec) -> Result<Self> {
        let terms = (0..kernel.terms().len())
            .map(|i| ProductTerm::single(kernel.factor(i).clone(), Arc::new(kernel.coefficient(i))))
            .collect();
        Self::new(Arc::new(kernel.curve()), terms, bridge)
    }

    /// Model whose terms are all products of `order` distinct factors from
    /// `factors`: `order = n` gives the single full product, `order = 2` the
    /// sum of pairwise products.
    pub fn symmetric(curve: SharedFn, factors: Vec<FactorTerm>, order: usize, bridge: BridgeSpec) -> Result<Self> {
        if order == 0 || order > factors.len() {
            return Err(invalid("order", format!("must lie in 1..={}, got {order}", factors.len())));
        }
        let mut terms = Vec::new();
        let mut idx: Vec<usize> = (0..order).collect();
        loop {
            terms.push(ProductTerm {
                factors: idx.iter().map(|&i| factors[i].clone()).collect(),
            });
            // next combination in lexicographic order
            let n = factors.len();
            let mut k = order;
            while k > 0 && idx[k - 1] == n - order + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..order {
                idx[j] = idx[j - 1] + 1;
            }
        }
        Self::new(curve, terms, bridge)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn curve(&self) -> &SharedFn {
        &self.curve
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn bridge(&self) -> &BridgeSpec {
        &self.bridge
    }

    /// Whether every term is a single factor.
    pub fn is_first_order(&self) -> bool {
        self.terms.iter().all(|t| t.order() == 1)
    }

    fn check_times(&self, t: f64, maturity: f64) -> Result<()> {
        if !(t >= 0.0 && t <= maturity) {
            return Err(invalid("t", format!("need 0 <= t <= T, got t = {t}, T = {maturity}")));
        }
        if !(maturity < self.horizon) {
            return Err(Error::TimeOutOfRange {
                t: maturity,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// `A_j(t)` for every factor of every term.
    pub fn factor_values(&self, t: f64, state: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.terms
            .iter()
            .map(|term| term.factors.iter().map(|f| f.factor.eval_a(t, state)).collect())
            .collect()
    }

    /// `P0(T) + Σ_i Π_j b_j(T) A_j` for factor values `a`.
    pub fn affine(&self, maturity: f64, a: &[Vec<f64>]) -> f64 {
        let mut v = self.curve.value(maturity);
        for (term, av) in self.terms.iter().zip(a) {
            v += term.coefficient(maturity) * av.iter().product::<f64>();
        }
        v
    }

    /// `∂_T` of [`BondModel::affine`].
    pub fn affine_derivative(&self, maturity: f64, a: &[Vec<f64>]) -> Result<f64> {
        let mut v = derivative(self.curve.as_ref(), maturity, self.horizon)?;
        for (term, av) in self.terms.iter().zip(a) {
            v += term.coefficient_derivative(maturity, self.horizon)? * av.iter().product::<f64>();
        }
        Ok(v)
    }

    /// `∂²_T` of [`BondModel::affine`], when every input has an analytic
    /// second derivative.
    pub fn affine_second_derivative(&self, maturity: f64, a: &[Vec<f64>]) -> Option<f64> {
        let mut v = self.curve.second_derivative(maturity)?;
        for (term, av) in self.terms.iter().zip(a) {
            let n = term.factors.len();
            let vals: Vec<f64> = term.factors.iter().map(|f| f.b.value(maturity)).collect();
            let mut d1 = Vec::with_capacity(n);
            let mut d2 = Vec::with_capacity(n);
            for f in &term.factors {
                d1.push(f.b.derivative(maturity)?);
                d2.push(f.b.second_derivative(maturity)?);
            }
            let mut c2 = 0.0;
            for j in 0..n {
                for k in 0..n {
                    let mut p = if j == k { d2[j] } else { d1[j] * d1[k] };
                    for (m, &x) in vals.iter().enumerate() {
                        if m != j && m != k {
                            p *= x;
                        }
                    }
                    c2 += p;
                }
            }
            v += c2 * av.iter().product::<f64>();
        }
        Some(v)
    }

    /// `P0(t) + Σ Λ_i(t, t)`, the positive bracket of the pricing kernel.
    pub fn denominator(&self, t: f64, state: &[f64]) -> Result<f64> {
        let a = self.factor_values(t, state)?;
        positive_denominator(self.affine(t, &a), t)
    }

    /// Bond price `P_tT` at bridge state `state` at time `t`.
    pub fn bond_price(&self, t: f64, maturity: f64, state: &[f64]) -> Result<f64> {
        self.check_times(t, maturity)?;
        let a = self.factor_values(t, state)?;
        let den = positive_denominator(self.affine(t, &a), t)?;
        if maturity == t {
            return Ok(1.0);
        }
        Ok(self.affine(maturity, &a) / den)
    }

    /// Instantaneous forward rate `-∂_T ln P_tT`.
    pub fn forward_rate(&self, t: f64, maturity: f64, state: &[f64]) -> Result<f64> {
        self.check_times(t, maturity)?;
        let a = self.factor_values(t, state)?;
        positive_denominator(self.affine(t, &a), t)?;
        let num = positive_denominator(self.affine(maturity, &a), maturity)?;
        Ok(-self.affine_derivative(maturity, &a)? / num)
    }

    /// Short rate `r_t = -(∂P0(t) + Σ ∂Λ_i(t)) / (P0(t) + Σ Λ_i(t))`.
    pub fn short_rate(&self, t: f64, state: &[f64]) -> Result<f64> {
        self.forward_rate(t, t, state)
    }

    /// Pathwise bounds of `P_tT` implied by the factors' lower bounds, for
    /// first-order models with non-negative coefficients. `None` otherwise.
    pub fn bounds(&self, t: f64, maturity: f64) -> Option<(f64, f64)> {
        if !self.is_first_order() || self.check_times(t, maturity).is_err() {
            return None;
        }
        let mut num = self.curve.value(maturity);
        let mut den = self.curve.value(t);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for term in &self.terms {
            let f = &term.factors[0];
            let (bt, bm) = (f.b.value(t), f.b.value(maturity));
            if bt < 0.0 || bm < 0.0 {
                return None;
            }
            let lb = f.factor.lower_bound(t);
            num += bm * lb;
            den += bt * lb;
            if bt > 0.0 {
                lo = lo.min(bm / bt);
                hi = hi.max(bm / bt);
            } else if bm > 0.0 {
                hi = f64::INFINITY;
            }
        }
        if !(den > 0.0) {
            return None;
        }
        let vertex = num / den;
        Some((lo.min(vertex), hi.max(vertex)))
    }
}

pub(crate) fn positive_denominator(v: f64, t: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::ModelViolation(format!("bond-price denominator {v} is not positive at t = {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Constant, F0F1Family, FactorKind, FnTime};
    use crate::lrb::{Component, LevyLaw, TerminalPrior};
    use rand::{Rng, SeedableRng};

    fn quad_bridge(u: f64) -> BridgeSpec {
        let prior = TerminalPrior::scalar(&[-1.0, 0.5, 2.0], &[0.3, 0.4, 0.3]).unwrap();
        BridgeSpec::single(u, Component::information(0.4).bridged_to_zero(), prior).unwrap()
    }

    fn quad_model(u: f64) -> BondModel {
        let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0]).unwrap();
        let kernel = KernelModel::from_family(factor, F0F1Family::new(0.03, 0.01, 50.0).unwrap()).unwrap();
        BondModel::from_kernel(&kernel, quad_bridge(u)).unwrap()
    }

    #[test]
    fn par_and_initial_curve() {
        let m = quad_model(5.0);
        assert_eq!(m.bond_price(1.3, 1.3, &[0.4]).unwrap(), 1.0);
        for t in [0.0, 1.0, 4.5] {
            assert!((m.bond_price(0.0, t, &[0.0]).unwrap() - m.curve().value(t)).abs() < 1e-15);
        }
        assert!(m.bond_price(1.0, 0.5, &[0.0]).is_err());
        assert!(m.bond_price(1.0, 5.0, &[0.0]).is_err());
    }

    #[test]
    fn short_rate_is_forward_at_zero_maturity() {
        let m = quad_model(5.0);
        let u = m.horizon();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t = rng.random_range(0.1..4.0);
            let l = rng.random_range(-2.0..2.0);
            let h = FD_STEP * u;
            // P_tT for T < t is the analytic continuation of the same ratio
            let cont = {
                let a = m.factor_values(t, &[l]).unwrap();
                let p = |x: f64| m.affine(x, &a) / m.affine(t, &a);
                -(p(t + h).ln() - p(t - h).ln()) / (2.0 * h)
            };
            let r = m.short_rate(t, &[l]).unwrap();
            assert!((r - cont).abs() <= 1e-6 * r.abs().max(1e-12), "{r} vs {cont}");
            assert!(r >= 0.0);
        }
    }

    #[test]
    fn deterministic_model_rates() {
        let u = 3.0;
        let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0]).unwrap();
        let kernel = KernelModel::single(
            factor,
            Arc::new(crate::kernel::ExpDecay { scale: 1.0, rate: 0.04 }),
            Arc::new(Constant(0.0)),
        )
        .unwrap();
        let m = BondModel::from_kernel(&kernel, quad_bridge(u)).unwrap();
        assert!((m.short_rate(1.0, &[0.9]).unwrap() - 0.04).abs() < 1e-14);
        assert!((m.bond_price(1.0, 2.0, &[0.9]).unwrap() - (-0.04f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn numeric_derivative_fallback_and_boundary() {
        let u = 2.0;
        let curve: SharedFn = Arc::new(FnTime::new(|t| (-0.05 * t).exp()));
        let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0]).unwrap();
        let m = BondModel::new(curve, vec![ProductTerm::single(factor, Arc::new(Constant(0.0)))], quad_bridge(u)).unwrap();
        assert!((m.short_rate(1.0, &[0.1]).unwrap() - 0.05).abs() < 1e-9);
        assert!(m.short_rate(0.0, &[0.0]).is_err());
    }

    #[test]
    fn bounds_contain_prices() {
        let m = quad_model(5.0);
        let (t, big) = (2.0, 4.0);
        let (lo, hi) = m.bounds(t, big).unwrap();
        for l in [-6.0, -1.0, 0.0, 0.3, 2.0, 8.0] {
            let p = m.bond_price(t, big, &[l]).unwrap();
            assert!(p >= lo - 1e-15 && p <= hi + 1e-15, "{lo} <= {p} <= {hi}");
        }
        // the vertex is attained at L = 0
        let p0 = m.bond_price(t, big, &[0.0]).unwrap();
        assert!((p0 - hi).abs() < 1e-15 || (p0 - lo).abs() < 1e-15);
    }

    #[test]
    fn product_terms() {
        let u = 4.0;
        let comps = vec![
            Component::information(0.5).bridged_to_zero(),
            Component::information(0.5).bridged_to_zero(),
            Component::subordinator(LevyLaw::Gamma { m: 1.0 }),
            Component::information(0.5),
        ];
        let prior = TerminalPrior::product(&[
            TerminalPrior::scalar(&[0.0, 1.0], &[0.5, 0.5]).unwrap(),
            TerminalPrior::scalar(&[0.0], &[1.0]).unwrap(),
            TerminalPrior::scalar(&[2.0], &[1.0]).unwrap(),
            TerminalPrior::scalar(&[1.0], &[1.0]).unwrap(),
        ])
        .unwrap();
        let bridge = BridgeSpec::new(u, comps, prior).unwrap();
        let b = |c: f64| -> SharedFn { Arc::new(crate::kernel::ExpDecay { scale: c, rate: 0.1 }) };
        let f1 = FactorTerm {
            factor: RationalFactorModel::new(FactorKind::Quadratic, u, vec![0]).unwrap(),
            b: b(0.01),
        };
        let f2 = FactorTerm {
            factor: RationalFactorModel::new(FactorKind::ExpQuadratic { eta: 1.0 }, u, vec![1]).unwrap(),
            b: b(0.02),
        };
        let f3 = FactorTerm {
            factor: RationalFactorModel::new(FactorKind::ExpLinearDiscount { eta: 0.2, a: 0.3, q: 1.0 }, u, vec![2, 3]).unwrap(),
            b: b(0.03),
        };
        let curve: SharedFn = Arc::new(crate::kernel::ExpDecay { scale: 1.0, rate: 0.02 });
        let factors = vec![f1.clone(), f2.clone(), f3.clone()];
        let third = BondModel::symmetric(curve.clone(), factors.clone(), 3, bridge.clone()).unwrap();
        let second = BondModel::symmetric(curve.clone(), factors, 2, bridge.clone()).unwrap();
        assert_eq!(third.terms().len(), 1);
        assert_eq!(second.terms().len(), 3);
        let state = [0.4, -0.3, 1.1, 0.2];
        let (t, big) = (1.0, 2.5);
        let a: Vec<f64> = [&f1, &f2, &f3].iter().map(|f| f.factor.eval_a(t, &state).unwrap()).collect();
        let bb = |f: &FactorTerm, x: f64| f.b.value(x);
        let lam3 = |x: f64| bb(&f1, x) * bb(&f2, x) * bb(&f3, x) * a[0] * a[1] * a[2];
        let p3 = (curve.value(big) + lam3(big)) / (curve.value(t) + lam3(t));
        assert!((third.bond_price(t, big, &state).unwrap() - p3).abs() < 1e-15);
        let lam2 = |x: f64| {
            bb(&f1, x) * bb(&f2, x) * a[0] * a[1] + bb(&f1, x) * bb(&f3, x) * a[0] * a[2] + bb(&f2, x) * bb(&f3, x) * a[1] * a[2]
        };
        let p2 = (curve.value(big) + lam2(big)) / (curve.value(t) + lam2(t));
        assert!((second.bond_price(t, big, &state).unwrap() - p2).abs() < 1e-15);
        // analytic second derivative of the product coefficients
        let h = 1e-5;
        let av = second.factor_values(t, &state).unwrap();
        let fd2 = (second.affine_derivative(big + h, &av).unwrap() - second.affine_derivative(big - h, &av).unwrap()) / (2.0 * h);
        assert!((second.affine_second_derivative(big, &av).unwrap() - fd2).abs() < 1e-8);
        // factors sharing a component cannot be multiplied
        let dup = FactorTerm {
            factor: RationalFactorModel::new(FactorKind::Quadratic, u, vec![0]).unwrap(),
            b: b(0.01),
        };
        assert!(BondModel::symmetric(curve, vec![f1, dup], 2, bridge).is_err());
    }
}
