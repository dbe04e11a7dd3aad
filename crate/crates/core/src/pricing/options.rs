//! Closed-form caplets and swaptions for the single-factor quadratic and
//! exponential-quadratic models.
//!
//! Both payoffs reduce to `E[(α + β A_t)⁺]` under the auxiliary measure, where
//! `A_t` is an explicit function of a standard normal variable.

use crate::error::{invalid, Error, Result};
use crate::kernel::{FactorKind, TimeFn};
use crate::numerics::{norm_cdf, norm_pdf};

/// Relative size below which the payoff loading `β` is treated as zero.
pub const ZERO_BRANCH_TOL: f64 = 1e-14;

/// Factor families with closed-form option prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormKind {
    Quadratic,
    ExpQuadratic,
}

impl ClosedFormKind {
    pub fn of(kind: &FactorKind) -> Option<Self> {
        match kind {
            FactorKind::Quadratic => Some(Self::Quadratic),
            FactorKind::ExpQuadratic { .. } => Some(Self::ExpQuadratic),
            _ => None,
        }
    }
}

/// Which of the three payoff branches applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
    Zero,
}

/// Branch selected by the loading `beta` relative to `scale`.
pub fn branch(beta: f64, scale: f64) -> Branch {
    if beta.abs() <= ZERO_BRANCH_TOL * scale || beta == 0.0 {
        Branch::Zero
    } else if beta > 0.0 {
        Branch::Positive
    } else {
        Branch::Negative
    }
}

/// `E[(α + β A_t)⁺]` at expiry `t` for the given family, with the zero
/// branch set to 0 by convention.
pub fn threshold_price(kind: ClosedFormKind, alpha: f64, beta: f64, scale: f64, t: f64, horizon: f64) -> f64 {
    let br = branch(beta, scale);
    if br == Branch::Zero {
        return 0.0;
    }
    if t == 0.0 {
        return alpha.max(0.0);
    }
    let v = match kind {
        ClosedFormKind::Quadratic => {
            // A = c (Z² - 1)
            let c = t / (horizon - t);
            let nb = beta.abs();
            match br {
                Branch::Positive => {
                    let k2 = 1.0 - alpha / (nb * c);
                    if k2 <= 0.0 {
                        alpha
                    } else {
                        let k = k2.sqrt();
                        2.0 * alpha * norm_cdf(-k) + 2.0 * nb * c * k * norm_pdf(k)
                    }
                }
                _ => {
                    let k2 = 1.0 + alpha / (nb * c);
                    if k2 <= 0.0 {
                        0.0
                    } else {
                        let k = k2.sqrt();
                        alpha * (1.0 - 2.0 * norm_cdf(-k)) + 2.0 * nb * c * k * norm_pdf(k)
                    }
                }
            }
        }
        ClosedFormKind::ExpQuadratic => {
            // A = ρ exp(θ Z²) - 1
            let rho = (1.0 - t / horizon).sqrt();
            let theta = t / (2.0 * horizon);
            let nb = beta.abs();
            match br {
                Branch::Positive => {
                    let q = 1.0 - alpha / nb;
                    if q <= rho {
                        alpha
                    } else {
                        let nu = ((q / rho).ln() / theta).sqrt();
                        2.0 * (alpha - nb) * norm_cdf(-nu) + 2.0 * nb * norm_cdf(-rho * nu)
                    }
                }
                _ => {
                    let q = 1.0 + alpha / nb;
                    if q <= rho {
                        0.0
                    } else {
                        let nu = ((q / rho).ln() / theta).sqrt();
                        alpha * (1.0 - 2.0 * norm_cdf(-nu)) + 2.0 * nb * (norm_cdf(-rho * nu) - norm_cdf(-nu))
                    }
                }
            }
        }
    };
    v.max(0.0)
}

fn check_strike(strike: f64) -> Result<()> {
    if strike > 0.0 && strike.is_finite() {
        Ok(())
    } else {
        Err(invalid("strike", format!("must be positive, got {strike}")))
    }
}

/// `α = K P0(t) - P0(T)` and `β = K b(t) - b(T)` of a caplet, with the scale
/// used for the zero-branch test.
pub fn caplet_loadings(strike: f64, t: f64, maturity: f64, curve: &dyn TimeFn, b: &dyn TimeFn) -> (f64, f64, f64) {
    let (bt, bm) = (b.value(t), b.value(maturity));
    (
        strike * curve.value(t) - curve.value(maturity),
        strike * bt - bm,
        (strike * bt).abs() + bm.abs(),
    )
}

/// Time-zero price of a caplet paying `(K - P_tT)⁺` at `t`.
pub fn caplet_price_closed(
    kind: ClosedFormKind,
    strike: f64,
    t: f64,
    maturity: f64,
    horizon: f64,
    curve: &dyn TimeFn,
    b: &dyn TimeFn,
) -> Result<f64> {
    check_strike(strike)?;
    if !(t >= 0.0 && t < maturity) {
        return Err(invalid("maturity", format!("need 0 <= t < T, got t = {t}, T = {maturity}")));
    }
    if !(maturity < horizon) {
        return Err(Error::TimeOutOfRange { t: maturity, horizon });
    }
    let (alpha, beta, scale) = caplet_loadings(strike, t, maturity, curve, b);
    Ok(threshold_price(kind, alpha, beta, scale, t, horizon))
}

/// Checks `t < T_1 < ... < T_n < U`.
pub fn check_schedule(t: f64, resets: &[f64], horizon: f64) -> Result<()> {
    if resets.is_empty() {
        return Err(invalid("resets", "a swaption needs at least one reset date"));
    }
    if !(t >= 0.0) {
        return Err(invalid("t", format!("expiry must be non-negative, got {t}")));
    }
    let mut prev = t;
    for &r in resets {
        if !(r > prev) {
            return Err(invalid("resets", format!("reset dates must increase after the expiry, got {r} after {prev}")));
        }
        prev = r;
    }
    if !(prev < horizon) {
        return Err(Error::TimeOutOfRange { t: prev, horizon });
    }
    Ok(())
}

/// `α = P0(t) - P0(T_n) - K Σ P0(T_i)` and `β = b(t) - b(T_n) - K Σ b(T_i)`
/// of a payer swaption, with the zero-branch scale.
pub fn swaption_loadings(strike: f64, t: f64, resets: &[f64], curve: &dyn TimeFn, b: &dyn TimeFn) -> (f64, f64, f64) {
    let last = *resets.last().expect("non-empty schedule");
    let sum_p: f64 = resets.iter().map(|&x| curve.value(x)).sum();
    let sum_b: f64 = resets.iter().map(|&x| b.value(x)).sum();
    let sum_abs_b: f64 = resets.iter().map(|&x| b.value(x).abs()).sum();
    let (bt, bn) = (b.value(t), b.value(last));
    (
        curve.value(t) - curve.value(last) - strike * sum_p,
        bt - bn - strike * sum_b,
        bt.abs() + bn.abs() + strike * sum_abs_b,
    )
}

/// Time-zero price of a payer swaption with expiry `t` (the first reset) on
/// the unit-accrual schedule `resets = [T_1, .., T_n]`.
pub fn swaption_price_closed(
    kind: ClosedFormKind,
    strike: f64,
    t: f64,
    resets: &[f64],
    horizon: f64,
    curve: &dyn TimeFn,
    b: &dyn TimeFn,
) -> Result<f64> {
    check_strike(strike)?;
    check_schedule(t, resets, horizon)?;
    let (alpha, beta, scale) = swaption_loadings(strike, t, resets, curve, b);
    Ok(threshold_price(kind, alpha, beta, scale, t, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ExpDecay, FnTime};
    use crate::numerics::{integrate_pieces, QuadOptions};
    use rand::{Rng, SeedableRng};

    /// `E[(α + β A)⁺]` by quadrature over the standard normal variable.
    fn by_quadrature(kind: ClosedFormKind, alpha: f64, beta: f64, t: f64, u: f64) -> f64 {
        let a = |z: f64| match kind {
            ClosedFormKind::Quadratic => t / (u - t) * (z * z - 1.0),
            ClosedFormKind::ExpQuadratic => (1.0 - t / u).sqrt() * (t / (2.0 * u) * z * z).exp() - 1.0,
        };
        let f = |z: f64| (alpha + beta * a(z)).max(0.0) * norm_pdf(z);
        // the payoff kinks where α + β A = 0
        let z2 = match kind {
            ClosedFormKind::Quadratic => 1.0 - alpha / (beta * t / (u - t)),
            ClosedFormKind::ExpQuadratic => ((1.0 - alpha / beta) / (1.0 - t / u).sqrt()).ln() / (t / (2.0 * u)),
        };
        let mut points = vec![-40.0, -10.0, -3.0, 0.0, 3.0, 10.0, 40.0];
        if z2 > 0.0 && z2.is_finite() {
            points.extend([-z2.sqrt(), z2.sqrt()]);
        }
        points.sort_by(f64::total_cmp);
        integrate_pieces(f, &points, QuadOptions::tight()).unwrap().value
    }

    #[test]
    fn branches_match_quadrature() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for kind in [ClosedFormKind::Quadratic, ClosedFormKind::ExpQuadratic] {
            for _ in 0..40 {
                let u = 5.0;
                let t = rng.random_range(0.2..2.4);
                let alpha = rng.random_range(-0.1..0.1);
                let beta = rng.random_range(-0.2..0.2);
                let cf = threshold_price(kind, alpha, beta, 1.0, t, u);
                let q = by_quadrature(kind, alpha, beta, t, u);
                assert!((cf - q).abs() < 1e-9, "{kind:?} α={alpha} β={beta} t={t}: {cf} vs {q}");
            }
        }
    }

    #[test]
    fn zero_branch_is_exactly_zero() {
        let u = 5.0;
        let curve = ExpDecay { scale: 1.0, rate: 0.02 };
        let b = FnTime::new(|_| 0.3);
        // K b(t) - b(T) = 0 at K = 1
        let v = caplet_price_closed(ClosedFormKind::Quadratic, 1.0, 1.0, 2.0, u, &curve, &b).unwrap();
        assert_eq!(v, 0.0);
        // b(t) - b(T_n) - K Σ b(T_i) = 0 needs b(t) - b(T_1) = K b(T_1)
        let b = ExpDecay { scale: 0.3, rate: 0.5f64.ln_1p() };
        let v = swaption_price_closed(ClosedFormKind::ExpQuadratic, 0.5, 0.0, &[1.0], u, &curve, &b).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn quadratic_kappa_one() {
        // pick P0 so that κ = 1: then K P0(t) = P0(T)
        let (u, t, big, k) = (4.0, 1.0, 2.0, 0.95);
        let p_t = 0.97;
        let curve = FnTime::new(move |x| if x < 1.5 { p_t } else { k * p_t });
        let b = FnTime::new(|x| 0.1 * (4.0 - x));
        let v = caplet_price_closed(ClosedFormKind::Quadratic, k, t, big, u, &curve, &b).unwrap();
        let beta = k * 0.3 - 0.2;
        let expected = 2.0 * 0.0 * norm_cdf(-1.0) + (2.0 / std::f64::consts::PI).sqrt() * beta.abs() * (t / (u - t)) * (-0.5f64).exp();
        assert!((v - expected).abs() < 1e-15, "{v} vs {expected}");
    }

    #[test]
    fn one_period_swaption_is_scaled_caplet() {
        let u = 5.0;
        let curve = ExpDecay { scale: 1.0, rate: 0.03 };
        let b = ExpDecay { scale: 0.4, rate: 0.2 };
        for kind in [ClosedFormKind::Quadratic, ClosedFormKind::ExpQuadratic] {
            for k in [0.005, 0.02, 0.05, 0.3] {
                let s = swaption_price_closed(kind, k, 1.0, &[2.0], u, &curve, &b).unwrap();
                let c = caplet_price_closed(kind, 1.0 / (1.0 + k), 1.0, 2.0, u, &curve, &b).unwrap();
                assert!((s - (1.0 + k) * c).abs() < 1e-10, "{s} vs {}", (1.0 + k) * c);
            }
        }
    }

    #[test]
    fn validation() {
        let curve = ExpDecay { scale: 1.0, rate: 0.03 };
        let b = ExpDecay { scale: 0.4, rate: 0.2 };
        let q = ClosedFormKind::Quadratic;
        assert!(caplet_price_closed(q, 0.0, 1.0, 2.0, 5.0, &curve, &b).is_err());
        assert!(caplet_price_closed(q, 0.9, 2.0, 2.0, 5.0, &curve, &b).is_err());
        assert!(swaption_price_closed(q, 0.1, 1.0, &[2.0, 2.0], 5.0, &curve, &b).is_err());
        assert!(swaption_price_closed(q, 0.1, 1.0, &[2.0, 5.0], 5.0, &curve, &b).is_err());
        assert!(swaption_price_closed(q, 0.1, 1.0, &[], 5.0, &curve, &b).is_err());
    }
}
