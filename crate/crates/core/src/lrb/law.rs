//! Generating Lévy laws: densities, exponents and exact samplers for both the
//! free process and its bridges.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::distribution::ContinuousCDF;

use crate::error::{invalid, Error, Result};
use crate::numerics::ln_gamma;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A one-dimensional Lévy law with a density at every positive time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevyLaw {
    /// Standard Brownian motion.
    BrownianUnit,
    /// Gamma subordinator with unit rate; `L_t` has shape `m t`.
    Gamma { m: f64 },
    /// Stable-1/2 subordinator with activity `alpha`.
    StableHalf { alpha: f64 },
}

impl LevyLaw {
    pub fn gamma(m: f64) -> Result<Self> {
        let law = LevyLaw::Gamma { m };
        law.validate()?;
        Ok(law)
    }

    pub fn stable_half(alpha: f64) -> Result<Self> {
        let law = LevyLaw::StableHalf { alpha };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LevyLaw::BrownianUnit => Ok(()),
            LevyLaw::Gamma { m } if m > 0.0 && m.is_finite() => Ok(()),
            LevyLaw::Gamma { m } => Err(invalid("m", format!("gamma rate must be positive, got {m}"))),
            LevyLaw::StableHalf { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(()),
            LevyLaw::StableHalf { alpha } => Err(invalid(
                "alpha",
                format!("stable-1/2 activity must be positive, got {alpha}"),
            )),
        }
    }

    /// Increasing laws live on `(0, ∞)`.
    pub fn is_increasing(&self) -> bool {
        !matches!(self, LevyLaw::BrownianUnit)
    }

    pub fn is_brownian(&self) -> bool {
        matches!(self, LevyLaw::BrownianUnit)
    }

    /// `ln ρ_t(y)`; `-∞` outside the support.
    pub fn log_density(&self, t: f64, y: f64) -> f64 {
        match *self {
            LevyLaw::BrownianUnit => -0.5 * y * y / t - 0.5 * (LN_2PI + t.ln()),
            LevyLaw::Gamma { m } => {
                if y <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let k = m * t;
                (k - 1.0) * y.ln() - y - ln_gamma(k)
            }
            LevyLaw::StableHalf { alpha } => {
                if y <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let at = stable_scale(alpha, t);
                at.ln() - 0.5 * LN_2PI - 1.5 * y.ln() - 0.5 * at * at / y
            }
        }
    }

    /// Density `ρ_t(y)` of `L_t`.
    pub fn density(&self, t: f64, y: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.log_density(t, y).exp())
    }

    /// Quantile of `L_t` at probability `p ∈ (0, 1)`.
    pub fn quantile(&self, t: f64, p: f64) -> Result<f64> {
        check_time(t)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("p", format!("must lie in (0, 1), got {p}")));
        }
        let bad = |e: statrs::distribution::GammaError| invalid("law", e.to_string());
        Ok(match *self {
            LevyLaw::BrownianUnit => t.sqrt() * statrs::distribution::Normal::standard().inverse_cdf(p),
            LevyLaw::Gamma { m } => statrs::distribution::Gamma::new(m * t, 1.0).map_err(bad)?.inverse_cdf(p),
            LevyLaw::StableHalf { alpha } => {
                let a = stable_scale(alpha, t);
                let y = statrs::function::erf::erfc_inv(p);
                a * a / (2.0 * y * y)
            }
        })
    }

    /// Laplace exponent `ψ` with `E[exp(-κ L_t)] = exp(-ψ(κ) t)`.
    ///
    /// For Brownian motion this is the moment-generating branch `-κ²/2`.
    pub fn laplace_exponent(&self, kappa: f64) -> Result<f64> {
        if !(kappa >= 0.0) {
            return Err(invalid("kappa", format!("must be non-negative, got {kappa}")));
        }
        Ok(match *self {
            LevyLaw::BrownianUnit => -0.5 * kappa * kappa,
            LevyLaw::Gamma { m } => m * kappa.ln_1p(),
            LevyLaw::StableHalf { alpha } => alpha * kappa.sqrt() / std::f64::consts::SQRT_2,
        })
    }

    /// Characteristic exponent `Ψ` with `E[exp(-i y L_u)] = exp(-u Ψ(y))`.
    pub fn char_exponent(&self, y: f64) -> Complex64 {
        match *self {
            LevyLaw::BrownianUnit => Complex64::new(0.5 * y * y, 0.0),
            LevyLaw::Gamma { m } => Complex64::new(1.0, y).ln() * m,
            LevyLaw::StableHalf { alpha } => Complex64::new(0.0, y).sqrt() * (alpha / std::f64::consts::SQRT_2),
        }
    }

    /// Increment of the free process over `dt`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        match *self {
            LevyLaw::BrownianUnit => dt.sqrt() * rng.sample::<f64, _>(StandardNormal),
            LevyLaw::Gamma { m } => ln_gamma_variate(m * dt, rng).exp(),
            LevyLaw::StableHalf { alpha } => {
                let z: f64 = rng.sample(StandardNormal);
                let a = stable_scale(alpha, dt);
                a * a / (z * z)
            }
        }
    }

    /// Increment over `dt` of the process bridged to move `remaining` in the
    /// total time `dt + tau`.
    pub fn sample_bridge_increment<R: Rng + ?Sized>(&self, dt: f64, tau: f64, remaining: f64, rng: &mut R) -> f64 {
        if tau <= 0.0 {
            return remaining;
        }
        match *self {
            LevyLaw::BrownianUnit => {
                let total = dt + tau;
                let z: f64 = rng.sample(StandardNormal);
                remaining * dt / total + (dt * tau / total).sqrt() * z
            }
            LevyLaw::Gamma { m } => {
                if remaining <= 0.0 {
                    return 0.0;
                }
                remaining * beta_variate(m * dt, m * tau, rng)
            }
            LevyLaw::StableHalf { alpha } => {
                if remaining <= 0.0 {
                    return 0.0;
                }
                stable_half_bridge_increment(stable_scale(alpha, dt), stable_scale(alpha, tau), remaining, rng)
            }
        }
    }
}

/// Scale `a` of the stable-1/2 increment over `t`: the density is
/// `a y^{-3/2} exp(-a²/(2y)) / √(2π)`, so that
/// `E[exp(-κ L_t)] = exp(-α √κ t / √2)`.
pub(crate) fn stable_scale(alpha: f64, t: f64) -> f64 {
    0.5 * alpha * t
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid("t", format!("time must be positive, got {t}")))
    }
}

/// `ln G` for `G ~ Gamma(shape, 1)`, accurate for tiny shapes where `G`
/// itself underflows.
pub(crate) fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("positive shape");
        g.sample(rng).ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape");
        let u: f64 = rng.random::<f64>();
        // u in [0, 1); u = 0 maps to -∞ which is a valid (measure-zero) draw
        g.sample(rng).ln() + u.ln() / shape
    }
}

/// `Beta(a, b)` via log-gamma variates.
pub(crate) fn beta_variate<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = ln_gamma_variate(a, rng);
    let y = ln_gamma_variate(b, rng);
    if x == f64::NEG_INFINITY && y == f64::NEG_INFINITY {
        // both underflowed: the limit law puts mass a/(a+b) at 1
        return if rng.random::<f64>() < a / (a + b) { 1.0 } else { 0.0 };
    }
    1.0 / (1.0 + (y - x).exp())
}

/// Exact draw of the first of two stable-1/2 increments with scales `a`, `b`
/// conditioned on their sum being `r`.
///
/// With `x = (a(r-w) - b w) / sqrt(w r (r-w))` the conditional law of `w` is
/// the standard normal law of `x` reweighted by `1 / (a(1-v) + b v)`,
/// `v = w / r`. The weight is bounded by `1 / min(a, b)`, so rejection from
/// the normal proposal accepts at least half of the draws.
pub(crate) fn stable_half_bridge_increment<R: Rng + ?Sized>(a: f64, b: f64, r: f64, rng: &mut R) -> f64 {
    let s = a + b;
    let lo = a.min(b);
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let k = x * r.sqrt();
        let (v, one_minus_v) = solve_fraction(a, b, s, k);
        let accept = lo / (a * one_minus_v + b * v);
        if rng.random::<f64>() < accept {
            return if v <= 0.5 { r * v } else { r - r * one_minus_v };
        }
    }
}

/// Root `v ∈ (0, 1)` of `k sqrt(v(1-v)) = a - (a+b) v`, returned together
/// with `1 - v`, each computed without cancellation.
fn solve_fraction(a: f64, b: f64, s: f64, k: f64) -> (f64, f64) {
    let k2 = k * k;
    let root = k.abs() * (k2 + 4.0 * a * b).sqrt();
    let denom = 2.0 * (s * s + k2);
    // product of the two roots is a² / (s² + k²); v is the smaller root when k > 0
    let v = if k >= 0.0 {
        2.0 * a * a / (2.0 * a * s + k2 + root)
    } else {
        (2.0 * a * s + k2 + root) / denom
    };
    // 1 - v solves the mirrored equation with (a, b, k) -> (b, a, -k)
    let w = if k <= 0.0 {
        2.0 * b * b / (2.0 * b * s + k2 + root)
    } else {
        (2.0 * b * s + k2 + root) / denom
    };
    (v, w)
}

/// Checks that `z` is a valid terminal value of the law at time `horizon`.
pub(crate) fn check_terminal(law: &LevyLaw, horizon: f64, z: f64) -> Result<()> {
    let ld = law.log_density(horizon, z);
    if ld.is_finite() {
        Ok(())
    } else {
        Err(Error::OutsideSupport { value: z })
    }
}
