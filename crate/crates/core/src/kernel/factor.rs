//! Rational factors: an auxiliary-measure martingale `A_t` together with the
//! deterministic shapes that turn `f1` into the coefficient `b(t)` and the
//! initial curve.

use crate::error::{invalid, Error, Result};
use crate::lrb::{AuxMode, BridgeSpec, LevyLaw};

/// The closed-form factor families.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorKind {
    /// `A = U L² / (U-t)² - t / (U-t)` on a Brownian bridge to zero.
    Quadratic,
    /// `A = sqrt(1 - t/U) exp(L² / (2(U-t))) - 1` on a Brownian bridge to zero.
    ExpQuadratic { eta: f64 },
    /// Inputs `[brownian, gamma]`:
    /// `A = (1+c)^{mt} exp(a L1 - c L2 - a²t/2) - 1`.
    ExpLinearTwoFactor { a: f64, c: f64, m: f64 },
    /// Inputs `[brownian, gamma]`:
    /// `A = (1-c)^{mt} exp(-a L1 - a²t/2 + c L2) - 1`.
    Debt { a: f64, c: f64, m: f64 },
    /// Inputs `[stable, gamma]`:
    /// `A = (1-c)^{mt} exp(-κ L1 + α sqrt(κ) t / sqrt(2) + c L2) - 1`.
    HeavyTailNumerator { kappa: f64, c: f64, m: f64, alpha: f64 },
    /// Inputs `[gamma, brownian]`:
    /// `A = (η+1)^{qt} exp(-η L1 + a L2 - a²t/2) - 1`.
    ExpLinearDiscount { eta: f64, a: f64, q: f64 },
    /// Inputs `[brownian, gamma_1, .., gamma_n]`:
    /// `A = Π (1-w_i)^{m_i t} exp(-a L0 - a²t/2 + Σ w_i L_i) - 1`, with
    /// shape `(U-t)^power`.
    Contagion {
        a: f64,
        weights: Vec<f64>,
        rates: Vec<f64>,
        power: f64,
    },
}

impl FactorKind {
    pub fn name(&self) -> &'static str {
        match self {
            FactorKind::Quadratic => "quadratic",
            FactorKind::ExpQuadratic { .. } => "exp_quadratic",
            FactorKind::ExpLinearTwoFactor { .. } => "exp_linear_two_factor",
            FactorKind::Debt { .. } => "debt",
            FactorKind::HeavyTailNumerator { .. } => "heavy_tail_numerator",
            FactorKind::ExpLinearDiscount { .. } => "exp_linear_discount",
            FactorKind::Contagion { .. } => "contagion",
        }
    }

    /// Number of bridge components the factor reads.
    pub fn arity(&self) -> usize {
        match self {
            FactorKind::Quadratic | FactorKind::ExpQuadratic { .. } => 1,
            FactorKind::Contagion { weights, .. } => 1 + weights.len(),
            _ => 2,
        }
    }

    /// Whether `A` is driven by a single Brownian bridge to zero.
    pub fn is_gaussian(&self) -> bool {
        matches!(self, FactorKind::Quadratic | FactorKind::ExpQuadratic { .. })
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite, got {v}")))
            }
        };
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        let unit = |name: &'static str, v: f64| {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(name, format!("must lie in [0, 1), got {v}")))
            }
        };
        match *self {
            FactorKind::Quadratic => Ok(()),
            FactorKind::ExpQuadratic { eta } => {
                if eta > 0.5 && eta.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("eta", format!("must exceed 1/2, got {eta}")))
                }
            }
            FactorKind::ExpLinearTwoFactor { a, c, m } => {
                finite("a", a)?;
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(invalid("c", format!("must be non-negative, got {c}")));
                }
                positive("m", m)
            }
            FactorKind::Debt { a, c, m } => {
                finite("a", a)?;
                unit("c", c)?;
                positive("m", m)
            }
            FactorKind::HeavyTailNumerator { kappa, c, m, alpha } => {
                if !(kappa >= 0.0 && kappa.is_finite()) {
                    return Err(invalid("kappa", format!("must be non-negative, got {kappa}")));
                }
                unit("c", c)?;
                positive("m", m)?;
                positive("alpha", alpha)
            }
            FactorKind::ExpLinearDiscount { eta, a, q } => {
                if !(eta >= 0.0 && eta.is_finite()) {
                    return Err(invalid("eta", format!("must be non-negative, got {eta}")));
                }
                finite("a", a)?;
                positive("q", q)
            }
            FactorKind::Contagion {
                a,
                ref weights,
                ref rates,
                power,
            } => {
                finite("a", a)?;
                positive("power", power)?;
                if weights.len() != rates.len() {
                    return Err(invalid(
                        "rates",
                        format!("{} weights but {} rates", weights.len(), rates.len()),
                    ));
                }
                for &w in weights {
                    unit("weights", w)?;
                }
                for &m in rates {
                    positive("rates", m)?;
                }
                Ok(())
            }
        }
    }
}

/// Value and first two derivatives of a deterministic shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeValue {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Deterministic shape of a factor: `coef · (U - t)^p`, or the quadratic
/// model's initial-curve polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Power { horizon: f64, coef: f64, p: f64 },
    QuadraticCurve { horizon: f64 },
}

impl Shape {
    pub fn eval(&self, t: f64) -> ShapeValue {
        match *self {
            Shape::Power { horizon, coef, p } => {
                let s = (horizon - t).max(0.0);
                let pow = |q: f64| if q == 0.0 { 1.0 } else { s.powf(q) };
                ShapeValue {
                    v: coef * pow(p),
                    d1: -coef * p * pow(p - 1.0),
                    d2: coef * p * (p - 1.0) * pow(p - 2.0),
                }
            }
            Shape::QuadraticCurve { horizon: u } => {
                let s = (u - t).max(0.0);
                ShapeValue {
                    v: s * s * s * (u + 3.0 * t) / (12.0 * u),
                    d1: -t * s * s / u,
                    d2: -s * (u - 3.0 * t) / u,
                }
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).v
    }
}

/// A rational factor reading `inputs` from the bridge state.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFactorModel {
    kind: FactorKind,
    horizon: f64,
    inputs: Vec<usize>,
}

impl RationalFactorModel {
    pub fn new(kind: FactorKind, horizon: f64, inputs: Vec<usize>) -> Result<Self> {
        kind.validate()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be positive, got {horizon}")));
        }
        if inputs.len() != kind.arity() {
            return Err(Error::Dimension {
                expected: kind.arity(),
                got: inputs.len(),
            });
        }
        Ok(Self { kind, horizon, inputs })
    }

    pub fn kind(&self) -> &FactorKind {
        &self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    /// Checks that the bridge supplies the laws and auxiliary modes this
    /// factor needs to be a martingale.
    pub fn check_bridge(&self, bridge: &BridgeSpec) -> Result<()> {
        if (bridge.horizon() - self.horizon).abs() > 1e-12 * self.horizon {
            return Err(invalid(
                "horizon",
                format!("factor horizon {} differs from bridge horizon {}", self.horizon, bridge.horizon()),
            ));
        }
        for &i in &self.inputs {
            if i >= bridge.dim() {
                return Err(invalid("inputs", format!("component {i} out of range")));
            }
        }
        let comp = |k: usize| bridge.component(self.inputs[k]);
        let brownian = |k: usize, mode: AuxMode| {
            let c = comp(k);
            if !c.law.is_brownian() {
                return Err(Error::ModelViolation(format!(
                    "{} factor: input {} must be Brownian",
                    self.kind.name(),
                    self.inputs[k]
                )));
            }
            if c.aux != mode {
                return Err(Error::ModelViolation(format!(
                    "{} factor: input {} must use the {:?} auxiliary law",
                    self.kind.name(),
                    self.inputs[k],
                    mode
                )));
            }
            Ok(())
        };
        let gamma = |k: usize, m: f64| match comp(k).law {
            LevyLaw::Gamma { m: lm } if (lm - m).abs() <= 1e-12 * m => Ok(()),
            _ => Err(Error::ModelViolation(format!(
                "{} factor: input {} must be a gamma bridge with rate {m}",
                self.kind.name(),
                self.inputs[k]
            ))),
        };
        match &self.kind {
            FactorKind::Quadratic | FactorKind::ExpQuadratic { .. } => brownian(0, AuxMode::BridgeToZero),
            FactorKind::ExpLinearTwoFactor { m, .. } | FactorKind::Debt { m, .. } => {
                brownian(0, AuxMode::Levy)?;
                gamma(1, *m)
            }
            FactorKind::HeavyTailNumerator { m, alpha, .. } => {
                match comp(0).law {
                    LevyLaw::StableHalf { alpha: la } if (la - alpha).abs() <= 1e-12 * alpha => {}
                    _ => {
                        return Err(Error::ModelViolation(format!(
                            "heavy_tail_numerator factor: input {} must be a stable-1/2 bridge with activity {alpha}",
                            self.inputs[0]
                        )))
                    }
                }
                gamma(1, *m)
            }
            FactorKind::ExpLinearDiscount { q, .. } => {
                gamma(0, *q)?;
                brownian(1, AuxMode::Levy)
            }
            FactorKind::Contagion { rates, .. } => {
                brownian(0, AuxMode::Levy)?;
                for (k, m) in rates.iter().enumerate() {
                    gamma(k + 1, *m)?;
                }
                Ok(())
            }
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange { t, horizon: self.horizon })
        }
    }

    fn read(&self, state: &[f64], k: usize) -> Result<f64> {
        let i = self.inputs[k];
        state.get(i).copied().ok_or(Error::Dimension {
            expected: i + 1,
            got: state.len(),
        })
    }

    /// `A_t` at the bridge state.
    pub fn eval_a(&self, t: f64, state: &[f64]) -> Result<f64> {
        self.check_time(t)?;
        let u = self.horizon;
        let s = u - t;
        Ok(match &self.kind {
            FactorKind::Quadratic => {
                let l = self.read(state, 0)?;
                u * l * l / (s * s) - t / s
            }
            FactorKind::ExpQuadratic { .. } => {
                let l = self.read(state, 0)?;
                (0.5 * (s / u).ln() + l * l / (2.0 * s)).exp_m1()
            }
            &FactorKind::ExpLinearTwoFactor { a, c, m } => {
                let (l1, l2) = (self.read(state, 0)?, self.read(state, 1)?);
                (m * t * c.ln_1p() + a * l1 - c * l2 - 0.5 * a * a * t).exp_m1()
            }
            &FactorKind::Debt { a, c, m } => {
                let (l1, l2) = (self.read(state, 0)?, self.read(state, 1)?);
                (m * t * (-c).ln_1p() - a * l1 - 0.5 * a * a * t + c * l2).exp_m1()
            }
            &FactorKind::HeavyTailNumerator { kappa, c, m, alpha } => {
                let (l1, l2) = (self.read(state, 0)?, self.read(state, 1)?);
                let drift = alpha * kappa.sqrt() * t / std::f64::consts::SQRT_2;
                (m * t * (-c).ln_1p() - kappa * l1 + drift + c * l2).exp_m1()
            }
            &FactorKind::ExpLinearDiscount { eta, a, q } => {
                let (l1, l2) = (self.read(state, 0)?, self.read(state, 1)?);
                (q * t * eta.ln_1p() - eta * l1 + a * l2 - 0.5 * a * a * t).exp_m1()
            }
            FactorKind::Contagion { a, weights, rates, .. } => {
                let l0 = self.read(state, 0)?;
                let mut x = -a * l0 - 0.5 * a * a * t;
                for (k, (w, m)) in weights.iter().zip(rates).enumerate() {
                    x += m * t * (-w).ln_1p() + w * self.read(state, k + 1)?;
                }
                x.exp_m1()
            }
        })
    }

    /// Pathwise lower bound of `A_t`.
    pub fn lower_bound(&self, t: f64) -> f64 {
        let u = self.horizon;
        match self.kind {
            FactorKind::Quadratic => -t / (u - t),
            FactorKind::ExpQuadratic { .. } => (1.0 - t / u).sqrt() - 1.0,
            _ => -1.0,
        }
    }

    /// Shape `h` with `P0(t) ∝ f0(t) + f1(t) h(t)`.
    pub fn curve_shape(&self) -> Shape {
        match self.kind {
            FactorKind::Quadratic => Shape::QuadraticCurve { horizon: self.horizon },
            _ => self.coefficient_shape(),
        }
    }

    /// Shape `k` with `b(t) ∝ f1(t) k(t)`.
    pub fn coefficient_shape(&self) -> Shape {
        let horizon = self.horizon;
        match self.kind {
            FactorKind::Quadratic => Shape::Power {
                horizon,
                coef: 1.0 / (4.0 * horizon),
                p: 4.0,
            },
            FactorKind::ExpQuadratic { eta } => Shape::Power {
                horizon,
                coef: horizon.sqrt() / eta,
                p: eta,
            },
            FactorKind::Contagion { power, .. } => Shape::Power { horizon, coef: 1.0, p: power },
            _ => Shape::Power { horizon, coef: 1.0, p: 2.0 },
        }
    }

    /// Diffusion loading `ν = ∂A/∂L` of the Brownian-driven Gaussian kinds.
    pub fn nu(&self, t: f64, l: f64) -> Result<f64> {
        self.check_time(t)?;
        let u = self.horizon;
        let s = u - t;
        match self.kind {
            FactorKind::Quadratic => Ok(2.0 * u * l / (s * s)),
            FactorKind::ExpQuadratic { .. } => Ok(l / (u * s).sqrt() * (l * l / (2.0 * s)).exp()),
            _ => Err(Error::Unsupported(format!(
                "{} factor has no Brownian diffusion loading",
                self.kind.name()
            ))),
        }
    }

    /// `ν` read from the bridge state.
    pub fn nu_at(&self, t: f64, state: &[f64]) -> Result<f64> {
        let l = self.read(state, 0)?;
        self.nu(t, l)
    }
}
