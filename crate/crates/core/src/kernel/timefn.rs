//! Deterministic functions of time with optional analytic derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};

/// A deterministic function of time.
///
/// Implementations that know their derivatives analytically should override
/// [`TimeFn::derivative`] and [`TimeFn::second_derivative`]; callers fall back
/// to centred differences where that is acceptable.
pub trait TimeFn: Send + Sync {
    fn value(&self, t: f64) -> f64;

    fn derivative(&self, _t: f64) -> Option<f64> {
        None
    }

    fn second_derivative(&self, _t: f64) -> Option<f64> {
        None
    }
}

pub type SharedFn = Arc<dyn TimeFn>;

impl fmt::Debug for dyn TimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimeFn(f(0) = {})", self.value(0.0))
    }
}

/// First derivative, analytic if available, else a centred difference of
/// step `h`.
pub fn d1(f: &dyn TimeFn, t: f64, h: f64) -> f64 {
    f.derivative(t)
        .unwrap_or_else(|| (f.value(t + h) - f.value(t - h)) / (2.0 * h))
}

/// Constant function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl TimeFn for Constant {
    fn value(&self, _t: f64) -> f64 {
        self.0
    }
    fn derivative(&self, _t: f64) -> Option<f64> {
        Some(0.0)
    }
    fn second_derivative(&self, _t: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// `scale · exp(-rate · t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDecay {
    pub scale: f64,
    pub rate: f64,
}

impl TimeFn for ExpDecay {
    fn value(&self, t: f64) -> f64 {
        self.scale * (-self.rate * t).exp()
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        Some(-self.rate * self.value(t))
    }
    fn second_derivative(&self, t: f64) -> Option<f64> {
        Some(self.rate * self.rate * self.value(t))
    }
}

/// `β / ln(γ + t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseLog {
    pub beta: f64,
    pub gamma: f64,
}

impl TimeFn for InverseLog {
    fn value(&self, t: f64) -> f64 {
        self.beta / (self.gamma + t).ln()
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        let x = self.gamma + t;
        let l = x.ln();
        Some(-self.beta / (x * l * l))
    }
    fn second_derivative(&self, t: f64) -> Option<f64> {
        let x = self.gamma + t;
        let l = x.ln();
        Some(self.beta * (l + 2.0) / (x * x * l * l * l))
    }
}

/// The two-parameter family `f0(t) = e^{-αt}`, `f1(t) = β / ln(γ + t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0F1Family {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl F0F1Family {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive, got {beta}")));
        }
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must exceed 1, got {gamma}")));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn f0(&self) -> ExpDecay {
        ExpDecay {
            scale: 1.0,
            rate: self.alpha,
        }
    }

    pub fn f1(&self) -> InverseLog {
        InverseLog {
            beta: self.beta,
            gamma: self.gamma,
        }
    }
}

/// A closure-backed function with optional closure derivatives.
pub struct FnTime {
    value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    d1: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
    d2: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl FnTime {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Box::new(f),
            d1: None,
            d2: None,
        }
    }

    pub fn with_derivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d1 = Some(Box::new(f));
        self
    }

    pub fn with_second_derivative(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.d2 = Some(Box::new(f));
        self
    }
}

impl TimeFn for FnTime {
    fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }
    fn derivative(&self, t: f64) -> Option<f64> {
        self.d1.as_ref().map(|f| f(t))
    }
    fn second_derivative(&self, t: f64) -> Option<f64> {
        self.d2.as_ref().map(|f| f(t))
    }
}

/// Checks positivity and monotone decrease of `f` on `n + 1` points of
/// `[0, horizon]`.
pub fn check_positive_non_increasing(f: &dyn TimeFn, name: &'static str, horizon: f64, n: usize) -> Result<()> {
    let mut prev = f64::INFINITY;
    for k in 0..=n {
        let t = horizon * k as f64 / n as f64;
        let v = f.value(t);
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("not positive at t = {t} (value {v})")));
        }
        if v > prev * (1.0 + 1e-13) {
            return Err(invalid(name, format!("increasing at t = {t}")));
        }
        prev = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: &dyn Fn(f64) -> f64, t: f64) -> f64 {
        let h = 1e-5;
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    #[test]
    fn inverse_log_derivatives() {
        let g = InverseLog { beta: 0.3, gamma: 2.5 };
        for t in [0.0, 0.7, 3.0] {
            let v = |x: f64| g.value(x);
            let dv = |x: f64| g.derivative(x).unwrap();
            assert!((g.derivative(t).unwrap() - fd(&v, t)).abs() < 1e-9);
            assert!((g.second_derivative(t).unwrap() - fd(&dv, t)).abs() < 1e-8);
        }
    }

    #[test]
    fn family_validation() {
        assert!(F0F1Family::new(0.02, 0.01, 1.0).is_err());
        assert!(F0F1Family::new(0.0, 0.01, 2.0).is_err());
        let f = F0F1Family::new(0.02, 0.01, 2.0).unwrap();
        assert_eq!(f.f0().value(0.0), 1.0);
        assert!(check_positive_non_increasing(&f.f1(), "f1", 5.0, 100).is_ok());
    }

    #[test]
    fn increasing_function_detected() {
        let f = FnTime::new(|t| 1.0 + t);
        assert!(check_positive_non_increasing(&f, "f", 1.0, 10).is_err());
    }
}
