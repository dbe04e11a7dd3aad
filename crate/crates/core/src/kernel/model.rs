//! Pricing kernels `π_t = π0 [P0(t) + Σ b_i(t) A_i(t)] M_t` built from
//! `f0`, per-factor `f1` weights and rational factors.

use std::sync::Arc;

use super::factor::{RationalFactorModel, Shape};
use super::timefn::{check_positive_non_increasing, F0F1Family, SharedFn, TimeFn};
use crate::error::{invalid, Error, Result};

/// Grid resolution used when checking `f0` and `f1` (steps per horizon).
pub const MONOTONE_CHECK_STEPS: usize = 1000;

/// One factor of a kernel together with its weight function `f1`.
#[derive(Debug, Clone)]
pub struct KernelTerm {
    pub factor: RationalFactorModel,
    pub f1: SharedFn,
}

/// `P0(t) = (f0(t) + Σ f1_i(t) h_i(t)) / π0`.
#[derive(Clone)]
pub struct ModelCurve {
    f0: SharedFn,
    parts: Vec<(Shape, SharedFn)>,
    pi0: f64,
}

impl ModelCurve {
    pub fn new(f0: SharedFn, parts: Vec<(Shape, SharedFn)>, pi0: f64) -> Self {
        Self { f0, parts, pi0 }
    }
}

impl TimeFn for ModelCurve {
    fn value(&self, t: f64) -> f64 {
        let mut v = self.f0.value(t);
        for (h, f1) in &self.parts {
            v += f1.value(t) * h.value(t);
        }
        v / self.pi0
    }

    fn derivative(&self, t: f64) -> Option<f64> {
        let mut v = self.f0.derivative(t)?;
        for (h, f1) in &self.parts {
            let e = h.eval(t);
            v += f1.derivative(t)? * e.v + f1.value(t) * e.d1;
        }
        Some(v / self.pi0)
    }

    fn second_derivative(&self, t: f64) -> Option<f64> {
        let mut v = self.f0.second_derivative(t)?;
        for (h, f1) in &self.parts {
            let e = h.eval(t);
            v += f1.second_derivative(t)? * e.v + 2.0 * f1.derivative(t)? * e.d1 + f1.value(t) * e.d2;
        }
        Some(v / self.pi0)
    }
}

/// `b(t) = f1(t) k(t) / π0`.
#[derive(Clone)]
pub struct Coefficient {
    shape: Shape,
    f1: SharedFn,
    pi0: f64,
}

impl Coefficient {
    pub fn new(shape: Shape, f1: SharedFn, pi0: f64) -> Self {
        Self { shape, f1, pi0 }
    }
}

impl TimeFn for Coefficient {
    fn value(&self, t: f64) -> f64 {
        self.f1.value(t) * self.shape.value(t) / self.pi0
    }

    fn derivative(&self, t: f64) -> Option<f64> {
        let e = self.shape.eval(t);
        Some((self.f1.derivative(t)? * e.v + self.f1.value(t) * e.d1) / self.pi0)
    }

    fn second_derivative(&self, t: f64) -> Option<f64> {
        let e = self.shape.eval(t);
        let f = &self.f1;
        Some((f.second_derivative(t)? * e.v + 2.0 * f.derivative(t)? * e.d1 + f.value(t) * e.d2) / self.pi0)
    }
}

/// `f0(t) = P0(t) π0 - Σ f1_i(t) h_i(t)` reproducing a market curve.
#[derive(Clone)]
pub struct CalibratedF0 {
    curve: SharedFn,
    parts: Vec<(Shape, SharedFn)>,
    pi0: f64,
}

impl TimeFn for CalibratedF0 {
    fn value(&self, t: f64) -> f64 {
        let mut v = self.curve.value(t) * self.pi0;
        for (h, f1) in &self.parts {
            v -= f1.value(t) * h.value(t);
        }
        v
    }

    fn derivative(&self, t: f64) -> Option<f64> {
        let mut v = self.curve.derivative(t)? * self.pi0;
        for (h, f1) in &self.parts {
            let e = h.eval(t);
            v -= f1.derivative(t)? * e.v + f1.value(t) * e.d1;
        }
        Some(v)
    }

    fn second_derivative(&self, t: f64) -> Option<f64> {
        let mut v = self.curve.second_derivative(t)? * self.pi0;
        for (h, f1) in &self.parts {
            let e = h.eval(t);
            v -= f1.second_derivative(t)? * e.v + 2.0 * f1.derivative(t)? * e.d1 + f1.value(t) * e.d2;
        }
        Some(v)
    }
}

fn pi0_of(terms: &[KernelTerm]) -> f64 {
    1.0 + terms
        .iter()
        .map(|k| k.f1.value(0.0) * k.factor.curve_shape().value(0.0))
        .sum::<f64>()
}

fn parts_of(terms: &[KernelTerm]) -> Vec<(Shape, SharedFn)> {
    terms.iter().map(|k| (k.factor.curve_shape(), k.f1.clone())).collect()
}

fn common_horizon(terms: &[KernelTerm]) -> Result<f64> {
    let first = terms
        .first()
        .ok_or_else(|| invalid("terms", "a kernel needs at least one factor"))?
        .factor
        .horizon();
    if terms.iter().any(|k| (k.factor.horizon() - first).abs() > 1e-12 * first) {
        return Err(invalid("horizon", "all factors must share one horizon"));
    }
    Ok(first)
}

fn check_f1(terms: &[KernelTerm], horizon: f64) -> Result<()> {
    let mut prev = vec![f64::INFINITY; terms.len()];
    for k in 0..=MONOTONE_CHECK_STEPS {
        let t = horizon * k as f64 / MONOTONE_CHECK_STEPS as f64;
        for (term, p) in terms.iter().zip(prev.iter_mut()) {
            let v = term.f1.value(t);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid("f1", format!("negative or non-finite at t = {t}")));
            }
            if v > *p * (1.0 + 1e-13) {
                return Err(invalid("f1", format!("increasing at t = {t}")));
            }
            *p = v;
        }
    }
    Ok(())
}

/// Solves for the `f0` that makes the kernel reproduce `curve` at time zero.
///
/// Fails with [`Error::CalibrationInfeasible`] at the first grid time where
/// the implied `f0` is non-positive or increasing.
pub fn calibrate_f0(curve: SharedFn, terms: &[KernelTerm]) -> Result<CalibratedF0> {
    let horizon = common_horizon(terms)?;
    let p00 = curve.value(0.0);
    if (p00 - 1.0).abs() > 1e-12 {
        return Err(invalid("curve", format!("P(0, 0) must be 1, got {p00}")));
    }
    let f0 = CalibratedF0 {
        curve,
        parts: parts_of(terms),
        pi0: pi0_of(terms),
    };
    let mut prev = f64::INFINITY;
    for k in 0..=MONOTONE_CHECK_STEPS {
        let t = horizon * k as f64 / MONOTONE_CHECK_STEPS as f64;
        let v = f0.value(t);
        if !(v > 0.0) {
            return Err(Error::CalibrationInfeasible {
                t,
                reason: format!("implied f0 = {v} is not positive"),
            });
        }
        if v > prev * (1.0 + 1e-12) {
            return Err(Error::CalibrationInfeasible {
                t,
                reason: format!("implied f0 increases ({prev} -> {v})"),
            });
        }
        prev = v;
    }
    Ok(f0)
}

/// A pricing kernel with one or more rational factors.
#[derive(Clone)]
pub struct KernelModel {
    f0: SharedFn,
    terms: Vec<KernelTerm>,
    pi0: f64,
    horizon: f64,
}

impl std::fmt::Debug for KernelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelModel")
            .field("pi0", &self.pi0)
            .field("horizon", &self.horizon)
            .field("factors", &self.terms.iter().map(|t| t.factor.kind().name()).collect::<Vec<_>>())
            .finish()
    }
}

impl KernelModel {
    pub fn new(f0: SharedFn, terms: Vec<KernelTerm>) -> Result<Self> {
        let horizon = common_horizon(&terms)?;
        let f00 = f0.value(0.0);
        if (f00 - 1.0).abs() > 1e-12 {
            return Err(invalid("f0", format!("f0(0) must be 1, got {f00}")));
        }
        check_positive_non_increasing(f0.as_ref(), "f0", horizon, MONOTONE_CHECK_STEPS)?;
        check_f1(&terms, horizon)?;
        let pi0 = pi0_of(&terms);
        Ok(Self { f0, terms, pi0, horizon })
    }

    pub fn single(factor: RationalFactorModel, f0: SharedFn, f1: SharedFn) -> Result<Self> {
        Self::new(f0, vec![KernelTerm { factor, f1 }])
    }

    pub fn from_family(factor: RationalFactorModel, family: F0F1Family) -> Result<Self> {
        Self::single(factor, Arc::new(family.f0()), Arc::new(family.f1()))
    }

    /// Kernel whose initial curve is `curve`, with `f0` calibrated.
    pub fn calibrated(curve: SharedFn, terms: Vec<KernelTerm>) -> Result<Self> {
        let f0 = calibrate_f0(curve, &terms)?;
        Self::new(Arc::new(f0), terms)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn f0(&self) -> &SharedFn {
        &self.f0
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn factor(&self, i: usize) -> &RationalFactorModel {
        &self.terms[i].factor
    }

    /// Model-implied initial discount curve.
    pub fn curve(&self) -> ModelCurve {
        ModelCurve {
            f0: self.f0.clone(),
            parts: parts_of(&self.terms),
            pi0: self.pi0,
        }
    }

    /// Coefficient `b_i`.
    pub fn coefficient(&self, i: usize) -> Coefficient {
        let term = &self.terms[i];
        Coefficient::new(term.factor.coefficient_shape(), term.f1.clone(), self.pi0)
    }

    /// `(b_i(t), P0(t))`.
    pub fn eval_b_p0(&self, i: usize, t: f64) -> (f64, f64) {
        (self.coefficient(i).value(t), self.curve().value(t))
    }

    /// `π_t` given the bridge state and the density `M_t = d𝕄/dℙ`.
    pub fn pricing_kernel(&self, t: f64, state: &[f64], m_t: f64) -> Result<f64> {
        let mut bracket = self.curve().value(t);
        for (i, term) in self.terms.iter().enumerate() {
            bracket += self.coefficient(i).value(t) * term.factor.eval_a(t, state)?;
        }
        if !(bracket > 0.0) {
            return Err(Error::ModelViolation(format!(
                "pricing kernel bracket {bracket} is not positive at t = {t}"
            )));
        }
        Ok(self.pi0 * bracket * m_t)
    }
}
