//! Initial discount curves interpolated log-linearly between nodes.

use crate::error::{invalid, Result};
use crate::kernel::TimeFn;

/// A discount curve `P(0, t)` given on a grid of nodes.
///
/// Between nodes `ln P` is linear, so forward rates are piecewise constant.
/// Beyond the last node the last forward rate is held flat. Derivatives at a
/// node are taken from the right.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    times: Vec<f64>,
    values: Vec<f64>,
    /// Forward rate on `[times[k], times[k+1])`.
    forwards: Vec<f64>,
}

impl DiscountCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(invalid(
                "values",
                format!("{} times but {} values", times.len(), values.len()),
            ));
        }
        if times.len() < 2 {
            return Err(invalid("times", "a curve needs at least two nodes"));
        }
        if times[0] != 0.0 {
            return Err(invalid("times", format!("first node must be 0, got {}", times[0])));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid("times", format!("nodes not strictly increasing at {}", w[1])));
        }
        if (values[0] - 1.0).abs() > 1e-12 {
            return Err(invalid("values", format!("P(0, 0) must be 1, got {}", values[0])));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return Err(invalid("values", format!("discount factors must lie in (0, 1], got {v}")));
        }
        let forwards = times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, p)| -(p[1] / p[0]).ln() / (t[1] - t[0]))
            .collect();
        Ok(Self { times, values, forwards })
    }

    /// `P(0, t) = exp(-rate · t)` sampled at `n + 1` nodes on `[0, t_max]`.
    pub fn flat(rate: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_max > 0.0) || n == 0 {
            return Err(invalid("t_max", "flat curve needs a positive span and at least one step"));
        }
        let times: Vec<f64> = (0..=n).map(|k| t_max * k as f64 / n as f64).collect();
        let values = times.iter().map(|t| (-rate * t).exp()).collect();
        Self::new(times, values)
    }

    /// Samples `f` at the given nodes.
    pub fn from_fn(f: &dyn TimeFn, times: Vec<f64>) -> Result<Self> {
        let values = times.iter().map(|&t| f.value(t)).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nodes at which the curve increases. The models tolerate such curves,
    /// but they indicate miscalibrated inputs.
    pub fn monotonicity_warnings(&self) -> Vec<String> {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .filter(|(_, p)| p[1] > p[0])
            .map(|(t, p)| format!("discount curve increases from {} at t = {} to {} at t = {}", p[0], t[0], p[1], t[1]))
            .collect()
    }

    /// Segment containing `t`, right-continuous at nodes.
    fn segment(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.forwards.len() - 1)
    }

    /// Instantaneous forward rate `-∂_t ln P(0, t)`.
    pub fn forward(&self, t: f64) -> f64 {
        self.forwards[self.segment(t)]
    }
}

impl TimeFn for DiscountCurve {
    fn value(&self, t: f64) -> f64 {
        let k = self.segment(t);
        self.values[k] * (-self.forwards[k] * (t - self.times[k])).exp()
    }

    fn derivative(&self, t: f64) -> Option<f64> {
        Some(-self.forward(t) * self.value(t))
    }

    fn second_derivative(&self, t: f64) -> Option<f64> {
        let f = self.forward(t);
        Some(f * f * self.value(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_flat_rates() {
        let c = DiscountCurve::flat(0.02, 5.0, 10).unwrap();
        for t in [0.0, 0.25, 1.3, 4.99, 6.0] {
            assert!((c.value(t) - (-0.02 * t).exp()).abs() < 1e-15);
            assert!((c.forward(t) - 0.02).abs() < 1e-12);
        }
        assert!(c.monotonicity_warnings().is_empty());
    }

    #[test]
    fn log_linear_between_nodes() {
        let c = DiscountCurve::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.9, 0.85]).unwrap();
        let mid = c.value(0.5);
        assert!((mid - 0.9f64.sqrt()).abs() < 1e-15);
        // right derivative at the node
        let f = -(0.85f64 / 0.9).ln();
        assert!((c.derivative(1.0).unwrap() + f * 0.9).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(DiscountCurve::new(vec![0.0, 1.0], vec![0.99, 0.9]).is_err());
        assert!(DiscountCurve::new(vec![0.0, 1.0], vec![1.0, 1.2]).is_err());
        assert!(DiscountCurve::new(vec![0.0, 0.0], vec![1.0, 0.9]).is_err());
        let c = DiscountCurve::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.9, 0.95]).unwrap();
        assert_eq!(c.monotonicity_warnings().len(), 1);
    }
}
