//! Finite discrete terminal priors.

use rand::Rng;

use crate::error::{invalid, Result};

/// Tolerance on `Σ p_k = 1`.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// A discrete law on `R^d`: atoms `z_k` with probabilities `p_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalPrior {
    atoms: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl TerminalPrior {
    pub fn new(atoms: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("prior", "at least one atom is required"));
        }
        if atoms.len() != probs.len() {
            return Err(invalid(
                "prior.probs",
                format!("{} atoms but {} probabilities", atoms.len(), probs.len()),
            ));
        }
        let dim = atoms[0].len();
        if dim == 0 {
            return Err(invalid("prior.atoms", "atoms must have at least one coordinate"));
        }
        if let Some(k) = atoms.iter().position(|a| a.len() != dim) {
            return Err(invalid("prior.atoms", format!("atom {k} has dimension {}, expected {dim}", atoms[k].len())));
        }
        if atoms.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("prior.atoms", "atoms must be finite"));
        }
        if let Some(k) = probs.iter().position(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(invalid("prior.probs", format!("probability {k} is {} (must be in [0, 1])", probs[k])));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(invalid("prior.probs", format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { atoms, probs })
    }

    /// One-dimensional prior.
    pub fn scalar(values: &[f64], probs: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect(), probs.to_vec())
    }

    /// Point mass at `z`.
    pub fn point(z: Vec<f64>) -> Result<Self> {
        Self::new(vec![z], vec![1.0])
    }

    /// Product of independent priors, atoms concatenated in order.
    pub fn product(parts: &[TerminalPrior]) -> Result<Self> {
        let mut atoms = vec![Vec::new()];
        let mut probs = vec![1.0];
        for part in parts {
            let mut na = Vec::with_capacity(atoms.len() * part.len());
            let mut np = Vec::with_capacity(atoms.len() * part.len());
            for (a, p) in atoms.iter().zip(&probs) {
                for (b, q) in part.atoms.iter().zip(&part.probs) {
                    let mut z = a.clone();
                    z.extend_from_slice(b);
                    na.push(z);
                    np.push(p * q);
                }
            }
            atoms = na;
            probs = np;
        }
        Self::new(atoms, probs)
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (z, p) in self.atoms.iter().zip(&self.probs) {
            for (mi, zi) in m.iter_mut().zip(z) {
                *mi += p * zi;
            }
        }
        m
    }

    /// Index of an atom drawn with probability `p_k`.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (k, p) in self.probs.iter().enumerate() {
            if *p > 0.0 {
                acc += p;
                last = k;
                if u < acc {
                    return k;
                }
            }
        }
        last
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &[f64] {
        &self.atoms[self.sample_index(rng)]
    }
}

/// Draws a terminal value from `prior`.
pub fn sample_terminal<R: Rng + ?Sized>(prior: &TerminalPrior, rng: &mut R) -> Vec<f64> {
    prior.sample(rng).to_vec()
}
