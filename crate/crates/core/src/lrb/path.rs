//! Path simulation under the real-world and auxiliary measures.

use rand::Rng;
use rayon::prelude::*;

use super::law::{check_terminal, LevyLaw};
use super::spec::{check_grid, AuxMode, BridgeSpec};
use crate::error::Result;
use crate::rng::{path_streams, split, StreamRng};

/// Measure a path was simulated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Real-world measure: terminal drawn from the prior, components pinned.
    P,
    /// Every component follows its generating Lévy process.
    L,
    /// As `L`, except components marked bridged-to-zero are standard bridges.
    M,
}

/// A simulated bridge path.
#[derive(Debug, Clone, PartialEq)]
pub struct LrbPath {
    pub grid: Vec<f64>,
    /// `states[k][i]` is component `i` at `grid[k]`.
    pub states: Vec<Vec<f64>>,
    /// Prior coordinates drawn for the path (real-world paths only).
    pub terminal: Option<Vec<f64>>,
    pub measure: Measure,
}

impl LrbPath {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k]
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

/// Path of the generating process bridged from 0 to `z` at `horizon`.
pub fn sample_bridge<R: Rng + ?Sized>(law: &LevyLaw, horizon: f64, z: f64, grid: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    check_grid(grid, horizon)?;
    check_terminal(law, horizon, z)?;
    Ok(bridge_unchecked(law, horizon, z, grid, rng))
}

/// Path of the free generating process.
pub fn sample_levy<R: Rng + ?Sized>(law: &LevyLaw, grid: &[f64], rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut x = 0.0;
    out.push(0.0);
    for w in grid.windows(2) {
        x += law.sample_increment(w[1] - w[0], rng);
        out.push(x);
    }
    out
}

fn bridge_unchecked<R: Rng + ?Sized>(law: &LevyLaw, horizon: f64, z: f64, grid: &[f64], rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut x = 0.0;
    out.push(0.0);
    for w in grid.windows(2) {
        let inc = law.sample_bridge_increment(w[1] - w[0], horizon - w[1], z - x, rng);
        x += inc;
        out.push(x);
    }
    out
}

impl BridgeSpec {
    /// Number of random streams one path consumes.
    pub fn stream_count(&self) -> usize {
        self.dim() + 1
    }

    /// Simulates one path, drawing from `rng`.
    pub fn simulate<R: Rng + ?Sized>(&self, measure: Measure, grid: &[f64], rng: &mut R) -> Result<LrbPath> {
        let mut streams = split(rng, self.stream_count());
        self.simulate_streams(measure, grid, &mut streams)
    }

    pub fn simulate_under_p<R: Rng + ?Sized>(&self, grid: &[f64], rng: &mut R) -> Result<LrbPath> {
        self.simulate(Measure::P, grid, rng)
    }

    pub fn simulate_under_l<R: Rng + ?Sized>(&self, grid: &[f64], rng: &mut R) -> Result<LrbPath> {
        self.simulate(Measure::L, grid, rng)
    }

    pub fn simulate_under_m<R: Rng + ?Sized>(&self, grid: &[f64], rng: &mut R) -> Result<LrbPath> {
        self.simulate(Measure::M, grid, rng)
    }

    /// Path number `path` of the batch keyed by `seed`.
    pub fn simulate_keyed(&self, measure: Measure, grid: &[f64], seed: u64, path: u64) -> Result<LrbPath> {
        let mut streams = path_streams(seed, path, self.stream_count());
        self.simulate_streams(measure, grid, &mut streams)
    }

    /// Simulates `n_paths` keyed paths in parallel and maps each through `f`.
    /// The output does not depend on the number of worker threads.
    pub fn map_paths<T, F>(&self, measure: Measure, grid: &[f64], seed: u64, n_paths: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&LrbPath) -> T + Sync,
    {
        check_grid(grid, self.horizon())?;
        (0..n_paths as u64)
            .into_par_iter()
            .map(|p| self.simulate_keyed(measure, grid, seed, p).map(|path| f(&path)))
            .collect()
    }

    pub fn simulate_batch(&self, measure: Measure, grid: &[f64], seed: u64, n_paths: usize) -> Result<Vec<LrbPath>> {
        self.map_paths(measure, grid, seed, n_paths, Clone::clone)
    }

    fn simulate_streams(&self, measure: Measure, grid: &[f64], streams: &mut [StreamRng]) -> Result<LrbPath> {
        let horizon = self.horizon();
        check_grid(grid, horizon)?;
        let d = self.dim();
        let n = grid.len();

        let terminal = match measure {
            Measure::P => {
                let mut x = vec![0.0; d];
                for block in self.blocks() {
                    let z = block.prior.sample(&mut streams[0]);
                    for (pos, &c) in block.components.iter().enumerate() {
                        x[c] = z[pos];
                    }
                }
                Some(x)
            }
            _ => None,
        };

        let mut series: Vec<Vec<f64>> = Vec::with_capacity(d);
        for (i, comp) in self.components().iter().enumerate() {
            let rng = &mut streams[i + 1];
            let pinned = match measure {
                Measure::P => true,
                Measure::L => false,
                Measure::M => comp.aux == AuxMode::BridgeToZero,
            };
            let path = if comp.law.is_brownian() {
                // noise only; the information drift is added after mixing
                if pinned {
                    bridge_unchecked(&comp.law, horizon, 0.0, grid, rng)
                } else {
                    sample_levy(&comp.law, grid, rng)
                }
            } else if pinned {
                let z = terminal.as_ref().expect("real-world terminal")[i];
                bridge_unchecked(&comp.law, horizon, z, grid, rng)
            } else {
                sample_levy(&comp.law, grid, rng)
            };
            series.push(path);
        }

        if let Some(l) = &self.chol {
            let nb = self.brownian.len();
            let mut raw = vec![0.0; nb];
            for k in 0..n {
                for (a, &c) in self.brownian.iter().enumerate() {
                    raw[a] = series[c][k];
                }
                for (a, &c) in self.brownian.iter().enumerate() {
                    series[c][k] = (0..=a).map(|b| l[(a, b)] * raw[b]).sum();
                }
            }
        }

        if let Some(x) = &terminal {
            for (i, comp) in self.components().iter().enumerate() {
                if let Some(sigma) = comp.sigma {
                    for (v, &t) in series[i].iter_mut().zip(grid) {
                        *v += sigma * t * x[i];
                    }
                }
            }
        }

        let states = (0..n).map(|k| series.iter().map(|s| s[k]).collect()).collect();
        Ok(LrbPath {
            grid: grid.to_vec(),
            states,
            terminal,
            measure,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrb::{Component, TerminalPrior};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn paths_start_at_zero_and_subordinators_increase() {
        let comps = vec![
            Component::information(0.7),
            Component::subordinator(LevyLaw::Gamma { m: 1.5 }),
            Component::subordinator(LevyLaw::StableHalf { alpha: 0.8 }),
        ];
        let prior = TerminalPrior::new(vec![vec![1.0, 2.0, 0.5], vec![-1.0, 4.0, 3.0]], vec![0.4, 0.6]).unwrap();
        let spec = BridgeSpec::new(2.0, comps, prior).unwrap();
        let grid: Vec<f64> = (0..50).map(|k| k as f64 * 0.039).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for measure in [Measure::P, Measure::L, Measure::M] {
            for _ in 0..50 {
                let p = spec.simulate(measure, &grid, &mut rng).unwrap();
                assert!(p.state(0).iter().all(|&v| v == 0.0));
                for i in [1, 2] {
                    let c = p.component(i);
                    assert!(c.windows(2).all(|w| w[1] >= w[0]));
                    if let Some(z) = &p.terminal {
                        assert!(*c.last().unwrap() <= z[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn brownian_pinning_near_horizon() {
        let spec = BridgeSpec::single(1.0, Component::information(2.0), TerminalPrior::scalar(&[1.5], &[1.0]).unwrap()).unwrap();
        let grid = [0.0, 0.5, 0.999_99];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = spec.simulate_under_p(&grid, &mut rng).unwrap();
        assert!((p.states[2][0] - 2.0 * 1.0 * 1.5).abs() < 0.02);
    }

    #[test]
    fn keyed_batches_are_reproducible() {
        let spec = BridgeSpec::single(1.0, Component::information(1.0), TerminalPrior::scalar(&[0.0, 1.0], &[0.5, 0.5]).unwrap()).unwrap();
        let grid = [0.0, 0.25, 0.5];
        let a = spec.simulate_batch(Measure::P, &grid, 9, 20).unwrap();
        let b = spec.simulate_batch(Measure::P, &grid, 9, 20).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[7], spec.simulate_keyed(Measure::P, &grid, 9, 7).unwrap());
    }

    #[test]
    fn bridge_rejects_outside_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_bridge(&LevyLaw::Gamma { m: 1.0 }, 1.0, -1.0, &[0.0, 0.5], &mut rng).is_err());
        assert!(sample_bridge(&LevyLaw::BrownianUnit, 1.0, 1.0, &[], &mut rng).is_err());
    }
}
