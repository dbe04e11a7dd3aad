//! Posteriors and densities between the real-world and auxiliary measures.

use super::path::{LrbPath, Measure};
use super::spec::BridgeSpec;
use crate::error::{invalid, Error, Result};
use crate::numerics::log_sum_exp;

impl BridgeSpec {
    /// `ln[ρ_{U-t}(z_k - L_t) / ρ_U(z_k)]` for atom `k` of block `b`.
    fn atom_log_ratio(&self, b: usize, k: usize, t: f64, state: &[f64]) -> f64 {
        let u = self.horizon();
        let s = u - t;
        let block = &self.blocks()[b];
        let z = &block.prior.atoms()[k];
        let mut acc = 0.0;
        for (pos, &c) in block.components.iter().enumerate() {
            let law = &self.component(c).law;
            if !law.is_brownian() {
                acc += law.log_density(s, z[pos] - state[c]) - law.log_density(u, z[pos]);
            }
        }
        if let Some(g) = &self.block_gauss[b] {
            let pinned = |c: usize| self.component(c).pinned_terminal(u, z[self.slot_of[c].1]);
            let q_num = g.quad(|c| pinned(c) - state[c]);
            let q_den = g.quad(pinned);
            acc += -0.5 * q_num / s + 0.5 * q_den / u - 0.5 * g.idx.len() as f64 * (s / u).ln();
        }
        acc
    }

    /// Unnormalized log posterior weights of block `b`.
    fn block_log_weights(&self, b: usize, t: f64, state: &[f64]) -> Vec<f64> {
        let prior = &self.blocks()[b].prior;
        prior
            .probs()
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                if p > 0.0 {
                    p.ln() + self.atom_log_ratio(b, k, t, state)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect()
    }

    fn check_eval(&self, t: f64, state: &[f64]) -> Result<()> {
        self.check_time(t)?;
        self.check_state(state)
    }

    /// Posterior atom probabilities per prior block.
    pub fn posterior(&self, t: f64, state: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_eval(t, state)?;
        (0..self.blocks().len())
            .map(|b| {
                let lw = self.block_log_weights(b, t, state);
                let norm = log_sum_exp(lw.iter().copied());
                if !norm.is_finite() {
                    return Err(Error::Singular { t });
                }
                Ok(lw.iter().map(|w| (w - norm).exp()).collect())
            })
            .collect()
    }

    /// Conditional mean of every terminal coordinate given `L_t = state`.
    pub fn bayes_estimate(&self, t: f64, state: &[f64]) -> Result<Vec<f64>> {
        let post = self.posterior(t, state)?;
        let mut m = vec![0.0; self.dim()];
        for (block, q) in self.blocks().iter().zip(&post) {
            for (z, qk) in block.prior.atoms().iter().zip(q) {
                for (pos, &c) in block.components.iter().enumerate() {
                    m[c] += qk * z[pos];
                }
            }
        }
        Ok(m)
    }

    /// `ln(dℙ/d𝕃)` on the information available at `t`.
    pub fn log_ell_inv(&self, t: f64, state: &[f64]) -> Result<f64> {
        self.check_eval(t, state)?;
        let mut acc = 0.0;
        for b in 0..self.blocks().len() {
            let v = log_sum_exp(self.block_log_weights(b, t, state));
            if !v.is_finite() {
                return Err(Error::Singular { t });
            }
            acc += v;
        }
        Ok(acc)
    }

    /// `ℓ_t = d𝕃/dℙ` restricted to the information at `t`.
    pub fn ell(&self, t: f64, state: &[f64]) -> Result<f64> {
        Ok((-self.log_ell_inv(t, state)?).exp())
    }

    /// `ln(d𝕄/d𝕃)`: the bridged-to-zero components' density ratio.
    fn log_bridge_ratio(&self, t: f64, state: &[f64]) -> f64 {
        match &self.bridge_gauss {
            None => 0.0,
            Some(g) => {
                let u = self.horizon();
                let s = u - t;
                -0.5 * g.quad(|c| state[c]) / s - 0.5 * g.idx.len() as f64 * (s / u).ln()
            }
        }
    }

    /// `ln(dℙ/dQ)` on the information at `t`, for `Q` the given measure.
    pub fn log_density_ratio(&self, measure: Measure, t: f64, state: &[f64]) -> Result<f64> {
        match measure {
            Measure::P => {
                self.check_eval(t, state)?;
                Ok(0.0)
            }
            Measure::L => self.log_ell_inv(t, state),
            Measure::M => Ok(self.log_ell_inv(t, state)? - self.log_bridge_ratio(t, state)),
        }
    }

    /// `M_t = d𝕄/dℙ` restricted to the information at `t`.
    pub fn m_density(&self, t: f64, state: &[f64]) -> Result<f64> {
        Ok((-self.log_density_ratio(Measure::M, t, state)?).exp())
    }

    /// `d(measure)/dℙ` at `t`: the weight turning real-world expectations of
    /// auxiliary martingales into martingales.
    pub fn aux_weight(&self, measure: Measure, t: f64, state: &[f64]) -> Result<f64> {
        Ok((-self.log_density_ratio(measure, t, state)?).exp())
    }
}

/// Increments of the real-world Brownian motion driving component `i`:
/// `ΔW = ΔL - (σU E[X|L] - L) Δt / (U - t)`.
pub fn innovation_increments(spec: &BridgeSpec, path: &LrbPath, i: usize) -> Result<Vec<f64>> {
    let comp = spec
        .components()
        .get(i)
        .ok_or_else(|| invalid("component", format!("index {i} out of range")))?;
    let sigma = comp
        .sigma
        .ok_or_else(|| Error::Unsupported(format!("component {i} is not a Brownian information process")))?;
    let u = spec.horizon();
    let mut out = Vec::with_capacity(path.len().saturating_sub(1));
    for k in 0..path.len().saturating_sub(1) {
        let t = path.grid[k];
        let dt = path.grid[k + 1] - t;
        let l = path.states[k][i];
        let est = spec.bayes_estimate(t, &path.states[k])?[i];
        out.push(path.states[k + 1][i] - l - (sigma * u * est - l) / (u - t) * dt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrb::{Component, CorrelationSpec, LevyLaw, PriorBlock, TerminalPrior};

    fn brownian(sigma: f64, xs: &[f64], ps: &[f64]) -> BridgeSpec {
        BridgeSpec::single(2.0, Component::information(sigma), TerminalPrior::scalar(xs, ps).unwrap()).unwrap()
    }

    #[test]
    fn time_zero_is_neutral() {
        let spec = brownian(0.5, &[0.0, 1.0, 3.0], &[0.2, 0.5, 0.3]);
        assert_eq!(spec.ell(0.0, &[0.0]).unwrap(), 1.0);
        let q = &spec.posterior(0.0, &[0.0]).unwrap()[0];
        for (a, b) in q.iter().zip([0.2, 0.5, 0.3]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((spec.bayes_estimate(0.0, &[0.0]).unwrap()[0] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn brownian_weights_match_closed_form() {
        let (sigma, u) = (0.7, 2.0);
        let xs = [-1.0, 0.0, 0.5, 2.0];
        let ps = [0.1, 0.4, 0.3, 0.2];
        let spec = brownian(sigma, &xs, &ps);
        for &(t, l) in &[(0.3, 0.2), (1.1, -0.9), (1.9, 2.3)] {
            let q = &spec.posterior(t, &[l]).unwrap()[0];
            let w: Vec<f64> = xs
                .iter()
                .zip(&ps)
                .map(|(x, p)| p * ((u / (u - t)) * (sigma * x * l - 0.5 * sigma * sigma * x * x * t)).exp())
                .collect();
            let total: f64 = w.iter().sum();
            for (a, b) in q.iter().zip(&w) {
                assert!((a - b / total).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn m_density_for_bridged_component() {
        let (sigma, u) = (0.7, 2.0);
        let xs = [-1.0, 0.5, 2.0];
        let ps = [0.3, 0.3, 0.4];
        let spec = BridgeSpec::single(
            u,
            Component::information(sigma).bridged_to_zero(),
            TerminalPrior::scalar(&xs, &ps).unwrap(),
        )
        .unwrap();
        let (t, l) = (0.8, 0.35);
        let total: f64 = xs
            .iter()
            .zip(&ps)
            .map(|(x, p)| p * ((u / (u - t)) * (sigma * x * l - 0.5 * sigma * sigma * x * x * t)).exp())
            .sum();
        assert!((spec.m_density(t, &[l]).unwrap() * total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_atom_subordinator_ratio() {
        let law = LevyLaw::Gamma { m: 1.3 };
        let spec = BridgeSpec::single(3.0, Component::subordinator(law), TerminalPrior::scalar(&[2.5], &[1.0]).unwrap()).unwrap();
        let (t, l) = (1.2, 0.9);
        let expect = law.density(1.8, 1.6).unwrap() / law.density(3.0, 2.5).unwrap();
        assert!((1.0 / spec.ell(t, &[l]).unwrap() - expect).abs() < 1e-12 * expect);
        assert_eq!(spec.posterior(t, &[l]).unwrap()[0], vec![1.0]);
        assert_eq!(spec.bayes_estimate(t, &[l]).unwrap(), vec![2.5]);
    }

    #[test]
    fn subordinator_beyond_all_atoms_is_singular() {
        let spec = BridgeSpec::single(
            3.0,
            Component::subordinator(LevyLaw::Gamma { m: 1.0 }),
            TerminalPrior::scalar(&[1.0, 2.0], &[0.5, 0.5]).unwrap(),
        )
        .unwrap();
        assert!(matches!(spec.ell(1.0, &[2.5]), Err(Error::Singular { .. })));
        assert!(spec.posterior(1.0, &[1.5]).is_ok());
        assert!(spec.ell(3.0, &[0.0]).is_err());
    }

    #[test]
    fn correlated_weights_use_inverse_correlation() {
        let rho = 0.6;
        let comps = vec![Component::information(0.5), Component::information(0.8)];
        let prior = TerminalPrior::new(vec![vec![1.0, -1.0], vec![0.0, 2.0], vec![0.5, 0.5]], vec![0.2, 0.5, 0.3]).unwrap();
        let corr = CorrelationSpec::new(vec![vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let spec = BridgeSpec::with_blocks(
            2.0,
            comps,
            vec![PriorBlock { components: vec![0, 1], prior: prior.clone() }],
            Some(corr),
        )
        .unwrap();
        let (u, t, l) = (2.0, 0.7, [0.3, -0.4]);
        let det = 1.0 - rho * rho;
        let qf = |a: [f64; 2], b: [f64; 2]| (a[0] * b[0] + a[1] * b[1] - rho * (a[0] * b[1] + a[1] * b[0])) / det;
        let w: Vec<f64> = prior
            .atoms()
            .iter()
            .zip(prior.probs())
            .map(|(z, p)| {
                let h = [0.5 * z[0], 0.8 * z[1]];
                p * ((u / (u - t)) * (qf(h, l) - 0.5 * t * qf(h, h))).exp()
            })
            .collect();
        let total: f64 = w.iter().sum();
        let q = &spec.posterior(t, &l).unwrap()[0];
        for (a, b) in q.iter().zip(&w) {
            assert!((a - b / total).abs() < 1e-12);
        }
    }

    #[test]
    fn innovation_rejects_subordinators() {
        let spec = BridgeSpec::single(
            1.0,
            Component::subordinator(LevyLaw::Gamma { m: 1.0 }),
            TerminalPrior::scalar(&[1.0], &[1.0]).unwrap(),
        )
        .unwrap();
        let path = LrbPath {
            grid: vec![0.0, 0.5],
            states: vec![vec![0.0], vec![0.2]],
            terminal: None,
            measure: Measure::P,
        };
        assert!(innovation_increments(&spec, &path, 0).is_err());
    }
}
