//! Multivariate bridge configurations.

use nalgebra::DMatrix;

use super::law::{check_terminal, LevyLaw};
use super::prior::TerminalPrior;
use crate::error::{invalid, Error, Result};

/// Relative guard keeping evaluation times away from the horizon.
pub const HORIZON_GUARD: f64 = 1e-6;

/// Law of a Brownian component under the auxiliary measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AuxMode {
    /// The raw generating Lévy process.
    #[default]
    Levy,
    /// A standard Brownian bridge to zero.
    BridgeToZero,
}

/// One coordinate of the bridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub law: LevyLaw,
    /// Information-flow rate; present exactly for Brownian components.
    pub sigma: Option<f64>,
    pub aux: AuxMode,
}

impl Component {
    /// Brownian information process `σ t X + β_t`.
    pub fn information(sigma: f64) -> Self {
        Self {
            law: LevyLaw::BrownianUnit,
            sigma: Some(sigma),
            aux: AuxMode::Levy,
        }
    }

    /// Subordinator bridge pinned directly at its terminal value.
    pub fn subordinator(law: LevyLaw) -> Self {
        Self {
            law,
            sigma: None,
            aux: AuxMode::Levy,
        }
    }

    pub fn bridged_to_zero(mut self) -> Self {
        self.aux = AuxMode::BridgeToZero;
        self
    }

    /// Terminal value of the pinned process for the prior coordinate `x`.
    pub fn pinned_terminal(&self, horizon: f64, x: f64) -> f64 {
        match self.sigma {
            Some(s) => s * horizon * x,
            None => x,
        }
    }
}

/// Components sharing one joint atom table; distinct blocks are independent
/// a priori.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorBlock {
    pub components: Vec<usize>,
    pub prior: TerminalPrior,
}

/// Correlation matrix of the Brownian drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec {
    matrix: DMatrix<f64>,
}

impl CorrelationSpec {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(invalid("correlation", "matrix must be square and non-empty"));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        for i in 0..n {
            if matrix[(i, i)] != 1.0 {
                return Err(invalid("correlation", format!("diagonal entry {i} must be 1")));
            }
            for j in 0..n {
                let r = matrix[(i, j)];
                if r != matrix[(j, i)] {
                    return Err(invalid("correlation", format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
                if i != j && !(-1.0..1.0).contains(&r) {
                    return Err(invalid("correlation", format!("entry ({i},{j}) = {r} outside [-1, 1)")));
                }
            }
        }
        let min_eig = matrix.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-12 {
            return Err(invalid("correlation", format!("not positive semidefinite (eigenvalue {min_eig})")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Brownian coordinates with the inverse of their correlation block.
#[derive(Debug, Clone)]
pub(crate) struct GaussPart {
    pub idx: Vec<usize>,
    pub inv: DMatrix<f64>,
}

impl GaussPart {
    fn new(idx: Vec<usize>, corr: Option<&CorrelationSpec>) -> Result<Option<Self>> {
        if idx.is_empty() {
            return Ok(None);
        }
        let n = idx.len();
        let inv = match corr {
            None => DMatrix::identity(n, n),
            Some(c) => {
                let sub = DMatrix::from_fn(n, n, |a, b| c.rho(idx[a], idx[b]));
                sub.cholesky()
                    .ok_or_else(|| invalid("correlation", "Brownian correlation block is singular"))?
                    .inverse()
            }
        };
        Ok(Some(Self { idx, inv }))
    }

    /// `vᵀ C⁻¹ v` for `v_a = f(idx[a])`.
    pub fn quad<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        let v: Vec<f64> = self.idx.iter().map(|&i| f(i)).collect();
        let n = v.len();
        let mut s = 0.0;
        for a in 0..n {
            let mut row = 0.0;
            for b in 0..n {
                row += self.inv[(a, b)] * v[b];
            }
            s += v[a] * row;
        }
        s
    }
}

/// A `d`-dimensional Lévy random bridge on `[0, U]`.
#[derive(Debug, Clone)]
pub struct BridgeSpec {
    horizon: f64,
    components: Vec<Component>,
    blocks: Vec<PriorBlock>,
    correlation: Option<CorrelationSpec>,
    /// `(block, position)` of each component.
    pub(crate) slot_of: Vec<(usize, usize)>,
    pub(crate) block_gauss: Vec<Option<GaussPart>>,
    pub(crate) bridge_gauss: Option<GaussPart>,
    /// Lower Cholesky factor of the Brownian correlation, in `brownian` order.
    pub(crate) chol: Option<DMatrix<f64>>,
    pub(crate) brownian: Vec<usize>,
}

impl BridgeSpec {
    /// All components share one joint prior.
    pub fn new(horizon: f64, components: Vec<Component>, prior: TerminalPrior) -> Result<Self> {
        let all = (0..components.len()).collect();
        Self::with_blocks(horizon, components, vec![PriorBlock { components: all, prior }], None)
    }

    /// One-dimensional bridge.
    pub fn single(horizon: f64, component: Component, prior: TerminalPrior) -> Result<Self> {
        Self::new(horizon, vec![component], prior)
    }

    pub fn with_blocks(
        horizon: f64,
        components: Vec<Component>,
        blocks: Vec<PriorBlock>,
        correlation: Option<CorrelationSpec>,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be positive, got {horizon}")));
        }
        let d = components.len();
        if d == 0 {
            return Err(invalid("components", "at least one component is required"));
        }
        for (i, c) in components.iter().enumerate() {
            c.law.validate()?;
            match (c.law.is_brownian(), c.sigma) {
                (true, Some(s)) if s > 0.0 && s.is_finite() => {}
                (true, _) => {
                    return Err(invalid("sigma", format!("component {i}: information rate must be positive")))
                }
                (false, Some(_)) => {
                    return Err(invalid("sigma", format!("component {i}: only Brownian components carry a rate")))
                }
                (false, None) => {}
            }
            if !c.law.is_brownian() && c.aux == AuxMode::BridgeToZero {
                return Err(invalid("aux", format!("component {i}: only Brownian components can be bridged to zero")));
            }
        }

        let mut slot_of = vec![(usize::MAX, 0); d];
        for (b, block) in blocks.iter().enumerate() {
            if block.prior.dim() != block.components.len() {
                return Err(Error::Dimension {
                    expected: block.components.len(),
                    got: block.prior.dim(),
                });
            }
            for (pos, &c) in block.components.iter().enumerate() {
                if c >= d {
                    return Err(invalid("blocks", format!("component index {c} out of range")));
                }
                if slot_of[c].0 != usize::MAX {
                    return Err(invalid("blocks", format!("component {c} appears in two blocks")));
                }
                slot_of[c] = (b, pos);
            }
            for z in block.prior.atoms() {
                for (pos, &c) in block.components.iter().enumerate() {
                    let comp = &components[c];
                    if !comp.law.is_brownian() {
                        check_terminal(&comp.law, horizon, z[pos])?;
                    }
                }
            }
        }
        if let Some(c) = slot_of.iter().position(|s| s.0 == usize::MAX) {
            return Err(invalid("blocks", format!("component {c} has no prior")));
        }

        if let Some(corr) = &correlation {
            if corr.dim() != d {
                return Err(Error::Dimension {
                    expected: d,
                    got: corr.dim(),
                });
            }
            for i in 0..d {
                for j in 0..d {
                    if i == j || corr.rho(i, j) == 0.0 {
                        continue;
                    }
                    let (ci, cj) = (&components[i], &components[j]);
                    if !ci.law.is_brownian() || !cj.law.is_brownian() {
                        return Err(invalid("correlation", format!("components {i} and {j}: only Brownian drivers may correlate")));
                    }
                    if slot_of[i].0 != slot_of[j].0 || ci.aux != cj.aux {
                        return Err(invalid(
                            "correlation",
                            format!("components {i} and {j} correlate but differ in prior block or auxiliary law"),
                        ));
                    }
                }
            }
        }

        let corr = correlation.as_ref();
        let block_gauss = blocks
            .iter()
            .map(|b| {
                let idx = b.components.iter().copied().filter(|&c| components[c].law.is_brownian()).collect();
                GaussPart::new(idx, corr)
            })
            .collect::<Result<Vec<_>>>()?;
        let bridge_idx = (0..d).filter(|&c| components[c].aux == AuxMode::BridgeToZero).collect();
        let bridge_gauss = GaussPart::new(bridge_idx, corr)?;
        let brownian: Vec<usize> = (0..d).filter(|&c| components[c].law.is_brownian()).collect();
        let chol = match corr {
            Some(c) if !brownian.is_empty() => {
                let n = brownian.len();
                let sub = DMatrix::from_fn(n, n, |a, b| c.rho(brownian[a], brownian[b]));
                Some(
                    sub.cholesky()
                        .ok_or_else(|| invalid("correlation", "Brownian correlation is singular"))?
                        .l(),
                )
            }
            _ => None,
        };

        Ok(Self {
            horizon,
            components,
            blocks,
            correlation,
            slot_of,
            block_gauss,
            bridge_gauss,
            chol,
            brownian,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Component {
        &self.components[i]
    }

    pub fn blocks(&self) -> &[PriorBlock] {
        &self.blocks
    }

    pub fn correlation(&self) -> Option<&CorrelationSpec> {
        self.correlation.as_ref()
    }

    /// Prior mean of every component's terminal coordinate.
    pub fn prior_mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for b in &self.blocks {
            for (pos, v) in b.prior.mean().into_iter().enumerate() {
                m[b.components[pos]] = v;
            }
        }
        m
    }

    /// Largest admissible evaluation time.
    pub fn max_time(&self) -> f64 {
        self.horizon * (1.0 - HORIZON_GUARD)
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.max_time()).contains(&t) {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange { t, horizon: self.horizon })
        }
    }

    pub(crate) fn check_state(&self, state: &[f64]) -> Result<()> {
        if state.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.dim(),
                got: state.len(),
            })
        }
    }

    /// Checks a simulation grid: starts at 0, strictly increasing, below the
    /// horizon guard.
    pub fn check_grid(&self, grid: &[f64]) -> Result<()> {
        check_grid(grid, self.horizon)
    }
}

pub(crate) fn check_grid(grid: &[f64], horizon: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("grid", "grid is empty"));
    }
    if grid[0] != 0.0 {
        return Err(invalid("grid", format!("grid must start at 0, starts at {}", grid[0])));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(invalid("grid", format!("grid not strictly increasing at {}", w[1])));
    }
    let last = *grid.last().expect("non-empty");
    if last > horizon * (1.0 - HORIZON_GUARD) {
        return Err(Error::TimeOutOfRange { t: last, horizon });
    }
    Ok(())
}

/// `n + 1` equally spaced points on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}
