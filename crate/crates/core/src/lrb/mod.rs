//! Multivariate Lévy random bridges: laws, priors, samplers, posteriors and
//! the densities linking the real-world and auxiliary measures.

pub(crate) mod law;
mod measure;
mod path;
mod prior;
mod spec;

pub use law::LevyLaw;
pub use measure::innovation_increments;
pub use path::{sample_bridge, sample_levy, LrbPath, Measure};
pub use prior::{sample_terminal, TerminalPrior, PROB_SUM_TOL};
pub use spec::{uniform_grid, AuxMode, BridgeSpec, Component, CorrelationSpec, PriorBlock, HORIZON_GUARD};
