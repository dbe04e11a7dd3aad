//! Pricing kernels built from rational functions of bridge information.

mod factor;
mod heat;
mod model;
mod timefn;

pub use factor::{FactorKind, RationalFactorModel, Shape, ShapeValue};
pub use heat::{y_fourier, y_quadrature, HeatFactor, HeatKernelSpec, StateFn, FOURIER_CUTOFF, FOURIER_IMAG_TOL};
pub use model::{calibrate_f0, CalibratedF0, Coefficient, KernelModel, KernelTerm, ModelCurve, MONOTONE_CHECK_STEPS};
pub use timefn::{check_positive_non_increasing, d1, Constant, ExpDecay, F0F1Family, FnTime, InverseLog, SharedFn, TimeFn};
