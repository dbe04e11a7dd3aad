//! The verification suite behind `heatkernel verify`: calibration, par,
//! martingale, option, quadrature, rate, SDE, Lévy-law and contagion checks.
//!
//! Every check reports its statistic and threshold. Errors raised while a
//! check runs are reported as failures of that check.

mod catalog;
mod criteria;

use serde::Serialize;

pub use catalog::{catalog, gaussian_bridge, matched_bridge, matched_prior, CatalogModel, CATALOG_HORIZON};
pub use criteria::{
    bond_martingale, calibration, closed_form_vs_mc, contagion, heat_kernel, levy_laws, martingales, pull_to_par,
    rates, sde_consistency, supermartingale,
};

use crate::error::{invalid, Error, Result};
use crate::scenario::ScenarioConfig;

/// Criterion titles, indexed from 1.
pub const CRITERIA: [&str; 10] = [
    "curve calibration",
    "pull to par",
    "martingale suite",
    "supermartingale",
    "closed form vs Monte Carlo",
    "heat kernel quadrature",
    "rates consistency",
    "SDE consistency",
    "Levy law fidelity",
    "contagion baseline",
];

/// Thresholds of the checks; each can be overridden by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Standard errors allowed between a Monte Carlo mean and its target.
    pub n_se: f64,
    pub calibration: f64,
    pub par: f64,
    pub y_closed: f64,
    pub y_fourier: f64,
    pub rates: f64,
    pub euler_rms: f64,
    pub ks_p: f64,
    pub stable_norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            n_se: 3.0,
            calibration: 1e-12,
            par: 1e-12,
            y_closed: 1e-6,
            y_fourier: 1e-5,
            rates: 1e-6,
            euler_rms: 0.01,
            ks_p: 0.01,
            stable_norm: 1e-8,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 9] = [
        "n_se",
        "calibration",
        "par",
        "y_closed",
        "y_fourier",
        "rates",
        "euler_rms",
        "ks_p",
        "stable_norm",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid("tolerance", format!("{name} must be positive, got {value}")));
        }
        let slot = match name {
            "n_se" => &mut self.n_se,
            "calibration" => &mut self.calibration,
            "par" => &mut self.par,
            "y_closed" => &mut self.y_closed,
            "y_fourier" => &mut self.y_fourier,
            "rates" => &mut self.rates,
            "euler_rms" => &mut self.euler_rms,
            "ks_p" => &mut self.ks_p,
            "stable_norm" => &mut self.stable_norm,
            _ => {
                return Err(invalid(
                    "tolerance",
                    format!("unknown name {name}; expected one of {}", Self::NAMES.join(", ")),
                ))
            }
        };
        *slot = value;
        Ok(())
    }
}

/// Sample sizes, seed and scenario of a verification run.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Paths of the martingale and supermartingale checks.
    pub paths: usize,
    /// Paths per option price.
    pub option_paths: usize,
    /// Paths of the SDE checks.
    pub sde_paths: usize,
    /// Samples per Kolmogorov–Smirnov test.
    pub ks_samples: usize,
    pub tol: Tolerances,
    /// Negative control: price bonds with the sign of `b` flipped.
    pub break_b_sign: bool,
    pub scenario: ScenarioConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            paths: 100_000,
            option_paths: 1_000_000,
            sde_paths: 1_000,
            ks_samples: 10_000,
            tol: Tolerances::default(),
            break_b_sign: false,
            scenario: ScenarioConfig::paper_baseline(),
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub criterion: usize,
    pub name: String,
    pub statistic: f64,
    /// How the statistic is compared with the threshold.
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `statistic < threshold`.
    pub fn below(criterion: usize, name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            statistic,
            relation: "<",
            threshold,
            pass: statistic < threshold,
            detail: String::new(),
        }
    }

    /// Passes when `statistic >= threshold`.
    pub fn at_least(criterion: usize, name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            statistic,
            relation: ">=",
            threshold,
            pass: statistic >= threshold,
            detail: String::new(),
        }
    }

    /// Passes when `statistic <= threshold`.
    pub fn at_most(criterion: usize, name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            relation: "<=",
            pass: statistic <= threshold,
            ..Self::below(criterion, name, statistic, threshold)
        }
    }

    pub fn failed(criterion: usize, name: impl Into<String>, error: &Error) -> Self {
        Self {
            criterion,
            name: name.into(),
            statistic: f64::NAN,
            relation: "error",
            threshold: f64::NAN,
            pass: false,
            detail: error.to_string(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// One human-readable line.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        if self.relation == "error" {
            return format!("{verdict} [{}] {}: {}", self.criterion, self.name, self.detail);
        }
        let mut s = format!(
            "{verdict} [{}] {}: {:.3e} {} {:.3e}",
            self.criterion, self.name, self.statistic, self.relation, self.threshold
        );
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

/// Runs `f`, turning an error into a single failed check.
pub(crate) fn guard(criterion: usize, name: &str, f: impl FnOnce() -> Result<Vec<Check>>) -> Vec<Check> {
    f().unwrap_or_else(|e| vec![Check::failed(criterion, name, &e)])
}

/// All checks of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Checks belonging to criterion `c`.
    pub fn criterion(&self, c: usize) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |k| k.criterion == c)
    }
}

/// Runs one criterion by number.
pub fn run_criterion(c: usize, opts: &VerifyOptions) -> Vec<Check> {
    match c {
        1 => calibration(opts),
        2 => pull_to_par(opts),
        3 => {
            let mut v = martingales(opts);
            v.extend(bond_martingale(opts));
            v
        }
        4 => supermartingale(opts),
        5 => closed_form_vs_mc(opts),
        6 => heat_kernel(opts),
        7 => rates(opts),
        8 => sde_consistency(opts),
        9 => levy_laws(opts),
        10 => contagion(opts),
        _ => vec![Check::failed(0, "criterion", &invalid("criterion", format!("no criterion {c}")))],
    }
}

/// Runs every criterion.
pub fn run_all(opts: &VerifyOptions) -> Report {
    Report {
        seed: opts.seed,
        checks: (1..=CRITERIA.len()).flat_map(|c| run_criterion(c, opts)).collect(),
    }
}
