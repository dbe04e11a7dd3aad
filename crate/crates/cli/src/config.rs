//! Strict TOML configuration: every section mirrors an engine type and is
//! validated against that type's invariants.

use std::collections::BTreeMap;
use std::path::Path;

use heatkernel::kernel::{F0F1Family, FactorKind, KernelModel, RationalFactorModel};
use heatkernel::lrb::{BridgeSpec, Component, TerminalPrior};
use heatkernel::pricing::{BondModel, ClosedFormKind, Instrument};
use heatkernel::scenario::{CountrySpec, ExposureMatrix, ScenarioConfig};
use serde::Deserialize;

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema: u32,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub model: Option<ModelSection>,
    pub curve: Option<CurveSection>,
    pub price: Option<PriceSection>,
    pub simulate: Option<SimulateSection>,
    pub contagion: Option<ContagionSection>,
    pub verify: Option<VerifySection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSection {
    pub atoms: Vec<f64>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Quadratic,
    ExpQuadratic,
}

/// One-factor Brownian model: information process bridged to zero under
/// the auxiliary measure.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub horizon: f64,
    pub sigma: f64,
    pub eta: Option<f64>,
    pub f0f1: FamilySection,
    pub prior: PriorSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceSection {
    pub instruments: Vec<InstrumentSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstrumentSection {
    Bond { maturity: f64 },
    Caplet { expiry: f64, maturity: f64, strike: f64 },
    Swaption { expiry: f64, resets: Vec<f64>, strike: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub maturity: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountrySection {
    pub name: String,
    pub sigma: f64,
    pub a: f64,
    #[serde(default = "default_own_loading")]
    pub own_loading: f64,
    pub f0f1: FamilySection,
    pub brownian_prior: PriorSection,
    pub debt_prior: PriorSection,
}

fn default_own_loading() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContagionSection {
    pub horizon: f64,
    pub maturity: f64,
    pub steps: usize,
    pub n_sources: usize,
    pub base: String,
    /// Rows are exposed countries, columns the debt they load.
    pub exposures: Vec<Vec<f64>>,
    /// Gamma activity of each country's debt; 1 when absent.
    pub rates: Option<Vec<f64>>,
    pub countries: Vec<CountrySection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default)]
    pub break_b_sign: bool,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

fn at(path: &str) -> impl Fn(heatkernel::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{path}: {e}"))
}

pub fn parse_config(text: &str) -> Result<FileConfig, CliError> {
    let cfg: FileConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if cfg.schema != SCHEMA {
        return Err(CliError::Config(format!("schema: unsupported version {} (expected {SCHEMA})", cfg.schema)));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and fully validates a configuration file.
pub fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl FamilySection {
    pub fn build(&self, path: &str) -> Result<F0F1Family, CliError> {
        F0F1Family::new(self.alpha, self.beta, self.gamma).map_err(at(path))
    }
}

impl PriorSection {
    pub fn build(&self, path: &str) -> Result<TerminalPrior, CliError> {
        TerminalPrior::scalar(&self.atoms, &self.probs).map_err(at(path))
    }
}

impl FileConfig {
    /// Checks every section that is present.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.paths == Some(0) {
            return Err(CliError::Config("paths: must be at least 1".into()));
        }
        if let Some(m) = &self.model {
            m.bond()?;
            if let Some(p) = &self.price {
                p.instruments(m)?;
            }
            if let Some(s) = &self.simulate {
                if !(s.maturity > 0.0 && s.maturity < m.horizon) || s.steps == 0 {
                    return Err(CliError::Config("simulate: need 0 < maturity < model.horizon and steps >= 1".into()));
                }
            }
        }
        if let Some(c) = &self.contagion {
            c.scenario(0, 1)?;
        }
        if let Some(v) = &self.verify {
            let mut tol = heatkernel::verify::Tolerances::default();
            for (name, value) in &v.tolerances {
                tol.set(name, *value).map_err(at("verify.tolerances"))?;
            }
        }
        Ok(())
    }
}

impl ModelSection {
    pub fn factor_kind(&self) -> Result<FactorKind, CliError> {
        match (self.kind, self.eta) {
            (ModelKind::Quadratic, None) => Ok(FactorKind::Quadratic),
            (ModelKind::Quadratic, Some(_)) => Err(CliError::Config("model.eta: only used by kind = \"exp_quadratic\"".into())),
            (ModelKind::ExpQuadratic, eta) => Ok(FactorKind::ExpQuadratic { eta: eta.unwrap_or(1.0) }),
        }
    }

    pub fn closed_form_kind(&self) -> ClosedFormKind {
        match self.kind {
            ModelKind::Quadratic => ClosedFormKind::Quadratic,
            ModelKind::ExpQuadratic => ClosedFormKind::ExpQuadratic,
        }
    }

    pub fn bond(&self) -> Result<BondModel, CliError> {
        let family = self.f0f1.build("model.f0f1")?;
        let prior = self.prior.build("model.prior")?;
        let factor = RationalFactorModel::new(self.factor_kind()?, self.horizon, vec![0]).map_err(at("model"))?;
        let kernel = KernelModel::from_family(factor, family).map_err(at("model"))?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(CliError::Config(format!("model.sigma: must be positive, got {}", self.sigma)));
        }
        let bridge = BridgeSpec::single(self.horizon, Component::information(self.sigma).bridged_to_zero(), prior)
            .map_err(at("model"))?;
        BondModel::from_kernel(&kernel, bridge).map_err(at("model"))
    }
}

impl PriceSection {
    pub fn instruments(&self, model: &ModelSection) -> Result<Vec<Instrument>, CliError> {
        let u = model.horizon;
        self.instruments
            .iter()
            .enumerate()
            .map(|(i, ins)| {
                let path = format!("price.instruments[{i}]");
                let bad = |m: String| CliError::Config(format!("{path}: {m}"));
                match ins {
                    InstrumentSection::Bond { maturity } => {
                        if !(*maturity > 0.0 && *maturity < u) {
                            return Err(bad(format!("maturity {maturity} must lie in (0, {u})")));
                        }
                        Ok(Instrument::Bond { maturity: *maturity })
                    }
                    InstrumentSection::Caplet { expiry, maturity, strike } => {
                        if !(*expiry > 0.0 && expiry < maturity && *maturity < u) {
                            return Err(bad(format!("need 0 < expiry < maturity < {u}")));
                        }
                        if !(*strike > 0.0) {
                            return Err(bad(format!("strike must be positive, got {strike}")));
                        }
                        Ok(Instrument::Caplet { expiry: *expiry, maturity: *maturity, strike: *strike })
                    }
                    InstrumentSection::Swaption { expiry, resets, strike } => {
                        heatkernel::pricing::check_schedule(*expiry, resets, u).map_err(|e| bad(e.to_string()))?;
                        if !(*strike > 0.0) {
                            return Err(bad(format!("strike must be positive, got {strike}")));
                        }
                        Ok(Instrument::Swaption { expiry: *expiry, resets: resets.clone(), strike: *strike })
                    }
                }
            })
            .collect()
    }
}

impl ContagionSection {
    pub fn scenario(&self, seed: u64, n_paths: usize) -> Result<ScenarioConfig, CliError> {
        let countries = self
            .countries
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let path = format!("contagion.countries[{i}]");
                let spec = CountrySpec {
                    name: c.name.clone(),
                    f0f1: c.f0f1.build(&format!("{path}.f0f1"))?,
                    sigma: c.sigma,
                    a: c.a,
                    own_loading: c.own_loading,
                    brownian_prior: c.brownian_prior.build(&format!("{path}.brownian_prior"))?,
                    debt_prior: c.debt_prior.build(&format!("{path}.debt_prior"))?,
                };
                spec.validate().map_err(|e| CliError::Config(format!("{path}: {e}")))?;
                Ok(spec)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let rates = self.rates.clone().unwrap_or_else(|| vec![1.0; self.exposures.len()]);
        let exposures = ExposureMatrix::new(self.exposures.clone(), rates).map_err(at("contagion.exposures"))?;
        let cfg = ScenarioConfig {
            horizon: self.horizon,
            maturity: self.maturity,
            steps: self.steps,
            seed,
            n_paths,
            n_sources: self.n_sources,
            countries,
            exposures,
            joint_prior: None,
            base_country: self.base.clone(),
        };
        cfg.validate().map_err(at("contagion"))?;
        Ok(cfg)
    }
}
