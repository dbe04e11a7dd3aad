//! Endogenous diffusion coefficients of bond and asset prices driven by
//! Brownian information processes, and Euler evolution of price SDEs.
//!
//! With `D = P0(t) + Σ b_i(t) A_i`, `N = P0(T) + Σ b_i(T) A_i` and
//! `dA_i = ν_i (dW_i + ϑ_i dt)`, a bond satisfies
//! `dP/P = (r + λ·Ω) dt + Ω·dW` with `Ω_c = Σ_{i→c} ν_i (b_i(T)/N - b_i(t)/D)`
//! and `λ = ϑ - C d`, `d_c = Σ_{i→c} ν_i b_i(t)/D`, `C` the driver correlation.

use crate::error::{invalid, Error, Result};
use crate::kernel::RationalFactorModel;
use crate::lrb::{BridgeSpec, CorrelationSpec};
use crate::pricing::{derivative, AssetModel, BondModel};

/// Evolution stops at `U (1 - EULER_GUARD)`; coefficients blow up at `U`.
pub const EULER_GUARD: f64 = 1e-4;

/// Diffusion coefficients at one time and state. Vectors are indexed by the
/// driving bridge components listed in `drivers`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdeCoefficients {
    pub drivers: Vec<usize>,
    /// Short rate `r_t`.
    pub r: f64,
    /// Information premium `ϑ`.
    pub theta: Vec<f64>,
    /// Market price of risk `λ`.
    pub lambda: Vec<f64>,
    /// Relative price volatility (`Ω_tT` for bonds, `Σ_tT` for assets).
    pub sigma_price: Vec<f64>,
    /// Relative volatility of the instantaneous forward rate `r_tT`.
    pub sigma_fwd: Vec<f64>,
    /// Absolute volatility of the short rate.
    pub short_rate_vol: Vec<f64>,
    /// Real-world drift of the short rate; `None` when some input lacks an
    /// analytic second derivative.
    pub short_rate_drift: Option<f64>,
}

impl SdeCoefficients {
    /// `r + λ·σ_price`, the real-world drift rate of the price.
    pub fn price_drift(&self) -> f64 {
        self.r + self.lambda.iter().zip(&self.sigma_price).map(|(l, s)| l * s).sum::<f64>()
    }
}

/// Information premium `ϑ = σ U E[X | L_t] / (U - t)` of Brownian component `i`.
pub fn theta(spec: &BridgeSpec, i: usize, t: f64, state: &[f64]) -> Result<f64> {
    let comp = spec
        .components()
        .get(i)
        .ok_or_else(|| invalid("component", format!("index {i} out of range")))?;
    let sigma = comp
        .sigma
        .ok_or_else(|| Error::Unsupported(format!("information premium of non-Brownian component {i}")))?;
    let u = spec.horizon();
    Ok(sigma * u * spec.bayes_estimate(t, state)?[i] / (u - t))
}

/// Diffusion loading `ν = ∂A/∂L` of a quadratic or exponential-quadratic factor.
pub fn nu(factor: &RationalFactorModel, t: f64, l: f64) -> Result<f64> {
    factor.nu(t, l)
}

/// Driver list and per-factor `(driver slot, ν)` of first-order Gaussian terms.
struct Loadings {
    drivers: Vec<usize>,
    slots: Vec<usize>,
    nus: Vec<f64>,
}

fn loadings(model: &BondModel, t: f64, state: &[f64]) -> Result<Loadings> {
    if !model.is_first_order() {
        return Err(Error::Unsupported("diffusion coefficients of product-term models".into()));
    }
    let mut drivers = Vec::new();
    let mut slots = Vec::new();
    let mut nus = Vec::new();
    for term in model.terms() {
        let f = &term.factors[0].factor;
        if !f.kind().is_gaussian() {
            return Err(Error::Unsupported(format!("diffusion coefficients of the {} factor", f.kind().name())));
        }
        let c = f.inputs()[0];
        let slot = match drivers.iter().position(|&d| d == c) {
            Some(s) => s,
            None => {
                drivers.push(c);
                drivers.len() - 1
            }
        };
        slots.push(slot);
        nus.push(f.nu_at(t, state)?);
    }
    Ok(Loadings { drivers, slots, nus })
}

fn correlation_of(corr: Option<&CorrelationSpec>, drivers: &[usize]) -> Result<Vec<Vec<f64>>> {
    let n = drivers.len();
    let mut c = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            c[a][b] = match corr {
                None => f64::from(u8::from(a == b)),
                Some(m) => {
                    if drivers[a] >= m.dim() || drivers[b] >= m.dim() {
                        return Err(Error::Dimension {
                            expected: drivers[a].max(drivers[b]) + 1,
                            got: m.dim(),
                        });
                    }
                    m.rho(drivers[a], drivers[b])
                }
            };
        }
    }
    Ok(c)
}

/// Bond coefficients for first-order models of quadratic and
/// exponential-quadratic factors.
pub fn bond_sde_coeffs(model: &BondModel, t: f64, maturity: f64, state: &[f64]) -> Result<SdeCoefficients> {
    if !(t >= 0.0 && t <= maturity && maturity < model.horizon()) {
        return Err(invalid("t", format!("need 0 <= t <= T < U, got t = {t}, T = {maturity}")));
    }
    let ld = loadings(model, t, state)?;
    let bridge = model.bridge();
    let corr = correlation_of(bridge.correlation(), &ld.drivers)?;
    coefficients(model, &ld, &corr, t, maturity, state, |slot, terms| {
        // bond numerator: b_i(T) ν_i / N
        let a = model.factor_values(t, state)?;
        let n = model.affine(maturity, &a);
        Ok(terms.iter().filter(|(s, _, _)| *s == slot).map(|(_, i, nu)| model.terms()[*i].factors[0].b.value(maturity) * nu / n).sum())
    })
}

/// Shared assembly of `r`, `ϑ`, `λ`, price, forward-rate and short-rate
/// volatilities. `numerator_load(slot, terms)` returns the numerator's
/// relative loading on a driver slot.
fn coefficients<F>(
    model: &BondModel,
    ld: &Loadings,
    corr: &[Vec<f64>],
    t: f64,
    maturity: f64,
    state: &[f64],
    numerator_load: F,
) -> Result<SdeCoefficients>
where
    F: Fn(usize, &[(usize, usize, f64)]) -> Result<f64>,
{
    let bridge = model.bridge();
    let u = model.horizon();
    let a = model.factor_values(t, state)?;
    let den = model.denominator(t, state)?;
    let den_d1 = model.affine_derivative(t, &a)?;
    let r = -den_d1 / den;
    let num_m = model.affine(maturity, &a);
    let num_m_d1 = model.affine_derivative(maturity, &a)?;
    let nd = ld.drivers.len();
    let terms: Vec<(usize, usize, f64)> = ld.slots.iter().enumerate().map(|(i, &s)| (s, i, ld.nus[i])).collect();

    let mut d = vec![0.0; nd];
    let mut fwd = vec![0.0; nd];
    let mut rvol = vec![0.0; nd];
    for &(s, i, nu) in &terms {
        let b = &model.terms()[i].factors[0].b;
        let (bt, bm) = (b.value(t), b.value(maturity));
        d[s] += nu * bt / den;
        fwd[s] += nu * (derivative(b.as_ref(), maturity, u)? / num_m_d1 - bm / num_m);
        rvol[s] += nu * (-derivative(b.as_ref(), t, u)? / den + den_d1 * bt / (den * den));
    }
    let theta: Vec<f64> = ld.drivers.iter().map(|&c| theta(bridge, c, t, state)).collect::<Result<_>>()?;
    let lambda: Vec<f64> = (0..nd)
        .map(|s| theta[s] - (0..nd).map(|q| corr[s][q] * d[q]).sum::<f64>())
        .collect();
    let sigma_price: Vec<f64> = (0..nd).map(|s| Ok(numerator_load(s, &terms)? - d[s])).collect::<Result<_>>()?;
    let short_rate_drift = model
        .affine_second_derivative(t, &a)
        .map(|dd| -dd / den + r * r + rvol.iter().zip(&lambda).map(|(v, l)| v * l).sum::<f64>());
    Ok(SdeCoefficients {
        drivers: ld.drivers.clone(),
        r,
        theta,
        lambda,
        sigma_price,
        sigma_fwd: fwd,
        short_rate_vol: rvol,
        short_rate_drift,
    })
}

/// Asset coefficients: the numerator factor adds its own driver; `corr`
/// gives the correlation of the Brownian drivers.
pub fn asset_sde_coeffs(
    model: &AssetModel,
    corr: &CorrelationSpec,
    t: f64,
    maturity: f64,
    state: &[f64],
) -> Result<SdeCoefficients> {
    let discount = model.discount();
    if !(t >= 0.0 && t <= maturity && maturity < discount.horizon()) {
        return Err(invalid("t", format!("need 0 <= t <= T < U, got t = {t}, T = {maturity}")));
    }
    let numerator = model.numerator_factor();
    if !numerator.kind().is_gaussian() {
        return Err(Error::Unsupported(format!(
            "diffusion coefficients of the {} factor",
            numerator.kind().name()
        )));
    }
    let mut ld = loadings(discount, t, state)?;
    let c1 = numerator.inputs()[0];
    let slot1 = match ld.drivers.iter().position(|&d| d == c1) {
        Some(s) => s,
        None => {
            ld.drivers.push(c1);
            ld.drivers.len() - 1
        }
    };
    let nu1 = numerator.nu_at(t, state)?;
    let num = model.numerator(t, maturity, state)?;
    let b1 = model.b1().value(maturity);
    let c = correlation_of(Some(corr), &ld.drivers)?;
    let mut out = coefficients(discount, &ld, &c, t, maturity, state, |slot, _| {
        Ok(if slot == slot1 { b1 * nu1 / num } else { 0.0 })
    })?;
    // forward-rate volatility refers to the discount curve at T
    out.sigma_fwd.resize(ld.drivers.len(), 0.0);
    Ok(out)
}

/// Euler–Maruyama path of `dX/X = μ dt + σ·dW`.
///
/// `dw[k]` holds the driver increments over `[grid[k], grid[k+1]]` and
/// `coeffs(k, t)` returns `(μ, σ)` at `grid[k]`. The path stops at the last
/// grid point not beyond `U (1 - EULER_GUARD)`.
pub fn euler_evolve<F>(x0: f64, grid: &[f64], dw: &[Vec<f64>], horizon: f64, mut coeffs: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, f64) -> Result<(f64, Vec<f64>)>,
{
    if grid.len() < 2 || dw.len() + 1 < grid.len() {
        return Err(invalid("dw", "need one increment vector per grid step"));
    }
    let stop = horizon * (1.0 - EULER_GUARD);
    let mut out = Vec::with_capacity(grid.len());
    let mut x = x0;
    out.push(x);
    for k in 0..grid.len() - 1 {
        let (t, next) = (grid[k], grid[k + 1]);
        let dt = next - t;
        if !(dt > 0.0) {
            return Err(invalid("grid", format!("not increasing at {next}")));
        }
        if next > stop {
            break;
        }
        let (mu, sigma) = coeffs(k, t)?;
        if sigma.len() != dw[k].len() {
            return Err(Error::Dimension {
                expected: sigma.len(),
                got: dw[k].len(),
            });
        }
        let shock: f64 = sigma.iter().zip(&dw[k]).map(|(s, w)| s * w).sum();
        x *= 1.0 + mu * dt + shock;
        if !x.is_finite() {
            return Err(Error::ModelViolation(format!("Euler path blew up at t = {next}")));
        }
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Constant, ExpDecay, F0F1Family, FactorKind, InverseLog, KernelModel};
    use crate::lrb::{innovation_increments, uniform_grid, Component, Measure, PriorBlock, TerminalPrior};
    use std::sync::Arc;

    fn bridge(u: f64, xs: &[f64], ps: &[f64]) -> BridgeSpec {
        let prior = TerminalPrior::scalar(xs, ps).unwrap();
        BridgeSpec::single(u, Component::information(0.4).bridged_to_zero(), prior).unwrap()
    }

    fn quad_model(u: f64, b: &BridgeSpec) -> BondModel {
        let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0]).unwrap();
        let kernel = KernelModel::from_family(factor, F0F1Family::new(0.03, 0.05, 2.0).unwrap()).unwrap();
        BondModel::from_kernel(&kernel, b.clone()).unwrap()
    }

    #[test]
    fn theta_single_atom_and_time_zero() {
        let u = 3.0;
        let b = bridge(u, &[1.5], &[1.0]);
        assert!((theta(&b, 0, 1.0, &[0.2]).unwrap() - 0.4 * u * 1.5 / 2.0).abs() < 1e-14);
        let b = bridge(u, &[-1.0, 2.0], &[0.25, 0.75]);
        assert!((theta(&b, 0, 0.0, &[0.0]).unwrap() - 0.4 * 1.25).abs() < 1e-14);
    }

    #[test]
    fn nu_reference_values() {
        let u = 4.0;
        let q = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0]).unwrap();
        let e = RationalFactorModel::new(FactorKind::ExpQuadratic { eta: 1.0 }, u, vec![0]).unwrap();
        assert_eq!(nu(&q, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(nu(&e, 1.0, 0.0).unwrap(), 0.0);
        assert!((nu(&q, u / 2.0, 1.0).unwrap() - 8.0 / u).abs() < 1e-15);
    }

    #[test]
    fn bond_coefficient_identities() {
        let u = 5.0;
        let b = bridge(u, &[-1.0, 0.5, 2.0], &[0.3, 0.4, 0.3]);
        let m = quad_model(u, &b);
        let c = bond_sde_coeffs(&m, 1.5, 1.5, &[0.7]).unwrap();
        assert_eq!(c.sigma_price, vec![0.0]);
        assert!((c.r - m.short_rate(1.5, &[0.7]).unwrap()).abs() < 1e-15);

        let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0]).unwrap();
        let kernel = KernelModel::single(factor, Arc::new(ExpDecay { scale: 1.0, rate: 0.02 }), Arc::new(Constant(0.0))).unwrap();
        let det = BondModel::from_kernel(&kernel, b.clone()).unwrap();
        let c = bond_sde_coeffs(&det, 1.0, 3.0, &[0.7]).unwrap();
        assert_eq!(c.lambda, c.theta);
        assert_eq!(c.sigma_price, vec![0.0]);
    }

    #[test]
    fn model_risk_component_ignores_prior() {
        let u = 5.0;
        let b1 = bridge(u, &[-1.0, 0.5, 2.0], &[0.3, 0.4, 0.3]);
        let b2 = bridge(u, &[3.0, 4.0], &[0.9, 0.1]);
        let (m1, m2) = (quad_model(u, &b1), quad_model(u, &b2));
        for &(t, l) in &[(0.5, 0.3), (2.0, -1.2), (4.0, 0.05)] {
            let c1 = bond_sde_coeffs(&m1, t, 4.5, &[l]).unwrap();
            let c2 = bond_sde_coeffs(&m2, t, 4.5, &[l]).unwrap();
            assert!(((c1.lambda[0] - c1.theta[0]) - (c2.lambda[0] - c2.theta[0])).abs() < 1e-12);
            assert_ne!(c1.theta[0], c2.theta[0]);
        }
    }

    #[test]
    fn short_rate_drift_matches_ito() {
        let u = 5.0;
        let b = bridge(u, &[-1.0, 0.5, 2.0], &[0.3, 0.4, 0.3]);
        let m = quad_model(u, &b);
        let r = |t: f64, l: f64| m.short_rate(t, &[l]).unwrap();
        let h = 1e-4;
        for &(t, l) in &[(0.7, 0.4), (2.5, -0.9)] {
            let c = bond_sde_coeffs(&m, t, t, &[l]).unwrap();
            let rt = (r(t + h, l) - r(t - h, l)) / (2.0 * h);
            let rl = (r(t, l + h) - r(t, l - h)) / (2.0 * h);
            let rll = (r(t, l + h) - 2.0 * r(t, l) + r(t, l - h)) / (h * h);
            // under ℙ: dL = dW + (ϑ - L/(U-t)) dt
            let drift = rt + rl * (c.theta[0] - l / (u - t)) + 0.5 * rll;
            let got = c.short_rate_drift.unwrap();
            assert!((got - drift).abs() < 1e-6 * drift.abs().max(1e-3), "{got} vs {drift}");
            assert!((c.short_rate_vol[0] - rl).abs() < 1e-8);
        }
    }

    #[test]
    fn forward_rate_volatility() {
        let u = 5.0;
        let b = bridge(u, &[-1.0, 0.5, 2.0], &[0.3, 0.4, 0.3]);
        let m = quad_model(u, &b);
        let (t, big, l) = (1.0, 3.0, 0.6);
        let f = |x: f64| m.forward_rate(t, big, &[x]).unwrap();
        let h = 1e-6;
        let dl = (f(l + h) - f(l - h)) / (2.0 * h);
        let c = bond_sde_coeffs(&m, t, big, &[l]).unwrap();
        assert!((c.sigma_fwd[0] * f(l) - dl).abs() < 1e-7);
    }

    #[test]
    fn euler_without_noise_is_exponential() {
        let grid = uniform_grid(1.0, 1000);
        let dw = vec![vec![0.0]; 1000];
        let path = euler_evolve(2.0, &grid, &dw, 5.0, |_, t| Ok((0.05 + 0.02 * t, vec![0.3]))).unwrap();
        let exact = 2.0 * (0.05f64 + 0.01).exp();
        assert!((path[1000] - exact).abs() < 1e-4);
        // guard near the horizon
        let g = uniform_grid(0.99995, 10);
        let p = euler_evolve(1.0, &g, &vec![vec![0.0]; 10], 1.0, |_, _| Ok((0.0, vec![0.0]))).unwrap();
        assert_eq!(p.len(), 10);
    }

    #[test]
    fn euler_tracks_bond_price() {
        let u = 5.0;
        let b = bridge(u, &[-1.0, 0.5, 2.0], &[0.3, 0.4, 0.3]);
        let m = quad_model(u, &b);
        let big = 2.0;
        let grid = uniform_grid(big, 800);
        let mut gap = 0.0;
        let mut count = 0.0;
        for p in 0..50 {
            let path = b.simulate_keyed(Measure::P, &grid, 17, p).unwrap();
            let dw: Vec<Vec<f64>> = innovation_increments(&b, &path, 0).unwrap().into_iter().map(|w| vec![w]).collect();
            let e = euler_evolve(m.bond_price(0.0, big, &[0.0]).unwrap(), &grid, &dw, u, |k, t| {
                let c = bond_sde_coeffs(&m, t, big, path.state(k))?;
                Ok((c.price_drift(), c.sigma_price))
            })
            .unwrap();
            for (k, x) in e.iter().enumerate() {
                let d = m.bond_price(grid[k], big, path.state(k)).unwrap();
                gap += ((x - d) / d).powi(2);
                count += 1.0;
            }
        }
        let rms = (gap / count).sqrt();
        assert!(rms < 0.01, "rms gap {rms}");
    }

    fn s_example(corr: Option<CorrelationSpec>, g1: f64) -> AssetModel {
        let u = 4.0;
        let comps = vec![
            Component::information(0.5).bridged_to_zero(),
            Component::information(0.3).bridged_to_zero(),
        ];
        let prior = TerminalPrior::new(vec![vec![-1.0, 0.0], vec![0.5, 1.0], vec![1.5, -0.5]], vec![0.3, 0.4, 0.3]).unwrap();
        let bridge = BridgeSpec::with_blocks(u, comps, vec![PriorBlock { components: vec![0, 1], prior }], corr).unwrap();
        AssetModel::s_example(
            bridge,
            1.0,
            Arc::new(ExpDecay { scale: 1.0, rate: 0.03 }),
            Arc::new(InverseLog { beta: 0.01, gamma: 50.0 }),
            Arc::new(ExpDecay { scale: 1.0, rate: 0.05 }),
            Arc::new(ExpDecay { scale: g1, rate: 0.05 }),
        )
        .unwrap()
    }

    #[test]
    fn asset_coefficients_match_remark() {
        let u: f64 = 4.0;
        let m = s_example(None, 0.2);
        let corr = CorrelationSpec::identity(2);
        for &(t, l1, l2) in &[(0.5, 0.3, -0.2), (1.7, -1.1, 0.8), (3.0, 0.4, 0.4)] {
            let big = 3.5;
            let state = [l1, l2];
            let c = asset_sde_coeffs(&m, &corr, t, big, &state).unwrap();
            let s = u - t;
            let nu1 = ((s / u).sqrt() / s) * l1 * (l1 * l1 / (2.0 * s)).exp();
            let nu2 = 2.0 * u / (s * s) * l2;
            let num = m.numerator(t, big, &state).unwrap();
            let den = m.discount().denominator(t, &state).unwrap();
            let b1 = m.b1().value(big);
            let b2 = m.discount().terms()[0].factors[0].b.value(t);
            // drivers: discount component first, numerator second
            assert_eq!(c.drivers, vec![1, 0]);
            assert!((c.sigma_price[1] - b1 * nu1 / num).abs() < 1e-12);
            assert!((c.sigma_price[0] + b2 * nu2 / den).abs() < 1e-12);
            assert!((c.lambda[1] - c.theta[1]).abs() < 1e-15);
            assert!((c.lambda[0] - (c.theta[0] - nu2 * b2 / den)).abs() < 1e-12);
        }
        // ρ = 0 and b2 ≡ 0: λ = ϑ and only the numerator carries volatility
        let u = 4.0;
        let comps = vec![
            Component::information(0.5).bridged_to_zero(),
            Component::information(0.3).bridged_to_zero(),
        ];
        let prior = TerminalPrior::new(vec![vec![-1.0, 0.0], vec![0.5, 1.0]], vec![0.5, 0.5]).unwrap();
        let bridge = BridgeSpec::new(u, comps, prior).unwrap();
        let flat = AssetModel::s_example(
            bridge,
            1.0,
            Arc::new(ExpDecay { scale: 1.0, rate: 0.03 }),
            Arc::new(Constant(0.0)),
            Arc::new(ExpDecay { scale: 1.0, rate: 0.05 }),
            Arc::new(ExpDecay { scale: 0.2, rate: 0.05 }),
        )
        .unwrap();
        let c = asset_sde_coeffs(&flat, &corr, 1.0, 3.0, &[0.4, 0.9]).unwrap();
        assert_eq!(c.lambda, c.theta);
        assert_eq!(c.sigma_price[0], 0.0);
    }

    #[test]
    fn correlated_asset_risk_neutral_consistency() {
        let rho = 0.4;
        let corr = CorrelationSpec::new(vec![vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let m = s_example(Some(corr.clone()), 0.2);
        let bridge = m.discount().bridge().clone();
        let big = 1.8;
        let grid = uniform_grid(big, 800);
        let mut gap = 0.0;
        let mut count = 0.0;
        for p in 0..40 {
            let path = bridge.simulate_keyed(Measure::P, &grid, 23, p).unwrap();
            let w0 = innovation_increments(&bridge, &path, 0).unwrap();
            let w1 = innovation_increments(&bridge, &path, 1).unwrap();
            let coeffs: Vec<SdeCoefficients> = (0..grid.len() - 1)
                .map(|k| asset_sde_coeffs(&m, &corr, grid[k], big, path.state(k)).unwrap())
                .collect();
            // ℚ increments dW + λ dt, ordered like the coefficient drivers
            let dq: Vec<Vec<f64>> = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let dt = grid[k + 1] - grid[k];
                    c.drivers
                        .iter()
                        .zip(&c.lambda)
                        .map(|(&d, l)| if d == 0 { w0[k] } else { w1[k] } + l * dt)
                        .collect()
                })
                .collect();
            let e = euler_evolve(m.s0().value(big), &grid, &dq, bridge.horizon(), |k, _| {
                Ok((coeffs[k].r, coeffs[k].sigma_price.clone()))
            })
            .unwrap();
            for (k, x) in e.iter().enumerate() {
                let d = m.asset_price(grid[k], big, path.state(k)).unwrap();
                gap += ((x - d) / d).powi(2);
                count += 1.0;
            }
        }
        let rms = (gap / count).sqrt();
        assert!(rms < 0.01, "rms gap {rms}");
    }

    #[test]
    fn jump_models_have_no_coefficients() {
        let u = 3.0;
        let comps = vec![
            Component::information(0.5),
            Component::subordinator(crate::lrb::LevyLaw::Gamma { m: 1.0 }),
        ];
        let prior = TerminalPrior::new(vec![vec![0.0, 2.0]], vec![1.0]).unwrap();
        let b = BridgeSpec::new(u, comps, prior).unwrap();
        let factor = RationalFactorModel::new(FactorKind::ExpLinearTwoFactor { a: 0.2, c: 0.3, m: 1.0 }, u, vec![0, 1]).unwrap();
        let kernel = KernelModel::from_family(factor, F0F1Family::new(0.03, 0.01, 50.0).unwrap()).unwrap();
        let m = BondModel::from_kernel(&kernel, b).unwrap();
        assert!(matches!(bond_sde_coeffs(&m, 1.0, 2.0, &[0.1, 0.5]), Err(Error::Unsupported(_))));
    }
}
