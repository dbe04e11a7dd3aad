use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{Beta, ContinuousCDF, Gamma};

use super::catalog::{catalog, gaussian_bridge, CATALOG_HORIZON};
use super::{guard, Check, VerifyOptions};
use crate::dynamics::{asset_sde_coeffs, bond_sde_coeffs, euler_evolve, SdeCoefficients};
use crate::error::{Error, Result};
use crate::kernel::{
    y_fourier, y_quadrature, Constant, ExpDecay, F0F1Family, FactorKind, FnTime, HeatFactor, HeatKernelSpec,
    InverseLog, KernelModel, KernelTerm, RationalFactorModel, SharedFn, TimeFn,
};
use crate::lrb::law::stable_scale;
use crate::lrb::{
    innovation_increments, uniform_grid, BridgeSpec, Component, CorrelationSpec, LevyLaw, Measure, PriorBlock,
    TerminalPrior,
};
use crate::numerics::stats::{ks_test, Accumulator};
use crate::numerics::{integrate_pieces, norm_cdf, QuadOptions, SQRT_2PI};
use crate::pricing::{
    caplet_loadings, caplet_price_closed, mc_price, swaption_loadings, swaption_price_closed, AssetModel, BondModel,
    ClosedFormKind, ProductTerm,
};
use crate::rng::stream;
use crate::scenario::{run_scenario, Scenario, ScenarioConfig, ScenarioRun};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn max_abs_z(accs: &[Accumulator], target: f64) -> f64 {
    accs.iter().map(|a| a.estimate().z_score(target).abs()).fold(0.0, f64::max)
}

/// Random state inside the support of every component.
fn random_state<R: Rng>(bridge: &BridgeSpec, rng: &mut R) -> Vec<f64> {
    bridge
        .components()
        .iter()
        .map(|c| if c.law.is_increasing() { rng.random_range(0.05..5.0) } else { rng.random_range(-3.0..3.0) })
        .collect()
}

/// Criterion 1: a calibrated kernel reproduces the curve `e^{-0.02 t}` at
/// time zero.
pub fn calibration(opts: &VerifyOptions) -> Vec<Check> {
    let c = 1;
    let u = CATALOG_HORIZON;
    let curve: SharedFn = Arc::new(ExpDecay { scale: 1.0, rate: 0.02 });
    let f1: SharedFn = Arc::new(InverseLog { beta: 0.0005, gamma: 2.0 });
    let cases: Vec<(&str, FactorKind, fn(f64) -> Result<BridgeSpec>)> = vec![
        ("quadratic", FactorKind::Quadratic, gaussian_bridge),
        ("exp_quadratic", FactorKind::ExpQuadratic { eta: 1.0 }, gaussian_bridge),
        ("exp_linear_two_factor", FactorKind::ExpLinearTwoFactor { a: 0.3, c: 0.4, m: 1.5 }, |u| {
            let prior = TerminalPrior::new(vec![vec![0.0, 2.0], vec![1.0, 5.0]], vec![0.5, 0.5])?;
            BridgeSpec::new(u, vec![Component::information(0.5), Component::subordinator(LevyLaw::gamma(1.5)?)], prior)
        }),
    ];
    cases
        .into_iter()
        .flat_map(|(name, kind, bridge)| {
            let label = format!("calibrated {name} curve");
            let curve = curve.clone();
            let f1 = f1.clone();
            guard(c, &label.clone(), move || {
                let bridge = bridge(u)?;
                let factor = RationalFactorModel::new(kind.clone(), u, (0..kind.arity()).collect())?;
                let kernel = KernelModel::calibrated(curve.clone(), vec![KernelTerm { factor, f1 }])?;
                let bond = BondModel::from_kernel(&kernel, bridge.clone())?;
                let zero = vec![0.0; bridge.dim()];
                let mut worst: f64 = 0.0;
                for k in 1..=50 {
                    let tm = u * k as f64 / 51.0;
                    worst = worst.max((bond.bond_price(0.0, tm, &zero)? - curve.value(tm)).abs());
                }
                Ok(vec![Check::below(c, label, worst, opts.tol.calibration).with_detail("50 maturities")])
            })
        })
        .collect()
}

/// Criterion 2: the rational form returns par at maturity.
pub fn pull_to_par(opts: &VerifyOptions) -> Vec<Check> {
    let c = 2;
    guard(c, "pull to par", || {
        let models = catalog()?;
        let mut rng = stream(opts.seed, 0, 2);
        let mut worst: f64 = 0.0;
        for k in 0..1000 {
            let m = &models[k % models.len()];
            let state = random_state(m.bridge(), &mut rng);
            let t = rng.random_range(0.0..0.99 * CATALOG_HORIZON);
            let a = m.bond.factor_values(t, &state)?;
            let p = m.bond.affine(t, &a) / m.bond.denominator(t, &state)?;
            worst = worst.max((p - 1.0).abs());
        }
        Ok(vec![Check::below(c, "P_tt = 1 over 1000 random triples", worst, opts.tol.par)])
    })
}

/// Criterion 3: every factor is a martingale under its auxiliary measure,
/// and `ℓ_t A_t` has mean zero under ℙ.
pub fn martingales(opts: &VerifyOptions) -> Vec<Check> {
    let c = 3;
    let models = match catalog() {
        Ok(m) => m,
        Err(e) => return vec![Check::failed(c, "martingale suite", &e)],
    };
    let mut out = Vec::new();
    for (idx, m) in models.iter().enumerate() {
        let aux = m.aux_measure();
        let t_max = m.max_test_time();
        let grid: Vec<f64> = (0..=10).map(|k| t_max * k as f64 / 10.0).collect();
        let factor = m.factor();
        let bridge = m.bridge();
        for (measure, label) in [(aux, "A_t under the auxiliary measure"), (Measure::P, "l_t A_t under P")] {
            let name = format!("{}: {label}", m.name);
            out.extend(guard(c, &name.clone(), || {
                let seed = opts.seed.wrapping_add(100 * idx as u64 + u64::from(measure == Measure::P));
                let rows = bridge.map_paths(measure, &grid, seed, opts.paths, |p| {
                    (1..grid.len())
                        .map(|k| {
                            let a = factor.eval_a(grid[k], p.state(k))?;
                            let w = if measure == Measure::P { bridge.aux_weight(aux, grid[k], p.state(k))? } else { 1.0 };
                            Ok(a * w)
                        })
                        .collect::<Result<Vec<f64>>>()
                })?;
                let mut accs = vec![Accumulator::new(); grid.len() - 1];
                for row in rows {
                    for (acc, v) in accs.iter_mut().zip(row?) {
                        acc.push(v);
                    }
                }
                let z = max_abs_z(&accs, 0.0);
                Ok(vec![Check::below(c, name, z, opts.tol.n_se).with_detail(format!(
                    "max |z| over 10 times up to t = {t_max}, {} paths",
                    opts.paths
                ))])
            }));
        }
    }
    out
}

/// Deflated bond prices `D_t P_tT` have 𝕄-mean `P_0T`, with `D_t` taken
/// from the reference kernel. Fails under the broken-sign control.
pub fn bond_martingale(opts: &VerifyOptions) -> Vec<Check> {
    let c = 3;
    let name = if opts.break_b_sign { "deflated bond martingale (b sign flipped)" } else { "deflated bond martingale" };
    guard(c, name, || {
        let u = CATALOG_HORIZON;
        let bridge = gaussian_bridge(u)?;
        let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0])?;
        let kernel = KernelModel::from_family(factor.clone(), F0F1Family::new(0.02, 0.05, 2.0)?)?;
        let reference = BondModel::from_kernel(&kernel, bridge.clone())?;
        let bond = if opts.break_b_sign {
            let b = Arc::new(kernel.coefficient(0));
            let (b1, b2, b3) = (b.clone(), b.clone(), b);
            let flipped = FnTime::new(move |t| -b1.value(t))
                .with_derivative(move |t| -b2.derivative(t).unwrap_or(f64::NAN))
                .with_second_derivative(move |t| -b3.second_derivative(t).unwrap_or(f64::NAN));
            let curve: SharedFn = Arc::new(kernel.curve());
            BondModel::new(curve, vec![ProductTerm::single(factor, Arc::new(flipped))], bridge.clone())?
        } else {
            reference.clone()
        };
        let (t, big) = (1.5, 3.0);
        let vals = bridge.map_paths(Measure::M, &[0.0, t], opts.seed.wrapping_add(31), opts.paths, |p| {
            Ok(reference.denominator(t, p.state(1))? * bond.bond_price(t, big, p.state(1))?)
        })?;
        let mut acc = Accumulator::new();
        for v in vals {
            acc.push(v?);
        }
        let z = acc.estimate().z_score(reference.curve().value(big)).abs();
        Ok(vec![Check::below(c, name, z, opts.tol.n_se).with_detail(format!("|z| at t = {t}, T = {big}"))])
    })
}

/// Criterion 4: `E[π_t]` does not increase along the grid.
pub fn supermartingale(opts: &VerifyOptions) -> Vec<Check> {
    let c = 4;
    guard(c, "pricing kernel supermartingale", || {
        let m = catalog()?.swap_remove(0);
        let bridge = m.bridge();
        let grid: Vec<f64> = (0..=10).map(|k| 0.95 * CATALOG_HORIZON * k as f64 / 10.0).collect();
        let rows = bridge.map_paths(Measure::P, &grid, opts.seed.wrapping_add(41), opts.paths, |p| {
            (0..grid.len())
                .map(|k| m.kernel.pricing_kernel(grid[k], p.state(k), bridge.m_density(grid[k], p.state(k))?))
                .collect::<Result<Vec<f64>>>()
        })?;
        let mut diffs = vec![Accumulator::new(); grid.len() - 1];
        for row in rows {
            let row = row?;
            for (k, acc) in diffs.iter_mut().enumerate() {
                acc.push(row[k + 1] - row[k]);
            }
        }
        // largest standardised increase of the mean
        let z = diffs.iter().map(|a| a.estimate().z_score(0.0)).fold(f64::NEG_INFINITY, f64::max);
        Ok(vec![Check::below(c, "quadratic kernel: max z of E[pi_t+ - pi_t]", z, opts.tol.n_se)
            .with_detail(format!("{} paths, 10 steps", opts.paths))])
    })
}

fn compare_mc(c: usize, name: String, closed: f64, est: crate::numerics::stats::Estimate, n_se: f64) -> Check {
    if est.se == 0.0 {
        let gap = (closed - est.mean).abs();
        return Check::at_most(c, name, gap, 1e-12 * closed.abs().max(1.0)).with_detail("deterministic payoff");
    }
    let z = ((closed - est.mean) / est.se).abs();
    Check::below(c, name, z, n_se).with_detail(format!("closed {closed:.6e}, mc {:.6e} ± {:.1e}", est.mean, est.se))
}

/// Criterion 5: closed-form quadratic caplets and exponential-quadratic
/// swaptions agree with Monte Carlo in every branch.
pub fn closed_form_vs_mc(opts: &VerifyOptions) -> Vec<Check> {
    let c = 5;
    let mut out = Vec::new();
    out.extend(guard(c, "quadratic caplets", || {
        let m = catalog()?.swap_remove(0);
        let (curve, b) = (m.bond.curve().clone(), m.bond.terms()[0].factors[0].b.clone());
        let u = m.bond.horizon();
        let mut rng = stream(opts.seed, 0, 5);
        let mut checks = Vec::new();
        for (set, case) in ["positive", "positive", "positive, in the money", "negative", "zero"].iter().enumerate() {
            let t = rng.random_range(0.5..2.0);
            let big = t + rng.random_range(0.25..1.0);
            let k_zero = b.value(big) / b.value(t);
            let fwd = curve.value(big) / curve.value(t);
            // exercise threshold on A_t a few 𝕄-standard scales out
            let tau = rng.random_range(0.5..3.0) * t / (u - t);
            let strike = match set {
                0 | 1 => (curve.value(big) + tau * b.value(big)) / (curve.value(t) + tau * b.value(t)),
                2 => fwd * (1.02 + 0.03 * rng.random::<f64>()),
                3 => k_zero * rng.random_range(0.5..0.95),
                _ => k_zero,
            };
            let (alpha, beta, scale) = caplet_loadings(strike, t, big, curve.as_ref(), b.as_ref());
            let closed = caplet_price_closed(ClosedFormKind::Quadratic, strike, t, big, u, curve.as_ref(), b.as_ref())?;
            let inst = crate::pricing::Instrument::Caplet { expiry: t, maturity: big, strike };
            let est = mc_price(&inst, &m.bond, opts.option_paths, opts.seed.wrapping_add(500 + set as u64))?;
            let name = format!("caplet {} ({case} branch)", set + 1);
            let mut chk = compare_mc(c, name, closed, est, opts.tol.n_se);
            if *case == "zero" && closed != 0.0 {
                chk.pass = false;
                chk.detail = format!("zero branch returned {closed}");
            }
            chk.detail.push_str(&format!("; alpha {alpha:.3e}, beta {beta:.3e}, scale {scale:.3e}"));
            checks.push(chk);
        }
        Ok(checks)
    }));
    out.extend(guard(c, "exponential-quadratic swaptions", || {
        let m = catalog()?.swap_remove(1);
        let (curve, b) = (m.bond.curve().clone(), m.bond.terms()[0].factors[0].b.clone());
        let u = m.bond.horizon();
        let mut rng = stream(opts.seed, 1, 5);
        let mut checks = Vec::new();
        for (set, case) in ["positive", "positive", "positive, in the money", "negative", "zero"].iter().enumerate() {
            let t = rng.random_range(0.3..1.5);
            let n = 1 + (rng.random::<f64>() * 3.0) as usize;
            let delta = rng.random_range(0.25..0.5);
            let resets: Vec<f64> = (1..=n).map(|i| t + i as f64 * delta).collect();
            let last = resets[n - 1];
            let sum_p: f64 = resets.iter().map(|&x| curve.value(x)).sum();
            let sum_b: f64 = resets.iter().map(|&x| b.value(x)).sum();
            let k_zero = (b.value(t) - b.value(last)) / sum_b;
            let k_par = (curve.value(t) - curve.value(last)) / sum_p;
            let strike = match set {
                0 | 1 => k_par * rng.random_range(0.9..1.1),
                2 => k_par * rng.random_range(0.1..0.3),
                3 => k_zero * rng.random_range(1.05..1.5),
                _ => k_zero,
            };
            let (alpha, beta, scale) = swaption_loadings(strike, t, &resets, curve.as_ref(), b.as_ref());
            let closed =
                swaption_price_closed(ClosedFormKind::ExpQuadratic, strike, t, &resets, u, curve.as_ref(), b.as_ref())?;
            let inst = crate::pricing::Instrument::Swaption { expiry: t, resets, strike };
            let est = mc_price(&inst, &m.bond, opts.option_paths, opts.seed.wrapping_add(600 + set as u64))?;
            let name = format!("swaption {} ({case} branch, n = {n})", set + 1);
            let mut chk = compare_mc(c, name, closed, est, opts.tol.n_se);
            if *case == "zero" && closed != 0.0 {
                chk.pass = false;
                chk.detail = format!("zero branch returned {closed}");
            }
            chk.detail.push_str(&format!("; alpha {alpha:.3e}, beta {beta:.3e}, scale {scale:.3e}"));
            checks.push(chk);
        }
        Ok(checks)
    }));
    out
}

/// Criterion 6: numerical heat-kernel integrals against their closed forms,
/// and the Fourier route against direct quadrature.
pub fn heat_kernel(opts: &VerifyOptions) -> Vec<Check> {
    let c = 6;
    let mut out = Vec::new();
    out.extend(guard(c, "quadratic Y", || {
        let u = CATALOG_HORIZON;
        let fam = F0F1Family::new(0.03, 0.01, 50.0)?;
        let spec = HeatKernelSpec::new(
            gaussian_bridge(u)?,
            vec![HeatFactor::new(0, |_, x| x * x, move |t, v| u - t - v)],
            Arc::new(fam.f0()),
            Arc::new(fam.f1()),
        )?;
        let coef = rel(y_quadrature(&spec, Measure::M, 0.0, 0.0, &[0.0])?, u * u * u / 12.0);
        let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0])?;
        let (h, k) = (factor.curve_shape(), factor.coefficient_shape());
        let mut worst: f64 = 0.0;
        for &(t, tm, x) in &[(0.5, 1.0, 0.3), (2.0, 3.5, -1.2), (4.0, 4.0, 0.7)] {
            let a = factor.eval_a(t, &[x])?;
            worst = worst.max(rel(y_quadrature(&spec, Measure::M, t, tm, &[x])?, h.value(tm) + k.value(tm) * a));
        }
        Ok(vec![
            Check::below(c, "quadratic Y_00 = U^3/12", coef, opts.tol.y_closed),
            Check::below(c, "quadratic Y_tT closed form", worst, opts.tol.y_closed),
        ])
    }));
    out.extend(guard(c, "two-factor Y", || {
        let (u, a, cc, m) = (4.0, 0.3, 0.4, 1.5);
        let bridge = BridgeSpec::with_blocks(
            u,
            vec![Component::information(0.5), Component::subordinator(LevyLaw::gamma(m)?)],
            vec![PriorBlock {
                components: vec![0, 1],
                prior: TerminalPrior::new(vec![vec![0.0, 2.0], vec![1.0, 5.0]], vec![0.5, 0.5])?,
            }],
            None,
        )?;
        let spec = HeatKernelSpec::new(
            bridge,
            vec![
                HeatFactor::new(0, move |_, x| (a * x).exp(), move |t, v| (-0.5 * a * a * (t + v)).exp()),
                HeatFactor::new(1, move |_, x| (-cc * x).exp(), move |t, v| (cc + 1.0).powf(m * (t + v))),
            ],
            Arc::new(Constant(1.0)),
            Arc::new(Constant(0.1)),
        )?;
        let mut worst: f64 = 0.0;
        for &(t, tm, l1, l2) in &[(0.0, 0.0, 0.0, 0.0), (0.3, 1.0, 0.2, 0.1), (1.2, 3.0, -0.5, 1.4)] {
            let y = y_quadrature(&spec, Measure::L, t, tm, &[l1, l2])?;
            let closed = (u - tm).powi(2) * (cc + 1.0).powf(m * t) * (a * l1 - cc * l2 - 0.5 * a * a * t).exp();
            worst = worst.max(rel(y, closed));
        }
        Ok(vec![Check::below(c, "two-factor Y_tT closed form", worst, opts.tol.y_closed)])
    }));
    out.extend(guard(c, "Fourier Y", || {
        let (u, width, mu) = (3.0, 0.8, 0.4);
        let f_hat = move |_: f64, y: f64| {
            Complex64::new(0.0, mu * y).exp() * (width / SQRT_2PI * (-0.5 * width * width * y * y).exp())
        };
        let bridge = BridgeSpec::single(
            u,
            Component::information(0.4),
            TerminalPrior::scalar(&[-1.0, 0.5, 2.0], &[0.3, 0.5, 0.2])?,
        )?;
        let spec = HeatKernelSpec::new(
            bridge,
            vec![HeatFactor::new(
                0,
                move |_, x| (-(x - mu) * (x - mu) / (2.0 * width * width)).exp(),
                move |t, v| u - t - v,
            )],
            Arc::new(Constant(1.0)),
            Arc::new(Constant(1.0)),
        )?;
        let mut worst: f64 = 0.0;
        for &(t, tm, l) in &[(0.0, 0.5, 0.0), (1.0, 2.0, -0.6), (2.0, 2.5, 0.9)] {
            let yq = y_quadrature(&spec, Measure::L, t, tm, &[l])?;
            let yf = y_fourier(f_hat, move |t, v| u - t - v, &LevyLaw::BrownianUnit, u, t, tm, l, QuadOptions::default())?;
            worst = worst.max(rel(yf, yq));
        }
        Ok(vec![Check::below(c, "Gaussian bump: Fourier vs quadrature", worst, opts.tol.y_fourier)])
    }));
    out
}

/// Criterion 7: the short rate is the maturity derivative of `-ln P` at
/// `T = t`, and it is non-negative.
pub fn rates(opts: &VerifyOptions) -> Vec<Check> {
    let c = 7;
    guard(c, "rates", || {
        let models = catalog()?;
        let u = CATALOG_HORIZON;
        let h = 1e-5 * u;
        let mut rng = stream(opts.seed, 0, 7);
        let mut worst: f64 = 0.0;
        let mut min_rate = f64::INFINITY;
        for k in 0..1000 {
            let m = &models[k % models.len()];
            let state = random_state(m.bridge(), &mut rng);
            let t = rng.random_range(0.02 * u..0.9 * u);
            let a = m.bond.factor_values(t, &state)?;
            let fd = -((m.bond.affine(t + h, &a)).ln() - (m.bond.affine(t - h, &a)).ln()) / (2.0 * h);
            let r = m.bond.short_rate(t, &state)?;
            worst = worst.max(rel(r, fd));
            min_rate = min_rate.min(r);
        }
        Ok(vec![
            Check::below(c, "short rate vs centred difference, 1000 states", worst, opts.tol.rates),
            Check::at_least(c, "minimum short rate", min_rate, 0.0),
        ])
    })
}

/// Quadratic bond of the SDE checks: five-year horizon, two-year bond.
pub(crate) fn sde_bond() -> Result<BondModel> {
    let u = CATALOG_HORIZON;
    let factor = RationalFactorModel::new(FactorKind::Quadratic, u, vec![0])?;
    let kernel = KernelModel::from_family(factor, F0F1Family::new(0.03, 0.05, 2.0)?)?;
    BondModel::from_kernel(&kernel, gaussian_bridge(u)?)
}

/// Two-factor asset with an exponential-quadratic numerator and correlated
/// drivers.
pub(crate) fn sde_asset(rho: f64) -> Result<(AssetModel, CorrelationSpec)> {
    let u = 4.0;
    let corr = CorrelationSpec::new(vec![vec![1.0, rho], vec![rho, 1.0]])?;
    let comps = vec![
        Component::information(0.5).bridged_to_zero(),
        Component::information(0.3).bridged_to_zero(),
    ];
    let prior = TerminalPrior::new(vec![vec![-1.0, 0.0], vec![0.5, 1.0], vec![1.5, -0.5]], vec![0.3, 0.4, 0.3])?;
    let bridge = BridgeSpec::with_blocks(u, comps, vec![PriorBlock { components: vec![0, 1], prior }], Some(corr.clone()))?;
    let model = AssetModel::s_example(
        bridge,
        1.0,
        Arc::new(ExpDecay { scale: 1.0, rate: 0.03 }),
        Arc::new(InverseLog { beta: 0.01, gamma: 50.0 }),
        Arc::new(ExpDecay { scale: 1.0, rate: 0.05 }),
        Arc::new(ExpDecay { scale: 0.2, rate: 0.05 }),
    )?;
    Ok((model, corr))
}

/// Criterion 8: Euler paths of the bond SDE track the rational form, with
/// the gap shrinking as the step halves; the asset's ℚ-drift is `r`.
pub fn sde_consistency(opts: &VerifyOptions) -> Vec<Check> {
    let c = 8;
    let mut out = Vec::new();
    out.extend(guard(c, "bond Euler", || {
        let model = sde_bond()?;
        let bridge = model.bridge().clone();
        let u = model.horizon();
        let big = 2.0;
        let fine = (big / (u / 2000.0)).round() as usize;
        let grid = uniform_grid(big, fine);
        let strides = [8usize, 4, 2, 1];
        let p0 = model.bond_price(0.0, big, &[0.0])?;
        let rows = bridge.map_paths(Measure::P, &grid, opts.seed.wrapping_add(81), opts.sde_paths, |path| {
            let dw = innovation_increments(&bridge, path, 0)?;
            let direct: Vec<f64> =
                (0..grid.len()).map(|k| model.bond_price(grid[k], big, path.state(k))).collect::<Result<_>>()?;
            strides
                .iter()
                .map(|&s| {
                    let g: Vec<f64> = grid.iter().step_by(s).copied().collect();
                    let w: Vec<Vec<f64>> = dw.chunks(s).map(|ch| vec![ch.iter().sum()]).collect();
                    let e = euler_evolve(p0, &g, &w, u, |k, t| {
                        let co = bond_sde_coeffs(&model, t, big, path.state(k * s))?;
                        Ok((co.price_drift(), co.sigma_price))
                    })?;
                    Ok(e.iter().enumerate().map(|(k, x)| ((x - direct[k * s]) / direct[k * s]).powi(2)).sum::<f64>()
                        / e.len() as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        let mut sums = vec![0.0; strides.len()];
        for row in rows {
            for (s, v) in sums.iter_mut().zip(row?) {
                *s += v;
            }
        }
        let rms: Vec<f64> = sums.iter().map(|s| (s / opts.sde_paths as f64).sqrt()).collect();
        let monotone = rms.windows(2).all(|w| w[1] < w[0]);
        let ratios: Vec<String> = rms.windows(2).map(|w| format!("{:.2}", w[0] / w[1])).collect();
        let levels: Vec<String> = rms.iter().map(|r| format!("{r:.3e}")).collect();
        let mut mono = Check::at_least(c, "Euler gap decreases over 3 step halvings", f64::from(u8::from(monotone)), 1.0);
        mono.detail = format!("RMS by step U/250..U/2000: [{}], ratios [{}]", levels.join(", "), ratios.join(", "));
        Ok(vec![
            Check::below(c, "bond Euler RMS relative gap at dt = U/2000", rms[3], opts.tol.euler_rms)
                .with_detail(format!("{} paths, T = {big}", opts.sde_paths)),
            mono,
        ])
    }));
    out.extend(guard(c, "asset risk-neutral drift", || {
        let (model, corr) = sde_asset(0.4)?;
        let bridge = model.discount().bridge().clone();
        let u = bridge.horizon();
        let big = 1.8;
        let grid = uniform_grid(big, (big / (u / 2000.0)).round() as usize);
        let s0 = model.s0().value(big);
        let rows = bridge.map_paths(Measure::P, &grid, opts.seed.wrapping_add(82), opts.sde_paths, |path| {
            let w = [innovation_increments(&bridge, path, 0)?, innovation_increments(&bridge, path, 1)?];
            let coeffs: Vec<SdeCoefficients> = (0..grid.len() - 1)
                .map(|k| asset_sde_coeffs(&model, &corr, grid[k], big, path.state(k)))
                .collect::<Result<_>>()?;
            // ℚ increments dW + λ dt in driver order
            let dq: Vec<Vec<f64>> = coeffs
                .iter()
                .enumerate()
                .map(|(k, co)| {
                    let dt = grid[k + 1] - grid[k];
                    co.drivers.iter().zip(&co.lambda).map(|(&d, l)| w[d][k] + l * dt).collect()
                })
                .collect();
            let e = euler_evolve(s0, &grid, &dq, u, |k, _| Ok((coeffs[k].r, coeffs[k].sigma_price.clone())))?;
            let mut sq = 0.0;
            for (k, x) in e.iter().enumerate() {
                let d = model.asset_price(grid[k], big, path.state(k))?;
                sq += ((x - d) / d).powi(2);
            }
            Ok(sq / e.len() as f64)
        })?;
        let mut total = 0.0;
        for r in rows {
            total += r?;
        }
        let rms = (total / opts.sde_paths as f64).sqrt();
        Ok(vec![Check::below(c, "asset Euler under W^Q with drift r, RMS relative gap", rms, opts.tol.euler_rms)
            .with_detail(format!("{} paths, rho = 0.4, T = {big}", opts.sde_paths))])
    }));
    out
}

/// Criterion 9: densities, Laplace transforms and samplers of the
/// generating laws.
pub fn levy_laws(opts: &VerifyOptions) -> Vec<Check> {
    let c = 9;
    let mut out = Vec::new();
    let (alpha, t) = (1.3, 0.8);
    out.extend(guard(c, "stable-1/2 normalisation", || {
        let law = LevyLaw::stable_half(alpha)?;
        let a = stable_scale(alpha, t);
        // y = e^s; the density decays like y^{-3/2}
        let s0 = (a * a).ln();
        let points: Vec<f64> = (0..=40).map(|k| s0 - 20.0 + 5.0 * k as f64).collect();
        let mass = integrate_pieces(|s| law.density(t, s.exp()).unwrap_or(0.0) * s.exp(), &points, QuadOptions::tight())?;
        // closed-form tail beyond the last point
        let tail = 1.0 - libm::erfc(a / (2.0 * points[40].exp()).sqrt());
        let gap = (mass.value + tail - 1.0).abs();
        Ok(vec![Check::below(c, "stable-1/2 density integrates to 1", gap, opts.tol.stable_norm)])
    }));
    out.extend(guard(c, "stable-1/2 Laplace transform", || {
        let law = LevyLaw::stable_half(alpha)?;
        let kappa = 0.7;
        let mut rng = stream(opts.seed, 0, 9);
        let mut acc = Accumulator::new();
        for _ in 0..opts.paths {
            acc.push((-kappa * law.sample_increment(t, &mut rng)).exp());
        }
        let target = (-alpha * kappa.sqrt() * t / std::f64::consts::SQRT_2).exp();
        let z = acc.estimate().z_score(target).abs();
        Ok(vec![Check::below(c, "stable-1/2 Monte Carlo Laplace transform", z, opts.tol.n_se)
            .with_detail(format!("{} samples", opts.paths))])
    }));
    out.extend(guard(c, "gamma bridge", || {
        let m = 1.5;
        let law = LevyLaw::gamma(m)?;
        let (dt, tau, remaining) = (0.6, 1.4, 3.0);
        let mut rng = stream(opts.seed, 1, 9);
        let xs: Vec<f64> =
            (0..opts.ks_samples).map(|_| law.sample_bridge_increment(dt, tau, remaining, &mut rng) / remaining).collect();
        let beta = Beta::new(m * dt, m * tau).map_err(|e| Error::Runtime(e.to_string()))?;
        let p = ks_test(&xs, |x| beta.cdf(x));
        Ok(vec![Check::at_least(c, "gamma bridge increment KS p-value", p, opts.tol.ks_p)])
    }));
    out.extend(guard(c, "L-increments", || {
        let (m, dt) = (1.5, 0.7);
        let prior = TerminalPrior::new(vec![vec![0.5, 2.0, 1.0], vec![-1.0, 4.0, 3.0]], vec![0.5, 0.5])?;
        let bridge = BridgeSpec::new(
            3.0,
            vec![
                Component::information(0.5),
                Component::subordinator(LevyLaw::gamma(m)?),
                Component::subordinator(LevyLaw::stable_half(alpha)?),
            ],
            prior,
        )?;
        let grid = [0.0, 0.5, 0.5 + dt];
        let inc = bridge.map_paths(Measure::L, &grid, opts.seed.wrapping_add(91), opts.ks_samples, |p| {
            (0..3).map(|i| p.state(2)[i] - p.state(1)[i]).collect::<Vec<f64>>()
        })?;
        let col = |i: usize| inc.iter().map(|r| r[i]).collect::<Vec<f64>>();
        let gamma = Gamma::new(m * dt, 1.0).map_err(|e| Error::Runtime(e.to_string()))?;
        let a = stable_scale(alpha, dt);
        let sd = dt.sqrt();
        Ok(vec![
            Check::at_least(c, "Brownian L-increment KS p-value", ks_test(&col(0), |x| norm_cdf(x / sd)), opts.tol.ks_p),
            Check::at_least(c, "gamma L-increment KS p-value", ks_test(&col(1), |x| gamma.cdf(x)), opts.tol.ks_p),
            Check::at_least(
                c,
                "stable-1/2 L-increment KS p-value",
                ks_test(&col(2), |x| if x > 0.0 { libm::erfc(a / (2.0 * x).sqrt()) } else { 0.0 }),
                opts.tol.ks_p,
            ),
        ])
    }));
    out
}

fn csv_bytes(run: &ScenarioRun) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    run.write_csv(&mut buf).map_err(|e| Error::Runtime(e.to_string()))?;
    Ok(buf)
}

/// Criterion 10: the contagion scenario is reproducible, its base spread
/// vanishes and debt jumps reach the exposed countries in the same step.
pub fn contagion(opts: &VerifyOptions) -> Vec<Check> {
    let c = 10;
    let mut out = Vec::new();
    let mut cfg = opts.scenario.clone();
    cfg.seed = opts.seed;
    cfg.n_paths = cfg.n_paths.max(8);
    out.extend(guard(c, "contagion determinism", || {
        let first = csv_bytes(&run_scenario(&cfg)?)?;
        let second = csv_bytes(&run_scenario(&cfg)?)?;
        let pool = |n: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Runtime(e.to_string()))
        };
        let single = pool(1)?.install(|| run_scenario(&cfg))?;
        let multi = pool(4)?.install(|| run_scenario(&cfg))?;
        let base = cfg.base_index().expect("validated");
        let spread: f64 = single.paths.iter().flat_map(|p| p.spread[base].iter()).fold(0.0, |m, s| m.max(s.abs()));
        Ok(vec![
            Check::at_least(c, "identical CSV across two runs", f64::from(u8::from(first == second)), 1.0),
            Check::at_least(
                c,
                "identical CSV on 1 and 4 threads",
                f64::from(u8::from(csv_bytes(&single)? == csv_bytes(&multi)?)),
                1.0,
            ),
            Check::at_most(c, "base-country spread", spread, 0.0),
        ])
    }));
    out.extend(guard(c, "contagion jump propagation", || jump_propagation(c, &cfg)));
    out
}

/// Finds the first path with a debt jump above 0.5 on a country others are
/// exposed to, and checks that every exposed country's yield moves at that
/// step in the direction given by the pathwise sign of `∂P/∂A`.
fn jump_propagation(c: usize, cfg: &ScenarioConfig) -> Result<Vec<Check>> {
    let scenario = Scenario::new(cfg.clone())?;
    let n = cfg.countries.len();
    let grid = cfg.grid();
    let big = cfg.maturity;
    let sources: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| j != i && cfg.exposures.weight(j, i) > 0.0)).collect();
    for p in 0..200u64 {
        let path = scenario.bridge().simulate_keyed(Measure::P, &grid, cfg.seed, p)?;
        let series = scenario.evaluate(&path)?;
        let mut best: Option<(f64, usize, usize)> = None;
        for &i in &sources {
            for k in 1..grid.len() {
                let d = series.debt[i][k] - series.debt[i][k - 1];
                if d > 0.5 && best.is_none_or(|b| d > b.0) {
                    best = Some((d, i, k));
                }
            }
        }
        let Some((jump, i, k)) = best else { continue };
        let mut misses = 0usize;
        let mut notes = Vec::new();
        for j in (0..n).filter(|&j| j != i && cfg.exposures.weight(j, i) > 0.0) {
            let bond = scenario.bond(j);
            let b = &bond.terms()[0].factors[0].b;
            let (t, state) = (grid[k - 1], path.state(k - 1));
            let slope = b.value(big) * bond.denominator(t, state)?
                - b.value(t) * bond.affine(big, &bond.factor_values(t, state)?);
            let dy = series.yields[j][k] - series.yields[j][k - 1];
            let mut moves: Vec<f64> = (1..grid.len()).map(|q| (series.yields[j][q] - series.yields[j][q - 1]).abs()).collect();
            moves.sort_by(f64::total_cmp);
            let median = moves[moves.len() / 2];
            let ok = dy * slope < 0.0 && dy.abs() > 3.0 * median;
            if !ok {
                misses += 1;
            }
            notes.push(format!("{} dy {dy:+.2e} (median |dy| {median:.1e})", cfg.countries[j].name));
        }
        return Ok(vec![Check::at_most(c, "exposed yields move at the debt-jump step", misses as f64, 0.0).with_detail(
            format!("path {p}: {} debt +{jump:.3} at t = {:.3}; {}", cfg.countries[i].name, grid[k], notes.join(", ")),
        )]);
    }
    Ok(vec![Check::at_most(c, "exposed yields move at the debt-jump step", f64::INFINITY, 0.0)
        .with_detail("no debt jump above 0.5 in 200 paths")])
}
