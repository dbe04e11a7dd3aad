//! The weighted heat-kernel integral `Y_tT` evaluated numerically.
//!
//! `Y_tT = ∫_{T-t}^{U-t} E[F(t+u, X_{t+u}) | X_t] w(T, u-T+t) du`, with `F`
//! and `w` given as products of one-component factors, each carrying its own
//! `u` integral. `F` receives the time left to the horizon, `U - t - u`,
//! rather than `t + u`: factors such as `exp(x²/(2(U-s)))` are only well
//! conditioned when that difference is not formed by subtraction. Conditional expectations use the transition law of the
//! requested measure: free Lévy increments under 𝕃, bridges to zero for
//! components marked so under 𝕄, and posterior mixtures of pinned bridges
//! under ℙ.

use std::sync::Arc;

use num_complex::Complex64;

use super::timefn::{check_positive_non_increasing, SharedFn};
use crate::error::{invalid, Error, Result};
use crate::lrb::law::stable_scale;
use crate::lrb::{AuxMode, BridgeSpec, LevyLaw, Measure};
use crate::numerics::{integrate, integrate_pieces, ln_gamma, QuadOptions};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A function of `(time, value)`.
pub type StateFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Amplitude below which a Fourier transform is treated as zero, relative
/// to its peak.
pub const FOURIER_CUTOFF: f64 = 1e-14;

/// Allowed imaginary part of a Fourier evaluation, relative to `max(1, |Y|)`.
pub const FOURIER_IMAG_TOL: f64 = 1e-8;

/// One separable factor: `F_i` as a function of `(U - s, x_i)` with weight
/// `w_i(T, v)`.
///
/// With `log` set, `f` returns `ln F_i`; use this when `F_i` grows fast
/// enough to overflow against the transition density.
#[derive(Clone)]
pub struct HeatFactor {
    pub component: usize,
    pub f: StateFn,
    pub w: StateFn,
    pub log: bool,
}

impl HeatFactor {
    pub fn new(
        component: usize,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        w: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            component,
            f: Arc::new(f),
            w: Arc::new(w),
            log: false,
        }
    }

    /// Factor given by `ln F_i`.
    pub fn from_log(
        component: usize,
        ln_f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        w: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            log: true,
            ..Self::new(component, ln_f, w)
        }
    }
}

impl std::fmt::Debug for HeatFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeatFactor").field("component", &self.component).finish()
    }
}

/// `(F, w, f0, f1)` over a bridge.
#[derive(Clone)]
pub struct HeatKernelSpec {
    bridge: BridgeSpec,
    factors: Vec<HeatFactor>,
    f0: SharedFn,
    f1: SharedFn,
    outer: QuadOptions,
    inner: QuadOptions,
}

impl std::fmt::Debug for HeatKernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeatKernelSpec")
            .field("horizon", &self.bridge.horizon())
            .field("factors", &self.factors)
            .finish()
    }
}

impl HeatKernelSpec {
    pub fn new(bridge: BridgeSpec, factors: Vec<HeatFactor>, f0: SharedFn, f1: SharedFn) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("factors", "at least one factor is required"));
        }
        let mut seen = vec![false; bridge.dim()];
        for fac in &factors {
            match seen.get_mut(fac.component) {
                None => {
                    return Err(invalid(
                        "component",
                        format!("index {} out of range for dimension {}", fac.component, bridge.dim()),
                    ))
                }
                Some(true) => return Err(invalid("component", format!("component {} used twice", fac.component))),
                Some(s) => *s = true,
            }
        }
        if let Some(c) = bridge.correlation() {
            let d = c.dim();
            if (0..d).any(|i| (0..d).any(|j| i != j && c.rho(i, j) != 0.0)) {
                return Err(Error::Unsupported(
                    "heat-kernel quadrature needs uncorrelated components".into(),
                ));
            }
        }
        let u = bridge.horizon();
        check_positive_non_increasing(f0.as_ref(), "f0", u, super::MONOTONE_CHECK_STEPS)?;
        check_positive_non_increasing(f1.as_ref(), "f1", u, super::MONOTONE_CHECK_STEPS)?;
        Ok(Self {
            bridge,
            factors,
            f0,
            f1,
            outer: QuadOptions::default(),
            inner: QuadOptions {
                abs_tol: 1e-13,
                rel_tol: 1e-9,
                max_intervals: 2000,
                strict: false,
            },
        })
    }

    /// Overrides the tolerance of the `u` integral.
    pub fn with_options(mut self, outer: QuadOptions) -> Self {
        self.outer = outer;
        self
    }

    pub fn bridge(&self) -> &BridgeSpec {
        &self.bridge
    }

    pub fn factors(&self) -> &[HeatFactor] {
        &self.factors
    }

    pub fn f0(&self) -> &SharedFn {
        &self.f0
    }

    pub fn f1(&self) -> &SharedFn {
        &self.f1
    }

    /// Checks `w(t, u-s) ≤ w(t-s, u)` for `s ≤ t ∧ u` on an `n³` grid.
    pub fn check_weight(&self, n: usize) -> Result<()> {
        let h = self.bridge.horizon();
        let pts: Vec<f64> = (0..=n).map(|k| h * k as f64 / n as f64).collect();
        for fac in &self.factors {
            for &t in &pts {
                for &u in &pts {
                    if t + u > h {
                        continue;
                    }
                    for &s in pts.iter().take_while(|&&s| s <= t.min(u)) {
                        let lhs = (fac.w)(t, u - s);
                        let rhs = (fac.w)(t - s, u);
                        if lhs > rhs + 1e-12 * rhs.abs().max(1.0) {
                            return Err(invalid(
                                "w",
                                format!("weight inequality fails at (s, t, u) = ({s}, {t}, {u})"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `Y_tT` under `measure`.
    pub fn y(&self, measure: Measure, t: f64, maturity: f64, state: &[f64]) -> Result<f64> {
        y_quadrature(self, measure, t, maturity, state)
    }

    /// `(f0(T) + f1(T) Y_tT) / (f0(t) + f1(t) Y_tt)`.
    pub fn bond_price(&self, measure: Measure, t: f64, maturity: f64, state: &[f64]) -> Result<f64> {
        let num = self.f0.value(maturity) + self.f1.value(maturity) * self.y(measure, t, maturity, state)?;
        let den = self.f0.value(t) + self.f1.value(t) * self.y(measure, t, t, state)?;
        Ok(num / den)
    }
}

/// Law of `X_{t+u}` given `X_t` for one component.
#[derive(Debug, Clone, Copy)]
enum Transition {
    Point(f64),
    Gauss { mean: f64, sd: f64 },
    GammaFree { x: f64, shape: f64 },
    StableFree { x: f64, scale: f64 },
    GammaBridge { x: f64, span: f64, a: f64, b: f64 },
    StableBridge { x: f64, span: f64, alpha: f64, u: f64, rest: f64 },
}

fn product_or_zero(weight: f64, v: f64) -> f64 {
    if weight == 0.0 {
        0.0
    } else {
        weight * v
    }
}

impl Transition {
    fn free(law: &LevyLaw, x: f64, u: f64) -> Self {
        if u <= 0.0 {
            return Transition::Point(x);
        }
        match *law {
            LevyLaw::BrownianUnit => Transition::Gauss { mean: x, sd: u.sqrt() },
            LevyLaw::Gamma { m } => Transition::GammaFree { x, shape: m * u },
            LevyLaw::StableHalf { alpha } => Transition::StableFree { x, scale: stable_scale(alpha, u) },
        }
    }

    /// Bridge from `x` to `z` at the horizon, observed `u` later with `rest`
    /// still to go.
    fn pinned(law: &LevyLaw, x: f64, z: f64, u: f64, rest: f64) -> Self {
        let s = u + rest;
        if u <= 0.0 {
            return Transition::Point(x);
        }
        if rest <= 0.0 {
            return Transition::Point(z);
        }
        match *law {
            LevyLaw::BrownianUnit => Transition::Gauss {
                mean: (x * rest + z * u) / s,
                sd: (u * rest / s).sqrt(),
            },
            LevyLaw::Gamma { m } => {
                if z - x <= 0.0 {
                    Transition::Point(x)
                } else {
                    Transition::GammaBridge {
                        x,
                        span: z - x,
                        a: m * u,
                        b: m * rest,
                    }
                }
            }
            LevyLaw::StableHalf { alpha } => {
                if z - x <= 0.0 {
                    Transition::Point(x)
                } else {
                    Transition::StableBridge {
                        x,
                        span: z - x,
                        alpha,
                        u,
                        rest,
                    }
                }
            }
        }
    }

    fn expect(&self, g: Integrand<'_>, opts: QuadOptions) -> Result<f64> {
        let inf = f64::INFINITY;
        let ln_pdf = |z: f64| -0.5 * z * z - LN_SQRT_2PI;
        match *self {
            Transition::Point(x) => Ok(g.weigh(0.0, x)),
            Transition::Gauss { mean, sd } => {
                if sd == 0.0 {
                    return Ok(g.weigh(0.0, mean));
                }
                let h = |z: f64| g.weigh(ln_pdf(z), mean + sd * z);
                // rescale when F widens the effective density well beyond N(0, 1)
                let c = gauss_scale(&h);
                Ok(integrate_pieces(|z| c * h(c * z), &[-inf, 0.0, inf], opts)?.value)
            }
            Transition::GammaFree { x, shape } => {
                if shape < 1.0 {
                    // y = v^{1/k} absorbs the y^{k-1} singularity
                    let c = -ln_gamma(shape + 1.0);
                    let h = |v: f64| {
                        let y = v.powf(1.0 / shape);
                        g.weigh(c - y, x + y)
                    };
                    Ok(integrate(h, 0.0, inf, opts)?.value)
                } else {
                    let c = -ln_gamma(shape);
                    let h = |y: f64| {
                        if y <= 0.0 {
                            return 0.0;
                        }
                        g.weigh((shape - 1.0) * y.ln() - y + c, x + y)
                    };
                    Ok(integrate_pieces(h, &[0.0, shape, inf], opts)?.value)
                }
            }
            Transition::StableFree { x, scale } => {
                // the increment is scale² / Z² with Z standard normal
                let h = |z: f64| {
                    if z == 0.0 {
                        return 0.0;
                    }
                    g.weigh(std::f64::consts::LN_2 + ln_pdf(z), x + scale * scale / (z * z))
                };
                Ok(integrate_pieces(h, &[0.0, 1.0, inf], opts)?.value)
            }
            Transition::GammaBridge { x, span, a, b } => {
                let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
                let lo = |v: f64| {
                    // fraction = v^{1/a} near zero
                    if a < 1.0 {
                        let f = v.powf(1.0 / a);
                        g.weigh((b - 1.0) * (-f).ln_1p() - ln_beta - a.ln(), x + span * f)
                    } else {
                        g.weigh((a - 1.0) * v.ln() + (b - 1.0) * (-v).ln_1p() - ln_beta, x + span * v)
                    }
                };
                let hi = |v: f64| {
                    // 1 - fraction = v^{1/b} near one
                    if b < 1.0 {
                        let r = v.powf(1.0 / b);
                        g.weigh((a - 1.0) * (-r).ln_1p() - ln_beta - b.ln(), x + span * (1.0 - r))
                    } else {
                        g.weigh((b - 1.0) * v.ln() + (a - 1.0) * (-v).ln_1p() - ln_beta, x + span * (1.0 - v))
                    }
                };
                let top_lo = if a < 1.0 { 0.5f64.powf(a) } else { 0.5 };
                let top_hi = if b < 1.0 { 0.5f64.powf(b) } else { 0.5 };
                Ok(integrate(lo, 0.0, top_lo, opts)?.value + integrate(hi, 0.0, top_hi, opts)?.value)
            }
            Transition::StableBridge { x, span, alpha, u, rest } => {
                let law = LevyLaw::StableHalf { alpha };
                let norm = law.log_density(u + rest, span);
                let h = |y: f64| {
                    if y <= 0.0 || y >= span {
                        return 0.0;
                    }
                    g.weigh(law.log_density(u, y) + law.log_density(rest, span - y) - norm, x + y)
                };
                Ok(integrate_pieces(h, &[0.0, 0.5 * span, span], opts)?.value)
            }
        }
    }
}

/// Spread of `h` over the real line, probed at powers of two.
fn gauss_scale(h: &dyn Fn(f64) -> f64) -> f64 {
    let probes: Vec<(f64, f64)> = (0..48)
        .map(|k| {
            let z = 2f64.powi(k);
            (z, h(z).abs().max(h(-z).abs()))
        })
        .collect();
    let peak = probes.iter().map(|p| p.1).fold(h(0.0).abs(), f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return 1.0;
    }
    let reach = probes
        .iter()
        .filter(|p| p.1 >= 1e-8 * peak)
        .map(|p| p.0)
        .fold(1.0, f64::max);
    (reach / 8.0).max(1.0)
}

/// A function of the state, given either directly or by its logarithm.
#[derive(Clone, Copy)]
enum Integrand<'a> {
    Plain(&'a dyn Fn(f64) -> f64),
    Log(&'a dyn Fn(f64) -> f64),
}

impl Integrand<'_> {
    /// `exp(ln_w) g(x)`, never `0 · ∞`.
    fn weigh(&self, ln_w: f64, x: f64) -> f64 {
        if ln_w == f64::NEG_INFINITY {
            return 0.0;
        }
        match self {
            Integrand::Plain(g) => product_or_zero(ln_w.exp(), g(x)),
            Integrand::Log(g) => {
                let lg = g(x);
                if lg == f64::NEG_INFINITY {
                    0.0
                } else {
                    (ln_w + lg).exp()
                }
            }
        }
    }
}

fn check_times(spec: &HeatKernelSpec, t: f64, maturity: f64, state: &[f64]) -> Result<()> {
    let b = &spec.bridge;
    if !(t >= 0.0 && t <= b.max_time()) {
        return Err(Error::TimeOutOfRange { t, horizon: b.horizon() });
    }
    if !(maturity >= t && maturity < b.horizon()) {
        return Err(invalid("maturity", format!("need t <= T < U, got t = {t}, T = {maturity}")));
    }
    if state.len() != b.dim() {
        return Err(Error::Dimension {
            expected: b.dim(),
            got: state.len(),
        });
    }
    Ok(())
}

/// `∫ w_i(T, u-T+t) E[F_i(t+u, X_{t+u})] du` with the transition from `trans`.
fn factor_integral(
    spec: &HeatKernelSpec,
    fac: &HeatFactor,
    t: f64,
    maturity: f64,
    trans: &dyn Fn(f64, f64) -> Transition,
) -> Result<f64> {
    let u_max = spec.bridge.horizon() - t;
    let inner = spec.inner;
    let err = std::cell::Cell::new(None);
    let h = |r: f64| {
        let u = u_max - r;
        let w = (fac.w)(maturity, u - maturity + t);
        if w == 0.0 {
            return 0.0;
        }
        let g = |x: f64| (fac.f)(r, x);
        let g = if fac.log { Integrand::Log(&g) } else { Integrand::Plain(&g) };
        match trans(u, r).expect(g, inner) {
            Ok(e) => product_or_zero(w, e),
            Err(e) => {
                err.set(Some(e));
                f64::NAN
            }
        }
    };
    // U - t - u = span x⁴ smooths algebraic singularities at the horizon
    let span = u_max - (maturity - t);
    let g = |x: f64| {
        let x2 = x * x;
        product_or_zero(4.0 * span * x2 * x, h(span * x2 * x2))
    };
    let r = integrate(g, 0.0, 1.0, spec.outer);
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(r?.value)
}

/// `Y_tT` by nested adaptive quadrature.
pub fn y_quadrature(spec: &HeatKernelSpec, measure: Measure, t: f64, maturity: f64, state: &[f64]) -> Result<f64> {
    check_times(spec, t, maturity, state)?;
    let b = &spec.bridge;
    match measure {
        Measure::L | Measure::M => {
            let mut y = 1.0;
            for fac in &spec.factors {
                let comp = b.component(fac.component);
                let x = state[fac.component];
                let to_zero = measure == Measure::M && comp.aux == AuxMode::BridgeToZero;
                let trans = |u: f64, r: f64| {
                    if to_zero {
                        Transition::pinned(&comp.law, x, 0.0, u, r)
                    } else {
                        Transition::free(&comp.law, x, u)
                    }
                };
                y *= factor_integral(spec, fac, t, maturity, &trans)?;
            }
            Ok(y)
        }
        Measure::P => {
            let post = b.posterior(t, state)?;
            let mut y = 1.0;
            for (bi, block) in b.blocks().iter().enumerate() {
                let facs: Vec<(usize, &HeatFactor)> = spec
                    .factors
                    .iter()
                    .filter_map(|f| block.components.iter().position(|&c| c == f.component).map(|p| (p, f)))
                    .collect();
                if facs.is_empty() {
                    continue;
                }
                let mut mix = 0.0;
                for (k, &q) in post[bi].iter().enumerate() {
                    if q == 0.0 {
                        continue;
                    }
                    let atom = &block.prior.atoms()[k];
                    let mut prod = 1.0;
                    for &(pos, fac) in &facs {
                        let comp = b.component(fac.component);
                        let z = comp.pinned_terminal(b.horizon(), atom[pos]);
                        let x = state[fac.component];
                        let trans = |u: f64, r: f64| Transition::pinned(&comp.law, x, z, u, r);
                        prod *= factor_integral(spec, fac, t, maturity, &trans)?;
                    }
                    mix += q * prod;
                }
                y *= mix;
            }
            Ok(y)
        }
    }
}

/// `Y_tT` for a single free Lévy component from the Fourier transform of
/// `F`: `∫ w(T, u-T+t) ∫ exp(-i y L - u Ψ(y)) F̂(t+u, y) dy du`, with `F̂`
/// taking the time left to the horizon as its first argument.
///
/// `f_hat` must describe a positive, integrable `F`. The `y` range is grown
/// until `|F̂|` falls below [`FOURIER_CUTOFF`] of its peak; an imaginary part
/// above [`FOURIER_IMAG_TOL`] is reported as an error.
#[allow(clippy::too_many_arguments)]
pub fn y_fourier<Fh, W>(
    f_hat: Fh,
    w: W,
    law: &LevyLaw,
    horizon: f64,
    t: f64,
    maturity: f64,
    l: f64,
    opts: QuadOptions,
) -> Result<f64>
where
    Fh: Fn(f64, f64) -> Complex64,
    W: Fn(f64, f64) -> f64,
{
    law.validate()?;
    if !(t >= 0.0 && t <= maturity && maturity < horizon) {
        return Err(invalid("t", format!("need 0 <= t <= T < U, got t = {t}, T = {maturity}, U = {horizon}")));
    }
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol * 1e-3,
        rel_tol: opts.rel_tol * 1e-2,
        ..opts
    };
    let err = std::cell::Cell::new(None);
    let inner = |u: f64| -> Complex64 {
        let s = horizon - t - u;
        let amp = |y: f64| f_hat(s, y).norm();
        let mut peak = amp(0.0).max(amp(1.0)).max(amp(-1.0));
        let mut r = 1.0;
        while r < 1e12 && (amp(r) >= FOURIER_CUTOFF * peak || amp(-r) >= FOURIER_CUTOFF * peak) {
            r *= 2.0;
            peak = peak.max(amp(r)).max(amp(-r));
        }
        if peak == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let z = |y: f64| (Complex64::new(0.0, -y * l) - law.char_exponent(y) * u).exp() * f_hat(s, y);
        let re = integrate(|y| z(y).re, -r, r, inner_opts);
        let im = integrate(|y| z(y).im, -r, r, inner_opts);
        match (re, im) {
            (Ok(a), Ok(b)) => Complex64::new(a.value, b.value),
            (Err(e), _) | (_, Err(e)) => {
                err.set(Some(e));
                Complex64::new(f64::NAN, f64::NAN)
            }
        }
    };
    let lo = maturity - t;
    let hi = horizon - t;
    let re = integrate(|u| product_or_zero(w(maturity, u - maturity + t), inner(u).re), lo, hi, opts);
    let im = integrate(|u| product_or_zero(w(maturity, u - maturity + t), inner(u).im), lo, hi, opts);
    if let Some(e) = err.take() {
        return Err(e);
    }
    let (re, im) = (re?.value, im?.value);
    if im.abs() > FOURIER_IMAG_TOL * re.abs().max(1.0) {
        return Err(Error::ModelViolation(format!(
            "Fourier evaluation left an imaginary part {im} against real part {re}"
        )));
    }
    Ok(re)
}
