//! Adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! Infinite and semi-infinite ranges are mapped onto finite intervals before
//! bisection. Subintervals are refined greedily by largest local error until
//! both the absolute and relative tolerances hold.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// When false, an unmet tolerance returns the best estimate instead of
    /// an error. Non-finite results are errors either way.
    pub strict: bool,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 4000,
            strict: true,
        }
    }
}

impl QuadOptions {
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 8000,
            strict: true,
        }
    }

    /// Same tolerances, returning the best estimate when they cannot be met.
    pub fn lenient(self) -> Self {
        Self { strict: false, ..self }
    }
}

/// Result of a quadrature: value and estimated absolute error.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [0.0; 15];
    fv[14] = f(c);
    for j in 0..7 {
        let dx = h * XGK[j];
        fv[2 * j] = f(c - dx);
        fv[2 * j + 1] = f(c + dx);
    }
    let mut kron = fv[14] * WGK[7];
    let mut gauss = fv[14] * WG[3];
    let mut abs = fv[14].abs() * WGK[7];
    for j in 0..7 {
        let s = fv[2 * j] + fv[2 * j + 1];
        kron += WGK[j] * s;
        abs += WGK[j] * (fv[2 * j].abs() + fv[2 * j + 1].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fv[14] - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let (abs, asc) = (abs * h.abs(), asc * h.abs());
    // error scaling and round-off floor as in QUADPACK's qk15
    let mut err = ((kron - gauss) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs);
    }
    (kron * h, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn integrate_finite<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(f, a, b);
    let mut segs = vec![Segment { a, b, value: v, error: e }];
    let mut total = v;
    let mut err = e;
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if segs.len() >= opts.max_intervals {
            break;
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segs.swap_remove(idx);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval can no longer be split in floating point
            segs.push(s);
            break;
        }
        let (v1, e1) = gk15(f, s.a, mid);
        let (v2, e2) = gk15(f, mid, s.b);
        segs.push(Segment { a: s.a, b: mid, value: v1, error: e1 });
        segs.push(Segment { a: mid, b: s.b, value: v2, error: e2 });
        total = segs.iter().map(|s| s.value).sum();
        err = segs.iter().map(|s| s.error).sum();
    }
    let met = err <= opts.abs_tol.max(opts.rel_tol * total.abs());
    if !total.is_finite() || (opts.strict && !met) {
        return Err(Error::Quadrature {
            estimate: total,
            error: err,
        });
    }
    Ok(QuadResult { value: total, error: err })
}

/// Integrate `f` over `[a, b]`; either bound may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_dyn(&f, a, b, opts)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if a > b {
        return integrate_dyn(f, b, a, opts).map(|r| QuadResult {
            value: -r.value,
            error: r.error,
        });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(f, a, b, opts),
        (true, false) => {
            // x = a + s / (1 - s)
            let g = |s: f64| {
                if s >= 1.0 {
                    return 0.0;
                }
                let one_m = 1.0 - s;
                let v = f(a + s / one_m) / (one_m * one_m);
                if v.is_finite() { v } else { 0.0 }
            };
            integrate_finite(&g, 0.0, 1.0, opts)
        }
        (false, true) => {
            let g = |s: f64| {
                if s >= 1.0 {
                    return 0.0;
                }
                let one_m = 1.0 - s;
                let v = f(b - s / one_m) / (one_m * one_m);
                if v.is_finite() { v } else { 0.0 }
            };
            integrate_finite(&g, 0.0, 1.0, opts)
        }
        (false, false) => {
            let lo = integrate_dyn(f, f64::NEG_INFINITY, 0.0, opts)?;
            let hi = integrate_dyn(f, 0.0, f64::INFINITY, opts)?;
            Ok(QuadResult {
                value: lo.value + hi.value,
                error: lo.error + hi.error,
            })
        }
    }
}

/// Integrate over consecutive pieces of a partition and sum.
///
/// Useful when the integrand has a kink or a sharp feature at known points.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    let mut value = 0.0;
    let mut error = 0.0;
    for w in points.windows(2) {
        let r = integrate(&f, w[0], w[1], opts)?;
        value += r.value;
        error += r.error;
    }
    Ok(QuadResult { value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_over_real_line() {
        let r = integrate(
            |x| (-0.5 * x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            QuadOptions::tight(),
        )
        .unwrap();
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let r = integrate(|x| x, 1.0, 0.0, QuadOptions::default()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_intervals: 3,
            strict: true,
        };
        let r = integrate(|x| (1.0 / x).sin(), 1e-3, 1.0, opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
