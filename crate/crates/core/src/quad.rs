//! Adaptive Gauss–Kronrod quadrature (7/15 point pair) on finite and
//! infinite intervals.

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

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
}

/// Tolerances and subdivision limit.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]`; either end may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    integrate_dyn(&f, a, b, opts)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::Quadrature("NaN bound".into()));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    if a > b {
        let r = integrate_dyn(f, b, a, opts)?;
        return Ok(Integral {
            value: -r.value,
            abs_error: r.abs_error,
        });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(f, a, b, opts),
        (true, false) => {
            // x = a + t/(1-t)
            let g = |t: f64| {
                let s = 1.0 - t;
                let v = f(a + t / s) / (s * s);
                if v.is_finite() { v } else { 0.0 }
            };
            adapt(&g, 0.0, 1.0, opts)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let v = f(b - t / s) / (s * s);
                if v.is_finite() { v } else { 0.0 }
            };
            adapt(&g, 0.0, 1.0, opts)
        }
        (false, false) => {
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, opts)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, opts)?;
            Ok(Integral {
                value: left.value + right.value,
                abs_error: left.abs_error + right.abs_error,
            })
        }
    }
}

/// Integrates over consecutive pieces `[p0, p1], [p1, p2], ...`, which keeps
/// kinks and discontinuities at the split points away from the nodes.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], opts: QuadOptions) -> Result<Integral> {
    let mut total = Integral {
        value: 0.0,
        abs_error: 0.0,
    };
    for w in points.windows(2) {
        let r = integrate(&f, w[0], w[1], opts)?;
        total.value += r.value;
        total.abs_error += r.abs_error;
    }
    Ok(total)
}

fn adapt<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, opts: QuadOptions) -> Result<Integral> {
    let (v, e) = gk15(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut value = v;
    let mut err = e;
    loop {
        if !value.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            break;
        }
        if intervals.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence after {} subintervals (estimate {value:e}, error {err:e})",
                intervals.len()
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, pv, pe) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval cannot be split further in floating point.
            intervals.push((lo, hi, pv, 0.0));
            err -= pe;
            continue;
        }
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        value += v1 + v2 - pv;
        err += e1 + e2 - pe;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // Re-sum to shed accumulated update error.
    let value = intervals.iter().map(|i| i.2).sum();
    let abs_error = intervals.iter().map(|i| i.3).sum();
    Ok(Integral { value, abs_error })
}
