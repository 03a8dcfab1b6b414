//! Tails of slowly converging positive series.

use crate::quad::{integrate, QuadOptions};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Returns `sum_{i >= from} f(i)` for a smooth, eventually monotone `f`
/// decaying at least like `1/i^2`.
///
/// Terms below `max(from, 256)` are summed explicitly; the rest uses the
/// Euler–Maclaurin formula with the integral done by quadrature and the
/// derivative correction by a central difference.
pub fn series_tail<F: Fn(f64) -> f64>(f: F, from: u64) -> f64 {
    let from = from.max(1);
    let k = from.max(256);
    let mut head = 0.0;
    for i in from..k {
        head += f(i as f64);
    }
    let kf = k as f64;
    // sum_{i>=K} f(i) = int_K^inf f + f(K)/2 - f'(K)/12 + f'''(K)/720 - ...
    let opts = QuadOptions {
        abs_tol: 1e-18,
        rel_tol: 1e-13,
        max_intervals: 2000,
    };
    // Integrate in t = K/x to map [K, inf) onto (0, 1].
    let integral = integrate(|t: f64| if t <= 0.0 { 0.0 } else { f(kf / t) * kf / (t * t) }, 0.0, 1.0, opts)
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    let h = 1e-4 * kf;
    let d1 = (f(kf + h) - f(kf - h)) / (2.0 * h);
    head + integral + 0.5 * f(kf) - d1 / 12.0
}

/// `sum_{i >= from} 1/(i (c + i))` for `c > -1`.
pub fn tilted_tail(c: f64, from: u64) -> f64 {
    series_tail(|i| 1.0 / (i * (c + i)), from)
}

/// `sum_{i >= from} 1/(i (c + i))^2` for `c > -1`.
pub fn tilted_tail_sq(c: f64, from: u64) -> f64 {
    series_tail(
        |i| {
            let t = 1.0 / (i * (c + i));
            t * t
        },
        from,
    )
}
