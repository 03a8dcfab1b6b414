//! Exact sampling from `exp(-beta V)` for convex `V`, optionally truncated
//! to a window.
//!
//! Draws use adaptive rejection with tangent-line envelopes of the concave
//! log-density. The untruncated envelope is built once; truncated draws
//! build a small envelope per call and refine it on each rejection.

use rand::Rng;

use crate::error::{Error, Result};
use crate::potential::Potential1D;

const LEVELS: [f64; 7] = [0.25, 1.0, 2.5, 5.0, 9.0, 16.0, 30.0];
const WINDOW_CAP: usize = 24;

#[derive(Debug, Clone, Copy)]
struct Tangent {
    x: f64,
    h: f64,
    s: f64,
}

#[derive(Debug, Clone, Copy)]
struct EnvPiece {
    a: f64,
    b: f64,
    t: Tangent,
    log_mass: f64,
    /// `1 - exp(-|s| (b - a))`, or the width for a flat piece.
    c: f64,
    /// The envelope coincides with the density on this piece.
    exact: bool,
}

#[inline]
fn is_flat(s: f64, w: f64) -> bool {
    s == 0.0 || (s * w).abs() < 1e-12
}

#[inline]
fn piece_log_mass(a: f64, b: f64, t: &Tangent) -> f64 {
    let w = b - a;
    if w <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let sw = t.s * w;
    if t.s == 0.0 || sw.abs() < 1e-12 {
        let mid = if w.is_finite() { 0.5 * (a + b) } else { t.x };
        return t.h + t.s * (mid - t.x) + w.ln();
    }
    if t.s > 0.0 {
        t.h + t.s * (b - t.x) + (-(-sw).exp_m1()).ln() - t.s.ln()
    } else {
        t.h + t.s * (a - t.x) + (-sw.exp_m1()).ln() - (-t.s).ln()
    }
}

#[inline]
fn piece_draw(p: &EnvPiece, v: f64) -> f64 {
    let s = p.t.s;
    let x = if is_flat(s, p.b - p.a) {
        p.a + v * p.c
    } else if s > 0.0 {
        p.b + (-v * p.c).ln_1p() / s
    } else {
        p.a + (-v * p.c).ln_1p() / s
    };
    x.clamp(p.a, p.b)
}

/// Accepts with probability `exp(delta)`, `delta <= 0`, given `u` uniform on
/// `(0, 1]`; the logarithm is only evaluated when the bounds
/// `1 - 1/u <= ln u <= u - 1` do not decide.
#[inline]
fn accept(u: f64, delta: f64) -> bool {
    if u - 1.0 <= delta {
        true
    } else if 1.0 - 1.0 / u > delta {
        false
    } else {
        u.ln() <= delta
    }
}

/// Builds envelope pieces from tangents sorted by abscissa over `[lo, hi]`.
fn build_pieces(pot: &Potential1D, tangents: &[Tangent], lo: f64, hi: f64, out: &mut Vec<EnvPiece>) {
    out.clear();
    let m = tangents.len();
    let mut a = lo;
    for j in 0..m {
        let t = tangents[j];
        let b = if j + 1 == m {
            hi
        } else {
            let u = tangents[j + 1];
            let z = if (t.s - u.s).abs() > 1e-300 {
                (u.h - t.h - u.x * u.s + t.x * t.s) / (t.s - u.s)
            } else {
                0.5 * (t.x + u.x)
            };
            if z.is_finite() {
                z.clamp(t.x, u.x)
            } else {
                0.5 * (t.x + u.x)
            }
        };
        let b = b.max(a);
        let w = b - a;
        let c = if is_flat(t.s, w) { w } else { -(-(t.s.abs() * w)).exp_m1() };
        let exact = pot.is_affine_on(a.min(t.x), b.max(t.x));
        out.push(EnvPiece {
            a,
            b,
            t,
            log_mass: piece_log_mass(a, b, &t),
            c,
            exact,
        });
        a = b;
    }
}

/// Picks a piece proportionally to its mass and returns `(index, uniform)`,
/// the uniform being fresh for the within-piece draw.
#[inline]
fn choose(cum: &[f64], u: f64) -> (usize, f64) {
    let total = cum[cum.len() - 1];
    let target = u * total;
    let j = cum.partition_point(|&c| c <= target).min(cum.len() - 1);
    let prev = if j == 0 { 0.0 } else { cum[j - 1] };
    let width = cum[j] - prev;
    let v = if width > 0.0 { ((target - prev) / width).clamp(0.0, 1.0) } else { 0.5 };
    (j, v)
}

fn cumulative(pieces: &[EnvPiece], out: &mut Vec<f64>) {
    out.clear();
    let top = pieces.iter().map(|p| p.log_mass).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    for p in pieces {
        acc += (p.log_mass - top).exp();
        out.push(acc);
    }
}

/// Reusable buffers for truncated draws.
#[derive(Debug, Default, Clone)]
pub struct WindowWorkspace {
    tangents: Vec<Tangent>,
    pieces: Vec<EnvPiece>,
    cum: Vec<f64>,
}

/// Exact sampler for the density proportional to `exp(-beta V)`.
#[derive(Debug, Clone)]
pub struct LogConcaveSampler {
    pot: Potential1D,
    beta: f64,
    mode: f64,
    v_mode: f64,
    /// Distance scale used to place a second tangent near an interior mode.
    left_scale: f64,
    right_scale: f64,
    pieces: Vec<EnvPiece>,
    cum: Vec<f64>,
}

impl LogConcaveSampler {
    pub fn new(pot: Potential1D, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        pot.require_confining()?;
        let mode = pot.mode()?;
        let v_mode = pot.value(mode);
        let (lo, hi) = pot.domain();
        let mut xs = vec![mode];
        for &l in &LEVELS {
            let target = v_mode + l / beta;
            for dir in [-1.0, 1.0] {
                let x = pot.level_crossing(mode, target, dir);
                if x.is_finite() {
                    xs.push(x);
                }
            }
        }
        let x1l = pot.level_crossing(mode, v_mode + 1.0 / beta, -1.0);
        let x1r = pot.level_crossing(mode, v_mode + 1.0 / beta, 1.0);
        let left_scale = if x1l.is_finite() { mode - x1l } else { 1.0 };
        let right_scale = if x1r.is_finite() { x1r - mode } else { 1.0 };
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let tangents: Vec<Tangent> = xs
            .iter()
            .map(|&x| {
                let (v, d) = pot.value_and_slope(x);
                Tangent {
                    x,
                    h: -beta * (v - v_mode),
                    s: -beta * d,
                }
            })
            .collect();
        if lo == f64::NEG_INFINITY && !(tangents[0].s > 0.0) {
            return Err(Error::NonNormalizableDensity("left tail does not decay".into()));
        }
        if hi == f64::INFINITY && !(tangents[tangents.len() - 1].s < 0.0) {
            return Err(Error::NonNormalizableDensity("right tail does not decay".into()));
        }
        let mut pieces = Vec::new();
        build_pieces(&pot, &tangents, lo, hi, &mut pieces);
        let mut cum = Vec::new();
        cumulative(&pieces, &mut cum);
        Ok(Self {
            pot,
            beta,
            mode,
            v_mode,
            left_scale,
            right_scale,
            pieces,
            cum,
        })
    }

    pub fn potential(&self) -> &Potential1D {
        &self.pot
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mode(&self) -> f64 {
        self.mode
    }

    #[inline]
    fn log_density(&self, x: f64) -> f64 {
        -self.beta * (self.pot.value(x) - self.v_mode)
    }

    /// One exact draw from the untruncated density.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let (j, v) = choose(&self.cum, rng.random::<f64>());
            let p = &self.pieces[j];
            let x = piece_draw(p, v);
            if p.exact {
                return x;
            }
            let env = p.t.h + p.t.s * (x - p.t.x);
            let u = 1.0 - rng.random::<f64>();
            if accept(u, self.log_density(x) - env) {
                return x;
            }
        }
    }

    /// One exact draw from the density truncated to `[lo, hi]`.
    pub fn sample_window<R: Rng + ?Sized>(&self, lo: f64, hi: f64, ws: &mut WindowWorkspace, rng: &mut R) -> f64 {
        let (dlo, dhi) = self.pot.domain();
        let lo = lo.max(dlo);
        let hi = hi.min(dhi);
        if !(lo < hi) {
            return lo;
        }
        if lo <= dlo && hi >= dhi {
            return self.sample(rng);
        }
        let xc = self.mode.clamp(lo, hi);
        let (_, sc) = self.pot.value_and_slope(xc);
        let mut xs = [xc, f64::NAN, f64::NAN];
        if lo < xc {
            let step = if xc == self.mode {
                self.left_scale
            } else {
                (1.0 / (self.beta * sc.abs())).min(self.left_scale + self.right_scale + (xc - self.mode).abs())
            };
            xs[0] = (xc - step).max(lo);
            xs[1] = xc;
        }
        if xc < hi {
            let step = if xc == self.mode {
                self.right_scale
            } else {
                (1.0 / (self.beta * sc.abs())).min(self.left_scale + self.right_scale + (xc - self.mode).abs())
            };
            xs[2] = (xc + step).min(hi);
        }
        ws.tangents.clear();
        for &x in xs.iter().filter(|x| x.is_finite()) {
            self.insert_tangent(x, ws);
        }
        self.fix_infinite_ends(lo, hi, ws);
        build_pieces(&self.pot, &ws.tangents, lo, hi, &mut ws.pieces);
        cumulative(&ws.pieces, &mut ws.cum);
        loop {
            let (j, v) = choose(&ws.cum, rng.random::<f64>());
            let p = ws.pieces[j];
            let x = piece_draw(&p, v);
            if p.exact {
                return x;
            }
            let env = p.t.h + p.t.s * (x - p.t.x);
            let u = 1.0 - rng.random::<f64>();
            if accept(u, self.log_density(x) - env) {
                return x;
            }
            if ws.tangents.len() < WINDOW_CAP && self.insert_tangent(x, ws) {
                build_pieces(&self.pot, &ws.tangents, lo, hi, &mut ws.pieces);
                cumulative(&ws.pieces, &mut ws.cum);
            }
        }
    }

    fn insert_tangent(&self, x: f64, ws: &mut WindowWorkspace) -> bool {
        let pos = ws.tangents.partition_point(|t| t.x < x);
        if ws.tangents.get(pos).is_some_and(|t| t.x == x) {
            return false;
        }
        let (v, d) = self.pot.value_and_slope(x);
        ws.tangents.insert(
            pos,
            Tangent {
                x,
                h: -self.beta * (v - self.v_mode),
                s: -self.beta * d,
            },
        );
        true
    }

    fn fix_infinite_ends(&self, lo: f64, hi: f64, ws: &mut WindowWorkspace) {
        if lo == f64::NEG_INFINITY && !(ws.tangents[0].s > 0.0) {
            let x0 = ws.tangents[0].x;
            let x = self.pot.level_crossing(x0, self.pot.value(x0) + 2.0 / self.beta, -1.0);
            self.insert_tangent(x, ws);
        }
        if hi == f64::INFINITY && !(ws.tangents[ws.tangents.len() - 1].s < 0.0) {
            let x0 = ws.tangents[ws.tangents.len() - 1].x;
            let x = self.pot.level_crossing(x0, self.pot.value(x0) + 2.0 / self.beta, 1.0);
            self.insert_tangent(x, ws);
        }
    }

    /// Log of the envelope mass; the acceptance probability of untruncated
    /// draws is `exp(log_normalizer - envelope_log_mass)`.
    pub fn envelope_log_mass(&self) -> f64 {
        let top = self.pieces.iter().map(|p| p.log_mass).fold(f64::NEG_INFINITY, f64::max);
        top + self.cum[self.cum.len() - 1].ln() - self.beta * self.v_mode
    }

    /// `log of the integral of exp(-beta V)`, by quadrature.
    pub fn log_normalizer(&self) -> Result<f64> {
        use crate::quad::{integrate_pieces, QuadOptions};
        let (lo, hi) = self.pot.domain();
        let mut pts = vec![lo];
        // Split at the envelope abscissae so that the bulk of the mass is
        // resolved on moderately sized intervals.
        for p in &self.pieces[1..] {
            if p.a > lo && p.a < hi {
                pts.push(p.a);
            }
        }
        pts.extend(self.pot.breakpoints().filter(|&b| b > lo && b < hi));
        pts.push(self.mode);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        // Geometric steps into infinite tails, so heavy tails with a large
        // scale are not squeezed into a fixed-scale transform.
        if pts.len() >= 3 {
            let mut extra = Vec::new();
            if lo == f64::NEG_INFINITY {
                let (a, b) = (pts[1], pts[2]);
                let mut d = if (b - a).is_finite() { (b - a).max(1e-12) } else { 1.0 };
                let mut x = a - d;
                while self.log_density(x) > -750.0 && x.is_finite() {
                    extra.push(x);
                    d *= 2.0;
                    x = a - d;
                }
            }
            let k = pts.len();
            if hi == f64::INFINITY {
                let (a, b) = (pts[k - 3], pts[k - 2]);
                let mut d = if (b - a).is_finite() { (b - a).max(1e-12) } else { 1.0 };
                let mut x = b + d;
                while self.log_density(x) > -750.0 && x.is_finite() {
                    extra.push(x);
                    d *= 2.0;
                    x = b + d;
                }
            }
            pts.extend(extra);
            pts.sort_by(f64::total_cmp);
        }
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 4000,
        };
        let r = integrate_pieces(|x| self.log_density(x).exp(), &pts, opts)?;
        Ok(r.value.ln() - self.beta * self.v_mode)
    }
}
