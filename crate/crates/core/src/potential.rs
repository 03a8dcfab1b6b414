//! Convex, piecewise-smooth confining potentials on the line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a potential was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedForm {
    /// Uniform background: affine, quadratic, affine.
    UniformClosed,
    /// Gamma-family background: quadratic and power pieces.
    GammaClosed,
    /// Piecewise-linear background density: piecewise cubic potential.
    PiecewiseClosed,
    /// Limiting edge potential (quadratic, power and affine pieces, possibly a hard wall).
    LimitClosed,
}

/// A smooth piece of a potential, written in the local coordinate `t = x - x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// `c[0] + c[1] t + c[2] t^2 + c[3] t^3`.
    Poly { x0: f64, c: [f64; 4] },
    /// `c0 + c1 t + c2 t^gamma`, valid for `t >= 0`.
    Power {
        x0: f64,
        c0: f64,
        c1: f64,
        c2: f64,
        gamma: f64,
    },
}

impl Piece {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Piece::Poly { x0, c } => {
                let t = x - x0;
                c[0] + t * (c[1] + t * (c[2] + t * c[3]))
            }
            Piece::Power { x0, c0, c1, c2, gamma } => {
                let t = (x - x0).max(0.0);
                c0 + c1 * t + c2 * t.powf(gamma)
            }
        }
    }

    #[inline]
    pub fn value_and_slope(&self, x: f64) -> (f64, f64) {
        match *self {
            Piece::Poly { x0, c } => {
                let t = x - x0;
                (
                    c[0] + t * (c[1] + t * (c[2] + t * c[3])),
                    c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]),
                )
            }
            Piece::Power { x0, c0, c1, c2, gamma } => {
                let t = (x - x0).max(0.0);
                if t == 0.0 {
                    return (c0, c1);
                }
                let p = t.powf(gamma - 1.0);
                (c0 + c1 * t + c2 * p * t, c1 + c2 * gamma * p)
            }
        }
    }

    fn add_linear(&mut self, slope: f64, offset: f64) {
        match self {
            Piece::Poly { x0, c } => {
                c[0] += offset + slope * *x0;
                c[1] += slope;
            }
            Piece::Power { x0, c0, c1, .. } => {
                *c0 += offset + slope * *x0;
                *c1 += slope;
            }
        }
    }

    fn scale(&mut self, s: f64) {
        match self {
            Piece::Poly { c, .. } => c.iter_mut().for_each(|v| *v *= s),
            Piece::Power { c0, c1, c2, .. } => {
                *c0 *= s;
                *c1 *= s;
                *c2 *= s;
            }
        }
    }

    /// Slope as `x -> +inf` in the sense of growth: positive means confining.
    fn right_growth(&self) -> f64 {
        match *self {
            Piece::Poly { c, .. } => {
                if c[3] != 0.0 {
                    c[3]
                } else if c[2] != 0.0 {
                    c[2]
                } else {
                    c[1]
                }
            }
            Piece::Power { c1, c2, .. } => {
                if c2 != 0.0 {
                    c2
                } else {
                    c1
                }
            }
        }
    }

    fn left_growth(&self) -> f64 {
        match *self {
            Piece::Poly { c, .. } => {
                if c[3] != 0.0 {
                    -c[3]
                } else if c[2] != 0.0 {
                    c[2]
                } else {
                    -c[1]
                }
            }
            Piece::Power { .. } => f64::NAN,
        }
    }
}

/// A piece together with the interval where it applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub piece: Piece,
}

/// A continuous convex potential, `+inf` outside its domain.
///
/// Segments are contiguous and ordered; the first may start at `-inf`
/// and the last may end at `+inf`. A finite domain end acts as a hard wall.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential1D {
    segments: Vec<Segment>,
    tag: ClosedForm,
}

impl Potential1D {
    pub fn new(segments: Vec<Segment>, tag: ClosedForm) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("potential with no segments".into()));
        }
        for w in segments.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::InvalidParameter("potential segments are not contiguous".into()));
            }
        }
        for s in &segments {
            if !(s.lo < s.hi) {
                return Err(Error::InvalidParameter(format!("empty segment [{}, {}]", s.lo, s.hi)));
            }
            if let Piece::Power { x0, gamma, .. } = s.piece {
                if s.lo < x0 || gamma <= 1.0 {
                    return Err(Error::InvalidParameter("power piece must start at its origin with gamma > 1".into()));
                }
            }
        }
        Ok(Self { segments, tag })
    }

    pub fn tag(&self) -> ClosedForm {
        self.tag
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.segments[0].lo, self.segments[self.segments.len() - 1].hi)
    }

    /// Interior segment boundaries.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments[1..].iter().map(|s| s.lo)
    }

    #[inline]
    fn locate(&self, x: f64) -> Option<&Segment> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let idx = self.segments.partition_point(|s| s.hi < x);
        self.segments.get(idx.min(self.segments.len() - 1))
    }

    /// `V(x)`, or `+inf` outside the domain.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some(s) => s.piece.value(x),
            None => f64::INFINITY,
        }
    }

    /// `(V(x), V'(x))`; the derivative is one-sided at breakpoints.
    #[inline]
    pub fn value_and_slope(&self, x: f64) -> (f64, f64) {
        match self.locate(x) {
            Some(s) => s.piece.value_and_slope(x),
            None => (f64::INFINITY, f64::NAN),
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.value_and_slope(x).1
    }

    /// Whether `V` is affine on `[a, b]` (a single affine segment covers it).
    pub fn is_affine_on(&self, a: f64, b: f64) -> bool {
        let (lo, hi) = self.domain();
        if !(a >= lo && b <= hi && a <= b) {
            return false;
        }
        let idx = self.segments.partition_point(|s| s.hi < a).min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        if b > seg.hi {
            return false;
        }
        matches!(seg.piece, Piece::Poly { c, .. } if c[2] == 0.0 && c[3] == 0.0)
    }

    /// Adds `slope * x + offset`.
    pub fn add_linear(mut self, slope: f64, offset: f64) -> Self {
        for s in &mut self.segments {
            s.piece.add_linear(slope, offset);
        }
        self
    }

    /// Multiplies the potential by `s > 0`.
    pub fn scaled(mut self, s: f64) -> Self {
        for seg in &mut self.segments {
            seg.piece.scale(s);
        }
        self
    }

    /// Whether `exp(-beta V)` is integrable for `beta > 0`.
    pub fn is_confining(&self) -> bool {
        let (lo, hi) = self.domain();
        let first = &self.segments[0].piece;
        let last = &self.segments[self.segments.len() - 1].piece;
        let left_ok = lo.is_finite() || first.left_growth() > 0.0;
        let right_ok = hi.is_finite() || last.right_growth() > 0.0;
        left_ok && right_ok
    }

    /// Checks normalizability, returning a diagnostic otherwise.
    pub fn require_confining(&self) -> Result<()> {
        if self.is_confining() {
            Ok(())
        } else {
            Err(Error::NonNormalizableDensity(
                "potential does not grow to +inf in both directions".into(),
            ))
        }
    }

    /// The minimiser of `V` over its domain (leftmost one if `V` is flat there).
    pub fn mode(&self) -> Result<f64> {
        self.require_confining()?;
        let (dlo, _) = self.domain();
        for s in &self.segments {
            let hi_slope = if s.hi.is_finite() {
                s.piece.value_and_slope(s.hi).1
            } else {
                f64::INFINITY
            };
            if hi_slope < 0.0 {
                continue;
            }
            let lo_slope = if s.lo.is_finite() {
                s.piece.value_and_slope(s.lo).1
            } else {
                f64::NEG_INFINITY
            };
            if lo_slope >= 0.0 {
                return Ok(if s.lo.is_finite() { s.lo } else { dlo });
            }
            return Ok(find_slope_root(&s.piece, s.lo, s.hi));
        }
        unreachable!("confining potential has a nonnegative slope somewhere")
    }

    /// Solves `V(x) = target` on the side of `from` given by `dir` (+1 right,
    /// -1 left), where `V(from) <= target`. Returns the domain end if the
    /// level is not reached before a wall.
    pub fn level_crossing(&self, from: f64, target: f64, dir: f64) -> f64 {
        let (lo, hi) = self.domain();
        let wall = if dir > 0.0 { hi } else { lo };
        if wall.is_finite() && self.value(wall) <= target {
            return wall;
        }
        let mut a = from;
        let mut step = 1.0f64.max(from.abs() * 1e-3);
        let mut b = from + dir * step;
        loop {
            if wall.is_finite() && (b - wall) * dir >= 0.0 {
                b = wall;
                break;
            }
            if self.value(b) >= target {
                break;
            }
            a = b;
            step *= 2.0;
            b = from + dir * step;
            if !b.is_finite() {
                return b;
            }
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            if self.value(m) >= target {
                b = m;
            } else {
                a = m;
            }
        }
        b
    }
}

fn find_slope_root(p: &Piece, lo: f64, hi: f64) -> f64 {
    let slope = |x: f64| p.value_and_slope(x).1;
    let mut a = lo;
    let mut b = hi;
    if !a.is_finite() {
        let base = if b.is_finite() { b } else { 0.0 };
        let mut step = 1.0;
        a = base - step;
        while slope(a) > 0.0 {
            step *= 2.0;
            a = base - step;
        }
    }
    if !b.is_finite() {
        let mut step = 1.0;
        b = a + step;
        while slope(b) < 0.0 {
            step *= 2.0;
            b = a + step;
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if slope(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Affine piece `value + slope (x - x0)`.
pub fn affine(x0: f64, value: f64, slope: f64) -> Piece {
    Piece::Poly {
        x0,
        c: [value, slope, 0.0, 0.0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_zero(tilt: f64) -> Potential1D {
        Potential1D::new(
            vec![
                Segment {
                    lo: f64::NEG_INFINITY,
                    hi: 0.0,
                    piece: Piece::Poly {
                        x0: 0.0,
                        c: [0.0, tilt, 0.5, 0.0],
                    },
                },
                Segment {
                    lo: 0.0,
                    hi: f64::INFINITY,
                    piece: affine(0.0, 0.0, tilt),
                },
            ],
            ClosedForm::LimitClosed,
        )
        .unwrap()
    }

    #[test]
    fn evaluates_and_finds_mode() {
        let v = square_zero(1.5);
        assert_eq!(v.value(-1.0), 0.5 - 1.5);
        assert_eq!(v.value(2.0), 3.0);
        assert!((v.mode().unwrap() + 1.5).abs() < 1e-12);
        let w = square_zero(-0.5);
        assert!(!w.is_confining());
        assert!(w.mode().is_err());
    }

    #[test]
    fn hard_wall_mode() {
        let v = Potential1D::new(
            vec![Segment {
                lo: 0.0,
                hi: f64::INFINITY,
                piece: affine(0.0, 0.0, 2.0),
            }],
            ClosedForm::LimitClosed,
        )
        .unwrap();
        assert_eq!(v.mode().unwrap(), 0.0);
        assert_eq!(v.value(-1e-9), f64::INFINITY);
        let x = v.level_crossing(0.0, 3.0, 1.0);
        assert!((x - 1.5).abs() < 1e-12);
        assert_eq!(v.level_crossing(0.0, 3.0, -1.0), 0.0);
    }

    #[test]
    fn power_piece_slope() {
        let p = Piece::Power {
            x0: 0.0,
            c0: 1.0,
            c1: 0.5,
            c2: 2.0 / 3.0,
            gamma: 1.5,
        };
        let (v, d) = p.value_and_slope(4.0);
        assert!((v - (1.0 + 2.0 + 2.0 / 3.0 * 8.0)).abs() < 1e-12);
        assert!((d - (0.5 + 2.0)).abs() < 1e-12);
        assert_eq!(p.value_and_slope(0.0), (1.0, 0.5));
    }
}
