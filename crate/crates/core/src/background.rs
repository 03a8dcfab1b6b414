//! Background charge distributions and the potentials they generate.
//!
//! Conventions: the interaction kernel is `-|x|/2`, and
//! `minus_potential(x) = alpha * int |x - y|/2 drho(y)` is the (convex)
//! confinement felt by a unit charge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParams;
use crate::potential::{affine, ClosedForm, Piece, Potential1D, Segment};

/// Shape of the background probability measure `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "variant", content = "params")]
pub enum BackgroundVariant {
    /// Uniform on `[a, b]`.
    UniformInterval { a: f64, b: f64 },
    /// Unit density on `[-(alpha+n)/2, 0]` plus `(gamma-1) x^(gamma-2)` on
    /// `[0, ((alpha-n)/2)^(1/(gamma-1))]`; total charge `alpha`.
    GammaFamily { n: usize, gamma: f64 },
    /// Piecewise-linear density through `knots = [(x, density), ...]`.
    FixedDensity { knots: Vec<(f64, f64)> },
}

/// A background measure `alpha * rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct BackgroundSpec {
    #[serde(flatten)]
    pub variant: BackgroundVariant,
    pub alpha: f64,
}

const MASS_TOL: f64 = 1e-9;

impl BackgroundSpec {
    pub fn uniform(a: f64, b: f64, alpha: f64) -> Result<Self> {
        Self::new(BackgroundVariant::UniformInterval { a, b }, alpha)
    }

    pub fn gamma_family(n: usize, gamma: f64, alpha: f64) -> Result<Self> {
        Self::new(BackgroundVariant::GammaFamily { n, gamma }, alpha)
    }

    pub fn fixed_density(knots: Vec<(f64, f64)>, alpha: f64) -> Result<Self> {
        Self::new(BackgroundVariant::FixedDensity { knots }, alpha)
    }

    pub fn new(variant: BackgroundVariant, alpha: f64) -> Result<Self> {
        let s = Self { variant, alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidBackground(format!("alpha must be positive, got {}", self.alpha)));
        }
        match &self.variant {
            BackgroundVariant::UniformInterval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::InvalidBackground(format!("uniform interval needs a < b, got [{a}, {b}]")));
                }
            }
            BackgroundVariant::GammaFamily { n, gamma } => {
                if !(*gamma > 1.0 && gamma.is_finite()) {
                    return Err(Error::InvalidBackground(format!("gamma family needs gamma > 1, got {gamma}")));
                }
                if self.alpha < *n as f64 {
                    return Err(Error::InvalidBackground(format!(
                        "gamma family needs alpha >= n, got alpha = {} and n = {n}",
                        self.alpha
                    )));
                }
            }
            BackgroundVariant::FixedDensity { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidBackground("fixed density needs at least two knots".into()));
                }
                for w in knots.windows(2) {
                    if !(w[0].0 < w[1].0) {
                        return Err(Error::InvalidBackground("knot positions must increase strictly".into()));
                    }
                }
                for &(x, d) in knots {
                    if !(x.is_finite() && d.is_finite()) {
                        return Err(Error::InvalidBackground("knots must be finite".into()));
                    }
                    if d < 0.0 {
                        return Err(Error::InvalidBackground(format!("negative density {d} at {x}")));
                    }
                }
                if knots[knots.len() - 1].0 > 0.0 {
                    return Err(Error::InvalidBackground("fixed density must be supported in (-inf, 0]".into()));
                }
                let mass = trapezoid_mass(knots);
                if (mass - 1.0).abs() > MASS_TOL {
                    return Err(Error::InvalidBackground(format!("density integrates to {mass}, not 1")));
                }
            }
        }
        Ok(())
    }

    /// Support `[lo, hi]` of `rho`.
    pub fn support(&self) -> (f64, f64) {
        match &self.variant {
            BackgroundVariant::UniformInterval { a, b } => (*a, *b),
            BackgroundVariant::GammaFamily { n, gamma } => {
                let (l, r) = gamma_edges(*n, *gamma, self.alpha);
                (-l, r)
            }
            BackgroundVariant::FixedDensity { knots } => (knots[0].0, knots[knots.len() - 1].0),
        }
    }

    /// The convex potential `alpha * int |x - y|/2 drho(y)` as a piecewise
    /// closed form.
    pub fn potential(&self) -> Potential1D {
        let alpha = self.alpha;
        let (segments, tag) = match &self.variant {
            BackgroundVariant::UniformInterval { a, b } => {
                let (a, b) = (*a, *b);
                let m = 0.5 * (a + b);
                let w = b - a;
                let edge = alpha * w / 4.0;
                (
                    vec![
                        Segment {
                            lo: f64::NEG_INFINITY,
                            hi: a,
                            piece: affine(a, edge, -alpha / 2.0),
                        },
                        Segment {
                            lo: a,
                            hi: b,
                            piece: Piece::Poly {
                                x0: m,
                                c: [alpha * w / 8.0, 0.0, alpha / (2.0 * w), 0.0],
                            },
                        },
                        Segment {
                            lo: b,
                            hi: f64::INFINITY,
                            piece: affine(b, edge, alpha / 2.0),
                        },
                    ],
                    ClosedForm::UniformClosed,
                )
            }
            BackgroundVariant::GammaFamily { n, gamma } => {
                let g = *gamma;
                let nf = *n as f64;
                let (l, r) = gamma_edges(*n, g, alpha);
                let c = 0.5 * (l * l / 2.0 + (g - 1.0) * r.powf(g) / g);
                let quad = Piece::Poly {
                    x0: 0.0,
                    c: [c, nf / 2.0, 0.5, 0.0],
                };
                let pow = Piece::Power {
                    x0: 0.0,
                    c0: c,
                    c1: nf / 2.0,
                    c2: 1.0 / g,
                    gamma: g,
                };
                let mut segs = vec![
                    Segment {
                        lo: f64::NEG_INFINITY,
                        hi: -l,
                        piece: affine(-l, quad.value(-l), -alpha / 2.0),
                    },
                    Segment {
                        lo: -l,
                        hi: 0.0,
                        piece: quad,
                    },
                ];
                if r > 0.0 {
                    segs.push(Segment {
                        lo: 0.0,
                        hi: r,
                        piece: pow,
                    });
                }
                segs.push(Segment {
                    lo: r,
                    hi: f64::INFINITY,
                    piece: affine(r, pow.value(r), alpha / 2.0),
                });
                (segs, ClosedForm::GammaClosed)
            }
            BackgroundVariant::FixedDensity { knots } => (fixed_density_segments(knots, alpha), ClosedForm::PiecewiseClosed),
        };
        Potential1D::new(segments, tag).expect("background potentials are well formed")
    }

    /// `-alpha U_rho(x) = alpha int |x - y|/2 drho(y)`.
    pub fn minus_potential(&self, x: f64) -> Result<f64> {
        self.validate()?;
        let v = self.potential().value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonIntegrableBackground)
        }
    }

    /// `(alpha/2) int sign(x - y) drho(y)`, the derivative of `minus_potential`.
    pub fn electric_field(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.potential().slope(x))
    }

    /// `W(rho) = -1/4 int int |x - y| drho drho`, per unit charge.
    pub fn self_energy(&self) -> Result<f64> {
        self.validate()?;
        Ok(match &self.variant {
            BackgroundVariant::UniformInterval { a, b } => -(b - a) / 12.0,
            BackgroundVariant::GammaFamily { n, gamma } => {
                // int Phi dmu with Phi the charge-alpha potential, then
                // W = -(1/(2 alpha^2)) int Phi dmu.
                let g = *gamma;
                let nf = *n as f64;
                let (l, r) = gamma_edges(*n, g, self.alpha);
                let c = 0.5 * (l * l / 2.0 + (g - 1.0) * r.powf(g) / g);
                let flat = l.powi(3) / 6.0 - nf * l * l / 4.0 + c * l;
                let power = (g - 1.0) / g * r.powf(2.0 * g - 1.0) / (2.0 * g - 1.0)
                    + 0.5 * nf * (g - 1.0) * r.powf(g) / g
                    + c * r.powf(g - 1.0);
                -(flat + power) / (2.0 * self.alpha * self.alpha)
            }
            BackgroundVariant::FixedDensity { knots } => {
                let pot = Potential1D::new(fixed_density_segments(knots, 1.0), ClosedForm::PiecewiseClosed)
                    .expect("well formed");
                let mass = trapezoid_mass(knots);
                // Three-point Gauss-Legendre is exact for cubic times linear.
                let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
                let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
                let mut acc = 0.0;
                for w in knots.windows(2) {
                    let ((x0, d0), (x1, d1)) = (w[0], w[1]);
                    let h = x1 - x0;
                    for (t, wt) in nodes.iter().zip(weights) {
                        let x = x0 + 0.5 * h * (1.0 + t);
                        let d = d0 + (d1 - d0) * 0.5 * (1.0 + t);
                        acc += 0.5 * h * wt * pot.value(x) * d / mass;
                    }
                }
                -acc / 2.0
            }
        })
    }

    /// Potential of the `i`-th largest particle after the ordering rewrite:
    /// `((2i - 1 - n)/2) x + minus_potential(x)`.
    pub fn per_particle_potential(&self, params: &GasParams, i: usize) -> Result<Potential1D> {
        self.validate()?;
        params.check_background(self)?;
        if i == 0 || i > params.n {
            return Err(Error::IndexOutOfRange { index: i, len: params.n });
        }
        let tilt = (2.0 * i as f64 - 1.0 - params.n as f64) / 2.0;
        Ok(self.potential().add_linear(tilt, 0.0))
    }

    /// Image of the background under `x -> sigma x`.
    pub fn dilate(&self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("dilation factor must be positive, got {sigma}")));
        }
        let variant = match &self.variant {
            BackgroundVariant::UniformInterval { a, b } => BackgroundVariant::UniformInterval {
                a: sigma * a,
                b: sigma * b,
            },
            BackgroundVariant::FixedDensity { knots } => BackgroundVariant::FixedDensity {
                knots: knots.iter().map(|&(x, d)| (sigma * x, d / sigma)).collect(),
            },
            BackgroundVariant::GammaFamily { .. } => {
                return Err(Error::InvalidParameter(
                    "dilation of a gamma-family background leaves the family".into(),
                ))
            }
        };
        Self::new(variant, self.alpha)
    }
}

/// `(L, R)` with flat part `[-L, 0]` and power part `[0, R]`.
fn gamma_edges(n: usize, gamma: f64, alpha: f64) -> (f64, f64) {
    let nf = n as f64;
    let l = (alpha + nf) / 2.0;
    let r = ((alpha - nf) / 2.0).max(0.0).powf(1.0 / (gamma - 1.0));
    (l, r)
}

fn trapezoid_mass(knots: &[(f64, f64)]) -> f64 {
    knots.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

/// Piecewise-cubic potential of charge `alpha` times the normalized
/// piecewise-linear density.
fn fixed_density_segments(knots: &[(f64, f64)], alpha: f64) -> Vec<Segment> {
    let mass = trapezoid_mass(knots);
    let dens: Vec<f64> = knots.iter().map(|k| k.1 / mass).collect();
    let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
    let m = xs.len();
    // Mean of rho, which fixes Phi at the left end: Phi(x0) = (mean - x0)/2.
    let mut mean = 0.0;
    for j in 0..m - 1 {
        let h = xs[j + 1] - xs[j];
        let s = (dens[j + 1] - dens[j]) / h;
        mean += xs[j] * h * (dens[j] + dens[j + 1]) / 2.0 + dens[j] * h * h / 2.0 + s * h * h * h / 3.0;
    }
    let mut segs = Vec::with_capacity(m + 1);
    let mut phi = 0.5 * (mean - xs[0]);
    let mut cdf = 0.0;
    segs.push(Segment {
        lo: f64::NEG_INFINITY,
        hi: xs[0],
        piece: affine(xs[0], alpha * phi, -alpha / 2.0),
    });
    for j in 0..m - 1 {
        let h = xs[j + 1] - xs[j];
        let d0 = dens[j];
        let d1 = dens[j + 1];
        let c = [phi, cdf - 0.5, d0 / 2.0, (d1 - d0) / (6.0 * h)];
        segs.push(Segment {
            lo: xs[j],
            hi: xs[j + 1],
            piece: Piece::Poly {
                x0: xs[j],
                c: c.map(|v| alpha * v),
            },
        });
        phi = c[0] + h * (c[1] + h * (c[2] + h * c[3]));
        cdf += h * (d0 + d1) / 2.0;
    }
    segs.push(Segment {
        lo: xs[m - 1],
        hi: f64::INFINITY,
        piece: affine(xs[m - 1], alpha * phi, alpha / 2.0),
    });
    segs
}
