//! Limiting edge point processes and samplers for them.
//!
//! Three families of potentials arise at the right edge of the gas:
//!
//! * `HalfWell(lambda)`: hard wall at 0, `V_i(x) = (i - 1 + lambda) x` on `x >= 0`;
//! * `SquaredZero(lambda)`: `V_i(x) = x^2/2 1{x<0} + (i - 1 + lambda) x`;
//! * `SquaredGamma(gamma)`: `V_i(x) = x^2/2 1{x<0} + x^gamma/gamma 1{x>=0} + (i - 1/2) x`.
//!
//! The edge process is the limit as `m -> inf` of the top `k` of
//! `Y_1, ..., Y_m` (densities `exp(-beta V_i)`) conditioned on
//! `Y_m <= ... <= Y_1`. For the half-well the gaps are independent
//! exponentials, which gives an exact sampler.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::background::{BackgroundSpec, BackgroundVariant};
use crate::error::{Error, Result};
use crate::gas::{Gas, GasParams};
use crate::ordered::{OrderedSystem, SamplingOptions, TopKBatch};
use crate::potential::{affine, ClosedForm, Piece, Potential1D, Segment};
use crate::rng::{run_tasks, StreamRng};
use crate::series::tilted_tail_sq;
use crate::stats::{ks_statistic, two_sample_band, EmpiricalDistribution};

/// Default standard deviation allowed for the discarded tail of an
/// exponential series.
pub const DEFAULT_SERIES_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "variant")]
pub enum LimitKind {
    HalfWell { lambda: f64 },
    SquaredZero { lambda: f64 },
    SquaredGamma { gamma: f64 },
}

/// An edge-process family at inverse temperature `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct LimitFamily {
    #[serde(flatten)]
    pub kind: LimitKind,
    pub beta: f64,
}

impl LimitFamily {
    pub fn new(kind: LimitKind, beta: f64) -> Result<Self> {
        let f = Self { kind, beta };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        match self.kind {
            LimitKind::HalfWell { lambda } | LimitKind::SquaredZero { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
                }
            }
            LimitKind::SquaredGamma { gamma } => {
                if !(gamma > 1.0 && gamma.is_finite()) {
                    return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
                }
            }
        }
        Ok(())
    }

    /// Linear coefficient of `V_i` (1-based `i`).
    pub fn tilt(&self, i: usize) -> f64 {
        match self.kind {
            LimitKind::HalfWell { lambda } | LimitKind::SquaredZero { lambda } => i as f64 - 1.0 + lambda,
            LimitKind::SquaredGamma { .. } => i as f64 - 0.5,
        }
    }

    /// `V_i` (1-based `i`).
    pub fn potential(&self, i: usize) -> Potential1D {
        let tilt = self.tilt(i);
        let left_square = Segment {
            lo: f64::NEG_INFINITY,
            hi: 0.0,
            piece: Piece::Poly {
                x0: 0.0,
                c: [0.0, tilt, 0.5, 0.0],
            },
        };
        let segments = match self.kind {
            LimitKind::HalfWell { .. } => vec![Segment {
                lo: 0.0,
                hi: f64::INFINITY,
                piece: affine(0.0, 0.0, tilt),
            }],
            LimitKind::SquaredZero { .. } => vec![
                left_square,
                Segment {
                    lo: 0.0,
                    hi: f64::INFINITY,
                    piece: affine(0.0, 0.0, tilt),
                },
            ],
            LimitKind::SquaredGamma { gamma } => vec![
                left_square,
                Segment {
                    lo: 0.0,
                    hi: f64::INFINITY,
                    piece: Piece::Power {
                        x0: 0.0,
                        c0: 0.0,
                        c1: tilt,
                        c2: 1.0 / gamma,
                        gamma,
                    },
                },
            ],
        };
        Potential1D::new(segments, ClosedForm::LimitClosed).expect("limit potentials are well formed")
    }

    /// The half-well family with the same tilts, which dominates this one
    /// stochastically.
    pub fn upper_bound(&self) -> LimitFamily {
        let lambda = match self.kind {
            LimitKind::HalfWell { lambda } | LimitKind::SquaredZero { lambda } => lambda,
            LimitKind::SquaredGamma { .. } => 0.5,
        };
        LimitFamily {
            kind: LimitKind::HalfWell { lambda },
            beta: self.beta,
        }
    }

    /// The ordered system of the first `m` coordinates.
    pub fn system(&self, m: usize) -> Result<OrderedSystem> {
        OrderedSystem::new((1..=m).map(|i| self.potential(i)).collect(), self.beta)
    }
}

/// The `k` right-most points, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKSample {
    pub values: Vec<f64>,
    /// Conditioning or truncation depth, when one was used.
    pub depth: Option<usize>,
}

/// Exact sampler for the half-well edge process,
/// `X_(j) = (2/beta) sum_{i >= j} Z_i / (i (2 lambda - 1 + i))`.
///
/// The series is summed exactly up to a depth `M`; the remainder is
/// replaced by its exact mean plus a Gaussian with its exact variance, `M`
/// being the smallest depth at which the remainder's standard deviation is
/// at most `eps`. With `truncate_at = Some(m)` the sum stops at `m` with no
/// remainder, which is exactly the top of `m` conditioned coordinates.
#[derive(Debug, Clone)]
pub struct HalfWellSampler {
    k: usize,
    coef: Vec<f64>,
    tail_mean: f64,
    tail_sd: f64,
    depth: Option<usize>,
}

impl HalfWellSampler {
    pub fn new(lambda: f64, beta: f64, k: usize, eps: f64) -> Result<Self> {
        LimitFamily::new(LimitKind::HalfWell { lambda }, beta)?;
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive".into()));
        }
        let c = 2.0 * lambda - 1.0;
        let scale = 2.0 / beta;
        let sd_from = |m: usize| scale * tilted_tail_sq(c, m as u64 + 1).sqrt();
        let mut hi = k.max(16);
        while sd_from(hi) > eps {
            hi *= 2;
        }
        let mut lo = k.max(1);
        if sd_from(lo) > eps {
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if sd_from(mid) > eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        } else {
            hi = lo;
        }
        let m = hi;
        let tail_mean = scale * crate::series::tilted_tail(c, m as u64 + 1);
        Ok(Self {
            k,
            coef: coefficients(c, scale, m),
            tail_mean,
            tail_sd: sd_from(m),
            depth: Some(m),
        })
    }

    /// Top `k` of `m` half-well coordinates conditioned on ordering.
    pub fn truncated(lambda: f64, beta: f64, k: usize, m: usize) -> Result<Self> {
        LimitFamily::new(LimitKind::HalfWell { lambda }, beta)?;
        if m < k {
            return Err(Error::DepthTooSmall { depth: m, k });
        }
        Ok(Self {
            k,
            coef: coefficients(2.0 * lambda - 1.0, 2.0 / beta, m),
            tail_mean: 0.0,
            tail_sd: 0.0,
            depth: Some(m),
        })
    }

    /// Exact summation depth `M`.
    pub fn depth(&self) -> usize {
        self.coef.len()
    }

    pub fn tail_sd(&self) -> f64 {
        self.tail_sd
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TopKSample {
        let mut s = self.tail_mean;
        if self.tail_sd > 0.0 {
            let g: f64 = StandardNormal.sample(rng);
            s += self.tail_sd * g;
        }
        for &c in self.coef[self.k..].iter().rev() {
            let z: f64 = Exp1.sample(rng);
            s += c * z;
        }
        let mut values = vec![0.0; self.k];
        for j in (0..self.k).rev() {
            let z: f64 = Exp1.sample(rng);
            s += self.coef[j] * z;
            values[j] = s;
        }
        TopKSample {
            values,
            depth: self.depth,
        }
    }
}

fn coefficients(c: f64, scale: f64, m: usize) -> Vec<f64> {
    (1..=m).map(|i| scale / (i as f64 * (c + i as f64))).collect()
}

/// One exact draw of the half-well top `k`.
pub fn sample_halfwell_topk(lambda: f64, beta: f64, k: usize, eps: f64, rng: &mut StreamRng) -> Result<TopKSample> {
    Ok(HalfWellSampler::new(lambda, beta, k, eps)?.sample(rng))
}

/// `count` draws of the top `k` of the first `depth_m` coordinates of
/// `family` conditioned on ordering. Half-well families use the exact
/// gap representation; others use rejection or Gibbs as chosen by `opts`.
pub fn sample_limit_topk(
    family: &LimitFamily,
    k: usize,
    depth_m: usize,
    count: usize,
    rng: &mut StreamRng,
    opts: &SamplingOptions,
) -> Result<Vec<TopKSample>> {
    family.validate()?;
    if depth_m < k {
        return Err(Error::DepthTooSmall { depth: depth_m, k });
    }
    if let LimitKind::HalfWell { lambda } = family.kind {
        let s = HalfWellSampler::truncated(lambda, family.beta, k, depth_m)?;
        return Ok((0..count).map(|_| s.sample(rng)).collect());
    }
    let batch = family.system(depth_m)?.sample_topk(k, count, rng, opts)?;
    Ok(batch
        .values
        .into_iter()
        .map(|values| TopKSample {
            values,
            depth: Some(depth_m),
        })
        .collect())
}

/// Lower (depth `m`) and upper (half-well) stochastic bounds for the
/// top-`k` marginals of the edge process.
#[derive(Debug, Clone)]
pub struct Sandwich {
    pub lower: Vec<TopKSample>,
    pub upper: Vec<TopKSample>,
    pub upper_family: LimitFamily,
}

pub fn sandwich(
    family: &LimitFamily,
    k: usize,
    depth_m: usize,
    count: usize,
    rng: &mut StreamRng,
    opts: &SamplingOptions,
) -> Result<Sandwich> {
    let lower = sample_limit_topk(family, k, depth_m, count, &mut rng.substream(1), opts)?;
    let up = family.upper_bound();
    let lambda = match up.kind {
        LimitKind::HalfWell { lambda } => lambda,
        _ => unreachable!(),
    };
    let s = HalfWellSampler::new(lambda, up.beta, k, DEFAULT_SERIES_EPS)?;
    let mut r = rng.substream(2);
    let upper = (0..count).map(|_| s.sample(&mut r)).collect();
    Ok(Sandwich {
        lower,
        upper,
        upper_family: up,
    })
}

/// Exact mean `E M_chi = sum_k chi / (k (chi + k))`.
pub fn gumbel_mean(chi: f64) -> f64 {
    chi * crate::series::tilted_tail(chi, 1)
}

/// Samples of `M_chi - E M_chi` with `M_chi = sum_k chi Z_k / (k (chi + k))`,
/// summed exactly to the depth where the remainder has standard deviation
/// at most `eps`, and the remainder replaced by its mean and a Gaussian
/// with its variance.
pub fn gumbel_statistic(chi: f64, rng: &mut StreamRng, samples: usize, eps: f64) -> Result<EmpiricalDistribution> {
    if !(chi > 0.0 && chi.is_finite()) {
        return Err(Error::InvalidParameter(format!("chi must be positive, got {chi}")));
    }
    // Same series as the half-well with 2 lambda - 1 = chi and 2/beta = chi.
    let s = HalfWellSampler::new((chi + 1.0) / 2.0, 2.0 / chi, 1, eps)?;
    let mean = gumbel_mean(chi);
    EmpiricalDistribution::new((0..samples).map(|_| s.sample(rng).values[0] - mean).collect())
}

/// Background sequence defining a finite-`n` approach to an edge process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "regime")]
pub enum Regime {
    /// Uniform background on `[-alpha_n, 0]`, `alpha_n = n - 1 + 2 lambda`;
    /// limit `SquaredZero(lambda)`.
    Neutral { lambda: f64 },
    /// Gamma-family background with `alpha_n = 2n`; limit `SquaredGamma(gamma)`.
    Nonneutral { gamma: f64 },
    /// Fixed `rho` with right edge at 0 and `alpha_n = n - 1 + 2 lambda`;
    /// limit `HalfWell(lambda)`.
    FixedBackground { lambda: f64, shape: BackgroundVariant },
}

impl Regime {
    pub fn alpha(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Regime::Neutral { lambda } | Regime::FixedBackground { lambda, .. } => nf - 1.0 + 2.0 * lambda,
            Regime::Nonneutral { .. } => 2.0 * nf,
        }
    }

    pub fn background(&self, n: usize) -> Result<BackgroundSpec> {
        let alpha = self.alpha(n);
        match self {
            Regime::Neutral { .. } => BackgroundSpec::uniform(-alpha, 0.0, alpha),
            Regime::Nonneutral { gamma } => BackgroundSpec::gamma_family(n, *gamma, alpha),
            Regime::FixedBackground { shape, .. } => {
                let bg = BackgroundSpec::new(shape.clone(), alpha)?;
                if bg.support().1 != 0.0 {
                    return Err(Error::InvalidBackground("fixed background must have right edge 0".into()));
                }
                Ok(bg)
            }
        }
    }

    pub fn limit(&self, beta: f64) -> Result<LimitFamily> {
        let kind = match self {
            Regime::Neutral { lambda } => LimitKind::SquaredZero { lambda: *lambda },
            Regime::Nonneutral { gamma } => LimitKind::SquaredGamma { gamma: *gamma },
            Regime::FixedBackground { lambda, .. } => LimitKind::HalfWell { lambda: *lambda },
        };
        LimitFamily::new(kind, beta)
    }
}

/// Settings for a finite-versus-limit comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(default)]
pub struct ConvergenceOptions {
    /// Conditioning depth for non-half-well limits.
    pub limit_depth: usize,
    /// Samples per parallel task; each Gibbs task runs its own chain.
    pub chunk: usize,
    /// DKW level `delta` of the reported band.
    pub delta: f64,
    pub sampling: SamplingOptions,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            limit_depth: 128,
            chunk: 5000,
            delta: 0.01,
            sampling: SamplingOptions::default(),
        }
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub n: usize,
    /// KS distance per coordinate `j = 1..k`.
    pub ks: Vec<f64>,
    pub band: f64,
    pub method: String,
}

/// Top-`k` samples of the limit process of `regime`.
pub fn limit_topk_samples(
    regime: &Regime,
    beta: f64,
    k: usize,
    samples: usize,
    seed: u64,
    opts: &ConvergenceOptions,
) -> Result<Vec<Vec<f64>>> {
    let fam = regime.limit(beta)?;
    match fam.kind {
        LimitKind::HalfWell { lambda } => {
            let s = HalfWellSampler::new(lambda, beta, k, DEFAULT_SERIES_EPS)?;
            run_tasks(seed, 0, samples, opts.chunk, |rng, len| Ok((0..len).map(|_| s.sample(rng).values).collect()))
        }
        _ => {
            let sys = fam.system(opts.limit_depth)?;
            run_tasks(seed, 0, samples, opts.chunk, |rng, len| {
                Ok(sys.sample_topk(k, len, rng, &opts.sampling)?.values)
            })
        }
    }
}

/// Top-`k` samples of the finite gas at size `n`.
pub fn finite_topk_samples(
    regime: &Regime,
    beta: f64,
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
    opts: &ConvergenceOptions,
) -> Result<(Vec<Vec<f64>>, String)> {
    let alpha = regime.alpha(n);
    let gas = Gas::new(regime.background(n)?, GasParams::new(n, beta, alpha)?)?;
    let mut method = String::new();
    let values = run_tasks(seed, n as u64, samples, opts.chunk, |rng, len| {
        let b: TopKBatch = gas.system().sample_topk(k, len, rng, &opts.sampling)?;
        Ok(vec![(b.method, b.values)])
    })?;
    let mut out = Vec::with_capacity(samples);
    for (m, v) in values {
        method = format!("{m:?}").to_lowercase();
        out.extend(v);
    }
    Ok((out, method))
}

/// KS distance per coordinate between two top-`k` sample sets.
pub fn coordinate_ks(a: &[Vec<f64>], b: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
    (0..k)
        .map(|j| {
            let p = EmpiricalDistribution::new(a.iter().map(|v| v[j]).collect())?;
            let q = EmpiricalDistribution::new(b.iter().map(|v| v[j]).collect())?;
            Ok(ks_statistic(&p, &q))
        })
        .collect()
}

/// KS distances between the finite-`n` top `k` and the limit top `k`, for
/// each `n` in `n_list`.
pub fn finite_to_limit_distance(
    regime: &Regime,
    beta: f64,
    k: usize,
    n_list: &[usize],
    samples: usize,
    seed: u64,
    opts: &ConvergenceOptions,
) -> Result<Vec<DistanceRow>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let limit = limit_topk_samples(regime, beta, k, samples, seed, opts)?;
    let band = two_sample_band(samples, samples, opts.delta);
    n_list
        .iter()
        .map(|&n| {
            if n < k {
                return Err(Error::DepthTooSmall { depth: n, k });
            }
            let (fin, method) = finite_topk_samples(regime, beta, n, k, samples, seed.wrapping_add(1), opts)?;
            Ok(DistanceRow {
                n,
                ks: coordinate_ks(&fin, &limit, k)?,
                band,
                method,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{correlation, dkw_band, dominance_check, mean_se, variance, DominanceVerdict};
    use std::f64::consts::PI;

    #[test]
    fn halfwell_means() {
        let s = HalfWellSampler::new(1.0, 2.0, 5, DEFAULT_SERIES_EPS).unwrap();
        assert!(s.tail_sd() <= DEFAULT_SERIES_EPS);
        let mut rng = StreamRng::new(20, 0);
        let n = 200_000;
        let draws: Vec<TopKSample> = (0..n).map(|_| s.sample(&mut rng)).collect();
        for j in 0..5 {
            let xs: Vec<f64> = draws.iter().map(|d| d.values[j]).collect();
            let (m, se) = mean_se(&xs);
            assert!((m - 1.0 / (j + 1) as f64).abs() < 4.0 * se, "j={j} mean {m}");
        }
        assert!(draws.iter().all(|d| d.values.windows(2).all(|w| w[0] >= w[1])));
        let b = HalfWellSampler::new(0.5, 2.0, 1, DEFAULT_SERIES_EPS).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| b.sample(&mut rng).values[0]).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - PI * PI / 6.0).abs() < 4.0 * se);
    }

    #[test]
    fn halfwell_variance_and_gaps() {
        let s = HalfWellSampler::new(1.0, 2.0, 3, DEFAULT_SERIES_EPS).unwrap();
        let mut rng = StreamRng::new(21, 0);
        let n = 100_000;
        let draws: Vec<Vec<f64>> = (0..n).map(|_| s.sample(&mut rng).values).collect();
        let top: Vec<f64> = draws.iter().map(|d| d[0]).collect();
        // Var X_(1) = sum 1/(i(i+1))^2 = pi^2/3 - 3.
        let v = variance(&top);
        let se_v = crate::stats::variance_se(&top);
        assert!((v - (PI * PI / 3.0 - 3.0)).abs() < 4.0 * se_v, "var {v}");
        let g1: Vec<f64> = draws.iter().map(|d| d[0] - d[1]).collect();
        let g2: Vec<f64> = draws.iter().map(|d| d[1] - d[2]).collect();
        assert!(correlation(&g1, &g2).abs() < 4.0 / (n as f64).sqrt());
        // Gap j is exponential with mean 2/(beta j (2 lambda - 1 + j)) = 1/(j(j+1)).
        for (j, g) in [(1usize, &g1), (2, &g2)] {
            let rate = (j * (j + 1)) as f64;
            let e = EmpiricalDistribution::new(g.clone()).unwrap();
            assert!(e.ks_to(|x| 1.0 - (-rate * x).exp()) < dkw_band(n, 0.01));
        }
    }

    #[test]
    fn truncated_halfwell_matches_generic_ordered_sampler() {
        let fam = LimitFamily::new(LimitKind::HalfWell { lambda: 0.7 }, 1.5).unwrap();
        let mut rng = StreamRng::new(22, 0);
        let exact = sample_limit_topk(&fam, 2, 4, 40_000, &mut rng, &SamplingOptions::default()).unwrap();
        let generic = fam.system(4).unwrap().sample_topk(2, 40_000, &mut rng, &SamplingOptions::default()).unwrap();
        for j in 0..2 {
            let a = EmpiricalDistribution::new(exact.iter().map(|s| s.values[j]).collect()).unwrap();
            let b = EmpiricalDistribution::new(generic.values.iter().map(|v| v[j]).collect()).unwrap();
            assert!(ks_statistic(&a, &b) < two_sample_band(40_000, 40_000, 0.01));
        }
    }

    #[test]
    fn depth_errors_and_families() {
        let fam = LimitFamily::new(LimitKind::SquaredZero { lambda: 1.0 }, 1.0).unwrap();
        let mut rng = StreamRng::new(23, 0);
        assert_eq!(
            sample_limit_topk(&fam, 3, 2, 1, &mut rng, &SamplingOptions::default()).unwrap_err(),
            Error::DepthTooSmall { depth: 2, k: 3 }
        );
        assert!(LimitFamily::new(LimitKind::SquaredGamma { gamma: 1.0 }, 1.0).is_err());
        assert!(LimitFamily::new(LimitKind::HalfWell { lambda: 0.0 }, 1.0).is_err());
        let g = LimitFamily::new(LimitKind::SquaredGamma { gamma: 1.5 }, 1.0).unwrap();
        assert_eq!(g.upper_bound().kind, LimitKind::HalfWell { lambda: 0.5 });
        let v = g.potential(2);
        assert!((v.value(4.0) - (8.0 / 1.5 + 1.5 * 4.0)).abs() < 1e-12);
        assert!((v.value(-2.0) - (2.0 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn depth_monotonicity() {
        let fam = LimitFamily::new(LimitKind::SquaredZero { lambda: 1.0 }, 1.0).unwrap();
        let mut rng = StreamRng::new(24, 0);
        let opts = SamplingOptions::default();
        let a = sample_limit_topk(&fam, 1, 1, 50_000, &mut rng, &opts).unwrap();
        let b = sample_limit_topk(&fam, 1, 4, 50_000, &mut rng, &opts).unwrap();
        let pa = EmpiricalDistribution::new(a.iter().map(|s| s.values[0]).collect()).unwrap();
        let pb = EmpiricalDistribution::new(b.iter().map(|s| s.values[0]).collect()).unwrap();
        assert_eq!(dominance_check(&pb, &pa, 0.01), DominanceVerdict::Dominates);
    }

    #[test]
    fn gumbel_means() {
        assert!((gumbel_mean(1.0) - 1.0).abs() < 1e-12);
        assert!((gumbel_mean(2.0) - 1.5).abs() < 1e-12);
        let mut rng = StreamRng::new(25, 0);
        let e = gumbel_statistic(3.0, &mut rng, 20_000, 1e-3).unwrap();
        let (m, se) = mean_se(e.samples());
        assert!(m.abs() < 4.0 * se);
    }

    #[test]
    fn regime_backgrounds() {
        let r = Regime::Neutral { lambda: 0.5 };
        assert_eq!(r.alpha(8), 8.0);
        assert_eq!(r.background(8).unwrap().support(), (-8.0, 0.0));
        let g = Regime::Nonneutral { gamma: 2.0 };
        assert_eq!(g.alpha(5), 10.0);
        let f = Regime::FixedBackground {
            lambda: 1.0,
            shape: BackgroundVariant::UniformInterval { a: -1.0, b: 0.0 },
        };
        assert_eq!(f.limit(2.0).unwrap().kind, LimitKind::HalfWell { lambda: 1.0 });
        let bad = Regime::FixedBackground {
            lambda: 1.0,
            shape: BackgroundVariant::UniformInterval { a: -2.0, b: -1.0 },
        };
        assert!(bad.background(4).is_err());
    }

    #[test]
    fn finite_neutral_regime_matches_its_potentials() {
        // On [-alpha_n, inf) the finite per-particle potentials equal the
        // SquaredZero ones up to an additive constant.
        let r = Regime::Neutral { lambda: 0.5 };
        let n = 6;
        let bg = r.background(n).unwrap();
        let p = GasParams::new(n, 1.0, r.alpha(n)).unwrap();
        let fam = r.limit(1.0).unwrap();
        for i in 1..=n {
            let v = bg.per_particle_potential(&p, i).unwrap();
            let w = fam.potential(i);
            let c = v.value(0.0) - w.value(0.0);
            for &x in &[-5.5, -2.0, -0.3, 0.7, 3.0] {
                assert!((v.value(x) - w.value(x) - c).abs() < 1e-9, "i={i} x={x}");
            }
        }
        // Same for the gamma family on [-(alpha+n)/2, R].
        let r = Regime::Nonneutral { gamma: 1.5 };
        let bg = r.background(n).unwrap();
        let p = GasParams::new(n, 1.0, r.alpha(n)).unwrap();
        let fam = r.limit(1.0).unwrap();
        for i in 1..=n {
            let v = bg.per_particle_potential(&p, i).unwrap();
            let w = fam.potential(i);
            let c = v.value(0.0) - w.value(0.0);
            for &x in &[-8.0, -2.0, 0.5, 2.0] {
                assert!((v.value(x) - w.value(x) - c).abs() < 1e-9, "i={i} x={x}");
            }
        }
    }
}
