//! Right-most particles conditioned on exactly `k` of them lying to the
//! right of a background supported in `(-inf, 0]`.
//!
//! Given `N_n = k`, the top `k` points are partial sums of independent
//! exponentials: `X_(k) = Z_k` and `X_(j) = Z_j + ... + Z_k`, with
//! `E Z_i = 2 / (beta i (alpha - n + i))`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::background::BackgroundSpec;
use crate::edge::TopKSample;
use crate::error::{Error, Result};
use crate::gas::{Gas, GasParams};
use crate::quad::{integrate_pieces, QuadOptions};
use crate::rng::StreamRng;
use crate::sampler::WindowWorkspace;

/// Pilot attempts used to estimate the unconditional ordering probability.
pub const ORDER_PILOT_ATTEMPTS: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalSpec {
    pub params: GasParams,
    pub bg: BackgroundSpec,
    pub k: usize,
}

impl ConditionalSpec {
    pub fn new(params: GasParams, bg: BackgroundSpec, k: usize) -> Result<Self> {
        let s = Self { params, bg, k };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.require_admissible()?;
        self.bg.validate()?;
        self.params.check_background(&self.bg)?;
        if self.bg.support().1 > 0.0 {
            return Err(Error::InvalidBackground(format!(
                "background must be supported in (-inf, 0], right edge is {}",
                self.bg.support().1
            )));
        }
        if self.k > self.params.n {
            return Err(Error::IndexOutOfRange {
                index: self.k,
                len: self.params.n,
            });
        }
        Ok(())
    }

    /// `E Z_i` for `i = 1..=k`.
    pub fn gap_means(&self) -> Vec<f64> {
        let GasParams { n, beta, alpha } = self.params;
        (1..=self.k)
            .map(|i| 2.0 / (beta * i as f64 * (alpha - n as f64 + i as f64)))
            .collect()
    }
}

/// Exact draw of `(X_(1), ..., X_(k))` given `N_n = k`, descending.
pub fn sample_renyi_topk<R: Rng + ?Sized>(spec: &ConditionalSpec, rng: &mut R) -> TopKSample {
    let mu = spec.gap_means();
    let mut values = vec![0.0; spec.k];
    let mut s = 0.0;
    for j in (0..spec.k).rev() {
        let z: f64 = Exp1.sample(rng);
        s += mu[j] * z;
        values[j] = s;
    }
    TopKSample { values, depth: None }
}

/// `(mean, variance)` of `X_(j)` for `j = 1..=k`.
pub fn conditional_moments(spec: &ConditionalSpec) -> Vec<(f64, f64)> {
    let mu = spec.gap_means();
    let mut out = vec![(0.0, 0.0); spec.k];
    let (mut m, mut v) = (0.0, 0.0);
    for j in (0..spec.k).rev() {
        m += mu[j];
        v += mu[j] * mu[j];
        out[j] = (m, v);
    }
    out
}

/// Bookkeeping of a direct conditional run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectReport {
    /// Estimate of `P(N_n = k)`.
    pub event_prob: f64,
    /// Accepted right-block draws.
    pub accepted: u64,
    /// Right-block attempts.
    pub attempted: u64,
    /// `P(Y_i > 0)` product over the sign pattern, by quadrature.
    pub sign_prob: f64,
    /// Estimated ordering probability of the left block given its signs.
    pub left_order_prob: f64,
    /// Estimated unconditional ordering probability.
    pub order_prob: f64,
}

/// Direct simulation of the gas conditioned on `N_n = k`.
///
/// With the independent-coordinate form of the gas, `{N_n = k}` is the
/// event that `Y_1, ..., Y_k > 0 >= Y_{k+1}, ..., Y_n` and both blocks are
/// ordered. Given the signs the two blocks are independent, so the top `k`
/// is drawn by rejection from the right block alone, each coordinate drawn
/// exactly from its law conditioned on `Y_i > 0`. This is the same law as
/// rejecting full gas draws on `{N_n = k}`, at a fraction of the cost.
#[derive(Debug, Clone)]
pub struct DirectSampler {
    spec: ConditionalSpec,
    gas: Gas,
    sign_prob: f64,
}

impl DirectSampler {
    pub fn new(spec: ConditionalSpec) -> Result<Self> {
        spec.validate()?;
        let gas = Gas::new(spec.bg.clone(), spec.params)?;
        let mut sign_prob = 1.0;
        for i in 0..spec.params.n {
            let p = positive_prob(&gas, i)?;
            sign_prob *= if i < spec.k { p } else { 1.0 - p };
        }
        Ok(Self { spec, gas, sign_prob })
    }

    pub fn spec(&self) -> &ConditionalSpec {
        &self.spec
    }

    /// One attempt at the right block; fills `out` descending on success.
    fn try_right<R: Rng + ?Sized>(&self, ws: &mut WindowWorkspace, rng: &mut R, out: &mut Vec<f64>) -> bool {
        out.clear();
        let sys = self.gas.system();
        let mut prev = f64::INFINITY;
        for i in 0..self.spec.k {
            let y = sys.sampler(i).sample_window(0.0, f64::INFINITY, ws, rng);
            if y > prev {
                return false;
            }
            out.push(y);
            prev = y;
        }
        true
    }

    fn try_left<R: Rng + ?Sized>(&self, ws: &mut WindowWorkspace, rng: &mut R) -> bool {
        let sys = self.gas.system();
        let mut prev = 0.0;
        for i in self.spec.k..self.spec.params.n {
            let y = sys.sampler(i).sample_window(f64::NEG_INFINITY, 0.0, ws, rng);
            if y > prev {
                return false;
            }
            prev = y;
        }
        true
    }

    /// `count` exact conditional top-`k` draws and the number of
    /// right-block attempts used.
    pub fn sample_block<R: Rng + ?Sized>(&self, count: usize, rng: &mut R, max_attempts: u64) -> Result<(Vec<TopKSample>, u64)> {
        let mut ws = WindowWorkspace::default();
        let mut buf = Vec::with_capacity(self.spec.k);
        let mut out = Vec::with_capacity(count);
        let mut attempted = 0u64;
        while out.len() < count {
            if attempted >= max_attempts {
                return Err(Error::MaxAttemptsExceeded {
                    attempts: attempted,
                    accepted: out.len() as u64,
                });
            }
            attempted += 1;
            if self.try_right(&mut ws, rng, &mut buf) {
                out.push(TopKSample {
                    values: buf.clone(),
                    depth: None,
                });
            }
        }
        Ok((out, attempted))
    }

    /// Assembles the report for `accepted` out of `attempted` right-block
    /// draws. The left-block and unconditional ordering probabilities are
    /// estimated here from `rng`.
    pub fn report<R: Rng + ?Sized>(&self, accepted: u64, attempted: u64, rng: &mut R) -> DirectReport {
        let mut ws = WindowWorkspace::default();
        let left_hits = (0..ORDER_PILOT_ATTEMPTS).filter(|_| self.try_left(&mut ws, rng)).count();
        let left_order_prob = left_hits as f64 / ORDER_PILOT_ATTEMPTS as f64;
        let order_prob = self.gas.system().count_ordered(rng, ORDER_PILOT_ATTEMPTS) as f64 / ORDER_PILOT_ATTEMPTS as f64;
        let right = if self.spec.k == 0 {
            1.0
        } else {
            accepted as f64 / attempted as f64
        };
        DirectReport {
            event_prob: self.sign_prob * right * left_order_prob / order_prob,
            accepted,
            attempted,
            sign_prob: self.sign_prob,
            left_order_prob,
            order_prob,
        }
    }

    /// Draws on `rng` and reports with estimates drawn on a substream.
    pub fn sample(&self, count: usize, rng: &mut StreamRng, max_attempts: u64) -> Result<(Vec<TopKSample>, DirectReport)> {
        let (out, attempted) = self.sample_block(count, rng, max_attempts)?;
        let rep = self.report(count as u64, attempted, &mut rng.substream(1));
        Ok((out, rep))
    }
}

/// `P(Y_i > 0)` for the 0-based coordinate `i`, by quadrature.
fn positive_prob(gas: &Gas, i: usize) -> Result<f64> {
    let s = gas.system().sampler(i);
    let pot = s.potential();
    let beta = s.beta();
    let v0 = pot.value(s.mode());
    let f = |x: f64| (-beta * (pot.value(x) - v0)).exp();
    let mut left = vec![f64::NEG_INFINITY];
    let mut right = vec![0.0];
    for x in pot.breakpoints().chain(std::iter::once(s.mode())) {
        if x.is_finite() && x < 0.0 {
            left.push(x);
        } else if x.is_finite() && x > 0.0 {
            right.push(x);
        }
    }
    left.sort_by(f64::total_cmp);
    left.dedup();
    left.push(0.0);
    right.sort_by(f64::total_cmp);
    right.dedup();
    right.push(f64::INFINITY);
    let opts = QuadOptions::default();
    let l = integrate_pieces(f, &left, opts)?.value;
    let r = integrate_pieces(f, &right, opts)?.value;
    Ok(r / (l + r))
}

/// Single exact conditional draw and its report.
pub fn sample_conditional_direct(
    spec: &ConditionalSpec,
    rng: &mut StreamRng,
    max_attempts: u64,
) -> Result<(TopKSample, DirectReport)> {
    let (mut v, rep) = DirectSampler::new(spec.clone())?.sample(1, rng, max_attempts)?;
    Ok((v.pop().expect("one draw"), rep))
}
