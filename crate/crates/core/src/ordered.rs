//! Independent log-concave variables conditioned on being ordered.
//!
//! Both the finite gas and the depth-`m` approximations of the edge
//! processes have this form: `Y_1, ..., Y_m` independent with densities
//! proportional to `exp(-beta V_i)`, conditioned on `Y_1 >= ... >= Y_m`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential1D;
use crate::rng::StreamRng;
use crate::sampler::{LogConcaveSampler, WindowWorkspace};

/// Default Gibbs burn-in, in sweeps.
pub const DEFAULT_BURN_IN: usize = 1000;
/// Default Gibbs thinning, in sweeps.
pub const DEFAULT_THIN: usize = 10;
/// Default attempt budget for rejection sampling.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000_000;

/// Counts from a rejection run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RejectionStats {
    pub accepted: u64,
    pub attempts: u64,
}

impl RejectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempts as f64
        }
    }
}

/// `m` independent coordinates under an ordering constraint.
#[derive(Debug, Clone)]
pub struct OrderedSystem {
    samplers: Vec<LogConcaveSampler>,
}

impl OrderedSystem {
    /// `potentials[i]` is the potential of the `(i+1)`-th largest coordinate.
    pub fn new(potentials: Vec<Potential1D>, beta: f64) -> Result<Self> {
        let samplers = potentials
            .into_iter()
            .map(|p| LogConcaveSampler::new(p, beta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { samplers })
    }

    pub fn len(&self) -> usize {
        self.samplers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samplers.is_empty()
    }

    pub fn sampler(&self, i: usize) -> &LogConcaveSampler {
        &self.samplers[i]
    }

    /// Exact draw of the `i`-th coordinate (0-based), unconditioned.
    pub fn sample_coordinate<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> f64 {
        self.samplers[i].sample(rng)
    }

    /// One rejection attempt. Fills `out` with a descending draw and returns
    /// true, or returns false at the first ordering violation.
    #[inline]
    pub fn try_ordered<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) -> bool {
        out.clear();
        let mut prev = f64::INFINITY;
        for s in &self.samplers {
            let y = s.sample(rng);
            // Ties have probability zero and are accepted.
            if y > prev {
                return false;
            }
            out.push(y);
            prev = y;
        }
        true
    }

    /// Exact draw of the ordered vector by rejection.
    pub fn sample_rejection<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: u64) -> Result<(Vec<f64>, RejectionStats)> {
        let mut out = Vec::with_capacity(self.len());
        for attempt in 1..=max_attempts {
            if self.try_ordered(rng, &mut out) {
                return Ok((
                    out,
                    RejectionStats {
                        accepted: 1,
                        attempts: attempt,
                    },
                ));
            }
        }
        Err(Error::MaxAttemptsExceeded {
            attempts: max_attempts,
            accepted: 0,
        })
    }

    /// Monte Carlo estimate of the acceptance probability from `attempts`
    /// trials: returns the number of ordered draws.
    pub fn count_ordered<R: Rng + ?Sized>(&self, rng: &mut R, attempts: u64) -> u64 {
        let mut out = Vec::with_capacity(self.len());
        (0..attempts).filter(|_| self.try_ordered(rng, &mut out)).count() as u64
    }

    /// A systematic-scan Gibbs chain started from the sorted independent
    /// draw.
    pub fn gibbs(&self, rng: StreamRng, burn_in: usize, thin: usize) -> GibbsChain<'_> {
        let mut rng = rng;
        let mut state: Vec<f64> = self.samplers.iter().map(|s| s.sample(&mut rng)).collect();
        state.sort_by(|a, b| b.total_cmp(a));
        self.gibbs_from(state, rng, burn_in, thin)
    }

    /// A Gibbs chain from an explicit descending initial state.
    pub fn gibbs_from(&self, state: Vec<f64>, rng: StreamRng, burn_in: usize, thin: usize) -> GibbsChain<'_> {
        debug_assert!(state.windows(2).all(|w| w[0] >= w[1]));
        GibbsChain {
            system: self,
            state,
            rng,
            ws: WindowWorkspace::default(),
            burn_in,
            thin: thin.max(1),
            warmed: false,
        }
    }
}

/// Iterator over thinned post-burn-in states of an ordered Gibbs chain.
#[derive(Debug)]
pub struct GibbsChain<'a> {
    system: &'a OrderedSystem,
    state: Vec<f64>,
    rng: StreamRng,
    ws: WindowWorkspace,
    burn_in: usize,
    thin: usize,
    warmed: bool,
}

impl GibbsChain<'_> {
    /// One systematic sweep, top coordinate first.
    pub fn sweep(&mut self) {
        let m = self.state.len();
        for k in 0..m {
            let hi = if k == 0 { f64::INFINITY } else { self.state[k - 1] };
            let lo = if k + 1 == m { f64::NEG_INFINITY } else { self.state[k + 1] };
            self.state[k] = self.system.samplers[k].sample_window(lo, hi, &mut self.ws, &mut self.rng);
        }
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }
}

impl Iterator for GibbsChain<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if !self.warmed {
            for _ in 0..self.burn_in {
                self.sweep();
            }
            self.warmed = true;
        }
        for _ in 0..self.thin {
            self.sweep();
        }
        Some(self.state.clone())
    }
}

/// How a batch of ordered draws was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rejection,
    Gibbs,
}

/// Sampler selection and MCMC settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(default)]
pub struct SamplingOptions {
    /// Force a method instead of choosing from the pilot acceptance rate.
    pub method: Option<Method>,
    /// Rejection is used when the pilot acceptance rate is at least this
    /// and the expected attempts stay within half of `max_attempts`.
    pub min_acceptance: f64,
    pub pilot_attempts: u64,
    pub max_attempts: u64,
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            method: None,
            min_acceptance: 1e-3,
            pilot_attempts: 20_000,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            burn_in: DEFAULT_BURN_IN,
            thin: DEFAULT_THIN,
        }
    }
}

/// Top-`k` coordinates of `count` draws, and how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct TopKBatch {
    pub values: Vec<Vec<f64>>,
    pub method: Method,
    /// Observed rejection acceptance rate (pilot rate when Gibbs was used).
    pub acceptance: f64,
}

impl OrderedSystem {
    /// Chooses rejection or Gibbs by a pilot run, then draws `count`
    /// top-`k` vectors. Gibbs draws come from one chain.
    pub fn sample_topk(&self, k: usize, count: usize, rng: &mut StreamRng, opts: &SamplingOptions) -> Result<TopKBatch> {
        let k = k.min(self.len());
        let (method, pilot_rate) = match opts.method {
            Some(m) => (m, f64::NAN),
            None => {
                let mut pilot = rng.substream(u64::MAX);
                let hits = self.count_ordered(&mut pilot, opts.pilot_attempts);
                let rate = hits as f64 / opts.pilot_attempts as f64;
                let expected_attempts = count as f64 / rate;
                if rate >= opts.min_acceptance && expected_attempts <= 0.5 * opts.max_attempts as f64 {
                    (Method::Rejection, rate)
                } else {
                    (Method::Gibbs, rate)
                }
            }
        };
        let mut values = Vec::with_capacity(count);
        match method {
            Method::Rejection => {
                let mut buf = Vec::with_capacity(self.len());
                let mut attempts = 0u64;
                while values.len() < count {
                    if attempts >= opts.max_attempts {
                        return Err(Error::MaxAttemptsExceeded {
                            attempts,
                            accepted: values.len() as u64,
                        });
                    }
                    attempts += 1;
                    if self.try_ordered(rng, &mut buf) {
                        values.push(buf[..k].to_vec());
                    }
                }
                Ok(TopKBatch {
                    acceptance: values.len() as f64 / attempts.max(1) as f64,
                    values,
                    method,
                })
            }
            Method::Gibbs => {
                let chain = self.gibbs(rng.substream(0), opts.burn_in, opts.thin);
                values.extend(chain.take(count).map(|s| s[..k].to_vec()));
                Ok(TopKBatch {
                    values,
                    method,
                    acceptance: pilot_rate,
                })
            }
        }
    }
}
