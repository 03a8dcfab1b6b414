//! The finite `n`-particle gas in a background.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::background::{BackgroundSpec, BackgroundVariant};
use crate::error::{Error, Result};
use crate::ordered::{GibbsChain, OrderedSystem, RejectionStats};
use crate::rng::StreamRng;

/// Particle number, inverse temperature and background charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
}

impl GasParams {
    /// Checks `n >= 1` and positivity; admissibility is checked separately.
    pub fn new(n: usize, beta: f64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { n, beta, alpha })
    }

    /// The Gibbs measure exists if and only if `alpha > n - 1`.
    pub fn is_admissible(&self) -> bool {
        self.alpha > self.n as f64 - 1.0
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::InadmissibleGas {
                n: self.n,
                alpha: self.alpha,
            })
        }
    }

    pub(crate) fn check_background(&self, bg: &BackgroundSpec) -> Result<()> {
        if (bg.alpha - self.alpha).abs() > 1e-12 * self.alpha.abs().max(1.0) {
            return Err(Error::ChargeMismatch {
                background: bg.alpha,
                gas: self.alpha,
            });
        }
        Ok(())
    }
}

/// Positions sorted in descending order, with the energy `H_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<f64>,
    pub energy: f64,
}

impl Configuration {
    pub fn top(&self) -> f64 {
        self.positions[0]
    }
}

fn check_len(positions: &[f64], params: &GasParams) -> Result<()> {
    if positions.len() != params.n {
        return Err(Error::InvalidParameter(format!(
            "expected {} positions, got {}",
            params.n,
            positions.len()
        )));
    }
    Ok(())
}

/// `H_n = -1/2 sum_{i<j} |x_i - x_j| + sum_i minus_potential(x_i)`.
pub fn energy_pairwise(positions: &[f64], bg: &BackgroundSpec, params: &GasParams) -> Result<f64> {
    params.require_admissible()?;
    params.check_background(bg)?;
    check_len(positions, params)?;
    let pot = bg.potential();
    // Summing in a canonical order makes the result exactly permutation
    // invariant.
    let mut xs = positions.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut pair = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        for &y in &xs[i + 1..] {
            pair += (x - y).abs();
        }
    }
    let ext: f64 = xs.iter().map(|&x| pot.value(x)).sum();
    Ok(-0.5 * pair + ext)
}

/// `H_n` through the ordered form
/// `sum_k ((2k - n - 1)/2) x_(k) + minus_potential(x_(k))`.
pub fn energy_ordered(positions: &[f64], bg: &BackgroundSpec, params: &GasParams) -> Result<f64> {
    params.require_admissible()?;
    params.check_background(bg)?;
    check_len(positions, params)?;
    if positions.windows(2).any(|w| !(w[0] >= w[1])) {
        return Err(Error::UnsortedInput);
    }
    let pot = bg.potential();
    let n = params.n as f64;
    Ok(positions
        .iter()
        .enumerate()
        .map(|(k, &x)| ((2.0 * (k + 1) as f64 - n - 1.0) / 2.0) * x + pot.value(x))
        .sum())
}

/// Number of strictly positive coordinates.
pub fn count_right_of_zero(positions: &[f64]) -> usize {
    positions.iter().filter(|&&x| x > 0.0).count()
}

/// A gas ready for sampling: the per-particle samplers are built once.
#[derive(Debug, Clone)]
pub struct Gas {
    bg: BackgroundSpec,
    params: GasParams,
    system: OrderedSystem,
}

impl Gas {
    pub fn new(bg: BackgroundSpec, params: GasParams) -> Result<Self> {
        bg.validate()?;
        params.require_admissible()?;
        params.check_background(&bg)?;
        let pots = (1..=params.n)
            .map(|i| bg.per_particle_potential(&params, i))
            .collect::<Result<Vec<_>>>()?;
        let system = OrderedSystem::new(pots, params.beta)?;
        Ok(Self { bg, params, system })
    }

    pub fn params(&self) -> &GasParams {
        &self.params
    }

    pub fn background(&self) -> &BackgroundSpec {
        &self.bg
    }

    pub fn system(&self) -> &OrderedSystem {
        &self.system
    }

    /// Exact draw of `Y_i` (1-based), density proportional to `exp(-beta V_i)`.
    pub fn sample_independent<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<f64> {
        if i == 0 || i > self.params.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.params.n,
            });
        }
        Ok(self.system.sample_coordinate(i - 1, rng))
    }

    pub fn configuration(&self, positions: Vec<f64>) -> Configuration {
        let energy = energy_ordered(&positions, &self.bg, &self.params).expect("sampler output is sorted");
        Configuration { positions, energy }
    }

    /// Exact draw from the gas by rejection of unordered independent draws.
    pub fn sample_rejection<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: u64) -> Result<(Configuration, RejectionStats)> {
        let (x, st) = self.system.sample_rejection(rng, max_attempts)?;
        Ok((self.configuration(x), st))
    }

    /// Gibbs chain on the ordered representation.
    pub fn gibbs(&self, rng: StreamRng, burn_in: usize, thin: usize) -> GasChain<'_> {
        GasChain {
            gas: self,
            inner: self.system.gibbs(rng, burn_in, thin),
        }
    }

    /// `(log Z_n, standard error)`: quadrature for the per-particle
    /// normalizers, Monte Carlo over `samples` draws for the ordering
    /// probability.
    pub fn estimate_log_partition<R: Rng + ?Sized>(&self, rng: &mut R, samples: u64) -> Result<(f64, f64)> {
        if samples == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        let n = self.params.n;
        let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
        let mut log_z = log_fact;
        for i in 0..n {
            log_z += self.system.sampler(i).log_normalizer()?;
        }
        let hits = self.system.count_ordered(rng, samples);
        let nf = samples as f64;
        // Smoothed proportion keeps the error finite when hits is 0 or N.
        let p_smooth = (hits as f64 + 1.0) / (nf + 2.0);
        let se = ((1.0 - p_smooth) / (nf * p_smooth)).sqrt();
        let p = if hits > 0 { hits as f64 / nf } else { p_smooth };
        Ok((log_z + p.ln(), se))
    }
}

/// Gibbs chain yielding full configurations.
#[derive(Debug)]
pub struct GasChain<'a> {
    gas: &'a Gas,
    inner: GibbsChain<'a>,
}

impl Iterator for GasChain<'_> {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        let x = self.inner.next()?;
        Some(self.gas.configuration(x))
    }
}

/// Exact draw of `Y_i` from a fresh gas description.
pub fn sample_independent(bg: &BackgroundSpec, params: &GasParams, i: usize, rng: &mut StreamRng) -> Result<f64> {
    Gas::new(bg.clone(), *params)?.sample_independent(i, rng)
}

/// Exact gas draw and the observed acceptance rate.
pub fn sample_gas_rejection(
    bg: &BackgroundSpec,
    params: &GasParams,
    rng: &mut StreamRng,
    max_attempts: u64,
) -> Result<(Configuration, f64)> {
    let (c, st) = Gas::new(bg.clone(), *params)?.sample_rejection(rng, max_attempts)?;
    Ok((c, st.acceptance_rate()))
}

/// `sweeps` total sweeps, of which the first `burn_in` are discarded and
/// every `thin`-th of the rest is returned.
pub fn sample_gas_gibbs(
    bg: &BackgroundSpec,
    params: &GasParams,
    rng: StreamRng,
    sweeps: usize,
    burn_in: usize,
    thin: usize,
) -> Result<Vec<Configuration>> {
    if sweeps <= burn_in {
        return Err(Error::InvalidParameter("sweeps must exceed burn_in".into()));
    }
    let gas = Gas::new(bg.clone(), *params)?;
    let thin = thin.max(1);
    let count = (sweeps - burn_in) / thin;
    Ok(gas.gibbs(rng, burn_in, thin).take(count).collect())
}

pub fn estimate_log_partition(bg: &BackgroundSpec, params: &GasParams, rng: &mut StreamRng, samples: u64) -> Result<(f64, f64)> {
    Gas::new(bg.clone(), *params)?.estimate_log_partition(rng, samples)
}

/// Means of the Gaussian representation on a uniform background, in
/// descending order: `(a+b)/2 + (b-a)(n+1-2k)/(2 alpha)`.
pub fn gaussian_means(a: f64, b: f64, params: &GasParams) -> Vec<f64> {
    let n = params.n as f64;
    (1..=params.n)
        .map(|k| 0.5 * (a + b) + (b - a) * (n + 1.0 - 2.0 * k as f64) / (2.0 * params.alpha))
        .collect()
}

/// Common variance `(b-a)/(alpha beta)` of the Gaussian representation.
pub fn gaussian_variance(a: f64, b: f64, params: &GasParams) -> f64 {
    (b - a) / (params.alpha * params.beta)
}

/// Draws the gas on `UniformInterval(a, b)` conditioned on all particles
/// lying in `[a, b]`, via independent Gaussians conditioned on
/// `a <= Y_n <= ... <= Y_1 <= b`. Returns the configuration and the number
/// of attempts used.
pub fn sample_gas_gaussian_conditional<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    params: &GasParams,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(Configuration, u64)> {
    params.require_admissible()?;
    let bg = BackgroundSpec::new(BackgroundVariant::UniformInterval { a, b }, params.alpha)?;
    let means = gaussian_means(a, b, params);
    let sd = gaussian_variance(a, b, params).sqrt();
    let normals: Vec<Normal<f64>> = means
        .iter()
        .map(|&m| Normal::new(m, sd).expect("finite parameters"))
        .collect();
    let mut out = Vec::with_capacity(params.n);
    'attempt: for attempt in 1..=max_attempts {
        out.clear();
        let mut prev = b;
        for d in &normals {
            let y = d.sample(rng);
            if y > prev || y < a {
                continue 'attempt;
            }
            out.push(y);
            prev = y;
        }
        let energy = energy_ordered(&out, &bg, params)?;
        return Ok((
            Configuration {
                positions: out,
                energy,
            },
            attempt,
        ));
    }
    Err(Error::MaxAttemptsExceeded {
        attempts: max_attempts,
        accepted: 0,
    })
}
