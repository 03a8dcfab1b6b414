//! Empirical distributions, KS distances, DKW bands, dominance verdicts and
//! tail-exponent fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ascending-sorted i.i.d. sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::NotANumber);
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `F(x) = #{X_i <= x} / N`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// `#{X_i >= t} / N`.
    pub fn survival(&self, t: f64) -> f64 {
        (self.len() - self.samples.partition_point(|&s| s < t)) as f64 / self.len() as f64
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.samples[idx]
    }

    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }

    pub fn variance(&self) -> f64 {
        variance(&self.samples)
    }

    /// Sup distance to a continuous CDF.
    pub fn ks_to<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.len() as f64;
        self.samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Rows `(x, F(x))` at each distinct sample value.
    pub fn ecdf_points(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.len());
        for (i, &x) in self.samples.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }
}

/// Walks both ECDFs over the merged support, calling `f(F_p, F_q)` after
/// each jump.
fn merged_walk(p: &EmpiricalDistribution, q: &EmpiricalDistribution, mut f: impl FnMut(f64, f64)) {
    let (a, b) = (p.samples(), q.samples());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        f(i as f64 / na, j as f64 / nb);
    }
}

/// Two-sample Kolmogorov–Smirnov distance `sup |F_p - F_q|`.
pub fn ks_statistic(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> f64 {
    let mut d: f64 = 0.0;
    merged_walk(p, q, |fp, fq| d = d.max((fp - fq).abs()));
    d
}

/// One-sample DKW half-width `sqrt(ln(2/delta) / (2N))`: the true CDF lies
/// within this distance of the ECDF everywhere with probability at least
/// `1 - delta`.
pub fn dkw_band(count: usize, delta: f64) -> f64 {
    assert!(count >= 1, "count must be positive");
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    ((2.0 / delta).ln() / (2.0 * count as f64)).sqrt()
}

/// Conservative two-sample band: the sum of the one-sample bands.
pub fn two_sample_band(n1: usize, n2: usize, delta: f64) -> f64 {
    dkw_band(n1, delta) + dkw_band(n2, delta)
}

/// Outcome of an empirical stochastic-dominance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominanceVerdict {
    /// `p` is stochastically larger than `q`.
    Dominates,
    /// `q` is stochastically larger than `p`.
    Dominated,
    /// Each ECDF exceeds the other by more than the band somewhere.
    Crossing,
    Inconclusive,
}

/// Compares ECDFs with the two-sample band at level `1 - delta`.
pub fn dominance_check(p: &EmpiricalDistribution, q: &EmpiricalDistribution, delta: f64) -> DominanceVerdict {
    let band = two_sample_band(p.len(), q.len(), delta);
    // p larger means F_p <= F_q everywhere.
    let mut p_below = false;
    let mut p_above = false;
    merged_walk(p, q, |fp, fq| {
        if fp < fq - band {
            p_below = true;
        }
        if fp > fq + band {
            p_above = true;
        }
    });
    match (p_below, p_above) {
        (true, false) => DominanceVerdict::Dominates,
        (false, true) => DominanceVerdict::Dominated,
        (true, true) => DominanceVerdict::Crossing,
        (false, false) => DominanceVerdict::Inconclusive,
    }
}

/// Survival-probability window `[s_lo, s_hi]` for tail fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct SurvivalWindow {
    pub s_lo: f64,
    pub s_hi: f64,
}

impl Default for SurvivalWindow {
    fn default() -> Self {
        Self { s_lo: 1e-4, s_hi: 1e-1 }
    }
}

/// Least-squares fit of `-ln P(X >= t)` against `t^gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub gamma_hypothesis: f64,
    /// Slope of `-ln S` against `t^gamma`.
    pub fitted_coefficient: f64,
    pub intercept: f64,
    /// `(t_lo, t_hi)` corresponding to the survival window.
    pub fit_window: (f64, f64),
    pub r_squared: f64,
    /// `(t, -ln S(t) - fitted value)` at every fit point.
    pub residuals: Vec<(f64, f64)>,
}

/// Minimum number of samples beyond `t_hi`.
pub const TAIL_MIN_POINTS: usize = 50;

/// Fits on 200 log-spaced survival levels inside `window`.
pub fn tail_exponent_fit(p: &EmpiricalDistribution, gamma: f64, window: SurvivalWindow) -> Result<TailFit> {
    if !(window.s_lo > 0.0 && window.s_lo < window.s_hi && window.s_hi < 1.0) {
        return Err(Error::InvalidParameter("survival window must satisfy 0 < s_lo < s_hi < 1".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    let n = p.len();
    if (window.s_lo * n as f64) < TAIL_MIN_POINTS as f64 {
        return Err(Error::WindowTooDeep {
            survival: window.s_lo,
            count: n,
            min_points: TAIL_MIN_POINTS,
        });
    }
    let levels = 200;
    let (la, lb) = (window.s_hi.ln(), window.s_lo.ln());
    let xs = p.samples();
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(levels);
    for l in 0..levels {
        let s = (la + (lb - la) * l as f64 / (levels - 1) as f64).exp();
        // Largest index with at least s*N samples at or above it.
        let m = (s * n as f64).round() as usize;
        let t = xs[n - m.max(1)];
        let surv = p.survival(t);
        if pts.last().is_some_and(|q| q.0 == t) {
            continue;
        }
        pts.push((t, -surv.ln()));
    }
    let powt = |t: f64| t.signum() * t.abs().powf(gamma);
    let k = pts.len() as f64;
    let mx = pts.iter().map(|q| powt(q.0)).sum::<f64>() / k;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|q| (powt(q.0) - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|q| (powt(q.0) - mx) * (q.1 - my)).sum();
    let syy: f64 = pts.iter().map(|q| (q.1 - my).powi(2)).sum();
    if pts.len() < 3 || sxx <= 0.0 {
        return Err(Error::InvalidParameter("tail window contains too few distinct points".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<(f64, f64)> = pts.iter().map(|q| (q.0, q.1 - intercept - slope * powt(q.0))).collect();
    let ss_res: f64 = residuals.iter().map(|r| r.1 * r.1).sum();
    Ok(TailFit {
        gamma_hypothesis: gamma,
        fitted_coefficient: slope,
        intercept,
        fit_window: (pts[0].0, pts[pts.len() - 1].0),
        r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 },
        residuals,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// `(mean, standard error of the mean)`.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    (mean(xs), (variance(xs) / xs.len() as f64).sqrt())
}

/// Standard error of the unbiased variance estimator, from the fourth
/// central moment.
pub fn variance_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
}

/// Pearson correlation.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Potential scale reduction factor of equal-length chains.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len() as f64;
    let n = chains[0].len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let grand = mean(&means);
    let b = n / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = chains.iter().map(|c| variance(c)).sum::<f64>() / m;
    let var_plus = (n - 1.0) / n * w + b / n;
    (var_plus / w).sqrt()
}

/// Standard Gumbel CDF `exp(-exp(-x))`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;
    use rand::Rng;
    use rand_distr::{Distribution, Exp};

    fn exp_sample(rate: f64, n: usize, seed: u64) -> EmpiricalDistribution {
        let mut rng = StreamRng::new(seed, 0);
        let d = Exp::new(rate).unwrap();
        EmpiricalDistribution::new((0..n).map(|_| d.sample(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn ks_examples() {
        let p = EmpiricalDistribution::new(vec![0.3, 0.1, 0.2]).unwrap();
        assert_eq!(ks_statistic(&p, &p), 0.0);
        let a = EmpiricalDistribution::new(vec![0.0]).unwrap();
        let b = EmpiricalDistribution::new(vec![1.0]).unwrap();
        assert_eq!(ks_statistic(&a, &b), 1.0);
        assert!(EmpiricalDistribution::new(vec![]).is_err());
        assert!(EmpiricalDistribution::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn dkw_examples() {
        assert!((dkw_band(20_000, 0.01) - 0.011_509_5).abs() < 1e-6);
        assert!((dkw_band(400, 0.05) / dkw_band(1600, 0.05) - 2.0).abs() < 1e-12);
        assert!((dkw_band(1, 1.0) - (2f64.ln() / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dominance_examples() {
        let q = exp_sample(1.0, 20_000, 1);
        let p = EmpiricalDistribution::new(q.samples().iter().map(|x| x + 1.0).collect()).unwrap();
        assert_eq!(dominance_check(&p, &q, 0.01), DominanceVerdict::Dominates);
        assert_eq!(dominance_check(&q, &p, 0.01), DominanceVerdict::Dominated);
        let r = exp_sample(1.0, 20_000, 2);
        assert_eq!(dominance_check(&q, &r, 0.01), DominanceVerdict::Inconclusive);
        // Same mean, different spread: crossing CDFs.
        let mut rng = StreamRng::new(3, 0);
        let narrow = EmpiricalDistribution::new((0..20_000).map(|_| rng.random::<f64>() * 0.2 + 0.4).collect()).unwrap();
        let wide = EmpiricalDistribution::new((0..20_000).map(|_| rng.random::<f64>()).collect()).unwrap();
        assert_eq!(dominance_check(&narrow, &wide, 0.01), DominanceVerdict::Crossing);
    }

    #[test]
    fn tail_fit_on_exponential() {
        let p = exp_sample(2.0, 1_000_000, 4);
        let fit = tail_exponent_fit(&p, 1.0, SurvivalWindow::default()).unwrap();
        assert!((fit.fitted_coefficient - 2.0).abs() < 0.2, "{}", fit.fitted_coefficient);
        assert!(fit.r_squared > 0.99);
        assert!(fit.fit_window.0 < fit.fit_window.1);
        let small = exp_sample(2.0, 1000, 5);
        assert!(matches!(
            tail_exponent_fit(&small, 1.0, SurvivalWindow::default()),
            Err(Error::WindowTooDeep { .. })
        ));
    }

    #[test]
    fn tail_fit_is_stable_under_doubling_and_window_shift() {
        let p = exp_sample(1.5, 1_000_000, 6);
        let q = exp_sample(1.5, 2_000_000, 7);
        let a = tail_exponent_fit(&p, 1.0, SurvivalWindow::default()).unwrap();
        let b = tail_exponent_fit(&q, 1.0, SurvivalWindow::default()).unwrap();
        let c = tail_exponent_fit(&q, 1.0, SurvivalWindow { s_lo: 1e-3, s_hi: 1e-0 * 0.99 }).unwrap();
        for f in [&a, &b, &c] {
            assert!((f.fitted_coefficient - 1.5).abs() < 0.15, "{}", f.fitted_coefficient);
        }
    }

    #[test]
    fn summary_statistics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((correlation(&xs, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
        let e = EmpiricalDistribution::new(xs.to_vec()).unwrap();
        assert_eq!(e.cdf(2.0), 0.5);
        assert_eq!(e.survival(2.0), 0.75);
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.ecdf_points().len(), 4);
        assert!((gumbel_cdf(0.0) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gelman_rubin_near_one_for_iid_chains() {
        let mut rng = StreamRng::new(8, 0);
        let chains: Vec<Vec<f64>> = (0..4).map(|_| (0..5000).map(|_| rng.random::<f64>()).collect()).collect();
        assert!(gelman_rubin(&chains) < 1.01);
    }
}
