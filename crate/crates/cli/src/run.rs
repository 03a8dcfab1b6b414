//! Experiment execution.

use std::time::Instant;

use jellium::edge::{
    finite_to_limit_distance, gumbel_mean, gumbel_statistic, limit_topk_samples, sample_limit_topk, coordinate_ks,
    DistanceRow, HalfWellSampler, LimitFamily, LimitKind, TopKSample, DEFAULT_SERIES_EPS,
};
use jellium::order_stats::{conditional_moments, sample_renyi_topk, ConditionalSpec, DirectReport, DirectSampler};
use jellium::ordered::{Method, SamplingOptions};
use jellium::rng::run_tasks;
use jellium::series::EULER_GAMMA;
use jellium::stats::{
    dominance_check, gumbel_cdf, ks_statistic, tail_exponent_fit, two_sample_band, DominanceVerdict,
    EmpiricalDistribution, TailFit,
};
use jellium::{gas, BackgroundSpec, Gas, GasParams, StreamRng};
use serde::{Deserialize, Serialize};

use crate::config::*;
use crate::error::CliError;
use crate::output::ArtifactDir;

/// Build version: package version plus `git describe` when available.
pub const VERSION: &str = env!("JELLIUM_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub parallelism: usize,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
    pub config: ExperimentConfig,
}

/// Runs `cfg` and writes its artifacts and `manifest.json`.
pub fn run(cfg: &ExperimentConfig) -> Result<Manifest, CliError> {
    cfg.check()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let mut dir = ArtifactDir::create(cfg.resolved_output_dir())?;
    pool.install(|| execute(cfg, &mut dir))?;
    let mut artifacts = dir.written().to_vec();
    artifacts.push("manifest.json".into());
    let manifest = Manifest {
        version: VERSION.to_string(),
        experiment: cfg.kind(),
        seed: cfg.seed,
        parallelism: pool.current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        artifacts,
        config: cfg.clone(),
    };
    dir.json("manifest.json", &manifest)?;
    Ok(manifest)
}

fn execute(cfg: &ExperimentConfig, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let seed = cfg.seed;
    match &cfg.experiment {
        Experiment::SampleGas(p) => sample_gas(p, seed, dir),
        Experiment::SampleLimit(p) => sample_limit(p, seed, dir),
        Experiment::RenyiCheck(p) => renyi_check(p, seed, dir),
        Experiment::TailScan(p) => tail_scan(p, seed, dir),
        Experiment::DominanceCheck(p) => dominance(p, seed, dir),
        Experiment::GumbelCheck(p) => gumbel(p, seed, dir),
        Experiment::ConvergenceTable(p) => convergence(p, seed, dir),
        Experiment::PartitionEstimate(p) => partition(p, seed, dir),
    }
}

fn build_gas(n: usize, beta: f64, bg: &BackgroundSpec) -> Result<Gas, CliError> {
    Ok(Gas::new(bg.clone(), GasParams::new(n, beta, bg.alpha)?)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleGasReport {
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
    pub samples: usize,
    /// `rejection`, `gibbs`, or `mixed` when tasks chose differently.
    pub method: String,
    /// Rejection acceptance rate over all rejection tasks, or the mean
    /// pilot rate when Gibbs was used.
    pub acceptance: f64,
    pub mean_energy: f64,
    pub mean_top: f64,
}

fn sample_gas(p: &SampleGasParams, seed: u64, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let g = build_gas(p.n, p.beta, &p.background)?;
    let parts = run_tasks(seed, 0, p.samples, p.chunk, |rng, len| {
        let b = g.system().sample_topk(p.n, len, rng, &p.sampling)?;
        Ok(vec![(b.method, b.acceptance, b.values)])
    })?;
    let mut values = Vec::with_capacity(p.samples);
    let (mut attempts, mut accepted, mut pilot_sum, mut gibbs_tasks) = (0.0, 0.0, 0.0, 0usize);
    let mut methods = Vec::new();
    for (m, acc, v) in parts {
        match m {
            Method::Rejection => {
                accepted += v.len() as f64;
                attempts += (v.len() as f64 / acc).round();
            }
            Method::Gibbs => {
                pilot_sum += acc;
                gibbs_tasks += 1;
            }
        }
        if !methods.contains(&m) {
            methods.push(m);
        }
        values.extend(v);
    }
    let method = match methods.as_slice() {
        [Method::Rejection] => "rejection",
        [Method::Gibbs] => "gibbs",
        _ => "mixed",
    };
    let acceptance = if attempts > 0.0 {
        accepted / attempts
    } else {
        pilot_sum / gibbs_tasks.max(1) as f64
    };
    let mut e = 0.0;
    for v in &values {
        e += gas::energy_ordered(v, g.background(), g.params())?;
    }
    let report = SampleGasReport {
        n: p.n,
        beta: p.beta,
        alpha: p.background.alpha,
        samples: values.len(),
        method: method.into(),
        acceptance,
        mean_energy: e / values.len() as f64,
        mean_top: values.iter().map(|v| v[0]).sum::<f64>() / values.len() as f64,
    };
    dir.configurations("samples.csv", &values)?;
    dir.json("sample_gas.json", &report)
}

fn halfwell_lambda(f: &LimitFamily) -> Option<f64> {
    match f.kind {
        LimitKind::HalfWell { lambda } => Some(lambda),
        _ => None,
    }
}

/// Top-`k` draws; exact series for the half-well when `depth` is `None`.
fn limit_draws(
    family: &LimitFamily,
    k: usize,
    depth: Option<usize>,
    samples: usize,
    eps: f64,
    seed: u64,
    label: u64,
    chunk: usize,
    sampling: &SamplingOptions,
) -> Result<Vec<TopKSample>, CliError> {
    let out = match (halfwell_lambda(family), depth) {
        (Some(lambda), None) => {
            let s = HalfWellSampler::new(lambda, family.beta, k, eps)?;
            run_tasks(seed, label, samples, chunk, |rng, len| Ok((0..len).map(|_| s.sample(rng)).collect()))?
        }
        (_, Some(m)) => run_tasks(seed, label, samples, chunk, |rng, len| {
            sample_limit_topk(family, k, m, len, rng, sampling)
        })?,
        (None, None) => return Err(CliError::config("/params/depth_m", "depth_m is required for this family")),
    };
    Ok(out)
}

fn sample_limit(p: &SampleLimitParams, seed: u64, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let draws = limit_draws(&p.family, p.k, p.depth_m, p.samples, p.eps, seed, 0, p.chunk, &p.sampling)?;
    dir.topk("topk.csv", &draws)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenyiCheckReport {
    /// `pass` when every coordinate's KS distance is below the band.
    pub verdict: String,
    pub ks: Vec<f64>,
    pub band: f64,
    pub delta: f64,
    pub samples: usize,
    /// `(mean, variance)` of each conditional order statistic.
    pub moments: Vec<(f64, f64)>,
}

fn renyi_check(p: &RenyiCheckParams, seed: u64, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let spec = ConditionalSpec::new(GasParams::new(p.n, p.beta, p.background.alpha)?, p.background.clone(), p.k)?;
    let direct = DirectSampler::new(spec.clone())?;
    let parts = run_tasks(seed, 1, p.samples, p.chunk, |rng, len| {
        Ok(vec![direct.sample_block(len, rng, p.max_attempts)?])
    })?;
    let attempted = parts.iter().map(|(_, a)| a).sum();
    let direct_draws: Vec<TopKSample> = parts.into_iter().flat_map(|(v, _)| v).collect();
    let report: DirectReport = direct.report(direct_draws.len() as u64, attempted, &mut StreamRng::new(seed, 3));
    let renyi: Vec<TopKSample> = run_tasks(seed, 2, p.samples, p.chunk, |rng, len| {
        Ok((0..len).map(|_| sample_renyi_topk(&spec, rng)).collect())
    })?;
    let a: Vec<Vec<f64>> = direct_draws.iter().map(|s| s.values.clone()).collect();
    let b: Vec<Vec<f64>> = renyi.iter().map(|s| s.values.clone()).collect();
    let ks = coordinate_ks(&a, &b, p.k)?;
    let band = two_sample_band(p.samples, p.samples, p.delta);
    let check = RenyiCheckReport {
        verdict: if ks.iter().all(|&d| d < band) { "pass" } else { "fail" }.into(),
        ks,
        band,
        delta: p.delta,
        samples: p.samples,
        moments: conditional_moments(&spec),
    };
    dir.topk("renyi.csv", &renyi)?;
    dir.topk("direct.csv", &direct_draws)?;
    dir.json("direct_report.json", &report)?;
    dir.json("renyi_check.json", &check)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailScanReport {
    pub fit: TailFit,
    /// Leading tail coefficient: `beta lambda` against `t` for the
    /// half-well and squared-zero families, `beta / gamma` against
    /// `t^gamma` for the squared-gamma family.
    pub expected_coefficient: f64,
    pub relative_error: f64,
}

/// Expected tail coefficient for the top point and the natural exponent.
pub fn tail_target(f: &LimitFamily) -> (f64, f64) {
    match f.kind {
        LimitKind::HalfWell { lambda } | LimitKind::SquaredZero { lambda } => (1.0, f.beta * lambda),
        LimitKind::SquaredGamma { gamma } => (gamma, f.beta / gamma),
    }
}

fn tail_scan(p: &TailScanParams, seed: u64, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let depth = halfwell_lambda(&p.family).map_or(Some(p.depth_m), |_| None);
    let draws = limit_draws(&p.family, 1, depth, p.samples, DEFAULT_SERIES_EPS, seed, 0, p.chunk, &p.sampling)?;
    let emp = EmpiricalDistribution::new(draws.iter().map(|s| s.values[0]).collect())?;
    let (natural, expected) = tail_target(&p.family);
    let gamma = p.gamma_hypothesis.unwrap_or(natural);
    let fit = tail_exponent_fit(&emp, gamma, p.window)?;
    let report = TailScanReport {
        relative_error: (fit.fitted_coefficient - expected) / expected,
        fit,
        expected_coefficient: expected,
    };
    dir.ecdf("ecdf.csv", &emp.ecdf_points())?;
    dir.json("tail_fit.json", &report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominanceReport {
    /// Deeper conditioning against shallower; expected `Dominates`.
    pub depth_verdict: DominanceVerdict,
    /// Half-well upper bound against the deeper population; expected
    /// `Dominates`.
    pub upper_verdict: DominanceVerdict,
    pub upper_family: LimitFamily,
    pub ks_depth: f64,
    pub ks_upper: f64,
    pub band: f64,
}

fn dominance(p: &DominanceCheckParams, seed: u64, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let lo = limit_draws(&p.family, 1, Some(p.depth_lo), p.samples, DEFAULT_SERIES_EPS, seed, 0, p.chunk, &p.sampling)?;
    let hi = limit_draws(&p.family, 1, Some(p.depth_hi), p.samples, DEFAULT_SERIES_EPS, seed, 1, p.chunk, &p.sampling)?;
    let upper_family = p.family.upper_bound();
    let up = limit_draws(&upper_family, 1, None, p.samples, DEFAULT_SERIES_EPS, seed, 2, p.chunk, &p.sampling)?;
    let top = |v: &[TopKSample]| EmpiricalDistribution::new(v.iter().map(|s| s.values[0]).collect());
    let (elo, ehi, eup) = (top(&lo)?, top(&hi)?, top(&up)?);
    let report = DominanceReport {
        depth_verdict: dominance_check(&ehi, &elo, p.delta),
        upper_verdict: dominance_check(&eup, &ehi, p.delta),
        upper_family,
        ks_depth: ks_statistic(&ehi, &elo),
        ks_upper: ks_statistic(&eup, &ehi),
        band: two_sample_band(p.samples, p.samples, p.delta),
    };
    dir.topk("depth_lo.csv", &lo)?;
    dir.topk("depth_hi.csv", &hi)?;
    dir.topk("upper.csv", &up)?;
    dir.json("dominance.json", &report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GumbelReport {
    pub chi: f64,
    pub samples: usize,
    pub exact_mean: f64,
    pub sample_mean: f64,
    /// KS distance of the centered statistic to the standard Gumbel law
    /// shifted by `-euler_gamma`.
    pub ks: f64,
}

fn gumbel(p: &GumbelCheckParams, seed: u64, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let xs = run_tasks(seed, 0, p.samples, p.chunk, |rng, len| {
        Ok(gumbel_statistic(p.chi, rng, len, p.eps)?.samples().to_vec())
    })?;
    let emp = EmpiricalDistribution::new(xs)?;
    let report = GumbelReport {
        chi: p.chi,
        samples: p.samples,
        exact_mean: gumbel_mean(p.chi),
        sample_mean: emp.mean(),
        ks: emp.ks_to(|x| gumbel_cdf(x + EULER_GAMMA)),
    };
    dir.ecdf("gumbel_ecdf.csv", &emp.ecdf_points())?;
    dir.json("gumbel.json", &report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<DistanceRow>,
    /// Limit sampler against an independent run of itself.
    pub null_ks: Vec<f64>,
    pub band: f64,
}

fn convergence(p: &ConvergenceTableParams, seed: u64, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let rows = finite_to_limit_distance(&p.regime, p.beta, p.k, &p.n_list, p.samples, seed, &p.options)?;
    let a = limit_topk_samples(&p.regime, p.beta, p.k, p.samples, seed, &p.options)?;
    let b = limit_topk_samples(&p.regime, p.beta, p.k, p.samples, seed ^ 0x9e37_79b9_7f4a_7c15, &p.options)?;
    let report = ConvergenceReport {
        rows,
        null_ks: coordinate_ks(&a, &b, p.k)?,
        band: two_sample_band(p.samples, p.samples, p.options.delta),
    };
    dir.json("convergence.json", &report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionReport {
    pub log_z: f64,
    pub std_error: f64,
    pub samples: u64,
}

fn partition(p: &PartitionEstimateParams, seed: u64, dir: &mut ArtifactDir) -> Result<(), CliError> {
    let g = build_gas(p.n, p.beta, &p.background)?;
    let (log_z, std_error) = g.estimate_log_partition(&mut StreamRng::new(seed, 0), p.samples)?;
    dir.json(
        "partition.json",
        &PartitionReport {
            log_z,
            std_error,
            samples: p.samples,
        },
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub status: String,
    pub experiment: ExperimentKind,
    /// Rough number of one-dimensional draws the run will make.
    pub estimated_draws: f64,
    /// Rejection acceptance rate from a short pilot, where relevant.
    pub pilot_acceptance: Option<f64>,
}

const VALIDATE_PILOT: u64 = 2000;

/// Schema and admissibility checks plus a cost estimate, without running.
pub fn validate(cfg: &ExperimentConfig) -> Result<Diagnostics, CliError> {
    cfg.check()?;
    let mut rng = StreamRng::new(cfg.seed, u64::MAX);
    let mut pilot = |sys: &jellium::ordered::OrderedSystem| {
        sys.count_ordered(&mut rng, VALIDATE_PILOT) as f64 / VALIDATE_PILOT as f64
    };
    let (draws, acc) = match &cfg.experiment {
        Experiment::SampleGas(p) => {
            let a = pilot(build_gas(p.n, p.beta, &p.background)?.system());
            ((p.samples * p.n) as f64 / a.max(p.sampling.min_acceptance), Some(a))
        }
        Experiment::SampleLimit(p) => limit_cost(&p.family, p.k, p.depth_m, p.samples, p.eps, &mut pilot)?,
        Experiment::TailScan(p) => {
            let depth = halfwell_lambda(&p.family).map_or(Some(p.depth_m), |_| None);
            limit_cost(&p.family, 1, depth, p.samples, DEFAULT_SERIES_EPS, &mut pilot)?
        }
        Experiment::DominanceCheck(p) => {
            let (a, _) = limit_cost(&p.family, 1, Some(p.depth_lo), p.samples, 1.0, &mut pilot)?;
            let (b, acc) = limit_cost(&p.family, 1, Some(p.depth_hi), p.samples, 1.0, &mut pilot)?;
            (a + b, acc)
        }
        Experiment::RenyiCheck(p) => ((2 * p.samples * p.k.max(1)) as f64, None),
        Experiment::GumbelCheck(p) => {
            let s = HalfWellSampler::new((p.chi + 1.0) / 2.0, 2.0 / p.chi, 1, p.eps)?;
            ((p.samples * s.depth()) as f64, None)
        }
        Experiment::ConvergenceTable(p) => {
            let finite: usize = p.n_list.iter().sum();
            (((finite + p.options.limit_depth) * p.samples) as f64, None)
        }
        Experiment::PartitionEstimate(p) => ((p.samples as usize * p.n) as f64, None),
    };
    Ok(Diagnostics {
        status: "ok".into(),
        experiment: cfg.kind(),
        estimated_draws: draws,
        pilot_acceptance: acc,
    })
}

fn limit_cost(
    f: &LimitFamily,
    k: usize,
    depth: Option<usize>,
    samples: usize,
    eps: f64,
    pilot: &mut impl FnMut(&jellium::ordered::OrderedSystem) -> f64,
) -> Result<(f64, Option<f64>), CliError> {
    match (halfwell_lambda(f), depth) {
        (Some(lambda), None) => {
            let s = HalfWellSampler::new(lambda, f.beta, k, eps)?;
            Ok(((samples * s.depth()) as f64, None))
        }
        (Some(_), Some(m)) => Ok(((samples * m) as f64, None)),
        (None, Some(m)) => {
            let a = pilot(&f.system(m)?);
            Ok(((samples * m) as f64 / a.max(1e-3), Some(a)))
        }
        (None, None) => Err(CliError::config("/params/depth_m", "depth_m is required for this family")),
    }
}
