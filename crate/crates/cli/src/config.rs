//! Experiment configuration: a single JSON document
//! `{"experiment": ..., "params": {...}, "seed": ..., "output_dir": ..., "parallelism": ...}`.

use std::path::PathBuf;

use jellium::edge::{ConvergenceOptions, LimitFamily, LimitKind, Regime, DEFAULT_SERIES_EPS};
use jellium::ordered::{SamplingOptions, DEFAULT_MAX_ATTEMPTS};
use jellium::stats::SurvivalWindow;
use jellium::{BackgroundSpec, GasParams};
use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable overriding the root against which a relative
/// `output_dir` is resolved.
pub const OUTPUT_ROOT_ENV: &str = "JELLIUM_OUTPUT_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum ExperimentKind {
    SampleGas,
    SampleLimit,
    RenyiCheck,
    TailScan,
    DominanceCheck,
    GumbelCheck,
    ConvergenceTable,
    PartitionEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    params: serde_json::Value,
    seed: u64,
    output_dir: PathBuf,
    #[serde(default)]
    parallelism: Option<usize>,
}

fn default_samples_chunk() -> usize {
    1000
}

fn default_delta() -> f64 {
    0.01
}

fn default_eps() -> f64 {
    DEFAULT_SERIES_EPS
}

fn default_max_attempts() -> u64 {
    DEFAULT_MAX_ATTEMPTS
}

fn default_depth() -> usize {
    128
}

/// Draws of the full finite gas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SampleGasParams {
    pub n: usize,
    pub beta: f64,
    pub background: BackgroundSpec,
    pub samples: usize,
    #[serde(default)]
    pub sampling: SamplingOptions,
    /// Samples per parallel task. Each Gibbs task runs its own chain.
    #[serde(default = "default_samples_chunk")]
    pub chunk: usize,
}

/// Top-`k` draws of an edge process. Without `depth_m` the half-well
/// family uses its exponential series; other families require `depth_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SampleLimitParams {
    pub family: LimitFamily,
    pub k: usize,
    #[serde(default)]
    pub depth_m: Option<usize>,
    pub samples: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub sampling: SamplingOptions,
    #[serde(default = "default_samples_chunk")]
    pub chunk: usize,
}

/// Exponential partial-sum representation against direct simulation of
/// the gas conditioned on `k` particles right of 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RenyiCheckParams {
    pub n: usize,
    pub beta: f64,
    pub background: BackgroundSpec,
    pub k: usize,
    pub samples: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u64,
    #[serde(default = "default_samples_chunk")]
    pub chunk: usize,
}

/// Tail-exponent fit of the top point of an edge process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TailScanParams {
    pub family: LimitFamily,
    pub samples: usize,
    /// Defaults to 1 for the half-well and squared-zero families and to
    /// `gamma` for the squared-gamma family.
    #[serde(default)]
    pub gamma_hypothesis: Option<f64>,
    #[serde(default)]
    pub window: SurvivalWindow,
    /// Conditioning depth for non-half-well families.
    #[serde(default = "default_depth")]
    pub depth_m: usize,
    #[serde(default)]
    pub sampling: SamplingOptions,
    #[serde(default = "default_samples_chunk")]
    pub chunk: usize,
}

/// Depth monotonicity and half-well upper bound for the top point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DominanceCheckParams {
    pub family: LimitFamily,
    pub depth_lo: usize,
    pub depth_hi: usize,
    pub samples: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub sampling: SamplingOptions,
    #[serde(default = "default_samples_chunk")]
    pub chunk: usize,
}

/// Centered `M_chi` against the Gumbel law shifted by `-euler_gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GumbelCheckParams {
    pub chi: f64,
    pub samples: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_samples_chunk")]
    pub chunk: usize,
}

/// KS distance between finite-`n` and limiting top-`k` laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceTableParams {
    pub regime: Regime,
    pub beta: f64,
    pub k: usize,
    pub n_list: Vec<usize>,
    pub samples: usize,
    #[serde(default)]
    pub options: ConvergenceOptions,
}

/// Monte Carlo estimate of `log Z_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PartitionEstimateParams {
    pub n: usize,
    pub beta: f64,
    pub background: BackgroundSpec,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "experiment", content = "params")]
pub enum Experiment {
    SampleGas(SampleGasParams),
    SampleLimit(SampleLimitParams),
    RenyiCheck(RenyiCheckParams),
    TailScan(TailScanParams),
    DominanceCheck(DominanceCheckParams),
    GumbelCheck(GumbelCheckParams),
    ConvergenceTable(ConvergenceTableParams),
    PartitionEstimate(PartitionEstimateParams),
}

/// A parsed and validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 or absent uses all cores. Output does not depend
    /// on this value.
    #[serde(default)]
    pub parallelism: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| path_error("", e))?;
        let p = raw.params;
        let experiment = match raw.experiment {
            ExperimentKind::SampleGas => Experiment::SampleGas(params(p)?),
            ExperimentKind::SampleLimit => Experiment::SampleLimit(params(p)?),
            ExperimentKind::RenyiCheck => Experiment::RenyiCheck(params(p)?),
            ExperimentKind::TailScan => Experiment::TailScan(params(p)?),
            ExperimentKind::DominanceCheck => Experiment::DominanceCheck(params(p)?),
            ExperimentKind::GumbelCheck => Experiment::GumbelCheck(params(p)?),
            ExperimentKind::ConvergenceTable => Experiment::ConvergenceTable(params(p)?),
            ExperimentKind::PartitionEstimate => Experiment::PartitionEstimate(params(p)?),
        };
        let cfg = Self {
            experiment,
            seed: raw.seed,
            output_dir: raw.output_dir,
            parallelism: raw.parallelism,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> ExperimentKind {
        match self.experiment {
            Experiment::SampleGas(_) => ExperimentKind::SampleGas,
            Experiment::SampleLimit(_) => ExperimentKind::SampleLimit,
            Experiment::RenyiCheck(_) => ExperimentKind::RenyiCheck,
            Experiment::TailScan(_) => ExperimentKind::TailScan,
            Experiment::DominanceCheck(_) => ExperimentKind::DominanceCheck,
            Experiment::GumbelCheck(_) => ExperimentKind::GumbelCheck,
            Experiment::ConvergenceTable(_) => ExperimentKind::ConvergenceTable,
            Experiment::PartitionEstimate(_) => ExperimentKind::PartitionEstimate,
        }
    }

    /// `output_dir`, resolved against `JELLIUM_OUTPUT_ROOT` when relative.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if self.output_dir.is_relative() => PathBuf::from(root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }

    /// Semantic checks. Inadmissible gases surface as core errors so that
    /// they keep their own exit code.
    pub fn check(&self) -> Result<(), CliError> {
        match &self.experiment {
            Experiment::SampleGas(p) => {
                positive_count("/params/samples", p.samples)?;
                positive_count("/params/chunk", p.chunk)?;
                gas(p.n, p.beta, &p.background)?;
            }
            Experiment::SampleLimit(p) => {
                family("/params/family", &p.family)?;
                positive_count("/params/k", p.k)?;
                positive_count("/params/samples", p.samples)?;
                positive_count("/params/chunk", p.chunk)?;
                if !(p.eps > 0.0) {
                    return Err(CliError::config("/params/eps", "eps must be positive"));
                }
                match (p.family.kind, p.depth_m) {
                    (_, Some(m)) if m < p.k => {
                        return Err(CliError::config("/params/depth_m", format!("depth {m} is smaller than k = {}", p.k)));
                    }
                    (LimitKind::HalfWell { .. }, _) | (_, Some(_)) => {}
                    (_, None) => {
                        return Err(CliError::config("/params/depth_m", "depth_m is required for this family"));
                    }
                }
            }
            Experiment::RenyiCheck(p) => {
                positive_count("/params/samples", p.samples)?;
                positive_count("/params/chunk", p.chunk)?;
                delta("/params/delta", p.delta)?;
                let g = gas(p.n, p.beta, &p.background)?;
                if p.k > p.n {
                    return Err(CliError::config("/params/k", format!("k = {} exceeds n = {}", p.k, p.n)));
                }
                jellium::order_stats::ConditionalSpec::new(g, p.background.clone(), p.k)
                    .map_err(|e| at("/params/background", e))?;
            }
            Experiment::TailScan(p) => {
                family("/params/family", &p.family)?;
                positive_count("/params/samples", p.samples)?;
                positive_count("/params/depth_m", p.depth_m)?;
                positive_count("/params/chunk", p.chunk)?;
                if let Some(g) = p.gamma_hypothesis {
                    if !(g > 0.0 && g.is_finite()) {
                        return Err(CliError::config("/params/gamma_hypothesis", "gamma_hypothesis must be positive"));
                    }
                }
                let w = p.window;
                if !(w.s_lo > 0.0 && w.s_lo < w.s_hi && w.s_hi < 1.0) {
                    return Err(CliError::config("/params/window", "window must satisfy 0 < s_lo < s_hi < 1"));
                }
            }
            Experiment::DominanceCheck(p) => {
                family("/params/family", &p.family)?;
                positive_count("/params/samples", p.samples)?;
                positive_count("/params/depth_lo", p.depth_lo)?;
                positive_count("/params/chunk", p.chunk)?;
                delta("/params/delta", p.delta)?;
                if p.depth_hi <= p.depth_lo {
                    return Err(CliError::config("/params/depth_hi", "depth_hi must exceed depth_lo"));
                }
            }
            Experiment::GumbelCheck(p) => {
                positive_count("/params/samples", p.samples)?;
                positive_count("/params/chunk", p.chunk)?;
                if !(p.chi > 0.0 && p.chi.is_finite()) {
                    return Err(CliError::config("/params/chi", "chi must be positive"));
                }
                if !(p.eps > 0.0) {
                    return Err(CliError::config("/params/eps", "eps must be positive"));
                }
            }
            Experiment::ConvergenceTable(p) => {
                positive_count("/params/k", p.k)?;
                positive_count("/params/samples", p.samples)?;
                positive_count("/params/options/chunk", p.options.chunk)?;
                delta("/params/options/delta", p.options.delta)?;
                if p.n_list.is_empty() {
                    return Err(CliError::config("/params/n_list", "n_list must not be empty"));
                }
                p.regime.limit(p.beta).map_err(|e| at("/params/regime", e))?;
                if p.options.limit_depth < p.k {
                    return Err(CliError::config("/params/options/limit_depth", "limit_depth must be at least k"));
                }
                for (i, &n) in p.n_list.iter().enumerate() {
                    let ptr = format!("/params/n_list/{i}");
                    if n < p.k {
                        return Err(CliError::config(ptr, format!("n = {n} is smaller than k = {}", p.k)));
                    }
                    let bg = p.regime.background(n).map_err(|e| at(&ptr, e))?;
                    GasParams::new(n, p.beta, bg.alpha).map_err(|e| at(&ptr, e))?.require_admissible()?;
                }
            }
            Experiment::PartitionEstimate(p) => {
                if p.samples == 0 {
                    return Err(CliError::config("/params/samples", "samples must be at least 1"));
                }
                gas(p.n, p.beta, &p.background)?;
            }
        }
        Ok(())
    }
}

fn params<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| path_error("/params", e))
}

/// JSON pointer for a serde error, including the missing field if any.
fn path_error(prefix: &str, e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    use serde_path_to_error::Segment;
    let mut pointer = prefix.to_string();
    for seg in e.path().iter() {
        match seg {
            Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
            Segment::Map { key } => pointer.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => pointer.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    let message = e.inner().to_string();
    if let Some(field) = message.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
        pointer.push('/');
        pointer.push_str(field);
    }
    if pointer.is_empty() {
        pointer.push('/');
    }
    CliError::config(pointer, message)
}

fn at(pointer: &str, e: jellium::Error) -> CliError {
    match e {
        jellium::Error::InadmissibleGas { .. } => CliError::Core(e),
        other => CliError::config(pointer, other.to_string()),
    }
}

fn positive_count(pointer: &str, v: usize) -> Result<(), CliError> {
    if v == 0 {
        return Err(CliError::config(pointer, "must be at least 1"));
    }
    Ok(())
}

fn delta(pointer: &str, d: f64) -> Result<(), CliError> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(CliError::config(pointer, "confidence level delta must lie in (0, 1]"));
    }
    Ok(())
}

fn family(pointer: &str, f: &LimitFamily) -> Result<(), CliError> {
    f.validate().map_err(|e| at(pointer, e))
}

fn gas(n: usize, beta: f64, bg: &BackgroundSpec) -> Result<GasParams, CliError> {
    bg.validate().map_err(|e| at("/params/background", e))?;
    let p = GasParams::new(n, beta, bg.alpha).map_err(|e| {
        let ptr = match &e {
            jellium::Error::InvalidParameter(m) if m.starts_with("beta") => "/params/beta",
            jellium::Error::InvalidParameter(m) if m.starts_with("n ") => "/params/n",
            _ => "/params/background/alpha",
        };
        at(ptr, e)
    })?;
    if let jellium::BackgroundVariant::GammaFamily { n: bn, .. } = bg.variant {
        if bn != n {
            return Err(CliError::config(
                "/params/background/params/n",
                format!("gamma-family background built for n = {bn}, gas has n = {n}"),
            ));
        }
    }
    p.require_admissible()?;
    Ok(p)
}

/// JSON schema of the configuration document.
pub fn schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(ExperimentConfig)).expect("schema serializes")
}
