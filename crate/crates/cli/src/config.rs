//! Run configuration read from a TOML file and overridden by flags.

use std::path::PathBuf;

use krigrisk::field::{BetaChoice, ReportConfig, DEFAULT_ALPHAS};
use krigrisk::gp::KernelFamily;
use krigrisk::mc::{InputModel, Marginal};
use krigrisk::sur::{CandidateSource, Criterion, SurConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub report: ReportSection,
    #[serde(default)]
    pub estimate: EstimateSection,
    #[serde(default)]
    pub sur: SurSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub lhs: LhsSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub oracle_check: OracleCheckSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            out_dir: default_out_dir(),
            problem: ProblemConfig::default(),
            report: ReportSection::default(),
            estimate: EstimateSection::default(),
            sur: SurSection::default(),
            mc: McSection::default(),
            lhs: LhsSection::default(),
            fit: FitSection::default(),
            oracle_check: OracleCheckSection::default(),
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Either a built-in test function or an external command speaking one line
/// per evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub builtin: Option<String>,
    pub command: Option<Vec<String>>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Overrides the built-in thresholds; required for commands.
    pub thresholds: Option<Vec<f64>>,
    /// Overrides the built-in input distribution; required for commands.
    pub inputs: Option<Vec<InputSpec>>,
    /// Response count of a command (defaults to the threshold count).
    pub responses: Option<usize>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            builtin: Some("bump-1d".into()),
            command: None,
            timeout_secs: default_timeout(),
            thresholds: None,
            inputs: None,
            responses: None,
        }
    }
}

fn default_timeout() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    TruncatedNormal { mean: f64, sd: f64, lo: f64, hi: f64 },
}

impl InputSpec {
    fn marginal(&self) -> Marginal {
        match *self {
            InputSpec::Normal { mean, sd } => Marginal::Normal { mean, sd },
            InputSpec::Uniform { lo, hi } => Marginal::Uniform { lo, hi },
            InputSpec::TruncatedNormal { mean, sd, lo, hi } => {
                Marginal::TruncatedNormal { mean, sd, lo, hi }
            }
        }
    }
}

pub fn input_model(specs: &[InputSpec]) -> Result<InputModel, CliError> {
    Ok(InputModel::new(specs.iter().map(InputSpec::marginal).collect())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_ci_alpha")]
    pub ci_alpha: f64,
    /// A number in (0, 1) or `"optimize"`.
    #[serde(default = "default_beta")]
    pub beta: String,
    #[serde(default = "default_moments")]
    pub max_moment: u32,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self {
            alphas: default_alphas(),
            ci_alpha: default_ci_alpha(),
            beta: default_beta(),
            max_moment: default_moments(),
        }
    }
}

fn default_alphas() -> Vec<f64> {
    DEFAULT_ALPHAS.to_vec()
}

fn default_ci_alpha() -> f64 {
    0.05
}

fn default_beta() -> String {
    "0.5".into()
}

fn default_moments() -> u32 {
    4
}

pub fn parse_beta(s: &str) -> Result<BetaChoice, CliError> {
    if s.eq_ignore_ascii_case("optimize") {
        return Ok(BetaChoice::Optimize);
    }
    let b: f64 = s
        .parse()
        .map_err(|_| CliError::Config(format!("beta must be a number or \"optimize\", got {s:?}")))?;
    if !(b > 0.0 && b < 1.0) {
        return Err(CliError::Config(format!("beta {b} outside (0, 1)")));
    }
    Ok(BetaChoice::Fixed(b))
}

impl ReportSection {
    pub fn to_report_config(&self) -> Result<ReportConfig, CliError> {
        let alphas = if self.alphas.is_empty() {
            default_alphas()
        } else {
            self.alphas.clone()
        };
        let cfg = ReportConfig {
            alphas,
            ci_alpha: self.ci_alpha,
            beta: parse_beta(&self.beta)?,
            max_moment: self.max_moment,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    /// Model files, one per response.
    #[serde(default)]
    pub models: Vec<PathBuf>,
    /// Design CSV to fit when no model file is given.
    pub design: Option<PathBuf>,
    #[serde(default = "default_cloud")]
    pub cloud_size: usize,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self {
            models: Vec::new(),
            design: None,
            cloud_size: default_cloud(),
        }
    }
}

fn default_cloud() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurSection {
    #[serde(default = "default_criterion")]
    pub criterion: String,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_initial")]
    pub initial_size: usize,
    /// CSV with the initial design instead of an LHS.
    pub initial_design: Option<PathBuf>,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
    #[serde(default = "default_source")]
    pub candidates: String,
    #[serde(default = "default_candidate_size")]
    pub candidate_size: usize,
    #[serde(default = "default_refresh")]
    pub refresh_every: usize,
    #[serde(default = "default_polish")]
    pub polish_evals: usize,
    pub stop_width: Option<f64>,
    #[serde(default = "default_refresh_fit")]
    pub refit_every: usize,
    #[serde(default = "default_cloud")]
    pub cloud_size: usize,
    #[serde(default = "default_family")]
    pub family: String,
}

impl Default for SurSection {
    fn default() -> Self {
        Self {
            criterion: default_criterion(),
            budget: default_budget(),
            initial_size: default_initial(),
            initial_design: None,
            quadrature_order: default_order(),
            candidates: default_source(),
            candidate_size: default_candidate_size(),
            refresh_every: default_refresh(),
            polish_evals: default_polish(),
            stop_width: None,
            refit_every: default_refresh_fit(),
            cloud_size: default_cloud(),
            family: default_family(),
        }
    }
}

fn default_criterion() -> String {
    "J_Rn".into()
}

fn default_budget() -> usize {
    26
}

fn default_initial() -> usize {
    4
}

fn default_order() -> usize {
    12
}

fn default_source() -> String {
    "cloud-subset".into()
}

fn default_candidate_size() -> usize {
    512
}

fn default_refresh() -> usize {
    5
}

fn default_polish() -> usize {
    100
}

fn default_refresh_fit() -> usize {
    1
}

fn default_family() -> String {
    "matern52".into()
}

pub fn parse_criterion(s: &str) -> Result<Criterion, CliError> {
    Criterion::from_name(s).ok_or_else(|| CliError::Config(format!("unknown criterion {s:?}")))
}

pub fn parse_family(s: &str) -> Result<KernelFamily, CliError> {
    KernelFamily::from_name(s).ok_or_else(|| CliError::Config(format!("unknown kernel family {s:?}")))
}

impl SurSection {
    pub fn to_sur_config(&self, seed: u64, report: ReportConfig) -> Result<SurConfig, CliError> {
        let candidates = match self.candidates.as_str() {
            "cloud-subset" => CandidateSource::CloudSubset {
                size: self.candidate_size,
                refresh_every: self.refresh_every,
            },
            "fresh-grid" => CandidateSource::FreshGrid {
                size: self.candidate_size,
            },
            "continuous" | "continuous-search" => CandidateSource::Continuous {
                size: self.candidate_size,
                max_evals: self.polish_evals,
            },
            other => return Err(CliError::Config(format!("unknown candidate source {other:?}"))),
        };
        let cfg = SurConfig {
            criterion: parse_criterion(&self.criterion)?,
            quadrature_order: self.quadrature_order,
            candidates,
            budget: self.budget,
            stop_width: self.stop_width,
            seed,
            cloud_size: self.cloud_size,
            family: parse_family(&self.family)?,
            refit_every: self.refit_every,
            report,
            ..SurConfig::default()
        };
        cfg.validate()?;
        if self.initial_design.is_none() && self.initial_size < 2 {
            return Err(CliError::Config("initial design needs at least two points".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_mc")]
    pub samples: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            samples: default_mc(),
        }
    }
}

fn default_mc() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LhsSection {
    #[serde(default = "default_lhs")]
    pub size: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

impl Default for LhsSection {
    fn default() -> Self {
        Self {
            size: default_lhs(),
            restarts: default_restarts(),
        }
    }
}

fn default_lhs() -> usize {
    30
}

fn default_restarts() -> usize {
    krigrisk::mc::DEFAULT_RESTARTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub design: Option<PathBuf>,
    /// Kernel family, or `"loo"` to pick the best by leave-one-out error.
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default)]
    pub isotropic: bool,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            design: None,
            family: default_family(),
            isotropic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckSection {
    #[serde(default = "default_check_size")]
    pub cloud_size: usize,
    #[serde(default = "default_check_clouds")]
    pub clouds: usize,
}

impl Default for OracleCheckSection {
    fn default() -> Self {
        Self {
            cloud_size: default_check_size(),
            clouds: default_check_clouds(),
        }
    }
}

fn default_check_size() -> usize {
    300
}

fn default_check_clouds() -> usize {
    5
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
