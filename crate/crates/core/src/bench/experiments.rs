//! Experiment drivers for the one-dimensional benchmark.

use crate::error::{Error, Result};
use crate::field::{build_cloud, credible_cx, ReportConfig};
use crate::gp::{fit, Design, FitConfig, KrigingPosterior};
use crate::mc::{lhs_maximin, InputModel, RngStream, DEFAULT_RESTARTS};
use crate::oracle::Oracle;
use crate::points::Points;
use crate::sur::{run_loop, SurConfig, SurOutcome};

/// Estimates and credible intervals over repeated clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedEstimate {
    pub estimates: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl RepeatedEstimate {
    pub fn repetitions(&self) -> usize {
        self.estimates.len()
    }

    pub fn mean_estimate(&self) -> f64 {
        mean(&self.estimates)
    }

    pub fn mean_lower(&self) -> f64 {
        mean(&self.lower)
    }

    pub fn mean_upper(&self) -> f64 {
        mean(&self.upper)
    }

    /// Width of the averaged interval.
    pub fn mean_width(&self) -> f64 {
        self.mean_upper() - self.mean_lower()
    }

    /// Sample standard deviation of the estimates.
    pub fn estimate_sd(&self) -> f64 {
        let m = self.mean_estimate();
        let n = self.estimates.len() as f64;
        (self.estimates.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
    }
}

/// `repetitions` independent clouds of size `cloud_size` on a fixed posterior.
pub fn repeat_clouds(
    post: &KrigingPosterior,
    threshold: f64,
    model: &InputModel,
    cloud_size: usize,
    repetitions: usize,
    report: &ReportConfig,
    seed: u64,
) -> Result<RepeatedEstimate> {
    if repetitions == 0 {
        return Err(Error::InvalidInput("at least one repetition is required".into()));
    }
    let mut out = RepeatedEstimate {
        estimates: Vec::with_capacity(repetitions),
        lower: Vec::with_capacity(repetitions),
        upper: Vec::with_capacity(repetitions),
    };
    for r in 0..repetitions {
        let cloud = build_cloud(post, threshold, model, cloud_size, RngStream::new(seed, 10_000 + r as u64))?;
        let ci = credible_cx(cloud.groups(), report.ci_alpha, report.beta)?;
        out.estimates.push(cloud.mean());
        out.lower.push(ci.lower);
        out.upper.push(ci.upper);
    }
    Ok(out)
}

/// Evaluates `oracle` on `points` and fits one posterior to its first response.
pub fn fit_on(
    oracle: &mut dyn Oracle,
    points: &Points,
    config: &SurConfig,
) -> Result<KrigingPosterior> {
    let ys = points
        .rows()
        .map(|x| oracle.evaluate(x).map(|y| y[0]))
        .collect::<Result<Vec<_>>>()?;
    let cfg = FitConfig {
        seed: config.seed,
        ..config.fit.clone()
    };
    fit(Design::new(points.clone(), ys)?, config.family, &cfg)
}

/// Setup of the sequential-versus-space-filling comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonConfig {
    pub initial: usize,
    pub total: usize,
    pub cloud_size: usize,
    pub repetitions: usize,
    pub sur: SurConfig,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            initial: 4,
            total: 30,
            cloud_size: 10_000,
            repetitions: 100,
            sur: SurConfig {
                budget: 26,
                ..SurConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub sur: SurOutcome,
    pub sur_estimate: RepeatedEstimate,
    pub lhs_posterior: KrigingPosterior,
    pub lhs_estimate: RepeatedEstimate,
}

/// Sequential design from a small space-filling start versus a space-filling
/// design of the same final size, each scored on repeated clouds.
pub fn compare_sur_lhs(
    oracle: &mut dyn Oracle,
    model: &InputModel,
    threshold: f64,
    config: &ComparisonConfig,
) -> Result<Comparison> {
    if config.total < config.initial {
        return Err(Error::InvalidInput("final design smaller than the initial one".into()));
    }
    let seed = config.sur.seed;
    let initial = lhs_maximin(model, config.initial, DEFAULT_RESTARTS, RngStream::new(seed, 20))?;
    let sur_cfg = SurConfig {
        budget: config.total - config.initial,
        stop_width: None,
        ..config.sur.clone()
    };
    let sur = run_loop(oracle, model, &[threshold], &initial, &sur_cfg)?;
    let report = &config.sur.report;
    let sur_estimate = repeat_clouds(
        &sur.state.posteriors[0],
        threshold,
        model,
        config.cloud_size,
        config.repetitions,
        report,
        seed,
    )?;
    let lhs = lhs_maximin(model, config.total, DEFAULT_RESTARTS, RngStream::new(seed, 21))?;
    let lhs_posterior = fit_on(oracle, &lhs, &config.sur)?;
    let lhs_estimate = repeat_clouds(
        &lhs_posterior,
        threshold,
        model,
        config.cloud_size,
        config.repetitions,
        report,
        seed,
    )?;
    Ok(Comparison {
        sur,
        sur_estimate,
        lhs_posterior,
        lhs_estimate,
    })
}
