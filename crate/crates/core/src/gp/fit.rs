//! Maximum-likelihood hyperparameters for the constant-trend Kriging model.
//!
//! The process variance and the GLS trend are profiled out of the likelihood,
//! leaving the lengthscales to a multi-start simplex search in log space.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gp::kernel::{KernelFamily, KernelSpec};
use crate::gp::posterior::{cholesky_with_jitter, solve_chol, Design, Jitter, KrigingPosterior, Trend, JITTER_START};
use crate::mc::RngStream;
use crate::optim::NelderMead;

#[derive(Debug, Clone, PartialEq)]
pub enum Hyperparameters {
    /// Maximum likelihood over lengthscales, warm-started from `hint` when given.
    Estimate { hint: Option<Vec<f64>> },
    Fixed(KernelSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub hyper: Hyperparameters,
    pub isotropic: bool,
    pub starts: usize,
    /// Lengthscale box as multiples of each input's design range.
    pub bounds: (f64, f64),
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            hyper: Hyperparameters::Estimate { hint: None },
            isotropic: false,
            starts: 8,
            bounds: (1e-2, 1e2),
            max_evals: 300,
            seed: 0x5eed,
        }
    }
}

impl FitConfig {
    pub fn fixed(kernel: KernelSpec) -> Self {
        Self {
            hyper: Hyperparameters::Fixed(kernel),
            ..Self::default()
        }
    }
}

/// Concentrated negative log-likelihood and the profiled variance for given
/// lengthscales. `None` when the correlation matrix cannot be factored.
pub fn profiled_nll(
    design: &Design,
    family: KernelFamily,
    lengthscales: &[f64],
    isotropic: bool,
) -> Option<(f64, f64)> {
    let unit = KernelSpec {
        family,
        variance: 1.0,
        lengthscales: lengthscales.to_vec(),
        isotropic,
    };
    let r = unit.matrix(design.points());
    let (l, _) = cholesky_with_jitter(&r, 1.0, Jitter::Exact(JITTER_START))?;
    let n = design.len() as f64;
    let y = DVector::from_column_slice(design.responses());
    let ones = DVector::from_element(design.len(), 1.0);
    let w1 = solve_chol(&l, &ones);
    let beta = w1.dot(&y) / w1.dot(&ones);
    let centered = y.add_scalar(-beta);
    let quad = centered.dot(&solve_chol(&l, &centered));
    let sigma2 = variance_floor(quad / n, design.responses());
    let log_det: f64 = l.diagonal().iter().map(|d| d.ln()).sum();
    Some((0.5 * n * sigma2.ln() + log_det, sigma2))
}

// constant responses give a zero profiled variance; keep the kernel valid
fn variance_floor(sigma2: f64, y: &[f64]) -> f64 {
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    sigma2.max(1e-20 * scale * scale)
}

fn column_ranges(design: &Design) -> Vec<f64> {
    let pts = design.points();
    (0..pts.dim())
        .map(|k| {
            let col = pts.column(k);
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                hi - lo
            } else {
                1.0
            }
        })
        .collect()
}

/// Fits a Kriging posterior: hyperparameters by profiled maximum likelihood
/// (unless fixed), trend by GLS.
pub fn fit(design: Design, family: KernelFamily, config: &FitConfig) -> Result<KrigingPosterior> {
    match &config.hyper {
        Hyperparameters::Fixed(kernel) => {
            if kernel.family != family {
                return Err(Error::InvalidInput(format!(
                    "fixed kernel is {} but {} was requested",
                    kernel.family, family
                )));
            }
            KrigingPosterior::condition(design, kernel.clone(), Trend::Gls)
        }
        Hyperparameters::Estimate { hint } => {
            if design.len() < 2 {
                return Err(Error::InvalidInput(
                    "hyperparameter estimation needs at least two observations".into(),
                ));
            }
            let lengthscales = estimate_lengthscales(&design, family, config, hint.as_deref())?;
            let (_, sigma2) = profiled_nll(&design, family, &lengthscales, config.isotropic)
                .ok_or(Error::DegenerateDesign { jitter: JITTER_START })?;
            let kernel = KernelSpec::new(family, sigma2, lengthscales, config.isotropic)?;
            KrigingPosterior::condition(design, kernel, Trend::Gls)
        }
    }
}

fn estimate_lengthscales(
    design: &Design,
    family: KernelFamily,
    config: &FitConfig,
    hint: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let ranges = column_ranges(design);
    let scales: Vec<f64> = if config.isotropic {
        vec![ranges.iter().cloned().fold(0.0, f64::max)]
    } else {
        ranges
    };
    let p = scales.len();
    let lo: Vec<f64> = scales.iter().map(|s| (config.bounds.0 * s).ln()).collect();
    let hi: Vec<f64> = scales.iter().map(|s| (config.bounds.1 * s).ln()).collect();

    let objective = |theta: &[f64]| -> f64 {
        let ls: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        profiled_nll(design, family, &ls, config.isotropic)
            .map(|(v, _)| v)
            .unwrap_or(f64::INFINITY)
    };

    // Latin hypercube of starting points in the log box
    let mut rng = RngStream::new(config.seed, 0x4f17).rng();
    let starts = config.starts.max(1);
    let perms: Vec<Vec<usize>> = (0..p)
        .map(|_| {
            let mut v: Vec<usize> = (0..starts).collect();
            v.shuffle(&mut rng);
            v
        })
        .collect();
    let mut inits: Vec<Vec<f64>> = (0..starts)
        .map(|s| {
            (0..p)
                .map(|k| {
                    let u = (perms[k][s] as f64 + rng.random::<f64>()) / starts as f64;
                    lo[k] + u * (hi[k] - lo[k])
                })
                .collect()
        })
        .collect();
    if let Some(h) = hint {
        if h.len() == p && h.iter().all(|v| v.is_finite() && *v > 0.0) {
            inits.insert(0, h.iter().zip(lo.iter().zip(&hi)).map(|(v, (a, b))| v.ln().clamp(*a, *b)).collect());
        }
    }

    let nm = NelderMead {
        max_evals: config.max_evals,
        f_tol: 1e-9,
        x_tol: 1e-6,
    };
    let step: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.1 * (b - a)).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for x0 in &inits {
        let m = nm.minimize(objective, x0, &step, &lo, &hi);
        if m.value.is_finite() && best.as_ref().is_none_or(|(v, _)| m.value < *v) {
            best = Some((m.value, m.x));
        }
    }
    let (_, theta) = best.ok_or(Error::DegenerateDesign { jitter: JITTER_START })?;
    Ok(theta.iter().map(|t| t.exp()).collect())
}

/// Fits every family in `families` and keeps the one with the smallest
/// leave-one-out RMSE. Returns the winner and the score table.
pub fn select_kernel_loo(
    design: &Design,
    families: &[KernelFamily],
    config: &FitConfig,
) -> Result<(KrigingPosterior, Vec<(KernelFamily, f64)>)> {
    let mut scores = Vec::new();
    let mut best: Option<KrigingPosterior> = None;
    let mut best_score = f64::INFINITY;
    for &family in families {
        let post = fit(design.clone(), family, config)?;
        let score = post.loo_rmse();
        scores.push((family, score));
        if score < best_score {
            best_score = score;
            best = Some(post);
        }
    }
    let post = best.ok_or_else(|| Error::InvalidInput("no kernel family given".into()))?;
    Ok((post, scores))
}
