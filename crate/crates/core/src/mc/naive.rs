use crate::error::{Error, Result};
use crate::mc::{InputModel, RngStream};
use crate::oracle::Oracle;
use crate::stats::norm_quantile;

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveMcResult {
    pub n: usize,
    pub failures: usize,
    pub estimate: f64,
    /// `√((1 − p̂)/(N p̂))`; `None` when no failure was observed.
    pub rel_stderr: Option<f64>,
}

impl NaiveMcResult {
    pub fn from_counts(failures: usize, n: usize) -> Self {
        let estimate = failures as f64 / n as f64;
        let rel_stderr = (failures > 0).then(|| ((1.0 - estimate) / (n as f64 * estimate)).sqrt());
        Self {
            n,
            failures,
            estimate,
            rel_stderr,
        }
    }

    /// `√(p̂(1 − p̂)/N)`.
    pub fn stderr(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.n as f64).sqrt()
    }

    /// Two-sided CLT interval at level `1 − alpha`, clamped to [0, 1].
    pub fn clt_interval(&self, alpha: f64) -> (f64, f64) {
        let z = norm_quantile(1.0 - alpha / 2.0);
        let h = z * self.stderr();
        ((self.estimate - h).max(0.0), (self.estimate + h).min(1.0))
    }
}

/// True when any response exceeds its threshold.
pub fn exceeds(y: &[f64], thresholds: &[f64]) -> bool {
    y.iter().zip(thresholds).any(|(g, t)| g > t)
}

/// Crude Monte Carlo estimate of `P(∪_j {g_j(X) > T_j})`.
pub fn naive_mc<O: Oracle + ?Sized>(
    oracle: &mut O,
    thresholds: &[f64],
    model: &InputModel,
    n: usize,
    stream: RngStream,
) -> Result<NaiveMcResult> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    if thresholds.len() != oracle.responses() {
        return Err(Error::InvalidInput(format!(
            "{} thresholds for {} responses",
            thresholds.len(),
            oracle.responses()
        )));
    }
    if model.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: model.dim(),
        });
    }
    let mut rng = stream.rng();
    let mut failures = 0usize;
    let mut x = vec![0.0; model.dim()];
    for _ in 0..n {
        for (xi, m) in x.iter_mut().zip(model.marginals()) {
            *xi = m.sample(&mut rng);
        }
        if exceeds(&oracle.evaluate(&x)?, thresholds) {
            failures += 1;
        }
    }
    Ok(NaiveMcResult::from_counts(failures, n))
}
