//! Built-in test problems.

use crate::error::{Error, Result};
use crate::mc::{exceeds, InputModel, Marginal, RngStream};
use crate::oracle::{FnOracle, Oracle};

/// One-dimensional bump function with a rare excursion above 1.1.
pub fn bump(x: f64) -> f64 {
    (0.4 * x - 0.3).powi(2) + (-11.534 * x.abs().powf(1.95)).exp() + (-5.0 * (x - 0.8).powi(2)).exp()
}

pub const BUMP_THRESHOLD: f64 = 1.1;
pub const BUMP_MEAN: f64 = -0.5;
pub const BUMP_SD: f64 = 0.4;
/// `P(bump(X) > 1.1)` for `X ~ N(−0.5, 0.4²)`.
pub const BUMP_FAILURE_PROB: f64 = 4.643e-2;

pub const SYNTH_MEANS: [f64; 4] = [3.3477, 174.31, 0.73389, 6.1457];
pub const SYNTH_SDS: [f64; 4] = [0.19108, 1.6831, 0.03193, 0.2678];
/// Per-response thresholds, each near the 0.995 quantile of its response.
pub const SYNTH_THRESHOLDS: [f64; 3] = [2.738, 7.879, 2.897];
/// Union failure probability from 10⁶ samples of `RngStream::new(1_000_003, 0)`.
pub const SYNTH_UNION_PROB: f64 = 1.4348e-2;
pub const SYNTH_CALIBRATION_SAMPLES: usize = 1_000_000;

/// Three smooth responses of the standardized inputs.
pub fn synthetic(x: &[f64]) -> [f64; 3] {
    let u: [f64; 4] = std::array::from_fn(|i| (x[i] - SYNTH_MEANS[i]) / SYNTH_SDS[i]);
    [
        u[0] + 0.3 * u[1] + 0.2 * u[2] * u[3],
        0.5 * (u[1] - u[2]).powi(2),
        u[3].sin() + 0.8 * u[3] + 0.3 * u[0],
    ]
}

/// Standard error of a calibration at `p` with `n` samples.
pub fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinProblem {
    Bump1d,
    Synthetic4d,
}

impl BuiltinProblem {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinProblem::Bump1d => "bump-1d",
            BuiltinProblem::Synthetic4d => "synthetic-4d",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "bump-1d" | "bump" => Some(BuiltinProblem::Bump1d),
            "synthetic-4d" | "synthetic" => Some(BuiltinProblem::Synthetic4d),
            _ => None,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            BuiltinProblem::Bump1d => 1,
            BuiltinProblem::Synthetic4d => 4,
        }
    }

    pub fn responses(self) -> usize {
        match self {
            BuiltinProblem::Bump1d => 1,
            BuiltinProblem::Synthetic4d => 3,
        }
    }

    pub fn model(self) -> InputModel {
        match self {
            BuiltinProblem::Bump1d => InputModel::normal(BUMP_MEAN, BUMP_SD),
            BuiltinProblem::Synthetic4d => InputModel::new(
                SYNTH_MEANS
                    .iter()
                    .zip(&SYNTH_SDS)
                    .map(|(&mean, &sd)| Marginal::Normal { mean, sd })
                    .collect(),
            ),
        }
        .expect("valid built-in marginals")
    }

    pub fn thresholds(self) -> Vec<f64> {
        match self {
            BuiltinProblem::Bump1d => vec![BUMP_THRESHOLD],
            BuiltinProblem::Synthetic4d => SYNTH_THRESHOLDS.to_vec(),
        }
    }

    pub fn oracle(self) -> Box<dyn Oracle + Send> {
        match self {
            BuiltinProblem::Bump1d => Box::new(FnOracle::new(1, 1, |x: &[f64]| vec![bump(x[0])])),
            BuiltinProblem::Synthetic4d => {
                Box::new(FnOracle::new(4, 3, |x: &[f64]| synthetic(x).to_vec()))
            }
        }
    }

    /// Reference failure probability.
    pub fn reference_prob(self) -> f64 {
        match self {
            BuiltinProblem::Bump1d => BUMP_FAILURE_PROB,
            BuiltinProblem::Synthetic4d => SYNTH_UNION_PROB,
        }
    }
}

/// Union failure fraction of the synthetic problem on `n` draws, direct
/// evaluation without the oracle layer.
pub fn synthetic_union_mc(n: usize, stream: RngStream) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    let model = BuiltinProblem::Synthetic4d.model();
    let mut rng = stream.rng();
    let mut hits = 0usize;
    for _ in 0..n {
        let x = model.sample_with(1, &mut rng);
        if exceeds(&synthetic(x.row(0)), &SYNTH_THRESHOLDS) {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}

/// `P(bump(X) > 1.1)` by composite Simpson quadrature on the Gaussian density.
pub fn bump_failure_quadrature(intervals: usize) -> f64 {
    let (a, b) = (BUMP_MEAN - 10.0 * BUMP_SD, BUMP_MEAN + 10.0 * BUMP_SD);
    let m = 2 * intervals.max(1);
    let h = (b - a) / m as f64;
    let f = |x: f64| {
        if bump(x) > BUMP_THRESHOLD {
            crate::stats::norm_pdf((x - BUMP_MEAN) / BUMP_SD) / BUMP_SD
        } else {
            0.0
        }
    };
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_probability_by_quadrature() {
        let p = bump_failure_quadrature(400_000);
        assert!((p - BUMP_FAILURE_PROB).abs() < 5e-5, "{p}");
    }

    #[test]
    fn synthetic_responses_at_mean() {
        let y = synthetic(&SYNTH_MEANS);
        assert_eq!(y, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn names_round_trip() {
        for p in [BuiltinProblem::Bump1d, BuiltinProblem::Synthetic4d] {
            assert_eq!(BuiltinProblem::from_name(p.name()), Some(p));
            let mut o = p.oracle();
            assert_eq!(o.evaluate(&vec![0.5; p.dim()]).unwrap().len(), p.responses());
            assert_eq!(p.thresholds().len(), p.responses());
        }
    }
}
