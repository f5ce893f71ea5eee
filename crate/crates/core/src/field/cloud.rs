use std::ops::Deref;

use crate::error::{Error, Result};
use crate::field::ProbGroups;
use crate::gp::{KrigingPosterior, Prediction, PreparedPoints};
use crate::mc::{InputModel, RngStream};
use crate::points::Points;
use crate::stats::norm_cdf;

/// `Φ((m − T)/σ)`, or the indicator `1{m > T}` when the variance is at or
/// below `floor` (an observed site).
#[inline]
pub fn prob_from_moments(mean: f64, variance: f64, threshold: f64, floor: f64) -> f64 {
    if variance <= floor {
        if mean > threshold {
            1.0
        } else {
            0.0
        }
    } else {
        norm_cdf((mean - threshold) / variance.sqrt())
    }
}

/// Variance at or below which a site counts as observed: the jitter nugget.
pub fn observed_floor(post: &KrigingPosterior) -> f64 {
    post.nugget()
}

/// Posterior probability `p_n(x) = P(ξ_n(x) > T)`.
pub fn membership_prob(post: &KrigingPosterior, threshold: f64, x: &[f64]) -> Result<f64> {
    let Prediction { mean, variance } = post.predict(x)?;
    Ok(prob_from_moments(mean, variance, threshold, observed_floor(post)))
}

/// `min(1, Σ_j p_j)` over responses.
pub fn union_prob(probs: &[f64]) -> f64 {
    probs.iter().sum::<f64>().min(1.0)
}

/// A fixed i.i.d. sample of the inputs with its membership probabilities.
#[derive(Debug, Clone)]
pub struct SampleCloud {
    samples: Points,
    probs: Vec<f64>,
    groups: ProbGroups,
}

impl SampleCloud {
    pub fn new(samples: Points, probs: Vec<f64>) -> Result<Self> {
        if samples.len() != probs.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples but {} probabilities",
                samples.len(),
                probs.len()
            )));
        }
        let groups = ProbGroups::from_probs(&probs)?;
        Ok(Self {
            samples,
            probs,
            groups,
        })
    }

    /// Probabilities of one posterior and threshold at every sample.
    pub fn from_posterior(samples: Points, post: &KrigingPosterior, threshold: f64) -> Result<Self> {
        let probs = cloud_probs(post, threshold, &samples)?;
        Self::new(samples, probs)
    }

    /// Union-bound probabilities `min(1, Σ_j p_{n,j})` over several responses.
    pub fn from_union(
        samples: Points,
        posts: &[KrigingPosterior],
        thresholds: &[f64],
    ) -> Result<Self> {
        if posts.is_empty() || posts.len() != thresholds.len() {
            return Err(Error::InvalidInput(
                "need one threshold per posterior and at least one response".into(),
            ));
        }
        let mut probs = vec![0.0; samples.len()];
        for (post, &t) in posts.iter().zip(thresholds) {
            for (acc, p) in probs.iter_mut().zip(cloud_probs(post, t, &samples)?) {
                *acc += p;
            }
        }
        for p in &mut probs {
            *p = p.min(1.0);
        }
        Self::new(samples, probs)
    }

    pub fn samples(&self) -> &Points {
        &self.samples
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn groups(&self) -> &ProbGroups {
        &self.groups
    }

    /// Same samples, new probabilities.
    pub fn with_probs(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.samples.clone(), probs)
    }
}

impl Deref for SampleCloud {
    type Target = ProbGroups;

    fn deref(&self) -> &ProbGroups {
        &self.groups
    }
}

/// `p_n` at every row of `samples`.
pub fn cloud_probs(post: &KrigingPosterior, threshold: f64, samples: &Points) -> Result<Vec<f64>> {
    let floor = observed_floor(post);
    Ok(post
        .predict_many(samples)?
        .into_iter()
        .map(|p| prob_from_moments(p.mean, p.variance, threshold, floor))
        .collect())
}

/// `p_n` from cached moments.
pub fn prepared_probs(prep: &PreparedPoints, threshold: f64, floor: f64) -> Vec<f64> {
    prep.mean
        .iter()
        .zip(&prep.variance)
        .map(|(&m, &v)| prob_from_moments(m, v, threshold, floor))
        .collect()
}

/// Draws `n` inputs from `model` and evaluates `p_n` on them.
pub fn build_cloud(
    post: &KrigingPosterior,
    threshold: f64,
    model: &InputModel,
    n: usize,
    stream: RngStream,
) -> Result<SampleCloud> {
    if n == 0 {
        return Err(Error::InvalidInput("cloud size must be positive".into()));
    }
    if model.dim() != post.dim() {
        return Err(Error::DimensionMismatch {
            expected: post.dim(),
            got: model.dim(),
        });
    }
    SampleCloud::from_posterior(model.sample(n, stream), post, threshold)
}

/// Plug-in estimate `∫ 1{m_n > T}` over the cloud samples.
pub fn plugin_estimate(post: &KrigingPosterior, threshold: f64, samples: &Points) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let above = post
        .predict_many(samples)?
        .iter()
        .filter(|p| p.mean > threshold)
        .count();
    Ok(above as f64 / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{Design, KernelFamily, KernelSpec, Trend};

    fn post() -> KrigingPosterior {
        let d = Design::new(Points::from_scalars(&[-1.0, 0.0, 1.0]), vec![0.0, 2.0, 0.5]).unwrap();
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 1.0, 0.5).unwrap();
        KrigingPosterior::condition(d, k, Trend::Gls).unwrap()
    }

    #[test]
    fn probability_examples() {
        assert_eq!(prob_from_moments(1.1, 0.3, 1.1, 0.0), 0.5);
        let s = 0.2f64;
        let p = prob_from_moments(1.0 + 1.96 * s, s * s, 1.0, 0.0);
        assert!((p - 0.975).abs() < 1e-4);
        let post = post();
        assert_eq!(membership_prob(&post, 1.0, &[0.0]).unwrap(), 1.0);
        assert_eq!(membership_prob(&post, 1.0, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn union_clamps() {
        assert_eq!(union_prob(&[0.6, 0.6]), 1.0);
        assert_eq!(union_prob(&[0.0, 0.3, 0.0]), 0.3);
        assert_eq!(union_prob(&[0.25]), 0.25);
    }

    #[test]
    fn cloud_is_deterministic_and_consistent() {
        let post = post();
        let model = InputModel::normal(0.0, 1.0).unwrap();
        let a = build_cloud(&post, 1.0, &model, 200, RngStream::new(5, 1)).unwrap();
        let b = build_cloud(&post, 1.0, &model, 200, RngStream::new(5, 1)).unwrap();
        assert_eq!(a.probs(), b.probs());
        assert_eq!(a.len(), 200);
        let single = build_cloud(&post, 1.0, &model, 1, RngStream::new(5, 2)).unwrap();
        assert_eq!(single.n_groups(), 1);
        assert_eq!(single.suffix_counts(), &[0]);
    }

    #[test]
    fn plugin_limits() {
        let d = Design::new(Points::from_scalars(&[0.0]), vec![3.0]).unwrap();
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 1.0, 1.0).unwrap();
        let flat = KrigingPosterior::condition(d, k, Trend::Gls).unwrap();
        let xs = Points::from_scalars(&[-5.0, 0.3, 8.0]);
        assert_eq!(plugin_estimate(&flat, 5.0, &xs).unwrap(), 0.0);
        assert_eq!(plugin_estimate(&flat, 1.0, &xs).unwrap(), 1.0);
    }

    #[test]
    fn union_cloud_dominates_each_response() {
        let a = post();
        let d = Design::new(Points::from_scalars(&[-0.5, 0.5]), vec![1.5, -0.2]).unwrap();
        let k = KernelSpec::isotropic(KernelFamily::Matern32, 0.8, 0.7).unwrap();
        let b = KrigingPosterior::condition(d, k, Trend::Gls).unwrap();
        let xs = InputModel::normal(0.0, 1.0).unwrap().sample(300, RngStream::new(1, 1));
        let u = SampleCloud::from_union(xs.clone(), &[a.clone(), b.clone()], &[1.0, 1.0]).unwrap();
        let ca = SampleCloud::from_posterior(xs.clone(), &a, 1.0).unwrap();
        let cb = SampleCloud::from_posterior(xs, &b, 1.0).unwrap();
        assert!(u.mean() >= ca.mean().max(cb.mean()));
    }
}
