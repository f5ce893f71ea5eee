//! One-point lookahead: the posterior after observing `z` at a new site,
//! without refactoring the kernel matrix.
//!
//! Conditioning on `ξ(s) + ε = z` (ε the jitter nugget) gives
//!
//! ```text
//! m_{n+1}(x) = m_n(x) + k_n(x, s) / (σ_n²(s) + τ) · (z − m_n(s))
//! σ_{n+1}²(x) = σ_n²(x) − k_n(x, s)² / (σ_n²(s) + τ)
//! ```
//!
//! which is exactly what a refit on the appended design returns when the
//! kernel, trend and jitter are held fixed.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gp::posterior::{KrigingPosterior, Prediction, PreparedPoints, DEGENERATE_SITE};

#[derive(Debug, Clone)]
pub struct HypotheticalUpdate<'a> {
    base: &'a KrigingPosterior,
    site: Vec<f64>,
    site_mean: f64,
    site_variance: f64,
    denom: f64,
    whitened: DVector<f64>,
}

impl KrigingPosterior {
    /// Prepares the lookahead at `site`. Fails with `DegenerateSite` if the site
    /// is a design point or its posterior variance is below the degenerate threshold.
    pub fn hypothetical(&self, site: &[f64]) -> Result<HypotheticalUpdate<'_>> {
        let pred = self.predict(site)?;
        if self.design().contains(site)
            || pred.variance < DEGENERATE_SITE * self.kernel().variance
        {
            return Err(Error::DegenerateSite {
                variance: pred.variance,
            });
        }
        Ok(HypotheticalUpdate {
            base: self,
            site: site.to_vec(),
            site_mean: pred.mean,
            site_variance: pred.variance,
            denom: pred.variance + self.nugget(),
            whitened: self.whiten(site),
        })
    }
}

impl<'a> HypotheticalUpdate<'a> {
    pub fn base(&self) -> &'a KrigingPosterior {
        self.base
    }

    pub fn site(&self) -> &[f64] {
        &self.site
    }

    pub fn site_prediction(&self) -> Prediction {
        Prediction {
            mean: self.site_mean,
            variance: self.site_variance,
        }
    }

    /// `k_n(x, s)`.
    pub fn cov_with_site(&self, x: &[f64]) -> Result<f64> {
        let v = self.base.whiten(x);
        Ok(self.base.kernel().eval(x, &self.site) - v.dot(&self.whitened))
    }

    pub fn predict(&self, x: &[f64], z: f64) -> Result<Prediction> {
        let p = self.base.predict(x)?;
        let c = self.cov_with_site(x)?;
        Ok(Prediction {
            mean: p.mean + c / self.denom * (z - self.site_mean),
            variance: (p.variance - c * c / self.denom).max(0.0),
        })
    }

    /// Posterior at `x` after observing `z`, computed from cached moments.
    pub fn apply(&self, z: f64) -> AppliedUpdate<'_, 'a> {
        AppliedUpdate { update: self, z }
    }

    /// `k_n(x_i, s)` for every prepared point.
    pub fn cov_with_prepared(&self, prep: &PreparedPoints) -> Vec<f64> {
        let kernel = self.base.kernel();
        prep.points
            .rows()
            .zip(prep.whitened.column_iter())
            .map(|(x, w)| kernel.eval(x, &self.site) - w.dot(&self.whitened))
            .collect()
    }

    /// Gains `k_n(x_i, s) / (σ_n²(s) + τ)` and updated variances, both
    /// independent of the hypothetical value.
    pub fn gains_and_variances(&self, prep: &PreparedPoints) -> (Vec<f64>, Vec<f64>) {
        let cov = self.cov_with_prepared(prep);
        let gains = cov.iter().map(|c| c / self.denom).collect();
        let vars = cov
            .iter()
            .zip(&prep.variance)
            .map(|(c, v)| (v - c * c / self.denom).max(0.0))
            .collect();
        (gains, vars)
    }
}

/// A hypothetical update evaluated at a fixed observed value.
#[derive(Debug, Clone, Copy)]
pub struct AppliedUpdate<'u, 'a> {
    update: &'u HypotheticalUpdate<'a>,
    z: f64,
}

impl AppliedUpdate<'_, '_> {
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.update.predict(x, self.z)
    }
}
