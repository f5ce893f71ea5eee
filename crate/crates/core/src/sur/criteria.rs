//! Sampling criteria: expected uncertainty after one more observation.
//!
//! All criteria share one cloud and one set of quadrature nodes. For a
//! candidate site the hypothetical update makes the future mean affine in the
//! observed value and the future variance independent of it, so each node
//! only needs a fresh pass over the cloud.

use nalgebra::DMatrix;
use rand_distr::StandardNormal;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{prob_from_moments, ProbGroups};
use crate::gp::{cholesky_with_jitter, Jitter, KrigingPosterior, PreparedPoints, JITTER_CAP};
use crate::mc::RngStream;
use crate::points::Points;
use crate::sur::GaussHermite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Expected future `Var[R_n]`.
    JRn,
    /// `E[(∫ √min(p, 1 − p))²]`
    J1,
    /// `E[(∫ √(p(1 − p)))²]`
    J2,
    /// `E[∫ min(p, 1 − p)]`
    J3,
    /// `E[∫ p(1 − p)]`
    J4,
    /// Expected future Vorob'ev deviation.
    JDev,
    /// Expected future `Var[S_n]` from simulated paths (small grids only).
    JSnRef,
}

impl Criterion {
    pub const ALL: [Criterion; 7] = [
        Criterion::JRn,
        Criterion::J1,
        Criterion::J2,
        Criterion::J3,
        Criterion::J4,
        Criterion::JDev,
        Criterion::JSnRef,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::JRn => "J_Rn",
            Criterion::J1 => "J1",
            Criterion::J2 => "J2",
            Criterion::J3 => "J3",
            Criterion::J4 => "J4",
            Criterion::JDev => "J_Dev",
            Criterion::JSnRef => "J_Sn_ref",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "jrn" | "rn" => Some(Criterion::JRn),
            "j1" => Some(Criterion::J1),
            "j2" => Some(Criterion::J2),
            "j3" => Some(Criterion::J3),
            "j4" => Some(Criterion::J4),
            "jdev" | "dev" => Some(Criterion::JDev),
            "jsnref" | "jsn" => Some(Criterion::JSnRef),
            _ => None,
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Every cloud functional at once, for matched comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CriterionValues {
    pub j_rn: f64,
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
    pub j_dev: f64,
    /// Expected `η(q*) − D_Dev(q*)/2`, the discreteness gap in `J_Rn ≤ J_Dev/2`.
    pub dev_gap: f64,
}

impl CriterionValues {
    pub fn get(&self, c: Criterion) -> Option<f64> {
        match c {
            Criterion::JRn => Some(self.j_rn),
            Criterion::J1 => Some(self.j1),
            Criterion::J2 => Some(self.j2),
            Criterion::J3 => Some(self.j3),
            Criterion::J4 => Some(self.j4),
            Criterion::JDev => Some(self.j_dev),
            Criterion::JSnRef => None,
        }
    }

    fn accumulate(&mut self, w: f64, v: &CriterionValues) {
        self.j_rn += w * v.j_rn;
        self.j1 += w * v.j1;
        self.j2 += w * v.j2;
        self.j3 += w * v.j3;
        self.j4 += w * v.j4;
        self.j_dev += w * v.j_dev;
        self.dev_gap += w * v.dev_gap;
    }
}

/// Number of posterior standard deviations beyond the largest quadrature
/// offset at which a membership probability is treated as settled.
const FROZEN_MARGIN: f64 = 10.0;

/// One-step lookahead over a fixed cloud for one response.
#[derive(Debug, Clone)]
pub struct Lookahead<'a> {
    post: &'a KrigingPosterior,
    threshold: f64,
    quad: &'a GaussHermite,
    n: usize,
    frozen_zero: usize,
    frozen_one: usize,
    /// cloud points whose probability can still move
    active: PreparedPoints,
    current: Vec<f64>,
    floor: f64,
}

/// Future value of a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateValue {
    pub value: f64,
    /// The site was already observed; `value` is the current uncertainty.
    pub degenerate: bool,
}

impl<'a> Lookahead<'a> {
    pub fn new(
        post: &'a KrigingPosterior,
        threshold: f64,
        cloud: &Points,
        quad: &'a GaussHermite,
    ) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::InvalidInput("empty cloud".into()));
        }
        let all = post.prepare(cloud)?;
        let floor = post.nugget();
        let reach = quad.max_offset() + FROZEN_MARGIN;
        let mut keep = Vec::new();
        let (mut frozen_zero, mut frozen_one) = (0, 0);
        for i in 0..all.len() {
            let (m, v) = (all.mean[i], all.variance[i]);
            let gap = m - threshold;
            if v <= floor || gap.abs() >= reach * v.sqrt() {
                if gap > 0.0 {
                    frozen_one += 1;
                } else {
                    frozen_zero += 1;
                }
            } else {
                keep.push(i);
            }
        }
        let active = PreparedPoints {
            points: cloud.select(&keep),
            mean: keep.iter().map(|&i| all.mean[i]).collect(),
            variance: keep.iter().map(|&i| all.variance[i]).collect(),
            whitened: all.whitened.select_columns(&keep),
        };
        let current = active
            .mean
            .iter()
            .zip(&active.variance)
            .map(|(&m, &v)| prob_from_moments(m, v, threshold, floor))
            .collect();
        Ok(Self {
            post,
            threshold,
            quad,
            n: cloud.len(),
            frozen_zero,
            frozen_one,
            active,
            current,
            floor,
        })
    }

    pub fn posterior(&self) -> &KrigingPosterior {
        self.post
    }

    /// Cloud points that may still change class.
    pub fn active_len(&self) -> usize {
        self.active.len()
    }

    pub fn cloud_len(&self) -> usize {
        self.n
    }

    /// Current functionals (no new observation).
    pub fn current_values(&self) -> CriterionValues {
        let mut p = self.current.clone();
        self.functionals(&mut p, true)
    }

    /// `Var[R_n]` on the current cloud.
    pub fn current_var_rn(&self) -> f64 {
        let mut p = self.current.clone();
        self.var_rn_of(&mut p)
    }

    fn var_rn_of(&self, p: &mut [f64]) -> f64 {
        p.sort_unstable_by(f64::total_cmp);
        let nf = self.n as f64;
        // E[R²] N² = Σ_j v_(j) (1 + 2 #{after j}) over the sorted cloud
        let above = self.n - self.frozen_zero;
        let mut second = (self.frozen_one * self.frozen_one) as f64;
        let mut first = self.frozen_one as f64;
        for (i, &v) in p.iter().enumerate() {
            second += v * (2 * (above - i) - 1) as f64;
            first += v;
        }
        let mu = first / nf;
        (second / (nf * nf) - mu * mu).max(0.0)
    }

    fn functionals(&self, p: &mut [f64], with_dev: bool) -> CriterionValues {
        let nf = self.n as f64;
        let (mut s_tau, mut s_nu, mut s_sqrt_tau, mut s_sqrt_nu) = (0.0, 0.0, 0.0, 0.0);
        for &v in p.iter() {
            let tau = v.min(1.0 - v);
            let nu = v * (1.0 - v);
            s_tau += tau;
            s_nu += nu;
            s_sqrt_tau += tau.sqrt();
            s_sqrt_nu += nu.sqrt();
        }
        let j_rn = self.var_rn_of(p);
        let (j_dev, dev_gap) = if with_dev {
            let mut full = Vec::with_capacity(self.n);
            full.resize(self.frozen_zero, 0.0);
            full.extend_from_slice(p);
            full.resize(self.n, 1.0);
            let g = ProbGroups::from_sorted(&full);
            let q = g.q_star();
            let d = g.vorobev_deviation(q);
            (d, g.eta(q) - 0.5 * d)
        } else {
            (0.0, 0.0)
        };
        CriterionValues {
            j_rn,
            j1: (s_sqrt_tau / nf).powi(2),
            j2: (s_sqrt_nu / nf).powi(2),
            j3: s_tau / nf,
            j4: s_nu / nf,
            j_dev,
            dev_gap,
        }
    }

    /// Gains, future variances and site standard deviation, or `None` for an
    /// already observed site.
    fn update_terms(&self, site: &[f64]) -> Result<Option<(Vec<f64>, Vec<f64>, f64)>> {
        match self.post.hypothetical(site) {
            Ok(up) => {
                let (gains, vars) = up.gains_and_variances(&self.active);
                Ok(Some((gains, vars, up.site_prediction().sd())))
            }
            Err(Error::DegenerateSite { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn node_probs(&self, gains: &[f64], vars: &[f64], shift: f64, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.active
                .mean
                .iter()
                .zip(gains)
                .zip(vars)
                .map(|((&m, &g), &v)| prob_from_moments(m + g * shift, v, self.threshold, self.floor)),
        );
    }

    /// All criteria at `site` with matched nodes. Degenerate sites return the
    /// current values.
    pub fn evaluate_all(&self, site: &[f64]) -> Result<(CriterionValues, bool)> {
        let Some((gains, vars, sd)) = self.update_terms(site)? else {
            return Ok((self.current_values(), true));
        };
        let mut acc = CriterionValues::default();
        let mut p = Vec::with_capacity(self.active.len());
        for (w, o) in self.quad.probabilities().zip(self.quad.offsets()) {
            self.node_probs(&gains, &vars, o * sd, &mut p);
            let v = self.functionals(&mut p, true);
            acc.accumulate(w, &v);
        }
        Ok((acc, false))
    }

    /// One criterion at `site`; `JSnRef` is not handled here.
    pub fn evaluate(&self, site: &[f64], criterion: Criterion) -> Result<CandidateValue> {
        if criterion == Criterion::JSnRef {
            return Err(Error::InvalidInput(
                "the path-based criterion needs a reference grid".into(),
            ));
        }
        let Some((gains, vars, sd)) = self.update_terms(site)? else {
            let v = self.current_values().get(criterion).expect("cloud criterion");
            return Ok(CandidateValue {
                value: v,
                degenerate: true,
            });
        };
        let mut p = Vec::with_capacity(self.active.len());
        let mut total = 0.0;
        for (w, o) in self.quad.probabilities().zip(self.quad.offsets()) {
            self.node_probs(&gains, &vars, o * sd, &mut p);
            let v = match criterion {
                Criterion::JRn => self.var_rn_of(&mut p),
                Criterion::JDev => self.functionals(&mut p, true).j_dev,
                c => self.functionals(&mut p, false).get(c).expect("cloud criterion"),
            };
            total += w * v;
        }
        Ok(CandidateValue {
            value: total,
            degenerate: false,
        })
    }
}

/// Reference criterion `E[Var[S_{n+1}]]` from simulated posterior paths on a
/// weighted grid. Paths reuse one set of normal draws across candidates and
/// quadrature nodes.
#[derive(Debug, Clone)]
pub struct SnReference<'a> {
    post: &'a KrigingPosterior,
    threshold: f64,
    quad: &'a GaussHermite,
    prep: PreparedPoints,
    cov: DMatrix<f64>,
    weights: Vec<f64>,
    normals: DMatrix<f64>,
}

pub const DEFAULT_SN_GRID_CAP: usize = 400;

/// Value with a Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl<'a> SnReference<'a> {
    pub fn new(
        post: &'a KrigingPosterior,
        threshold: f64,
        grid: &Points,
        weights: Vec<f64>,
        quad: &'a GaussHermite,
        paths: usize,
        cap: usize,
        stream: RngStream,
    ) -> Result<Self> {
        if grid.len() > cap {
            return Err(Error::TooLarge(format!(
                "path criterion grid of {} points exceeds the cap of {cap}",
                grid.len()
            )));
        }
        if grid.len() != weights.len() {
            return Err(Error::InvalidInput("one weight per grid point is required".into()));
        }
        if paths < 2 {
            return Err(Error::InvalidInput("at least two paths are required".into()));
        }
        let prep = post.prepare(grid)?;
        let cov = prep.covariance(post.kernel());
        let mut rng = stream.rng();
        let normals = DMatrix::from_fn(grid.len(), paths, |_, _| rng.sample(StandardNormal));
        Ok(Self {
            post,
            threshold,
            quad,
            prep,
            cov,
            weights,
            normals,
        })
    }

    fn volume_variance(&self, mean: &[f64], dev: &DMatrix<f64>) -> Estimate {
        let m = dev.ncols();
        let vols: Vec<f64> = (0..m)
            .map(|k| {
                let mut s = 0.0;
                for j in 0..mean.len() {
                    if mean[j] + dev[(j, k)] > self.threshold {
                        s += self.weights[j];
                    }
                }
                s
            })
            .collect();
        let mf = m as f64;
        let avg = vols.iter().sum::<f64>() / mf;
        let m2 = vols.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / mf;
        let m4 = vols.iter().map(|v| (v - avg).powi(4)).sum::<f64>() / mf;
        let var = m2 * mf / (mf - 1.0);
        Estimate {
            value: var,
            stderr: ((m4 - m2 * m2).max(0.0) / mf).sqrt(),
        }
    }

    fn factor(&self, cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (l, _) = cholesky_with_jitter(cov, self.post.kernel().variance, Jitter::Escalate)
            .ok_or(Error::IllConditionedGrid { jitter: JITTER_CAP })?;
        Ok(l)
    }

    /// Empirical `Var[S_n]` under the current posterior.
    pub fn current(&self) -> Result<Estimate> {
        let l = self.factor(&self.cov)?;
        Ok(self.volume_variance(&self.prep.mean, &(l * &self.normals)))
    }

    pub fn evaluate(&self, site: &[f64]) -> Result<(Estimate, bool)> {
        let up = match self.post.hypothetical(site) {
            Ok(up) => up,
            Err(Error::DegenerateSite { .. }) => return Ok((self.current()?, true)),
            Err(e) => return Err(e),
        };
        let c = up.cov_with_prepared(&self.prep);
        let denom = up.site_prediction().variance + self.post.nugget();
        let cv = nalgebra::DVector::from_column_slice(&c);
        let cov = &self.cov - (&cv * cv.transpose()) / denom;
        let cov = (&cov + cov.transpose()) * 0.5;
        let dev = self.factor(&cov)? * &self.normals;
        let sd = up.site_prediction().sd();
        let gains: Vec<f64> = c.iter().map(|v| v / denom).collect();
        let mut value = 0.0;
        let mut stderr = 0.0;
        let mut mean = vec![0.0; self.prep.len()];
        for (w, o) in self.quad.probabilities().zip(self.quad.offsets()) {
            for j in 0..mean.len() {
                mean[j] = self.prep.mean[j] + gains[j] * o * sd;
            }
            let e = self.volume_variance(&mean, &dev);
            value += w * e.value;
            stderr += w * e.stderr;
        }
        Ok((Estimate { value, stderr }, false))
    }
}
