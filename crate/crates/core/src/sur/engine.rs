use std::fmt::Write as _;

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{cloud_probs, FailureReport, ProbGroups, ReportConfig, SampleCloud};
use crate::gp::{
    fit, Design, FitConfig, Hyperparameters, KernelFamily, KernelSpec, KrigingPosterior, Trend,
};
use crate::mc::{InputModel, RngStream};
use crate::optim::NelderMead;
use crate::oracle::Oracle;
use crate::points::Points;
use crate::sur::{CandidateValue, Criterion, GaussHermite, Lookahead, SnReference, DEFAULT_SN_GRID_CAP};

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSource {
    /// Random subset of the cloud, redrawn every `refresh_every` iterations.
    CloudSubset { size: usize, refresh_every: usize },
    /// Fresh draws from the input distribution at every iteration.
    FreshGrid { size: usize },
    /// Cloud subset followed by a simplex polish of the best candidate.
    Continuous { size: usize, max_evals: usize },
}

impl Default for CandidateSource {
    fn default() -> Self {
        CandidateSource::CloudSubset {
            size: 512,
            refresh_every: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurConfig {
    pub criterion: Criterion,
    pub quadrature_order: usize,
    pub candidates: CandidateSource,
    /// Maximum number of added evaluations.
    pub budget: usize,
    /// Stop once the credible interval is narrower than this.
    pub stop_width: Option<f64>,
    pub seed: u64,
    pub cloud_size: usize,
    pub family: KernelFamily,
    /// Hyperparameters are re-estimated every `refit_every` additions; in
    /// between the kernel is kept and only the trend and data change.
    pub refit_every: usize,
    pub fit: FitConfig,
    pub report: ReportConfig,
    pub sn_paths: usize,
    pub sn_grid_cap: usize,
}

impl Default for SurConfig {
    fn default() -> Self {
        Self {
            criterion: Criterion::JRn,
            quadrature_order: 12,
            candidates: CandidateSource::default(),
            budget: 26,
            stop_width: None,
            seed: 1,
            cloud_size: 10_000,
            family: KernelFamily::Matern52,
            refit_every: 1,
            fit: FitConfig::default(),
            report: ReportConfig::default(),
            sn_paths: 2000,
            sn_grid_cap: DEFAULT_SN_GRID_CAP,
        }
    }
}

impl SurConfig {
    pub fn validate(&self) -> Result<()> {
        if self.quadrature_order < 2 {
            return Err(Error::InvalidInput("quadrature order must be at least 2".into()));
        }
        if self.cloud_size == 0 {
            return Err(Error::InvalidInput("cloud size must be positive".into()));
        }
        if self.refit_every == 0 {
            return Err(Error::InvalidInput("refit cadence must be positive".into()));
        }
        if let Some(w) = self.stop_width {
            if !(w > 0.0) {
                return Err(Error::InvalidInput(format!("stop width {w} must be positive")));
            }
        }
        let size = match self.candidates {
            CandidateSource::CloudSubset {
                size,
                refresh_every,
            } => {
                if refresh_every == 0 {
                    return Err(Error::InvalidInput("candidate refresh period must be positive".into()));
                }
                size
            }
            CandidateSource::FreshGrid { size } | CandidateSource::Continuous { size, .. } => size,
        };
        if size == 0 {
            return Err(Error::InvalidInput("candidate set must be nonempty".into()));
        }
        self.report.validate()
    }

    fn stream(&self, id: u64) -> RngStream {
        RngStream::new(self.seed, id)
    }
}

/// One line of the loop history. Iteration 0 is the initial design.
#[derive(Debug, Clone, PartialEq)]
pub struct SurRecord {
    pub iter: usize,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    /// Criterion value at the selected point.
    pub criterion: Option<f64>,
    /// Response whose criterion chose the point.
    pub response: Option<usize>,
    pub report: FailureReport,
    /// Estimate from each response on its own.
    pub response_mu: Vec<f64>,
    pub response_var: Vec<f64>,
    /// Kernels of the per-response posteriors after this iteration.
    pub kernels: Vec<KernelSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Budget,
    Width,
    OracleFailure { iter: usize, message: String },
    Saturated,
}

#[derive(Debug, Clone)]
pub struct SurState {
    pub posteriors: Vec<KrigingPosterior>,
    pub thresholds: Vec<f64>,
    pub cloud: SampleCloud,
    pub history: Vec<SurRecord>,
}

impl SurState {
    pub fn design_size(&self) -> usize {
        self.posteriors[0].design().len()
    }

    pub fn last(&self) -> &SurRecord {
        self.history.last().expect("history starts with the initial report")
    }

    /// History as CSV with one row per iteration.
    pub fn history_csv(&self) -> String {
        let d = self.posteriors[0].dim();
        let r = self.posteriors.len();
        let mut s = String::from("iter");
        for k in 1..=d {
            let _ = write!(s, ",x{k}");
        }
        for k in 1..=r {
            let _ = write!(s, ",y{k}");
        }
        s.push_str(",criterion,mu_n,var_Rn,ci_lower,ci_upper,q_star,d_dev\n");
        let num = |v: f64| format!("{v:.16e}");
        for rec in &self.history {
            let _ = write!(s, "{}", rec.iter);
            let opt_row = |s: &mut String, vals: &Option<Vec<f64>>, len: usize| {
                for k in 0..len {
                    s.push(',');
                    if let Some(v) = vals {
                        s.push_str(&num(v[k]));
                    }
                }
            };
            opt_row(&mut s, &rec.x, d);
            opt_row(&mut s, &rec.y, r);
            s.push(',');
            if let Some(c) = rec.criterion {
                s.push_str(&num(c));
            }
            let rep = &rec.report;
            let _ = writeln!(
                s,
                ",{},{},{},{},{},{}",
                num(rep.mu_n),
                num(rep.var_rn),
                num(rep.credible_cx.lower),
                num(rep.credible_cx.upper),
                num(rep.q_star),
                num(rep.vorobev_deviation)
            );
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct SurOutcome {
    pub state: SurState,
    pub stop: StopReason,
}

/// Criterion at every candidate, in candidate order.
pub fn score_candidates(
    lookahead: &Lookahead<'_>,
    sn: Option<&SnReference<'_>>,
    candidates: &Points,
    criterion: Criterion,
) -> Result<Vec<CandidateValue>> {
    let rows: Vec<&[f64]> = candidates.rows().collect();
    rows.par_iter()
        .map(|x| match (criterion, sn) {
            (Criterion::JSnRef, Some(sn)) => sn.evaluate(x).map(|(e, degenerate)| CandidateValue {
                value: e.value,
                degenerate,
            }),
            _ => lookahead.evaluate(x, criterion),
        })
        .collect()
}

/// Index of the smallest non-degenerate score; ties go to the lowest index.
pub fn select_next(scores: &[CandidateValue]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if s.degenerate {
            continue;
        }
        if best.is_none_or(|(_, v)| s.value < v) {
            best = Some((i, s.value));
        }
    }
    best.map(|b| b.0).ok_or(Error::DesignSaturated)
}

/// Response `argmax_r Var[R_n^(r)]`, lowest index on ties.
pub fn pick_response(vars: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in vars.iter().enumerate() {
        if v > vars[best] {
            best = i;
        }
    }
    best
}

struct Loop<'c> {
    config: &'c SurConfig,
    model: &'c InputModel,
    thresholds: Vec<f64>,
    quad: GaussHermite,
    samples: Points,
    hints: Vec<Option<Vec<f64>>>,
    subset: Option<(usize, Points)>,
}

impl Loop<'_> {
    fn fit_all(&mut self, designs: Vec<Design>, full: bool, prev: Option<&[KrigingPosterior]>) -> Result<Vec<KrigingPosterior>> {
        designs
            .into_iter()
            .enumerate()
            .map(|(r, d)| match (full, prev) {
                (false, Some(prev)) => KrigingPosterior::condition(d, prev[r].kernel().clone(), Trend::Gls),
                _ => {
                    let cfg = match &self.config.fit.hyper {
                        Hyperparameters::Estimate { .. } => FitConfig {
                            hyper: Hyperparameters::Estimate {
                                hint: self.hints[r].clone(),
                            },
                            seed: self.config.seed ^ (r as u64).wrapping_mul(0x9e37_79b9),
                            ..self.config.fit.clone()
                        },
                        Hyperparameters::Fixed(_) => self.config.fit.clone(),
                    };
                    let post = fit(d, self.config.family, &cfg)?;
                    self.hints[r] = Some(post.kernel().lengthscales.clone());
                    Ok(post)
                }
            })
            .collect()
    }

    fn record(
        &self,
        posts: &[KrigingPosterior],
        iter: usize,
        x: Option<Vec<f64>>,
        y: Option<Vec<f64>>,
        criterion: Option<f64>,
        response: Option<usize>,
    ) -> Result<(SurRecord, SampleCloud)> {
        let mut union = vec![0.0; self.samples.len()];
        let mut response_mu = Vec::with_capacity(posts.len());
        let mut response_var = Vec::with_capacity(posts.len());
        for (post, &t) in posts.iter().zip(&self.thresholds) {
            let p = cloud_probs(post, t, &self.samples)?;
            let g = ProbGroups::from_probs(&p)?;
            response_mu.push(g.mean());
            response_var.push(g.var_rn());
            for (u, v) in union.iter_mut().zip(&p) {
                *u += v;
            }
        }
        union.iter_mut().for_each(|u| *u = u.min(1.0));
        let cloud = SampleCloud::new(self.samples.clone(), union)?;
        let report = FailureReport::compute(cloud.groups(), &self.config.report)?;
        Ok((
            SurRecord {
                iter,
                x,
                y,
                criterion,
                response,
                report,
                response_mu,
                response_var,
                kernels: posts.iter().map(|p| p.kernel().clone()).collect(),
            },
            cloud,
        ))
    }

    fn candidates(&mut self, iter: usize) -> Points {
        let cloud_subset = |size: usize, id: u64, samples: &Points| {
            let n = samples.len();
            if size >= n {
                return samples.clone();
            }
            let mut rng = RngStream::new(0, 0).with_stream(id).rng();
            let mut idx = sample_indices(&mut rng, n, size).into_vec();
            idx.sort_unstable();
            samples.select(&idx)
        };
        match self.config.candidates {
            CandidateSource::CloudSubset {
                size,
                refresh_every,
            } => {
                let epoch = iter / refresh_every;
                match &self.subset {
                    Some((e, pts)) if *e == epoch => pts.clone(),
                    _ => {
                        let seed_id = self.config.seed.wrapping_mul(0x100).wrapping_add(epoch as u64);
                        let pts = cloud_subset(size, seed_id ^ 0xc0ffee, &self.samples);
                        self.subset = Some((epoch, pts.clone()));
                        pts
                    }
                }
            }
            CandidateSource::FreshGrid { size } => {
                self.model.sample(size, self.config.stream(1000 + iter as u64))
            }
            CandidateSource::Continuous { size, .. } => {
                let seed_id = self.config.seed.wrapping_mul(0x100).wrapping_add(iter as u64);
                cloud_subset(size, seed_id ^ 0xbeef, &self.samples)
            }
        }
    }

    /// Box spanned by the cloud, for the continuous polish.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.samples.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in self.samples.rows() {
            for k in 0..d {
                lo[k] = lo[k].min(row[k]);
                hi[k] = hi[k].max(row[k]);
            }
        }
        (lo, hi)
    }

    fn choose(
        &mut self,
        posts: &[KrigingPosterior],
        response_var: &[f64],
        iter: usize,
    ) -> Result<(Vec<f64>, f64, usize)> {
        let r = pick_response(response_var);
        let post = &posts[r];
        let t = self.thresholds[r];
        let cands = self.candidates(iter);
        let la = Lookahead::new(post, t, &self.samples, &self.quad)?;
        let sn = if self.config.criterion == Criterion::JSnRef {
            let n = self.samples.len();
            Some(SnReference::new(
                post,
                t,
                &self.samples,
                vec![1.0 / n as f64; n],
                &self.quad,
                self.config.sn_paths,
                self.config.sn_grid_cap,
                self.config.stream(3),
            )?)
        } else {
            None
        };
        let scores = score_candidates(&la, sn.as_ref(), &cands, self.config.criterion)?;
        let i = select_next(&scores)?;
        let mut x = cands.row(i).to_vec();
        let mut value = scores[i].value;
        if let CandidateSource::Continuous { max_evals, .. } = self.config.candidates {
            if self.config.criterion != Criterion::JSnRef {
                let (lo, hi) = self.bounds();
                let step: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.05 * (b - a).max(1e-12)).collect();
                let nm = NelderMead {
                    max_evals,
                    ..NelderMead::default()
                };
                let crit = self.config.criterion;
                let m = nm.minimize(
                    |z| match la.evaluate(z, crit) {
                        Ok(v) if !v.degenerate => v.value,
                        _ => f64::INFINITY,
                    },
                    &x,
                    &step,
                    &lo,
                    &hi,
                );
                if m.value < value {
                    x = m.x;
                    value = m.value;
                }
            }
        }
        Ok((x, value, r))
    }
}

/// Sequential design from `initial` until the budget is spent, the credible
/// interval is narrow enough, or the oracle fails.
pub fn run_loop<O: Oracle + ?Sized>(
    oracle: &mut O,
    model: &InputModel,
    thresholds: &[f64],
    initial: &Points,
    config: &SurConfig,
) -> Result<SurOutcome> {
    config.validate()?;
    if thresholds.len() != oracle.responses() || thresholds.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} thresholds for {} responses",
            thresholds.len(),
            oracle.responses()
        )));
    }
    if let Some(t) = thresholds.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidInput(format!("threshold {t} is not finite")));
    }
    if initial.len() < 2 {
        return Err(Error::InvalidInput("initial design needs at least two points".into()));
    }
    if initial.dim() != oracle.dim() || model.dim() != oracle.dim() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dim(),
            got: if initial.dim() != oracle.dim() { initial.dim() } else { model.dim() },
        });
    }
    let nr = thresholds.len();
    let mut responses = vec![Vec::with_capacity(initial.len() + config.budget); nr];
    for x in initial.rows() {
        let y = oracle.evaluate(x)?;
        crate::oracle::check_output(&y, nr)?;
        for (col, v) in responses.iter_mut().zip(y) {
            col.push(v);
        }
    }
    let mut lp = Loop {
        config,
        model,
        thresholds: thresholds.to_vec(),
        quad: GaussHermite::new(config.quadrature_order),
        samples: model.sample(config.cloud_size, config.stream(1)),
        hints: vec![None; nr],
        subset: None,
    };
    let designs = responses
        .iter()
        .map(|ys| Design::new(initial.clone(), ys.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut posts = lp.fit_all(designs, true, None)?;
    let (rec, mut cloud) = lp.record(&posts, 0, None, None, None, None)?;
    let mut history = vec![rec];
    let mut since_fit = 0;

    let stop = loop {
        let last = history.last().expect("nonempty history");
        if let Some(w) = config.stop_width {
            if last.report.credible_cx.width() < w {
                break StopReason::Width;
            }
        }
        let iter = last.iter + 1;
        if iter > config.budget {
            break StopReason::Budget;
        }
        let (x, value, r) = match lp.choose(&posts, &last.response_var, iter) {
            Ok(c) => c,
            Err(Error::DesignSaturated) => break StopReason::Saturated,
            Err(e) => return Err(e),
        };
        let y = match oracle.evaluate(&x).and_then(|y| crate::oracle::check_output(&y, nr).map(|_| y)) {
            Ok(y) => y,
            Err(e) => {
                break StopReason::OracleFailure {
                    iter,
                    message: e.to_string(),
                }
            }
        };
        let designs = posts
            .iter()
            .zip(&y)
            .map(|(p, &v)| p.design().appended(&x, v))
            .collect::<Result<Vec<_>>>()?;
        since_fit += 1;
        let full = since_fit >= config.refit_every;
        if full {
            since_fit = 0;
        }
        posts = lp.fit_all(designs, full, Some(&posts))?;
        let (rec, c) = lp.record(&posts, iter, Some(x), Some(y), Some(value), Some(r))?;
        cloud = c;
        history.push(rec);
    };
    Ok(SurOutcome {
        state: SurState {
            posteriors: posts,
            thresholds: thresholds.to_vec(),
            cloud,
            history,
        },
        stop,
    })
}
