//! Subcommand bodies. Each validates its whole configuration before the
//! first oracle call and writes its outputs under `out_dir`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use krigrisk::bench::reference::{eta_scan, gamma_by_quadrature, moment_enumeration, var_double_sum};
use krigrisk::field::{build_cloud, FailureReport, ProbGroups, QuantileBounds, ReportConfig, SampleCloud};
use krigrisk::gp::{
    fit, read_model, select_kernel_loo, write_model, Design, FitConfig, Jitter, KernelFamily,
    KrigingPosterior, Trend,
};
use krigrisk::mc::{lhs_maximin, naive_mc, RngStream, DEFAULT_RESTARTS};
use krigrisk::sur::{run_loop, StopReason, SurConfig, SurOutcome};
use krigrisk::{Error, Oracle};

use crate::config::{parse_family, RunConfig};
use crate::design_io::{design_csv, fmt, read_design, write_file, DesignTable};
use crate::error::CliError;
use crate::problem::Problem;

/// Stream offsets per purpose, shared with the library conventions.
const CLOUD_STREAM: u64 = 1;
const MC_STREAM: u64 = 2;
const INITIAL_STREAM: u64 = 20;
const LHS_STREAM: u64 = 21;
const ORACLE_CHECK_STREAM: u64 = 100;

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    let dir = cfg.out_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    // resolved settings, flags included
    write_file(&dir.join("config.toml"), &cfg.to_toml())?;
    Ok(dir)
}

fn report_config(cfg: &RunConfig) -> Result<ReportConfig, CliError> {
    cfg.report.to_report_config()
}

pub fn write_report(dir: &Path, report: &FailureReport) -> Result<(), CliError> {
    write_file(&dir.join("report_scalars.csv"), &report.scalars_csv())?;
    write_file(&dir.join("report_bounds.csv"), &report.bounds_csv())?;
    write_file(&dir.join("report.txt"), &report.to_text())
}

fn write_models(dir: &Path, posts: &[KrigingPosterior]) -> Result<Vec<PathBuf>, CliError> {
    posts
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let path = dir.join(format!("model_{}.txt", j + 1));
            write_file(&path, &write_model(p)).map(|_| path)
        })
        .collect()
}

fn load_models(paths: &[PathBuf]) -> Result<Vec<KrigingPosterior>, CliError> {
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            read_model(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Family name or `"loo"` for selection over all families.
fn families(name: &str) -> Result<Vec<KernelFamily>, CliError> {
    if name.eq_ignore_ascii_case("loo") {
        Ok(vec![
            KernelFamily::Matern32,
            KernelFamily::Matern52,
            KernelFamily::SquaredExponential,
        ])
    } else {
        Ok(vec![parse_family(name)?])
    }
}

pub struct FittedResponse {
    pub posterior: KrigingPosterior,
    pub loo_rmse: f64,
}

fn fit_table(
    table: &DesignTable,
    family: &str,
    isotropic: bool,
    seed: u64,
) -> Result<Vec<FittedResponse>, CliError> {
    if table.responses.is_empty() {
        return Err(CliError::Config("design has no response columns".into()));
    }
    let fams = families(family)?;
    let config = FitConfig {
        isotropic,
        seed,
        ..FitConfig::default()
    };
    table
        .responses
        .iter()
        .map(|y| {
            let design = Design::new(table.points.clone(), y.clone())?;
            let posterior = if fams.len() == 1 {
                fit(design, fams[0], &config)?
            } else {
                select_kernel_loo(&design, &fams, &config)?.0
            };
            Ok(FittedResponse {
                loo_rmse: posterior.loo_rmse(),
                posterior,
            })
        })
        .collect()
}

fn check_models(posts: &[KrigingPosterior], problem: &Problem) -> Result<(), CliError> {
    if posts.len() != problem.thresholds.len() {
        return Err(CliError::Config(format!(
            "{} models for {} thresholds",
            posts.len(),
            problem.thresholds.len()
        )));
    }
    if let Some(p) = posts.iter().find(|p| p.dim() != problem.dim()) {
        return Err(CliError::Config(format!(
            "model dimension {} but the input law has {}",
            p.dim(),
            problem.dim()
        )));
    }
    Ok(())
}

pub fn estimate(cfg: &RunConfig) -> Result<FailureReport, CliError> {
    let problem = Problem::resolve(&cfg.problem)?;
    let report_cfg = report_config(cfg)?;
    let n = cfg.estimate.cloud_size;
    if n == 0 {
        return Err(CliError::Config("cloud size must be positive".into()));
    }
    let posts = if !cfg.estimate.models.is_empty() {
        load_models(&cfg.estimate.models)?
    } else if let Some(path) = &cfg.estimate.design {
        let table = read_design(path)?;
        fit_table(&table, &cfg.fit.family, cfg.fit.isotropic, cfg.seed)?
            .into_iter()
            .map(|f| f.posterior)
            .collect()
    } else {
        return Err(CliError::Config("estimate needs model files or a design".into()));
    };
    check_models(&posts, &problem)?;
    let dir = out_dir(cfg)?;
    let samples = problem.model.sample(n, RngStream::new(cfg.seed, CLOUD_STREAM));
    let cloud = SampleCloud::from_union(samples, &posts, &problem.thresholds)?;
    let report = FailureReport::compute(cloud.groups(), &report_cfg)?;
    write_report(dir, &report)?;
    Ok(report)
}

fn sur_config(cfg: &RunConfig) -> Result<SurConfig, CliError> {
    let mut sur = cfg.sur.to_sur_config(cfg.seed, report_config(cfg)?)?;
    sur.fit.isotropic = cfg.fit.isotropic;
    Ok(sur)
}

pub fn sur(cfg: &RunConfig) -> Result<SurOutcome, CliError> {
    let problem = Problem::resolve(&cfg.problem)?;
    let sur_cfg = sur_config(cfg)?;
    let initial = match &cfg.sur.initial_design {
        Some(path) => read_design(path)?.points,
        None => lhs_maximin(
            &problem.model,
            cfg.sur.initial_size,
            DEFAULT_RESTARTS,
            RngStream::new(cfg.seed, INITIAL_STREAM),
        )?,
    };
    if initial.dim() != problem.dim() {
        return Err(CliError::Config(format!(
            "initial design has {} columns, the input law {}",
            initial.dim(),
            problem.dim()
        )));
    }
    let dir = out_dir(cfg)?;
    let mut oracle = problem.oracle()?;
    let outcome = run_loop(&mut oracle, &problem.model, &problem.thresholds, &initial, &sur_cfg)?;
    let state = &outcome.state;
    write_file(&dir.join("history.csv"), &state.history_csv())?;
    write_report(dir, &state.last().report)?;
    write_models(dir, &state.posteriors)?;
    let points = state.posteriors[0].design().points();
    let ys: Vec<Vec<f64>> = state.posteriors.iter().map(|p| p.design().responses().to_vec()).collect();
    write_file(&dir.join("design.csv"), &design_csv(points, &ys))?;
    match &outcome.stop {
        StopReason::OracleFailure { iter, message } => Err(CliError::Core(Error::Oracle(format!(
            "iteration {iter}: {message}"
        )))),
        _ => Ok(outcome),
    }
}

pub fn mc_baseline(cfg: &RunConfig) -> Result<String, CliError> {
    let problem = Problem::resolve(&cfg.problem)?;
    let report_cfg = report_config(cfg)?;
    if cfg.mc.samples == 0 {
        return Err(CliError::Config("mc.samples must be positive".into()));
    }
    let dir = out_dir(cfg)?;
    let mut oracle = problem.oracle()?;
    let r = naive_mc(
        &mut oracle,
        &problem.thresholds,
        &problem.model,
        cfg.mc.samples,
        RngStream::new(cfg.seed, MC_STREAM),
    )?;
    let (lo, hi) = r.clt_interval(report_cfg.ci_alpha);
    let rel = r.rel_stderr.map(fmt).unwrap_or_default();
    let csv = format!(
        "n,failures,estimate,stderr,rel_stderr,ci_lower,ci_upper\n{},{},{},{},{},{},{}\n",
        r.n,
        r.failures,
        fmt(r.estimate),
        fmt(r.stderr()),
        rel,
        fmt(lo),
        fmt(hi)
    );
    write_file(&dir.join("baseline.csv"), &csv)?;
    Ok(csv)
}

pub fn lhs(cfg: &RunConfig, evaluate: bool) -> Result<DesignTable, CliError> {
    let problem = Problem::resolve(&cfg.problem)?;
    if cfg.lhs.size < 2 || cfg.lhs.restarts == 0 {
        return Err(CliError::Config("lhs needs size ≥ 2 and at least one restart".into()));
    }
    let dir = out_dir(cfg)?;
    let points = lhs_maximin(
        &problem.model,
        cfg.lhs.size,
        cfg.lhs.restarts,
        RngStream::new(cfg.seed, LHS_STREAM),
    )?;
    let mut responses = Vec::new();
    if evaluate {
        let mut oracle = problem.oracle()?;
        responses = vec![Vec::with_capacity(points.len()); problem.responses];
        for x in points.rows() {
            for (col, y) in responses.iter_mut().zip(oracle.evaluate(x)?) {
                col.push(y);
            }
        }
    }
    write_file(&dir.join("design.csv"), &design_csv(&points, &responses))?;
    Ok(DesignTable { points, responses })
}

pub fn fit_cmd(cfg: &RunConfig) -> Result<Vec<FittedResponse>, CliError> {
    let path = cfg
        .fit
        .design
        .as_ref()
        .ok_or_else(|| CliError::Config("fit needs a design file".into()))?;
    let table = read_design(path)?;
    families(&cfg.fit.family)?;
    let dir = out_dir(cfg)?;
    let fitted = fit_table(&table, &cfg.fit.family, cfg.fit.isotropic, cfg.seed)?;
    let posts: Vec<KrigingPosterior> = fitted.iter().map(|f| f.posterior.clone()).collect();
    write_models(dir, &posts)?;
    let d = table.points.dim();
    let mut s = String::from("response,family,variance,trend,jitter,loo_rmse");
    for i in 1..=d {
        let _ = write!(s, ",lengthscale_{i}");
    }
    s.push('\n');
    for (j, f) in fitted.iter().enumerate() {
        let p = &f.posterior;
        let k = p.kernel();
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            j + 1,
            k.family,
            fmt(k.variance),
            fmt(p.trend()),
            fmt(p.jitter()),
            fmt(f.loo_rmse)
        );
        for i in 0..d {
            let l = if k.isotropic { k.lengthscales[0] } else { k.lengthscales[i] };
            let _ = write!(s, ",{}", fmt(l));
        }
        s.push('\n');
    }
    write_file(&dir.join("fit_summary.csv"), &s)?;
    Ok(fitted)
}

/// Moment enumeration beyond this many atoms is too slow at order 3.
const ENUMERATION_ATOMS: usize = 100;
const UPDATE_PROBES: usize = 5;

/// Fast estimators against their brute-force counterparts on small clouds.
pub fn oracle_check(cfg: &RunConfig) -> Result<String, CliError> {
    let problem = Problem::resolve(&cfg.problem)?;
    let report_cfg = report_config(cfg)?;
    let n = cfg.oracle_check.cloud_size;
    if n < 2 || cfg.oracle_check.clouds == 0 {
        return Err(CliError::Config("oracle check needs clouds of at least two points".into()));
    }
    let post = match cfg.estimate.models.first() {
        Some(p) => load_models(std::slice::from_ref(p))?.remove(0),
        None => {
            let points = lhs_maximin(
                &problem.model,
                cfg.sur.initial_size.max(2),
                DEFAULT_RESTARTS,
                RngStream::new(cfg.seed, INITIAL_STREAM),
            )?;
            let mut oracle = problem.oracle()?;
            let ys = points
                .rows()
                .map(|x| oracle.evaluate(x).map(|y| y[0]))
                .collect::<krigrisk::Result<Vec<_>>>()?;
            fit(
                Design::new(points, ys)?,
                parse_family(&cfg.sur.family)?,
                &FitConfig {
                    seed: cfg.seed,
                    ..FitConfig::default()
                },
            )?
        }
    };
    let t = problem.thresholds[0];
    let dir = out_dir(cfg)?;
    let mut s = String::from("cloud,check,fast,reference,abs_gap\n");
    let mut row = |c: usize, name: &str, a: f64, b: f64| {
        let _ = writeln!(s, "{c},{name},{},{},{}", fmt(a), fmt(b), fmt((a - b).abs()));
    };
    for c in 0..cfg.oracle_check.clouds {
        let stream = RngStream::new(cfg.seed, ORACLE_CHECK_STREAM + c as u64);
        let cloud = build_cloud(&post, t, &problem.model, n, stream)?;
        let probs = cloud.probs();
        row(c, "var_rn", cloud.var_rn(), var_double_sum(probs)?);
        row(c, "moment_2", cloud.moment_rn(2)?, moment_enumeration(probs, 2)?);
        let head = &probs[..probs.len().min(ENUMERATION_ATOMS)];
        let small = ProbGroups::from_probs(head)?;
        row(c, "moment_3", small.moment_rn(3)?, moment_enumeration(head, 3)?);
        for &alpha in &report_cfg.alphas {
            let q = QuantileBounds::compute(cloud.groups(), alpha)?;
            let (gm, gp) = gamma_by_quadrature(probs, alpha)?;
            row(c, &format!("gamma_minus@{alpha}"), q.gamma_minus, gm);
            row(c, &format!("gamma_plus@{alpha}"), q.gamma_plus, gp);
        }
        let qs = cloud.q_star();
        row(c, "eta@q_star", cloud.eta(qs), eta_scan(probs, qs));
        let samples = cloud.samples();
        let site = samples.row(0);
        let pred = post.predict(site)?;
        let z = pred.mean + pred.sd();
        let up = post.hypothetical(site)?;
        let applied = up.apply(z);
        let refit = KrigingPosterior::condition_with(
            post.design().appended(site, z)?,
            post.kernel().clone(),
            Trend::Fixed(post.trend()),
            Jitter::Exact(post.jitter()),
        )?;
        for x in samples.rows().skip(1).take(UPDATE_PROBES) {
            let a = applied.predict(x)?;
            let b = refit.predict(x)?;
            row(c, "update_mean", a.mean, b.mean);
            row(c, "update_var", a.variance, b.variance);
        }
    }
    write_file(&dir.join("oracle_comparison.csv"), &s)?;
    Ok(s)
}
