//! Brute-force reference computations for small instances.
//!
//! These work on the raw probability list with no grouping, sorting tricks or
//! cached factorizations, so they check the fast paths independently.

use crate::error::{Error, Result};
use crate::gp::{Design, Jitter, KrigingPosterior, Trend};
use crate::points::Points;

pub const MAX_DOUBLE_SUM: usize = 5_000;
/// Largest `N^m` accepted by [`moment_enumeration`].
pub const MAX_TUPLES: usize = 20_000_000;

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidInput("empty probability list".into()));
    }
    Ok(())
}

/// `Var[R_n] = (1/N²) Σ_i Σ_j min(p_i, p_j) − μ²`.
pub fn var_double_sum(probs: &[f64]) -> Result<f64> {
    check_probs(probs)?;
    if probs.len() > MAX_DOUBLE_SUM {
        return Err(Error::TooLarge(format!("double sum over {} atoms", probs.len())));
    }
    let n = probs.len() as f64;
    let s = compensated_sum(probs.iter().flat_map(|&a| probs.iter().map(move |&b| a.min(b))));
    let mu = compensated_sum(probs.iter().copied()) / n;
    Ok(s / (n * n) - mu * mu)
}

/// Neumaier summation; plain accumulation over N² terms loses ~1e-14.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let u = s + t;
        c += if s.abs() >= t.abs() { (s - u) + t } else { (t - u) + s };
        s = u;
    }
    s + c
}

/// `E[R_n^m] = (1/N^m) Σ_{i_1..i_m} min(p_{i_1}, …, p_{i_m})` by enumerating
/// all index tuples.
pub fn moment_enumeration(probs: &[f64], m: u32) -> Result<f64> {
    check_probs(probs)?;
    let n = probs.len();
    let tuples = (n as f64).powi(m as i32);
    if tuples > MAX_TUPLES as f64 {
        return Err(Error::TooLarge(format!("{n}^{m} index tuples")));
    }
    if m == 0 {
        return Ok(1.0);
    }
    fn rec(probs: &[f64], depth: u32, running: f64) -> f64 {
        if depth == 0 {
            return running;
        }
        probs.iter().map(|&p| rec(probs, depth - 1, running.min(p))).sum()
    }
    Ok(rec(probs, m, 1.0) / tuples)
}

/// Quantile function of `R_n`: `F⁻¹(u) = (1/N) #{p > 1 − u}`, evaluated by
/// direct count.
pub fn rn_quantile_count(probs: &[f64], u: f64) -> f64 {
    probs.iter().filter(|&&p| p > 1.0 - u).count() as f64 / probs.len() as f64
}

/// Integral of the step quantile function over `[a, b]` by the trapezoid
/// rule on a mesh refined at every jump.
pub fn quantile_integral(probs: &[f64], a: f64, b: f64) -> f64 {
    let mut knots: Vec<f64> = probs
        .iter()
        .map(|p| 1.0 - p)
        .filter(|&u| u > a && u < b)
        .collect();
    knots.push(a);
    knots.push(b);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut s = 0.0;
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // the integrand is constant on the open piece
        let mid = rn_quantile_count(probs, 0.5 * (lo + hi));
        s += 0.5 * (hi - lo) * (mid + mid);
    }
    s
}

/// `(γ⁻(α), γ⁺(α))` as tail averages of the quantile function:
/// `(1/α) ∫₀^α F⁻¹` and `(1/(1 − α)) ∫_α^1 F⁻¹`.
pub fn gamma_by_quadrature(probs: &[f64], alpha: f64) -> Result<(f64, f64)> {
    check_probs(probs)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("level {alpha} outside (0, 1)")));
    }
    Ok((
        quantile_integral(probs, 0.0, alpha) / alpha,
        quantile_integral(probs, alpha, 1.0) / (1.0 - alpha),
    ))
}

/// `η(p)` by scanning the list.
pub fn eta_scan(probs: &[f64], p: f64) -> f64 {
    let n = probs.len() as f64;
    let a: f64 = probs.iter().filter(|&&v| v <= p).sum();
    let b: f64 = probs.iter().filter(|&&v| v > p).map(|v| 1.0 - v).sum();
    ((1.0 - p) * a + p * b) / n
}

/// Largest gap between a lookahead prediction and a full refit with the same
/// kernel, trend and nugget, over `points`. Returns `(mean gap, variance gap)`.
pub fn update_vs_refit(
    post: &KrigingPosterior,
    site: &[f64],
    z: f64,
    points: &Points,
) -> Result<(f64, f64)> {
    let up = post.hypothetical(site)?;
    let applied = up.apply(z);
    let design = post.design().appended(site, z)?;
    let refit = KrigingPosterior::condition_with(
        Design::new(design.points().clone(), design.responses().to_vec())?,
        post.kernel().clone(),
        Trend::Fixed(post.trend()),
        Jitter::Exact(post.jitter()),
    )?;
    let (mut dm, mut dv) = (0.0f64, 0.0f64);
    for x in points.rows() {
        let a = applied.predict(x)?;
        let b = refit.predict(x)?;
        dm = dm.max((a.mean - b.mean).abs());
        dv = dv.max((a.variance - b.variance).abs());
    }
    Ok((dm, dv))
}
