//! Approximate draws of `R_n` and grid-based draws of `S_n`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::ProbGroups;
use crate::gp::KrigingPosterior;
use crate::mc::RngStream;
use crate::points::Points;

/// `R_n(u) = (1/N) #{p > u}`.
pub fn rn_at(groups: &ProbGroups, u: f64) -> f64 {
    groups.survival(u)
}

/// `m` draws of `R_n = (1/N) #{p > U}` with `U` uniform.
pub fn sample_rn(groups: &ProbGroups, m: usize, stream: RngStream) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..m).map(|_| rn_at(groups, rng.random::<f64>())).collect()
}

/// Draws of the failure volume `S_n = Σ_j w_j 1{ξ_n(x_j) > T}` on a weighted
/// grid, one per simulated posterior path.
pub fn sample_sn_grid(
    post: &KrigingPosterior,
    threshold: f64,
    grid: &Points,
    weights: &[f64],
    paths: usize,
    stream: RngStream,
) -> Result<Vec<f64>> {
    if grid.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "{} grid points but {} weights",
            grid.len(),
            weights.len()
        )));
    }
    let sims = post.sample_paths(grid, paths, stream)?;
    Ok(sims
        .row_iter()
        .map(|row| {
            row.iter()
                .zip(weights)
                .filter(|(v, _)| **v > threshold)
                .map(|(_, w)| w)
                .sum()
        })
        .collect())
}
