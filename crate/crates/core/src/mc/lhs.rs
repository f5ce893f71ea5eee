//! Latin hypercube designs, optionally improved for the maximin distance.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mc::{InputModel, RngStream};
use crate::points::{sq_dist, Points};

pub const DEFAULT_RESTARTS: usize = 20;

/// Random Latin hypercube in `(0, 1)^d`: every column has one point per
/// stratum `[k/n, (k+1)/n)`.
pub fn lhs_unit<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Points {
    let mut data = vec![0.0; n * d];
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..d {
        perm.shuffle(rng);
        for (i, &cell) in perm.iter().enumerate() {
            let u: f64 = rng.random();
            data[i * d + k] = (cell as f64 + u) / n as f64;
        }
    }
    Points::from_flat(data, d).expect("dimension is positive")
}

/// `(min pairwise squared distance, number of pairs attaining it)`.
pub fn maximin_score(points: &Points) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut count = 0;
    for i in 0..points.len() {
        for j in 0..i {
            let d = sq_dist(points.row(i), points.row(j));
            if d < best {
                best = d;
                count = 1;
            } else if d == best {
                count += 1;
            }
        }
    }
    (best, count)
}

fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Maximin LHS in the unit cube: `restarts` random hypercubes, each improved by
/// `n²` random within-column swaps accepted when they raise the minimum
/// distance (or keep it and reduce the number of closest pairs).
pub fn lhs_maximin_unit(n: usize, d: usize, restarts: usize, stream: RngStream) -> Result<Points> {
    if n < 2 {
        return Err(Error::InvalidInput("LHS needs at least two points".into()));
    }
    if d == 0 {
        return Err(Error::InvalidInput("LHS needs a positive dimension".into()));
    }
    let mut rng = stream.rng();
    let mut best: Option<(Points, (f64, usize))> = None;
    for _ in 0..restarts.max(1) {
        let mut pts = lhs_unit(n, d, &mut rng);
        let mut score = maximin_score(&pts);
        for _ in 0..n * n {
            let k = rng.random_range(0..d);
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            swap_coord(&mut pts, a, b, k);
            let s = maximin_score(&pts);
            if better(s, score) {
                score = s;
            } else {
                swap_coord(&mut pts, a, b, k);
            }
        }
        if best.as_ref().is_none_or(|(_, s)| better(score, *s)) {
            best = Some((pts, score));
        }
    }
    Ok(best.expect("at least one restart").0)
}

fn swap_coord(pts: &mut Points, a: usize, b: usize, k: usize) {
    let d = pts.dim();
    let data = pts.as_flat_mut();
    data.swap(a * d + k, b * d + k);
}

/// Maximin LHS mapped to physical space through the marginal quantiles.
pub fn lhs_maximin(model: &InputModel, n: usize, restarts: usize, stream: RngStream) -> Result<Points> {
    let unit = lhs_maximin_unit(n, model.dim(), restarts, stream)?;
    let mut out = Points::with_capacity(model.dim(), n);
    for u in unit.rows() {
        // keep the quantile transform finite at the cube boundary
        let u: Vec<f64> = u.iter().map(|v| v.clamp(1e-12, 1.0 - 1e-12)).collect();
        out.push(&model.from_unit(&u))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_stratified(pts: &Points) -> bool {
        let n = pts.len();
        (0..pts.dim()).all(|k| {
            let mut seen = vec![false; n];
            for v in pts.column(k) {
                let cell = ((v * n as f64).floor() as usize).min(n - 1);
                if seen[cell] {
                    return false;
                }
                seen[cell] = true;
            }
            true
        })
    }

    #[test]
    fn two_points_split_halves() {
        let p = lhs_maximin_unit(2, 1, 5, RngStream::new(1, 0)).unwrap();
        let mut c = p.column(0);
        c.sort_by(f64::total_cmp);
        assert!(c[0] < 0.5 && c[1] >= 0.5);
    }

    #[test]
    fn columns_are_stratified() {
        for seed in 0..10 {
            let p = lhs_maximin_unit(17, 3, 3, RngStream::new(seed, 2)).unwrap();
            assert!(is_stratified(&p));
        }
    }

    #[test]
    fn never_worse_than_plain_lhs() {
        for seed in 0..100 {
            let s = RngStream::new(seed, 9);
            let plain = lhs_unit(10, 2, &mut s.rng());
            let opt = lhs_maximin_unit(10, 2, 2, s).unwrap();
            assert!(maximin_score(&opt).0 >= maximin_score(&plain).0);
        }
    }

    #[test]
    fn physical_mapping_preserves_strata() {
        let model = InputModel::normal(-0.5, 0.4).unwrap();
        let p = lhs_maximin(&model, 8, 4, RngStream::new(7, 1)).unwrap();
        let u: Vec<f64> = p
            .column(0)
            .iter()
            .map(|x| crate::stats::norm_cdf((x + 0.5) / 0.4))
            .collect();
        assert!(is_stratified(&Points::from_scalars(&u)));
    }

    #[test]
    fn rejects_single_point() {
        assert!(lhs_maximin_unit(1, 2, 1, RngStream::new(0, 0)).is_err());
    }
}
