use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gp::kernel::KernelSpec;
use crate::mc::RngStream;
use crate::points::{same_point, Points};

/// First jitter level, relative to the kernel variance.
pub const JITTER_START: f64 = 1e-8;
/// Largest jitter tried before giving up.
pub const JITTER_CAP: f64 = 1e-2;
/// Posterior variance (relative) below which a site counts as already observed.
pub const DEGENERATE_SITE: f64 = 1e-12;

/// Observed design: distinct points and their responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    points: Points,
    responses: Vec<f64>,
}

impl Design {
    pub fn new(points: Points, responses: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("design needs at least one point".into()));
        }
        if points.len() != responses.len() {
            return Err(Error::InvalidInput(format!(
                "{} points but {} responses",
                points.len(),
                responses.len()
            )));
        }
        if let Some(bad) = points
            .as_flat()
            .iter()
            .chain(&responses)
            .find(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput(format!("non-finite design value {bad}")));
        }
        for i in 0..points.len() {
            for j in 0..i {
                if same_point(points.row(i), points.row(j)) {
                    return Err(Error::DuplicatePoints(j, i));
                }
            }
        }
        Ok(Self { points, responses })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// Copy with one more observation.
    pub fn appended(&self, x: &[f64], y: f64) -> Result<Self> {
        let mut points = self.points.clone();
        points.push(x)?;
        let mut responses = self.responses.clone();
        responses.push(y);
        Self::new(points, responses)
    }

    /// Copy without observation `i`.
    pub fn without(&self, i: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&j| j != i).collect();
        Self::new(
            self.points.select(&keep),
            keep.iter().map(|&j| self.responses[j]).collect(),
        )
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.points.rows().any(|r| same_point(r, x))
    }
}

/// How the constant trend is obtained when conditioning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trend {
    /// Generalized least squares under the current kernel.
    Gls,
    Fixed(f64),
}

/// How much diagonal jitter to use when factoring the kernel matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Jitter {
    /// Start at `JITTER_START` and multiply by ten up to `JITTER_CAP`.
    Escalate,
    /// Use exactly this relative jitter.
    Exact(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Two-sided normal band `mean ± z·sd`.
    pub fn band(&self, z: f64) -> (f64, f64) {
        let h = z * self.sd();
        (self.mean - h, self.mean + h)
    }
}

/// Gaussian Kriging posterior with constant trend, conditioned on a design.
#[derive(Debug, Clone)]
pub struct KrigingPosterior {
    design: Design,
    kernel: KernelSpec,
    trend: f64,
    /// relative jitter actually used
    jitter: f64,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
}

pub(crate) fn cholesky_with_jitter(
    k: &DMatrix<f64>,
    variance: f64,
    jitter: Jitter,
) -> Option<(DMatrix<f64>, f64)> {
    let levels: Vec<f64> = match jitter {
        Jitter::Exact(j) => vec![j],
        Jitter::Escalate => {
            let mut v = Vec::new();
            let mut j = JITTER_START;
            while j <= JITTER_CAP * (1.0 + 1e-9) {
                v.push(j);
                j *= 10.0;
            }
            v
        }
    };
    for rel in levels {
        let mut m = k.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += rel * variance;
        }
        if let Some(c) = m.cholesky() {
            return Some((c.l(), rel));
        }
    }
    None
}

impl KrigingPosterior {
    /// Conditions the prior `kernel` on `design` with fixed hyperparameters.
    pub fn condition(design: Design, kernel: KernelSpec, trend: Trend) -> Result<Self> {
        Self::condition_with(design, kernel, trend, Jitter::Escalate)
    }

    pub fn condition_with(
        design: Design,
        kernel: KernelSpec,
        trend: Trend,
        jitter: Jitter,
    ) -> Result<Self> {
        kernel.validate()?;
        kernel.check_dim(design.dim())?;
        let k = kernel.matrix(design.points());
        let (chol, rel) = cholesky_with_jitter(&k, kernel.variance, jitter).ok_or(
            Error::DegenerateDesign {
                jitter: match jitter {
                    Jitter::Exact(j) => j,
                    Jitter::Escalate => JITTER_CAP,
                },
            },
        )?;
        let y = DVector::from_column_slice(design.responses());
        let trend = match trend {
            Trend::Fixed(b) => b,
            Trend::Gls => {
                let ones = DVector::from_element(design.len(), 1.0);
                let w = solve_chol(&chol, &ones);
                ones.dot(&solve_chol(&chol, &y)) / ones.dot(&w)
            }
        };
        let centered = y.add_scalar(-trend);
        let alpha = solve_chol(&chol, &centered);
        Ok(Self {
            design,
            kernel,
            trend,
            jitter: rel,
            chol,
            alpha,
        })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn trend(&self) -> f64 {
        self.trend
    }

    /// Relative jitter used in the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Absolute jitter added to the kernel diagonal.
    pub fn nugget(&self) -> f64 {
        self.jitter * self.kernel.variance
    }

    pub fn dim(&self) -> usize {
        self.design.dim()
    }

    /// Kriging weights `(K + τI)⁻¹ (y − β 1)`.
    pub fn weights(&self) -> &[f64] {
        self.alpha.as_slice()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn k_vec(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.design.len(),
            self.design.points().rows().map(|r| self.kernel.eval(r, x)),
        )
    }

    /// `L⁻¹ k(X, x)`.
    pub(crate) fn whiten(&self, x: &[f64]) -> DVector<f64> {
        let k = self.k_vec(x);
        lower_solve(&self.chol, &k)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.check_point(x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> Prediction {
        let k = self.k_vec(x);
        let mean = self.trend + k.dot(&self.alpha);
        let v = lower_solve(&self.chol, &k);
        let variance = (self.kernel.variance - v.norm_squared()).max(0.0);
        Prediction { mean, variance }
    }

    pub fn predict_many(&self, xs: &Points) -> Result<Vec<Prediction>> {
        self.check_point(&vec![0.0; xs.dim()])?;
        Ok(xs.rows().map(|x| self.predict_unchecked(x)).collect())
    }

    /// Mean, variance and whitened cross-covariances at every point of `xs`.
    pub fn prepare(&self, xs: &Points) -> Result<PreparedPoints> {
        if xs.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: xs.dim(),
            });
        }
        let kx = self.kernel.cross(self.design.points(), xs);
        let mean: Vec<f64> = kx
            .column_iter()
            .map(|c| self.trend + c.dot(&self.alpha))
            .collect();
        let whitened = lower_solve_mat(&self.chol, &kx);
        let variance = whitened
            .column_iter()
            .map(|c| (self.kernel.variance - c.norm_squared()).max(0.0))
            .collect();
        Ok(PreparedPoints {
            points: xs.clone(),
            mean,
            variance,
            whitened,
        })
    }

    /// Posterior covariance matrix of `(ξ_n(g_1), …, ξ_n(g_m))`.
    pub fn cross_cov(&self, grid: &Points) -> Result<DMatrix<f64>> {
        let prep = self.prepare(grid)?;
        Ok(prep.covariance(&self.kernel))
    }

    /// `count` posterior paths on `grid`, one per row.
    pub fn sample_paths(
        &self,
        grid: &Points,
        count: usize,
        stream: RngStream,
    ) -> Result<DMatrix<f64>> {
        let prep = self.prepare(grid)?;
        let cov = prep.covariance(&self.kernel);
        let (l, _) = cholesky_with_jitter(&cov, self.kernel.variance, Jitter::Escalate)
            .ok_or(Error::IllConditionedGrid { jitter: JITTER_CAP })?;
        Ok(draw_paths(&prep.mean, &l, count, stream))
    }

    /// Leave-one-out residuals `y_i − m_{-i}(x_i)` and variances under the
    /// current hyperparameters, trend and jitter.
    pub fn loo(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.design.len();
        let eye = DMatrix::<f64>::identity(n, n);
        let linv = lower_solve_mat(&self.chol, &eye);
        let kinv = linv.transpose() * &linv;
        let res = (0..n).map(|i| self.alpha[i] / kinv[(i, i)]).collect();
        let var = (0..n).map(|i| 1.0 / kinv[(i, i)]).collect();
        (res, var)
    }

    /// Root mean square of the leave-one-out residuals.
    pub fn loo_rmse(&self) -> f64 {
        let (res, _) = self.loo();
        (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt()
    }

    /// Re-conditions on a larger design keeping hyperparameters fixed.
    /// The trend is re-estimated by GLS.
    pub fn refit_fixed(&self, design: Design) -> Result<Self> {
        Self::condition(design, self.kernel.clone(), Trend::Gls)
    }
}

/// Posterior moments at a batch of points, plus `L⁻¹ k(X, ·)` for fast updates.
#[derive(Debug, Clone)]
pub struct PreparedPoints {
    pub points: Points,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// `n × m`
    pub whitened: DMatrix<f64>,
}

impl PreparedPoints {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn covariance(&self, kernel: &KernelSpec) -> DMatrix<f64> {
        let prior = kernel.matrix(&self.points);
        let c = prior - self.whitened.transpose() * &self.whitened;
        // symmetrize rounding noise
        (&c + c.transpose()) * 0.5
    }
}

pub(crate) fn draw_paths(
    mean: &[f64],
    chol: &DMatrix<f64>,
    count: usize,
    stream: RngStream,
) -> DMatrix<f64> {
    let m = mean.len();
    let mut rng = stream.rng();
    let z = DMatrix::<f64>::from_fn(m, count, |_, _| rng.sample(StandardNormal));
    let paths = chol * z;
    DMatrix::from_fn(count, m, |i, j| mean[j] + paths[(j, i)])
}

pub(crate) fn lower_solve(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(b)
        .expect("cholesky factor has a positive diagonal")
}

pub(crate) fn lower_solve_mat(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    l.solve_lower_triangular(b)
        .expect("cholesky factor has a positive diagonal")
}

pub(crate) fn solve_chol(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let v = lower_solve(l, b);
    l.tr_solve_lower_triangular(&v)
        .expect("cholesky factor has a positive diagonal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::KernelFamily;

    fn toy() -> KrigingPosterior {
        let pts = Points::from_scalars(&[-1.0, -0.3, 0.2, 0.9]);
        let y = vec![0.5, 1.2, 0.8, -0.1];
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 0.7, 0.6).unwrap();
        KrigingPosterior::condition(Design::new(pts, y).unwrap(), k, Trend::Gls).unwrap()
    }

    #[test]
    fn single_point_interpolates() {
        let d = Design::new(Points::from_scalars(&[0.3]), vec![2.0]).unwrap();
        let k = KernelSpec::isotropic(KernelFamily::Matern52, 1.0, 1.0).unwrap();
        let post = KrigingPosterior::condition(d, k, Trend::Gls).unwrap();
        let p = post.predict(&[0.3]).unwrap();
        assert!((p.mean - 2.0).abs() < 1e-12);
        assert!(p.variance < 1e-7);
    }

    #[test]
    fn interpolates_design() {
        let post = toy();
        for (x, &y) in post.design().points().rows().zip(post.design().responses()) {
            let p = post.predict(x).unwrap();
            assert!((p.mean - y).abs() <= 1e-8 * (1.0 + y.abs()));
            assert!(p.variance <= 1e-6 * post.kernel().variance);
        }
    }

    #[test]
    fn far_field_reverts_to_prior() {
        let post = toy();
        let p = post.predict(&[1e3]).unwrap();
        assert!((p.mean - post.trend()).abs() < 1e-12);
        assert!((p.variance - post.kernel().variance).abs() < 1e-12);
    }

    #[test]
    fn band_matches_normal_interval() {
        let post = toy();
        let p = post.predict(&[0.5]).unwrap();
        let (lo, hi) = p.band(1.96);
        assert!((lo - (p.mean - 1.96 * p.variance.sqrt())).abs() < 1e-15);
        assert!((hi - (p.mean + 1.96 * p.variance.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn duplicate_points_rejected() {
        let pts = Points::from_scalars(&[0.1, 0.5, 0.1]);
        assert_eq!(
            Design::new(pts, vec![1.0, 2.0, 3.0]),
            Err(Error::DuplicatePoints(0, 2))
        );
    }

    #[test]
    fn dimension_mismatch_reported() {
        let post = toy();
        assert!(matches!(
            post.predict(&[0.0, 1.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn cross_cov_diagonal_matches_predict() {
        let post = toy();
        let grid = Points::from_scalars(&[-0.3, 0.0, 0.55, 2.0]);
        let c = post.cross_cov(&grid).unwrap();
        for (i, x) in grid.rows().enumerate() {
            let v = post.predict(x).unwrap().variance;
            assert!((c[(i, i)] - v).abs() <= 1e-10 * post.kernel().variance);
        }
        // design point row vanishes
        for j in 0..4 {
            assert!(c[(0, j)].abs() < 1e-6 * post.kernel().variance);
        }
    }

    #[test]
    fn loo_matches_refits() {
        let post = toy();
        let (res, var) = post.loo();
        for i in 0..post.design().len() {
            let sub = post.design().without(i).unwrap();
            let refit = KrigingPosterior::condition_with(
                sub,
                post.kernel().clone(),
                Trend::Fixed(post.trend()),
                Jitter::Exact(post.jitter()),
            )
            .unwrap();
            let x = post.design().points().row(i);
            let p = refit.predict(x).unwrap();
            let y = post.design().responses()[i];
            assert!((y - p.mean - res[i]).abs() < 1e-9, "{i}");
            let nug = post.nugget();
            assert!((p.variance + nug - var[i]).abs() < 1e-9);
        }
    }
}
