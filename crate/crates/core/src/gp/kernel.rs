//! Stationary covariance functions used by the Kriging model.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::points::Points;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Matern32,
    Matern52,
    SquaredExponential,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [
        KernelFamily::Matern32,
        KernelFamily::Matern52,
        KernelFamily::SquaredExponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Matern32 => "matern32",
            KernelFamily::Matern52 => "matern52",
            KernelFamily::SquaredExponential => "squared-exponential",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "matern32" | "matern3/2" => Some(KernelFamily::Matern32),
            "matern52" | "matern5/2" => Some(KernelFamily::Matern52),
            "squared-exponential" | "se" | "gauss" | "gaussian" => {
                Some(KernelFamily::SquaredExponential)
            }
            _ => None,
        }
    }

    /// Correlation as a function of the scaled distance `r ≥ 0`.
    #[inline]
    pub fn correlation(self, r: f64) -> f64 {
        match self {
            KernelFamily::Matern32 => {
                let s = 3f64.sqrt() * r;
                (1.0 + s) * (-s).exp()
            }
            KernelFamily::Matern52 => {
                let s = 5f64.sqrt() * r;
                (1.0 + s + s * s / 3.0) * (-s).exp()
            }
            KernelFamily::SquaredExponential => (-0.5 * r * r).exp(),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Kernel family plus hyperparameters. With `isotropic` set only
/// `lengthscales[0]` is used.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub variance: f64,
    pub lengthscales: Vec<f64>,
    pub isotropic: bool,
}

impl KernelSpec {
    pub fn new(
        family: KernelFamily,
        variance: f64,
        lengthscales: Vec<f64>,
        isotropic: bool,
    ) -> Result<Self> {
        let spec = Self {
            family,
            variance,
            lengthscales,
            isotropic,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn isotropic(family: KernelFamily, variance: f64, lengthscale: f64) -> Result<Self> {
        Self::new(family, variance, vec![lengthscale], true)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance.is_finite() && self.variance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kernel variance must be positive, got {}",
                self.variance
            )));
        }
        if self.lengthscales.is_empty() {
            return Err(Error::InvalidInput("no lengthscale given".into()));
        }
        if self.isotropic && self.lengthscales.len() != 1 {
            return Err(Error::InvalidInput(
                "isotropic kernel takes a single lengthscale".into(),
            ));
        }
        if let Some(l) = self
            .lengthscales
            .iter()
            .find(|l| !(l.is_finite() && **l > 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "lengthscales must be positive, got {l}"
            )));
        }
        Ok(())
    }

    /// Checks that the kernel can be applied to points of dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if !self.isotropic && self.lengthscales.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: self.lengthscales.len(),
                got: dim,
            });
        }
        Ok(())
    }

    #[inline]
    fn scaled_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let s: f64 = if self.isotropic {
            let l = self.lengthscales[0];
            a.iter()
                .zip(b)
                .map(|(x, y)| {
                    let t = (x - y) / l;
                    t * t
                })
                .sum()
        } else {
            a.iter()
                .zip(b)
                .zip(&self.lengthscales)
                .map(|((x, y), l)| {
                    let t = (x - y) / l;
                    t * t
                })
                .sum()
        };
        s.sqrt()
    }

    #[inline]
    pub fn correlation(&self, a: &[f64], b: &[f64]) -> f64 {
        self.family.correlation(self.scaled_distance(a, b))
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.variance * self.correlation(a, b)
    }

    /// Symmetric `n × n` covariance matrix.
    pub fn matrix(&self, points: &Points) -> DMatrix<f64> {
        let n = points.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = self.variance;
            for j in 0..i {
                let v = self.eval(points.row(i), points.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// `|a| × |b|` cross-covariance matrix.
    pub fn cross(&self, a: &Points, b: &Points) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.eval(a.row(i), b.row(j)))
    }

    /// Same family and lengthscales with a different variance.
    pub fn with_variance(&self, variance: f64) -> Self {
        Self {
            variance,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_equals_variance() {
        for family in KernelFamily::ALL {
            let k = KernelSpec::new(family, 2.5, vec![0.3, 1.7], false).unwrap();
            let x = [0.4, -1.2];
            assert_eq!(k.eval(&x, &x), 2.5);
        }
    }

    #[test]
    fn matrix_is_symmetric_psd() {
        let pts = Points::from_scalars(&[0.0, 0.1, 0.25, 0.7, 1.3, 2.0]);
        for family in KernelFamily::ALL {
            let k = KernelSpec::isotropic(family, 1.3, 0.4).unwrap().matrix(&pts);
            assert_eq!(k, k.transpose());
            let eig = k.symmetric_eigenvalues();
            assert!(eig.iter().all(|&l| l > -1e-12), "{family}: {eig}");
        }
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        assert!(KernelSpec::isotropic(KernelFamily::Matern52, 0.0, 1.0).is_err());
        assert!(KernelSpec::isotropic(KernelFamily::Matern52, 1.0, -1.0).is_err());
        assert!(KernelSpec::new(KernelFamily::Matern52, 1.0, vec![1.0, 1.0], true).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for family in KernelFamily::ALL {
            assert_eq!(KernelFamily::from_name(family.name()), Some(family));
        }
    }

    #[test]
    fn matern_limits() {
        // Matérn 5/2 at r = 1: (1 + √5 + 5/3) e^{-√5}
        let s = 5f64.sqrt();
        let expected = (1.0 + s + 5.0 / 3.0) * (-s).exp();
        assert!((KernelFamily::Matern52.correlation(1.0) - expected).abs() < 1e-15);
        assert!(KernelFamily::Matern32.correlation(50.0) < 1e-30);
    }
}
