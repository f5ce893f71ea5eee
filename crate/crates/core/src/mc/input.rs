//! Input distribution `P_X` with independent marginals and seeded streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::points::Points;
use crate::stats::{norm_cdf, norm_quantile};

/// A `(seed, stream)` pair. Distinct pairs give independent ChaCha streams,
/// identical pairs reproduce the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One-dimensional marginal law of an input factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    TruncatedNormal { mean: f64, sd: f64, lo: f64, hi: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Marginal::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Marginal::TruncatedNormal { mean, sd, lo, hi } => {
                mean.is_finite() && sd.is_finite() && sd > 0.0 && lo < hi && !lo.is_nan()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid marginal {self:?}")))
        }
    }

    /// Inverse CDF at `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => mean + sd * norm_quantile(u),
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * u,
            Marginal::TruncatedNormal { mean, sd, lo, hi } => {
                let a = norm_cdf((lo - mean) / sd);
                let b = norm_cdf((hi - mean) / sd);
                let x = mean + sd * norm_quantile(a + u * (b - a));
                x.clamp(lo, hi)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Marginal::TruncatedNormal { .. } => {
                // open interval keeps the quantile finite
                let u = (rng.random::<f64>() + f64::EPSILON).min(1.0 - f64::EPSILON);
                self.quantile(u)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Normal { mean, .. } => mean,
            Marginal::Uniform { lo, hi } => 0.5 * (lo + hi),
            Marginal::TruncatedNormal { mean, sd, lo, hi } => {
                let (a, b) = ((lo - mean) / sd, (hi - mean) / sd);
                let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                let pdf_a = if a.is_finite() { pdf(a) } else { 0.0 };
                let pdf_b = if b.is_finite() { pdf(b) } else { 0.0 };
                mean + sd * (pdf_a - pdf_b) / (norm_cdf(b) - norm_cdf(a))
            }
        }
    }
}

/// Product measure of independent marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct InputModel {
    marginals: Vec<Marginal>,
}

impl InputModel {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidInput("input model needs at least one factor".into()));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(Self { marginals })
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Self::new(vec![Marginal::Normal { mean, sd }])
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    /// `n` i.i.d. draws; deterministic per stream.
    pub fn sample(&self, n: usize, stream: RngStream) -> Points {
        let mut rng = stream.rng();
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Points {
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            for m in &self.marginals {
                data.push(m.sample(rng));
            }
        }
        Points::from_flat(data, d).expect("dimension is positive")
    }

    /// Maps a point of the open unit cube through the marginal quantiles.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.marginals)
            .map(|(&ui, m)| m.quantile(ui))
            .collect()
    }
}
