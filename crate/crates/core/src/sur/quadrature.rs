use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss–Hermite rule for the weight `e^{-u²}`, so that for `Z ~ N(m, σ²)`
/// `E[f(Z)] ≈ (1/√π) Σ_q w_q f(m + √2 u_q σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch: eigen-decomposition of the Jacobi matrix.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let mut j = DMatrix::<f64>::zeros(order, order);
        for i in 1..order {
            let b = (i as f64 / 2.0).sqrt();
            j[(i, i - 1)] = b;
            j[(i - 1, i)] = b;
        }
        let eig = SymmetricEigen::new(j);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|k| {
                let v0 = eig.eigenvectors[(0, k)];
                (eig.eigenvalues[k], sqrt_pi * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // exact symmetry of the rule
        let n = pairs.len();
        for k in 0..n / 2 {
            let u = 0.5 * (pairs[n - 1 - k].0 - pairs[k].0);
            let w = 0.5 * (pairs[n - 1 - k].1 + pairs[k].1);
            pairs[k] = (-u, w);
            pairs[n - 1 - k] = (u, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized weights `w_q / √π`, summing to one.
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        let s = std::f64::consts::PI.sqrt();
        self.weights.iter().map(move |w| w / s)
    }

    /// Standardized offsets `√2 u_q`.
    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|u| std::f64::consts::SQRT_2 * u)
    }

    pub fn max_offset(&self) -> f64 {
        self.offsets().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `E[f(Z)]`, `Z ~ N(mean, sd²)`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mean: f64, sd: f64, mut f: F) -> f64 {
        self.probabilities()
            .zip(self.offsets())
            .map(|(w, o)| w * f(mean + o * sd))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let q = GaussHermite::new(6);
        // degree ≤ 11 moments of N(0.3, 1.5²)
        let (m, s) = (0.3, 1.5);
        assert!((q.expect(m, s, |_| 1.0) - 1.0).abs() < 1e-14);
        assert!((q.expect(m, s, |z| z) - m).abs() < 1e-14);
        assert!((q.expect(m, s, |z| (z - m).powi(2)) - s * s).abs() < 1e-13);
        assert!((q.expect(m, s, |z| (z - m).powi(4)) - 3.0 * s.powi(4)).abs() < 1e-12);
        assert!((q.expect(m, s, |z| (z - m).powi(10)) - 945.0 * s.powi(10)).abs() < 1e-9 * 945.0 * s.powi(10));
    }

    #[test]
    fn two_point_rule() {
        let q = GaussHermite::new(2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q.nodes()[1] - r).abs() < 1e-15 && (q.nodes()[0] + r).abs() < 1e-15);
        let s = std::f64::consts::PI.sqrt() / 2.0;
        assert!(q.weights().iter().all(|w| (w - s).abs() < 1e-15));
    }

    #[test]
    fn matches_normal_cdf_expectation() {
        // E[Φ(Z)] for Z ~ N(0, 1) is 1/2
        let q = GaussHermite::new(12);
        let v = q.expect(0.0, 1.0, crate::stats::norm_cdf);
        assert!((v - 0.5).abs() < 1e-14);
    }
}
