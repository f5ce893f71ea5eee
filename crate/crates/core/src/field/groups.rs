//! Estimators computed from the membership probabilities of a cloud.
//!
//! Probabilities are kept as sorted distinct values `v_1 < … < v_{N'}` with
//! multiplicities `l_i` and suffix counts `n_i = #{p > v_i}`, so every
//! estimator costs `O(N')` or `O(log N')` after an `O(N log N)` sort.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbGroups {
    n: usize,
    values: Vec<f64>,
    counts: Vec<usize>,
    /// `n_i`
    suffix: Vec<usize>,
    /// `Σ_{j<i} l_j v_j`, length `N' + 1`
    prefix_lp: Vec<f64>,
    /// `Σ_{j≥i} l_j (1 − v_j)`, length `N' + 1`
    suffix_lq: Vec<f64>,
}

impl ProbGroups {
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidInput("empty probability cloud".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidInput(format!(
                "membership probability {p} outside [0, 1]"
            )));
        }
        let mut sorted = probs.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self::from_sorted(&sorted))
    }

    /// Builds groups from probabilities already sorted increasingly and in [0, 1].
    pub(crate) fn from_sorted(sorted: &[f64]) -> Self {
        let mut values = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &p in sorted {
            match values.last() {
                Some(&v) if v == p => *counts.last_mut().expect("non-empty") += 1,
                _ => {
                    values.push(p);
                    counts.push(1);
                }
            }
        }
        let n = sorted.len();
        let g = values.len();
        let mut suffix = vec![0; g];
        let mut acc = 0;
        for i in (0..g).rev() {
            suffix[i] = acc;
            acc += counts[i];
        }
        let mut prefix_lp = vec![0.0; g + 1];
        for i in 0..g {
            prefix_lp[i + 1] = prefix_lp[i] + counts[i] as f64 * values[i];
        }
        let mut suffix_lq = vec![0.0; g + 1];
        for i in (0..g).rev() {
            suffix_lq[i] = suffix_lq[i + 1] + counts[i] as f64 * (1.0 - values[i]);
        }
        Self {
            n,
            values,
            counts,
            suffix,
            prefix_lp,
            suffix_lq,
        }
    }

    /// Cloud size `N`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn n_groups(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn suffix_counts(&self) -> &[usize] {
        &self.suffix
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Number of groups with value `≤ q`.
    fn rank(&self, q: f64) -> usize {
        self.values.partition_point(|&v| v <= q)
    }

    /// `μ̂ = (1/N) Σ p_i`.
    pub fn mean(&self) -> f64 {
        self.prefix_lp[self.n_groups()] / self.nf()
    }

    /// `Var[R_n] = (1/N²) Σ_i l_i v_i (l_i + 2 n_i) − μ̂²`, clamped at 0.
    pub fn var_rn(&self) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(&self.counts)
            .zip(&self.suffix)
            .map(|((&v, &l), &m)| l as f64 * v * (l + 2 * m) as f64)
            .sum();
        let mu = self.mean();
        (s / (self.nf() * self.nf()) - mu * mu).max(0.0)
    }

    /// `E[R_n^m] = Σ_i v_i (G_{i−1}^m − G_i^m)`, `G_i = n_i / N`.
    pub fn moment_rn(&self, m: u32) -> Result<f64> {
        if m == 0 {
            return Err(Error::InvalidInput("moment order must be at least 1".into()));
        }
        let nf = self.nf();
        let m = m as i32;
        Ok(self
            .values
            .iter()
            .zip(&self.counts)
            .zip(&self.suffix)
            .map(|((&v, &l), &s)| {
                let g_hi = (s + l) as f64 / nf;
                let g_lo = s as f64 / nf;
                v * (g_hi.powi(m) - g_lo.powi(m))
            })
            .sum())
    }

    /// `Ĝ(q) = (1/N) #{p > q}`: the value of `R_n` when `U = q`.
    pub fn survival(&self, q: f64) -> f64 {
        let k = self.rank(q);
        self.count_above_rank(k) as f64 / self.nf()
    }

    /// `Ĝ(q−) = (1/N) #{p ≥ q}`.
    pub fn survival_left(&self, q: f64) -> f64 {
        let k = self.values.partition_point(|&v| v < q);
        self.count_above_rank(k) as f64 / self.nf()
    }

    fn count_above_rank(&self, k: usize) -> usize {
        if k == 0 {
            self.n
        } else {
            self.suffix[k - 1]
        }
    }

    /// `F_{R_n}^{-1}(α) = (1/N) #{p > 1 − α}`.
    pub fn quantile_rn(&self, alpha: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("quantile level {alpha} outside [0, 1]")));
        }
        Ok(self.survival(1.0 - alpha))
    }

    /// `(A(q), B(q)) = ((1/N) Σ p 1{p ≤ q}, (1/N) Σ (1 − p) 1{p > q})`.
    pub fn split_masses(&self, q: f64) -> (f64, f64) {
        let k = self.rank(q);
        (self.prefix_lp[k] / self.nf(), self.suffix_lq[k] / self.nf())
    }

    /// Classification error `η(p) = (1 − p) A(p) + p B(p)`; ties count in `A`.
    pub fn eta(&self, p: f64) -> f64 {
        let (a, b) = self.split_masses(p);
        (1.0 - p) * a + p * b
    }

    /// Vorob'ev threshold: the smallest `q ∈ {0} ∪ {v_i}` with `Ĝ(q) ≤ μ̂`.
    pub fn q_star(&self) -> f64 {
        // compare counts against N μ̂ = Σ l v to avoid dividing
        let total = self.prefix_lp[self.n_groups()];
        let zero_count = if self.values[0] == 0.0 { self.counts[0] } else { 0 };
        if ((self.n - zero_count) as f64) <= total {
            return 0.0;
        }
        let i = self
            .suffix
            .iter()
            .position(|&s| s as f64 <= total)
            .expect("last suffix count is zero");
        self.values[i]
    }

    /// Vorob'ev deviation `A(q) + B(q)`.
    pub fn vorobev_deviation(&self, q: f64) -> f64 {
        let (a, b) = self.split_masses(q);
        a + b
    }

    /// `(1/N) Σ f(p_i)` over the cloud.
    pub fn average<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.values
            .iter()
            .zip(&self.counts)
            .map(|(&v, &l)| l as f64 * f(v))
            .sum::<f64>()
            / self.nf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn g(p: &[f64]) -> ProbGroups {
        ProbGroups::from_probs(p).unwrap()
    }

    #[test]
    fn three_point_cloud() {
        let c = g(&[0.9, 0.2, 0.5]);
        assert_eq!(c.values(), &[0.2, 0.5, 0.9]);
        assert_eq!(c.counts(), &[1, 1, 1]);
        assert_eq!(c.suffix_counts(), &[2, 1, 0]);
        assert_relative_eq!(c.mean(), 8.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(c.var_rn(), 7.0 / 75.0, epsilon = 1e-15);
        assert_relative_eq!(c.moment_rn(1).unwrap(), 8.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(c.moment_rn(2).unwrap(), 17.0 / 45.0, epsilon = 1e-15);
        assert_relative_eq!(c.quantile_rn(0.5).unwrap(), 1.0 / 3.0);
        assert_eq!(c.quantile_rn(1.0).unwrap(), 1.0);
        assert_eq!(c.q_star(), 0.5);
        assert_relative_eq!(c.vorobev_deviation(0.5), 0.8 / 3.0, epsilon = 1e-15);
        let avg = (c.eta(0.2) + c.eta(0.5) + c.eta(0.9)) / 3.0;
        assert_relative_eq!(avg, 7.0 / 75.0, epsilon = 1e-15);
    }

    #[test]
    fn repeated_values_are_grouped() {
        let c = g(&[0.3, 0.7, 0.3]);
        assert_eq!(c.values(), &[0.3, 0.7]);
        assert_eq!(c.counts(), &[2, 1]);
        assert_eq!(c.suffix_counts(), &[1, 0]);
        let single = g(&[0.42]);
        assert_eq!((single.counts(), single.suffix_counts()), (&[1][..], &[0][..]));
    }

    #[test]
    fn constant_cloud() {
        for c0 in [0.0, 0.05, 0.5, 1.0] {
            let c = g(&[c0; 7]);
            assert_relative_eq!(c.mean(), c0, epsilon = 1e-15);
            assert_relative_eq!(c.var_rn(), c0 * (1.0 - c0), epsilon = 1e-15);
            assert_relative_eq!(c.moment_rn(3).unwrap(), c0, epsilon = 1e-15);
            for a in [0.1, 0.5, 0.96] {
                let expected = if c0 > 1.0 - a { 1.0 } else { 0.0 };
                assert_eq!(c.quantile_rn(a).unwrap(), expected);
            }
            assert_relative_eq!(c.vorobev_deviation(1.0), c0, epsilon = 1e-15);
        }
        assert_eq!(g(&[0.3; 4]).q_star(), 0.3);
    }

    #[test]
    fn half_zero_half_one() {
        let c = g(&[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(c.mean(), 0.5);
        // R_n is the constant 1/2 here
        assert_eq!(c.var_rn(), 0.0);
        assert_eq!(c.q_star(), 0.0);
        assert_eq!(c.vorobev_deviation(0.5), 0.0);
    }

    #[test]
    fn eta_boundaries() {
        let c = g(&[0.1, 0.4, 0.8]);
        assert_eq!(c.eta(0.0), 0.0);
        assert_eq!(c.eta(1.0), 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ProbGroups::from_probs(&[0.2, 1.2]).is_err());
        assert!(ProbGroups::from_probs(&[]).is_err());
        assert!(g(&[0.5]).moment_rn(0).is_err());
        assert!(g(&[0.5]).quantile_rn(1.5).is_err());
    }

    fn cloud_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(
            prop_oneof![
                3 => 0.0f64..=1.0,
                1 => Just(0.0),
                1 => Just(1.0),
                1 => (0u32..5).prop_map(|k| k as f64 / 4.0),
            ],
            1..60,
        )
    }

    proptest! {
        #[test]
        fn group_invariants(p in cloud_strategy()) {
            let c = g(&p);
            prop_assert_eq!(c.counts().iter().sum::<usize>(), p.len());
            prop_assert_eq!(*c.suffix_counts().last().unwrap(), 0);
            prop_assert!(c.values().windows(2).all(|w| w[0] < w[1]));
            let direct = p.iter().sum::<f64>() / p.len() as f64;
            prop_assert!((c.mean() - direct).abs() <= 1e-14);
        }

        #[test]
        fn moments_nonincreasing(p in cloud_strategy()) {
            let c = g(&p);
            let m: Vec<f64> = (1..=5).map(|k| c.moment_rn(k).unwrap()).collect();
            prop_assert!(m.windows(2).all(|w| w[1] <= w[0] + 1e-15));
            prop_assert!((m[1] - c.var_rn() - c.mean() * c.mean()).abs() < 1e-12);
            prop_assert!(c.var_rn() <= 0.25 + 1e-15);
        }

        #[test]
        fn quantile_is_step_nondecreasing(p in cloud_strategy()) {
            let c = g(&p);
            let mut prev = 0.0;
            for k in 0..=100 {
                let q = c.quantile_rn(k as f64 / 100.0).unwrap();
                prop_assert!(q >= prev);
                let scaled = q * p.len() as f64;
                prop_assert!((scaled - scaled.round()).abs() < 1e-9);
                prev = q;
            }
        }

        #[test]
        fn eta_peaks_at_q_star(p in cloud_strategy()) {
            let c = g(&p);
            let q = c.q_star();
            let top = c.eta(q);
            for &v in c.values().iter().chain(&[0.0, 1.0]) {
                prop_assert!(top >= c.eta(v) - 1e-12);
            }
            prop_assert!(c.survival(q) <= c.mean() + 1e-15);
        }
    }
}
