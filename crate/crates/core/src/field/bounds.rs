//! Quantile bounds and credible intervals for the failure volume.

use crate::error::{Error, Result};
use crate::field::ProbGroups;
use crate::optim::golden_section;

pub const DEFAULT_ALPHAS: [f64; 5] = [0.5, 0.9, 0.95, 0.975, 0.99];

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Markov bounds `(δ⁻(α), δ⁺(α))` on the α-quantile, clamped to [0, 1].
pub fn markov_bounds(mu: f64, alpha: f64) -> Result<(f64, f64)> {
    check_open_unit("alpha", alpha)?;
    let lo = ((mu + alpha - 1.0) / alpha).clamp(0.0, 1.0);
    let hi = (mu / (1.0 - alpha)).clamp(0.0, 1.0);
    Ok((lo, hi))
}

/// Convex-order bounds `(γ⁻(α), γ⁺(α))`:
/// `γ⁻ = 1 − ∫ min(1, (1 − p)/α)` and `γ⁺ = ∫ min(1, p/(1 − α))`.
pub fn cx_bounds(groups: &ProbGroups, alpha: f64) -> Result<(f64, f64)> {
    check_open_unit("alpha", alpha)?;
    Ok((gamma_minus(groups, alpha), gamma_plus(groups, alpha)))
}

// Both bounds coincide with the Markov ones when no term saturates; the clamp
// keeps the two summation orders from crossing by an ulp.
fn gamma_minus(groups: &ProbGroups, alpha: f64) -> f64 {
    let markov = ((groups.mean() + alpha - 1.0) / alpha).clamp(0.0, 1.0);
    groups
        .average(|p| (1.0 - (1.0 - p) / alpha).max(0.0))
        .clamp(markov, 1.0)
}

fn gamma_plus(groups: &ProbGroups, alpha: f64) -> f64 {
    let c = 1.0 - alpha;
    let markov = (groups.mean() / c).clamp(0.0, 1.0);
    groups.average(|p| (p / c).min(1.0)).clamp(0.0, markov)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileBounds {
    pub alpha: f64,
    pub delta_minus: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub delta_plus: f64,
    /// Plug-in `F_{R_n}^{-1}(α)`, between the two convex-order bounds.
    pub quantile_rn: f64,
}

impl QuantileBounds {
    pub fn compute(groups: &ProbGroups, alpha: f64) -> Result<Self> {
        let (delta_minus, delta_plus) = markov_bounds(groups.mean(), alpha)?;
        let (gamma_minus, gamma_plus) = cx_bounds(groups, alpha)?;
        Ok(Self {
            alpha,
            delta_minus,
            gamma_minus,
            gamma_plus,
            delta_plus,
            quantile_rn: groups.quantile_rn(alpha)?,
        })
    }
}

/// How the split `β` of the risk `α` between both tails is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaChoice {
    Fixed(f64),
    /// Golden-section search for the narrowest interval, falling back to 1/2.
    Optimize,
}

impl Default for BetaChoice {
    fn default() -> Self {
        BetaChoice::Fixed(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredibleInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Cloud size behind the plug-in integrals (0 for the Markov interval).
    pub n: usize,
}

impl CredibleInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

const BETA_RANGE: (f64, f64) = (0.01, 0.99);
const BETA_TOL: f64 = 1e-4;

fn cx_interval_at(groups: &ProbGroups, alpha: f64, beta: f64) -> CredibleInterval {
    CredibleInterval {
        lower: gamma_minus(groups, alpha * beta),
        upper: gamma_plus(groups, 1.0 - alpha * (1.0 - beta)),
        alpha,
        beta,
        n: groups.len(),
    }
}

/// `[γ⁻(αβ), γ⁺(1 − α(1 − β))]`, a `1 − α` credible interval for the failure volume.
pub fn credible_cx(groups: &ProbGroups, alpha: f64, beta: BetaChoice) -> Result<CredibleInterval> {
    check_open_unit("alpha", alpha)?;
    match beta {
        BetaChoice::Fixed(b) => {
            check_open_unit("beta", b)?;
            Ok(cx_interval_at(groups, alpha, b))
        }
        BetaChoice::Optimize => {
            let half = cx_interval_at(groups, alpha, 0.5);
            let (b, w) = golden_section(
                |b| cx_interval_at(groups, alpha, b).width(),
                BETA_RANGE.0,
                BETA_RANGE.1,
                BETA_TOL,
            );
            if w < half.width() {
                Ok(cx_interval_at(groups, alpha, b))
            } else {
                Ok(half)
            }
        }
    }
}

/// Markov credible interval `[(μ + αβ − 1)/(αβ), μ/(α(1 − β))]` clamped to [0, 1].
pub fn credible_markov(mu: f64, alpha: f64, beta: f64) -> Result<CredibleInterval> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("beta", beta)?;
    let ab = alpha * beta;
    Ok(CredibleInterval {
        lower: ((mu + ab - 1.0) / ab).clamp(0.0, 1.0),
        upper: (mu / (alpha * (1.0 - beta))).clamp(0.0, 1.0),
        alpha,
        beta,
        n: 0,
    })
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
    fn markov_examples() {
        let (lo, hi) = markov_bounds(0.0465, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 0.93, epsilon = 1e-12);
        assert_eq!(markov_bounds(0.0, 0.3).unwrap(), (0.0, 0.0));
        assert_eq!(markov_bounds(1.0, 0.3).unwrap(), (1.0, 1.0));
        assert_eq!(markov_bounds(0.0465, 0.975).unwrap().1, 1.0);
        assert!(markov_bounds(0.1, 1.0).is_err());
    }

    #[test]
    fn cx_examples() {
        let (lo, hi) = cx_bounds(&g(&[0.05; 3]), 0.9).unwrap();
        assert_eq!(lo, 0.0);
        assert_relative_eq!(hi, 0.5, epsilon = 1e-15);
        let (lo, hi) = cx_bounds(&g(&[0.2, 0.5, 0.9]), 0.5).unwrap();
        assert_relative_eq!(lo, 4.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(hi, 0.8, epsilon = 1e-15);
        assert!(cx_bounds(&g(&[0.2]), 0.0).is_err());
    }

    #[test]
    fn credible_examples() {
        let c = g(&[0.2, 0.5, 0.9]);
        let ci = credible_cx(&c, 0.05, BetaChoice::Fixed(0.5)).unwrap();
        assert_eq!((ci.lower, ci.upper), (0.0, 1.0));
        assert_eq!(ci.n, 3);

        let classified = g(&[0.0, 1.0, 1.0, 0.0, 0.0]);
        let ci = credible_cx(&classified, 0.05, BetaChoice::Fixed(0.5)).unwrap();
        assert_eq!((ci.lower, ci.upper), (0.4, 0.4));

        let m = credible_markov(0.5, 0.1, 0.5).unwrap();
        assert_eq!((m.lower, m.upper), (0.0, 1.0));
        let m = credible_markov(0.99, 0.2, 0.5).unwrap();
        assert_relative_eq!(m.lower, 0.9, epsilon = 1e-12);
        let m = credible_markov(0.0, 0.2, 0.5).unwrap();
        assert_eq!((m.lower, m.upper), (0.0, 0.0));
    }

    #[test]
    fn interval_matches_bounds_definition() {
        let c = g(&[0.01, 0.02, 0.3, 0.45, 0.5, 0.97, 0.999]);
        let (a, b) = (0.05, 0.3);
        let ci = credible_cx(&c, a, BetaChoice::Fixed(b)).unwrap();
        assert!((ci.lower - cx_bounds(&c, a * b).unwrap().0).abs() < 1e-12);
        assert!((ci.upper - cx_bounds(&c, 1.0 - a * (1.0 - b)).unwrap().1).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bound_ordering(p in prop::collection::vec(0.0f64..=1.0, 1..50), k in 1usize..20) {
            let c = g(&p);
            let alpha = k as f64 / 20.0;
            let q = QuantileBounds::compute(&c, alpha).unwrap();
            prop_assert!(q.delta_minus <= q.gamma_minus + 1e-15);
            prop_assert!(q.gamma_minus <= q.gamma_plus + 1e-15);
            prop_assert!(q.gamma_plus <= q.delta_plus + 1e-15);
            prop_assert!(q.gamma_minus <= q.quantile_rn + 1e-15);
            prop_assert!(q.quantile_rn <= q.gamma_plus + 1e-15);
        }

        #[test]
        fn optimized_beta_never_wider(p in prop::collection::vec(0.0f64..=1.0, 1..50)) {
            let c = g(&p);
            let half = credible_cx(&c, 0.05, BetaChoice::Fixed(0.5)).unwrap();
            let opt = credible_cx(&c, 0.05, BetaChoice::Optimize).unwrap();
            prop_assert!(opt.width() <= half.width());
            prop_assert!(opt.lower <= c.mean() + 1e-15 && c.mean() <= opt.upper + 1e-15);
            let mk = credible_markov(c.mean(), 0.05, opt.beta).unwrap();
            prop_assert!(mk.lower <= opt.lower + 1e-12 && opt.upper <= mk.upper + 1e-12);
        }
    }
}
