use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{
    credible_cx, credible_markov, BetaChoice, CredibleInterval, ProbGroups, QuantileBounds,
    DEFAULT_ALPHAS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    /// Levels at which quantile bounds are tabulated.
    pub alphas: Vec<f64>,
    /// Risk of the credible intervals (0.05 for 95 %).
    pub ci_alpha: f64,
    pub beta: BetaChoice,
    /// Raw moments `E[R_n^m]` for `m = 1..=max_moment`.
    pub max_moment: u32,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            alphas: DEFAULT_ALPHAS.to_vec(),
            ci_alpha: 0.05,
            beta: BetaChoice::Fixed(0.5),
            max_moment: 4,
        }
    }
}

impl ReportConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::InvalidInput(format!("quantile level {a} outside (0, 1)")));
        }
        if !(self.ci_alpha > 0.0 && self.ci_alpha < 1.0) {
            return Err(Error::InvalidInput(format!(
                "credible risk {} outside (0, 1)",
                self.ci_alpha
            )));
        }
        if let BetaChoice::Fixed(b) = self.beta {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidInput(format!("beta {b} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Everything the cloud says about the failure probability.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureReport {
    pub n: usize,
    pub mu_n: f64,
    pub var_rn: f64,
    pub moments: Vec<f64>,
    pub quantile_bounds: Vec<QuantileBounds>,
    pub credible_cx: CredibleInterval,
    pub credible_markov: CredibleInterval,
    pub q_star: f64,
    pub vorobev_deviation: f64,
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

impl FailureReport {
    pub fn compute(groups: &ProbGroups, config: &ReportConfig) -> Result<Self> {
        config.validate()?;
        let alphas: &[f64] = if config.alphas.is_empty() {
            &DEFAULT_ALPHAS
        } else {
            &config.alphas
        };
        let mu_n = groups.mean();
        let credible_cx = credible_cx(groups, config.ci_alpha, config.beta)?;
        let credible_markov = credible_markov(mu_n, config.ci_alpha, credible_cx.beta)?;
        let q_star = groups.q_star();
        Ok(Self {
            n: groups.len(),
            mu_n,
            var_rn: groups.var_rn(),
            moments: (1..=config.max_moment)
                .map(|m| groups.moment_rn(m))
                .collect::<Result<_>>()?,
            quantile_bounds: alphas
                .iter()
                .map(|&a| QuantileBounds::compute(groups, a))
                .collect::<Result<_>>()?,
            credible_cx,
            credible_markov,
            q_star,
            vorobev_deviation: groups.vorobev_deviation(q_star),
        })
    }

    /// `key,value` rows.
    pub fn scalars_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        let mut row = |k: &str, v: String| {
            let _ = writeln!(s, "{k},{v}");
        };
        row("n", self.n.to_string());
        row("mu_n", f(self.mu_n));
        row("var_rn", f(self.var_rn));
        row("q_star", f(self.q_star));
        row("vorobev_deviation", f(self.vorobev_deviation));
        row("ci_alpha", f(self.credible_cx.alpha));
        row("cx_beta", f(self.credible_cx.beta));
        row("cx_lower", f(self.credible_cx.lower));
        row("cx_upper", f(self.credible_cx.upper));
        row("markov_lower", f(self.credible_markov.lower));
        row("markov_upper", f(self.credible_markov.upper));
        for (i, m) in self.moments.iter().enumerate() {
            row(&format!("moment_{}", i + 1), f(*m));
        }
        s
    }

    /// One row per quantile level.
    pub fn bounds_csv(&self) -> String {
        let mut s = String::from("alpha,delta_minus,gamma_minus,gamma_plus,delta_plus,quantile_rn\n");
        for q in &self.quantile_bounds {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                f(q.alpha),
                f(q.delta_minus),
                f(q.gamma_minus),
                f(q.gamma_plus),
                f(q.delta_plus),
                f(q.quantile_rn)
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let level = 100.0 * (1.0 - self.credible_cx.alpha);
        let _ = writeln!(s, "cloud size            {}", self.n);
        let _ = writeln!(s, "estimate mu_n         {:.6e}", self.mu_n);
        let _ = writeln!(s, "Var[R_n]              {:.6e}", self.var_rn);
        let _ = writeln!(
            s,
            "{level}% cx interval      [{:.6e}, {:.6e}]  (beta = {:.4})",
            self.credible_cx.lower, self.credible_cx.upper, self.credible_cx.beta
        );
        let _ = writeln!(
            s,
            "{level}% Markov interval  [{:.6e}, {:.6e}]",
            self.credible_markov.lower, self.credible_markov.upper
        );
        let _ = writeln!(s, "Vorob'ev threshold    {:.6e}", self.q_star);
        let _ = writeln!(s, "Vorob'ev deviation    {:.6e}", self.vorobev_deviation);
        for (i, m) in self.moments.iter().enumerate() {
            let _ = writeln!(s, "E[R_n^{}]              {:.6e}", i + 1, m);
        }
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:>8} {:>13} {:>13} {:>13} {:>13} {:>13}",
            "alpha", "delta-", "gamma-", "gamma+", "delta+", "q_Rn"
        );
        for q in &self.quantile_bounds {
            let _ = writeln!(
                s,
                "{:>8.4} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e}",
                q.alpha, q.delta_minus, q.gamma_minus, q.gamma_plus, q.delta_plus, q.quantile_rn
            );
        }
        s
    }
}
