//! Standard normal helpers.

use statrs::distribution::{ContinuousCDF, Normal};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile. `p` must lie in `[0, 1]`.
pub fn norm_quantile(p: f64) -> f64 {
    let mut x = Normal::standard().inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    // polish against the accurate CDF
    for _ in 0..2 {
        let (f, d) = if p < 0.5 {
            (norm_cdf(x) - p, norm_pdf(x))
        } else {
            ((1.0 - p) - norm_cdf(-x), norm_pdf(x))
        };
        if d <= 0.0 {
            break;
        }
        let step = f / d;
        x -= step / (1.0 + 0.5 * x * step);
    }
    x
}
