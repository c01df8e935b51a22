//! Side-by-side evaluation against classical AM-GM gap bounds.
//!
//! For a positive sequence with arithmetic mean `R_A`, geometric mean `R_G`,
//! population deviation `sigma`, minimum `a` and maximum `b`:
//!
//! - `R_A - R_G <= sqrt(n-1) sigma` (from the sharp lower product bound),
//! - `R_A - R_G <= n sigma` (Aldaz, equal weights, s = 2),
//! - `sigma^2 / 2b <= R_A - R_G <= sigma^2 / 2a` (Cartwright and Field).
//!
//! Cartwright-Field also uses `a` and `b`, so which interval is tighter
//! varies from input to input; nothing here ranks them beyond reporting.

use serde::Serialize;

use crate::bounds::{am_gm_gap_bound, product_bounds, GmBounds, StatProfile};
use crate::error::{Error, Result};
use crate::oracle::LOG_CONTAINMENT_TOL;
use crate::stats::{compensated_sum, stats_of};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapBoundLabel {
    Corollary,
    Aldaz,
    CartwrightField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub sequence_profile: StatProfile,
    pub seq_min: f64,
    pub seq_max: f64,
    pub geometric_mean: f64,
    /// `R_A - R_G`.
    pub gap_actual: f64,
    /// `sqrt(n-1) sigma`.
    pub gap_corollary: f64,
    /// `n sigma`.
    pub gap_aldaz: f64,
    /// `sigma^2 / (2 max)`.
    pub cf_lower: f64,
    /// `sigma^2 / (2 min)`.
    pub cf_upper: f64,
    pub tightest_upper_on_gap: GapBoundLabel,
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::InvalidLength { len: values.len() });
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v > 0.0) || !v.is_finite())
    {
        return Err(Error::NonPositiveInput { index, value });
    }
    Ok(())
}

/// `ln(R_G / R_A)`, summed as `ln1p((x - mu)/mu)` so small spreads keep their
/// digits.
fn log_gm_over_mean(values: &[f64], mu: f64) -> f64 {
    compensated_sum(values.iter().map(|&x| ((x - mu) / mu).ln_1p())) / values.len() as f64
}

pub fn evaluate_bounds(values: &[f64]) -> Result<BoundReport> {
    check_positive(values)?;
    let profile = stats_of(values)?.profile()?;
    let (mu, sigma) = (profile.mu(), profile.sigma());
    let n = profile.n() as f64;
    let seq_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let seq_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let rel = log_gm_over_mean(values, mu);
    let (geometric_mean, gap_actual) = if sigma == 0.0 {
        (mu, 0.0)
    } else {
        (mu * rel.exp(), -mu * rel.exp_m1())
    };
    let var = sigma * sigma;
    let gap_corollary = am_gm_gap_bound(&profile);
    let gap_aldaz = n * sigma;
    let cf_lower = var / (2.0 * seq_max);
    let cf_upper = var / (2.0 * seq_min);

    let tightest_upper_on_gap = [
        (gap_corollary, GapBoundLabel::Corollary),
        (gap_aldaz, GapBoundLabel::Aldaz),
        (cf_upper, GapBoundLabel::CartwrightField),
    ]
    .into_iter()
    .min_by(|x, y| x.0.total_cmp(&y.0))
    .map(|(_, l)| l)
    .unwrap_or(GapBoundLabel::Corollary);

    Ok(BoundReport {
        sequence_profile: profile,
        seq_min,
        seq_max,
        geometric_mean,
        gap_actual,
        gap_corollary,
        gap_aldaz,
        cf_lower,
        cf_upper,
        tightest_upper_on_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductInterval {
    pub lower: f64,
    pub upper: f64,
    /// `-inf` when the lower end is 0.
    pub lower_log: f64,
    pub upper_log: f64,
}

impl ProductInterval {
    pub fn contains_log(&self, log_product: f64, tol: f64) -> bool {
        log_product >= self.lower_log - tol && log_product <= self.upper_log + tol
    }
}

impl From<GmBounds> for ProductInterval {
    fn from(b: GmBounds) -> Self {
        ProductInterval {
            lower: b.lower_product,
            upper: b.upper_product,
            lower_log: b.lower_log,
            upper_log: b.upper_log,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductComparison {
    pub actual_product: f64,
    pub actual_log: f64,
    /// From `(n, mu, sigma)` alone.
    pub mean_variance: ProductInterval,
    /// `(mu - sigma^2/2a)^n .. (mu - sigma^2/2b)^n`, lower end clamped at 0.
    pub cartwright_field: ProductInterval,
    pub in_mean_variance: bool,
    pub in_cartwright_field: bool,
}

/// `n ln(base)`, `-inf` for a non-positive base.
fn nth_power_log(base: f64, n: f64) -> f64 {
    if base > 0.0 {
        n * base.ln()
    } else {
        f64::NEG_INFINITY
    }
}

pub fn product_bound_comparison(values: &[f64]) -> Result<ProductComparison> {
    let report = evaluate_bounds(values)?;
    let profile = report.sequence_profile;
    let n = profile.n() as f64;
    let mu = profile.mu();
    let actual_log = n * (mu.ln() + log_gm_over_mean(values, mu));

    let mean_variance: ProductInterval = product_bounds(&profile)?.into();
    let lo = nth_power_log(mu - report.cf_upper, n);
    let hi = nth_power_log(mu - report.cf_lower, n);
    let cartwright_field = ProductInterval {
        lower: lo.exp(),
        upper: hi.exp(),
        lower_log: lo,
        upper_log: hi,
    };
    Ok(ProductComparison {
        actual_product: actual_log.exp(),
        actual_log,
        in_mean_variance: mean_variance.contains_log(actual_log, LOG_CONTAINMENT_TOL),
        in_cartwright_field: cartwright_field.contains_log(actual_log, LOG_CONTAINMENT_TOL),
        mean_variance,
        cartwright_field,
    })
}
