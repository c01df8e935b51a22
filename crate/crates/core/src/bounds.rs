//! Sharp product bounds from the mean and variance alone.
//!
//! For `n >= 2` terms with mean `mu > 0` and population standard deviation
//! `sigma`, write `s = sqrt(n - 1)`. Then every real sequence with
//! `sigma / mu < 1 / s` is positive, and every positive sequence satisfies
//!
//! ```text
//! (mu - sigma*s) (mu + sigma/s)^(n-1)  <=  x_1 x_2 ... x_n  <=  (mu + sigma*s) (mu - sigma/s)^(n-1)
//! ```
//!
//! with the left side replaced by 0 once it turns non-positive. Both sides are
//! attained by two-valued sequences (see [`extremal_sequence`]).
//!
//! All bounds are evaluated as sums of logarithms; linear values are derived
//! from the logs, so they saturate to `0` / `inf` instead of producing NaN at
//! large `n`.

use serde::Serialize;

use crate::error::{Error, Result};

/// The `(n, mu, sigma)` triple every bound is parameterized by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatProfile {
    n: usize,
    mu: f64,
    sigma: f64,
}

impl StatProfile {
    pub fn new(n: usize, mu: f64, sigma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidProfile(format!("n = {n}, need n >= 2")));
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidProfile(format!("mu = {mu}, need finite mu > 0")));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidProfile(format!(
                "sigma = {sigma}, need finite sigma >= 0"
            )));
        }
        Ok(StatProfile { n, mu, sigma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Coefficient of variation `t = sigma / mu`.
    pub fn ratio(&self) -> f64 {
        self.sigma / self.mu
    }

    /// `sqrt(n - 1)`.
    pub(crate) fn root(&self) -> f64 {
        ((self.n - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegimeKind {
    /// `sigma = 0`: the only sequence is constant.
    Degenerate,
    /// `0 < t < 1/sqrt(n-1)`: every sequence with this profile is positive.
    ForcedPositive,
    /// `1/sqrt(n-1) <= t < sqrt(n-1)`: positive sequences exist, the lower
    /// bound is the unattained infimum 0.
    Conditional,
    /// `t >= sqrt(n-1)`: no positive sequence has this profile.
    InfeasiblePositive,
}

impl RegimeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeKind::Degenerate => "Degenerate",
            RegimeKind::ForcedPositive => "ForcedPositive",
            RegimeKind::Conditional => "Conditional",
            RegimeKind::InfeasiblePositive => "InfeasiblePositive",
        }
    }
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub ratio: f64,
}

/// Classifies `profile` by its coefficient of variation.
///
/// The thresholds are decided on the sign of the bound factors
/// `mu - sigma*sqrt(n-1)` and `mu - sigma/sqrt(n-1)` so that the regime
/// always agrees with the sign of the evaluated bounds. At
/// `t = 1/sqrt(n-1)` the lower factor vanishes and the profile is
/// `Conditional`.
pub fn classify(profile: &StatProfile) -> Regime {
    let ratio = profile.ratio();
    let kind = if profile.sigma == 0.0 {
        RegimeKind::Degenerate
    } else {
        let s = profile.root();
        if profile.mu - profile.sigma / s <= 0.0 {
            RegimeKind::InfeasiblePositive
        } else if profile.mu - profile.sigma * s > 0.0 {
            RegimeKind::ForcedPositive
        } else {
            RegimeKind::Conditional
        }
    };
    Regime { kind, ratio }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmBounds {
    pub lower_product: f64,
    pub upper_product: f64,
    /// `-inf` when the lower bound is clamped to 0.
    pub lower_log: f64,
    pub upper_log: f64,
    pub lower_attained: bool,
    pub regime: Regime,
}

impl GmBounds {
    /// True when `log_product` lies in `[lower_log - tol, upper_log + tol]`.
    pub fn contains_log(&self, log_product: f64, tol: f64) -> bool {
        log_product >= self.lower_log - tol && log_product <= self.upper_log + tol
    }
}

/// `ln(mu + d)` for `mu > 0`, `mu + d > 0`.
///
/// Small shifts go through `ln1p`; large negative shifts are subtracted
/// directly, which is exact when `d` is exact and `mu/2 <= -d <= 2 mu`.
pub(crate) fn ln_shifted(mu: f64, d: f64) -> f64 {
    if d.abs() < 0.5 * mu {
        mu.ln() + (d / mu).ln_1p()
    } else {
        (mu + d).ln()
    }
}

/// Log of the upper product bound, valid whenever `mu - sigma/s > 0`.
pub(crate) fn upper_log(profile: &StatProfile) -> f64 {
    let s = profile.root();
    let m = (profile.n - 1) as f64;
    ln_shifted(profile.mu, profile.sigma * s) + m * ln_shifted(profile.mu, -profile.sigma / s)
}

/// Log of the lower product bound, `-inf` once the outlier factor is <= 0.
pub(crate) fn lower_log(profile: &StatProfile) -> f64 {
    let s = profile.root();
    let m = (profile.n - 1) as f64;
    if profile.mu - profile.sigma * s <= 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_shifted(profile.mu, -profile.sigma * s) + m * ln_shifted(profile.mu, profile.sigma / s)
}

/// The sharp lower and upper bounds on `x_1 ... x_n`.
pub fn product_bounds(profile: &StatProfile) -> Result<GmBounds> {
    let regime = classify(profile);
    if regime.kind == RegimeKind::InfeasiblePositive {
        return Err(no_positive(profile));
    }
    let upper_log = upper_log(profile);
    let (lower_log, lower_attained) = match regime.kind {
        RegimeKind::Degenerate | RegimeKind::ForcedPositive => (lower_log(profile), true),
        _ => (f64::NEG_INFINITY, false),
    };
    Ok(GmBounds {
        lower_product: lower_log.exp(),
        upper_product: upper_log.exp(),
        lower_log,
        upper_log,
        lower_attained,
        regime,
    })
}

pub(crate) fn no_positive(profile: &StatProfile) -> Error {
    Error::NoPositiveSequence {
        n: profile.n,
        ratio: profile.ratio(),
        limit: profile.root(),
    }
}

/// Bounds on the geometric mean, `(lower, upper)`. The lower value is 0 when
/// the product bound is clamped.
pub fn geometric_mean_bounds(profile: &StatProfile) -> Result<(f64, f64)> {
    let b = product_bounds(profile)?;
    let n = profile.n as f64;
    Ok(((b.lower_log / n).exp(), (b.upper_log / n).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExtremalKind {
    UpperAttaining,
    LowerAttaining,
}

/// A sequence of `repeated_count` copies of `repeated_value` followed by a
/// single `outlier_value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalSequence {
    pub repeated_value: f64,
    pub repeated_count: usize,
    pub outlier_value: f64,
    pub kind: ExtremalKind,
}

impl ExtremalSequence {
    pub fn len(&self) -> usize {
        self.repeated_count + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn expand(&self) -> Vec<f64> {
        let mut v = vec![self.repeated_value; self.repeated_count];
        v.push(self.outlier_value);
        v
    }

    /// `ln` of the product, from the two distinct values.
    pub fn log_product(&self) -> f64 {
        self.repeated_count as f64 * self.repeated_value.ln() + self.outlier_value.ln()
    }
}

/// The two-valued sequence attaining the requested bound.
///
/// The maximizer has `n - 1` equal terms below the mean; the minimizer has
/// `n - 1` equal terms above it. The minimum only exists while the profile
/// forces positivity.
pub fn extremal_sequence(profile: &StatProfile, kind: ExtremalKind) -> Result<ExtremalSequence> {
    let regime = classify(profile);
    if regime.kind == RegimeKind::InfeasiblePositive {
        return Err(no_positive(profile));
    }
    let s = profile.root();
    let (mu, sigma) = (profile.mu, profile.sigma);
    let (repeated_value, outlier_value) = match kind {
        ExtremalKind::UpperAttaining => (mu - sigma / s, mu + sigma * s),
        ExtremalKind::LowerAttaining => {
            if regime.kind == RegimeKind::Conditional {
                return Err(Error::InfimumNotAttained {
                    ratio: regime.ratio,
                    threshold: 1.0 / s,
                });
            }
            (mu + sigma / s, mu - sigma * s)
        }
    };
    Ok(ExtremalSequence {
        repeated_value,
        repeated_count: profile.n - 1,
        outlier_value,
        kind,
    })
}

/// Upper bound `sqrt(n-1) * sigma` on `mu - (x_1 ... x_n)^(1/n)` for positive
/// sequences.
pub fn am_gm_gap_bound(profile: &StatProfile) -> f64 {
    profile.root() * profile.sigma
}
