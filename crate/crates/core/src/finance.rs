//! Terminal-wealth envelopes for a sequence of periodic returns.
//!
//! A dollar invested over `n` periods with returns `r_1, ..., r_n` (each
//! `> -1`) grows to `X_n = (1 + r_1) ... (1 + r_n)`. The growth factors have
//! mean `1 + mu_n` and the same deviation `sigma_n` as the returns, so the
//! product bounds give the full range of `X_n` from `(n, mu_n, sigma_n)`.
//!
//! Everything is computed in log space; `n` in the hundreds of thousands
//! (daily data over decades) is routine.
//!
//! Mean conventions: [`RobustParams`] stores the mean *growth factor*
//! (`1 + mean return`). A historical daily figure quoted as "1.0003" is a
//! growth factor, i.e. a mean return of 0.0003. Use
//! [`RobustParams::with_mean_return`] when starting from a return.

use std::io::Read;

use serde::Serialize;

use crate::bounds::{
    classify, extremal_sequence, product_bounds, ExtremalKind, RegimeKind, StatProfile,
};
use crate::error::{Error, Result};
use crate::oracle::LOG_CONTAINMENT_TOL;
use crate::stats::{compensated_sum, stats_of};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    returns: Vec<f64>,
    pub period_label: String,
}

impl ReturnSeries {
    pub fn new(returns: Vec<f64>, period_label: impl Into<String>) -> Result<Self> {
        if returns.len() < 2 {
            return Err(Error::InvalidLength { len: returns.len() });
        }
        for (k, &r) in returns.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::ParseError {
                    line: k as u64 + 1,
                    message: format!("non-finite return {r}"),
                });
            }
            if r <= -1.0 {
                return Err(Error::ImpossibleReturn {
                    line: k as u64 + 1,
                    value: r,
                });
            }
        }
        Ok(ReturnSeries {
            returns,
            period_label: period_label.into(),
        })
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// `ln X_n`.
    pub fn log_wealth(&self) -> f64 {
        compensated_sum(self.returns.iter().map(|r| r.ln_1p()))
    }
}

fn parse_return(field: &str, line: u64) -> Result<f64> {
    // U+2212 shows up in copy-pasted tables.
    let cleaned = field.trim().replace('\u{2212}', "-");
    let value: f64 = cleaned.parse().map_err(|_| Error::ParseError {
        line,
        message: format!("not a number: {field:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::ParseError {
            line,
            message: format!("non-finite return {field:?}"),
        });
    }
    if value <= -1.0 {
        return Err(Error::ImpossibleReturn { line, value });
    }
    Ok(value)
}

/// Reads returns from CSV text.
///
/// Two layouts are accepted: one return per line with no header, or
/// `label,return` rows under a header line. Labels are opaque. Blank lines are
/// skipped; reported line numbers are 1-based physical lines.
pub fn ingest_csv<R: Read>(source: R, period_label: &str) -> Result<ReturnSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut returns = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
                other => Error::ParseError {
                    line,
                    message: format!("{other:?}"),
                },
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = match record.len() {
            1 => &record[0],
            2 => &record[1],
            k => {
                return Err(Error::ParseError {
                    line,
                    message: format!("expected 1 or 2 fields, got {k}"),
                })
            }
        };
        let is_header = first && record.len() == 2;
        first = false;
        match parse_return(field, line) {
            Ok(v) => returns.push(v),
            Err(Error::ParseError { .. }) if is_header => continue,
            Err(e) => return Err(e),
        }
    }
    ReturnSeries::new(returns, period_label)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WealthEnvelope {
    pub n: usize,
    /// Mean return `mu_n` (the growth factors have mean `1 + mu_n`).
    pub mu: f64,
    pub sigma: f64,
    pub lower_x: f64,
    pub upper_x: f64,
    pub lower_log: f64,
    pub upper_log: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual_log: Option<f64>,
    pub regime: RegimeKind,
}

impl WealthEnvelope {
    /// Realized wealth inside the envelope, with [`LOG_CONTAINMENT_TOL`] slack.
    pub fn contains_actual(&self) -> Option<bool> {
        self.actual_log.map(|a| {
            a >= self.lower_log - LOG_CONTAINMENT_TOL && a <= self.upper_log + LOG_CONTAINMENT_TOL
        })
    }
}

fn growth_profile(n: usize, mu_n: f64, sigma_n: f64) -> Result<StatProfile> {
    let growth = 1.0 + mu_n;
    if !(growth > 0.0) {
        return Err(Error::NoPositiveSequence {
            n,
            ratio: f64::INFINITY,
            limit: ((n.max(2) - 1) as f64).sqrt(),
        });
    }
    StatProfile::new(n, growth, sigma_n)
}

fn envelope(n: usize, mu_n: f64, sigma_n: f64, actual_log: Option<f64>) -> Result<WealthEnvelope> {
    let profile = growth_profile(n, mu_n, sigma_n)?;
    let b = product_bounds(&profile)?;
    Ok(WealthEnvelope {
        n,
        mu: mu_n,
        sigma: sigma_n,
        lower_x: b.lower_product,
        upper_x: b.upper_product,
        lower_log: b.lower_log,
        upper_log: b.upper_log,
        actual_x: actual_log.map(f64::exp),
        actual_log,
        regime: b.regime.kind,
    })
}

/// Envelope for a realized series, with the realized wealth attached.
pub fn wealth_envelope(series: &ReturnSeries) -> Result<WealthEnvelope> {
    let m = stats_of(series.returns())?;
    envelope(m.n, m.mean, m.std_dev, Some(series.log_wealth()))
}

/// Envelope from summary statistics of the returns.
pub fn envelope_from_params(n: usize, mu_n: f64, sigma_n: f64) -> Result<WealthEnvelope> {
    if n < 2 {
        return Err(Error::InvalidProfile(format!("n = {n}, need n >= 2")));
    }
    envelope(n, mu_n, sigma_n, None)
}

/// Returns realizing the best (`UpperAttaining`) or worst (`LowerAttaining`)
/// outcome: `n - 1` identical returns on one side of the mean and one
/// outlier.
pub fn extremal_returns(n: usize, mu_n: f64, sigma_n: f64, kind: ExtremalKind) -> Result<Vec<f64>> {
    let profile = growth_profile(n, mu_n, sigma_n)?;
    let seq = extremal_sequence(&profile, kind)?;
    let d = seq.repeated_value - profile.mu();
    let o = seq.outlier_value - profile.mu();
    let mut r = vec![mu_n + d; seq.repeated_count];
    r.push(mu_n + o);
    Ok(r)
}

/// Estimated return statistics with an uncertainty radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustParams {
    /// `1 + mu_0`, the mean growth factor.
    pub mean_growth: f64,
    pub sigma0: f64,
    pub epsilon: f64,
}

impl RobustParams {
    pub fn with_mean_growth(mean_growth: f64, sigma0: f64, epsilon: f64) -> Self {
        RobustParams {
            mean_growth,
            sigma0,
            epsilon,
        }
    }

    pub fn with_mean_return(mu0: f64, sigma0: f64, epsilon: f64) -> Self {
        Self::with_mean_growth(1.0 + mu0, sigma0, epsilon)
    }

    pub fn mean_return(&self) -> f64 {
        self.mean_growth - 1.0
    }
}

/// `ln` of the upper bound on `X_n / (1 + mu_n)^n` valid for every
/// `|mu_n - mu_0| < eps`, `|sigma_n - sigma_0| < eps`:
///
/// ```text
/// (1 + (s0+eps) sqrt(n-1) / (g-eps)) * (1 - (s0-eps) / ((g+eps) sqrt(n-1)))^(n-1)
/// ```
///
/// with `g = 1 + mu_0`.
pub fn robust_relative_upper_log(params: &RobustParams, n: usize) -> Result<f64> {
    let RobustParams {
        mean_growth: g,
        sigma0,
        epsilon: eps,
    } = *params;
    let bad = |m: String| Err(Error::InvalidRobustParams(m));
    if n < 2 {
        return bad(format!("n = {n}, need n >= 2"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return bad(format!("epsilon = {eps}, need epsilon > 0"));
    }
    if !g.is_finite() || !sigma0.is_finite() {
        return bad("non-finite parameter".into());
    }
    if !(g - eps > 0.0) {
        return bad(format!("1 + mu0 - epsilon = {} must be > 0", g - eps));
    }
    if !(sigma0 - eps >= 0.0) {
        return bad(format!("sigma0 - epsilon = {} must be >= 0", sigma0 - eps));
    }
    let s = ((n - 1) as f64).sqrt();
    let shrink = (sigma0 - eps) / ((g + eps) * s);
    if !(shrink < 1.0) {
        return bad(format!("second factor 1 - {shrink} is not positive"));
    }
    let grow = (sigma0 + eps) * s / (g - eps);
    Ok(grow.ln_1p() + (n - 1) as f64 * (-shrink).ln_1p())
}

pub fn robust_relative_upper(params: &RobustParams, n: usize) -> Result<f64> {
    robust_relative_upper_log(params, n).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayPoint {
    pub n: usize,
    pub log_value: f64,
    pub value: f64,
}

/// `n = 2^lo, 2^(lo+1), ..., 2^hi`.
pub fn doubling_grid(lo_exp: u32, hi_exp: u32) -> Vec<usize> {
    (lo_exp..=hi_exp).map(|e| 1usize << e).collect()
}

pub fn robust_decay_sweep(params: &RobustParams, ns: &[usize]) -> Result<Vec<DecayPoint>> {
    ns.iter()
        .map(|&n| {
            let log_value = robust_relative_upper_log(params, n)?;
            Ok(DecayPoint {
                n,
                log_value,
                value: log_value.exp(),
            })
        })
        .collect()
}

/// Whether the profile of the growth factors is one where the worst case is
/// attained (as opposed to an infimum of 0).
pub fn worst_case_attained(n: usize, mu_n: f64, sigma_n: f64) -> Result<bool> {
    let p = growth_profile(n, mu_n, sigma_n)?;
    Ok(matches!(
        classify(&p).kind,
        RegimeKind::Degenerate | RegimeKind::ForcedPositive
    ))
}
