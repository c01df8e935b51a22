//! Critical points of the constrained product problem.
//!
//! On the set of sequences with fixed mean `mu` and variance `sigma^2`, every
//! critical point of `x_1 ... x_n` that does not have two zero coordinates
//! takes exactly two values. With the larger value `a` repeated `i` times and
//! the smaller `b` repeated `j = n - i` times:
//!
//! ```text
//! a = mu + sigma sqrt(j/i),    b = mu - sigma sqrt(i/j)
//! G_i = a^i b^j,               P_i(t) = G_i / mu^n
//! ```
//!
//! `P_i` depends only on `t = sigma/mu`, and for `0 < t < 1/sqrt(n-1)` the
//! ladder is strictly ordered `P_{n-1} < ... < P_2 < P_1`. Type 1 is the
//! maximizer and type `n-1` the minimizer from [`crate::bounds`].

use serde::Serialize;

use crate::bounds::{ln_shifted, StatProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    /// Number of coordinates at the high value.
    pub type_index: usize,
    /// Number of coordinates at the low value, `n - type_index`.
    pub complement: usize,
    pub high_value: f64,
    pub low_value: f64,
    /// Coordinate permutations of this point, `C(n, i)`; `None` past `u128`.
    pub multiplicity: Option<u128>,
}

impl CriticalPoint {
    pub fn n(&self) -> usize {
        self.type_index + self.complement
    }

    pub fn is_positive(&self) -> bool {
        self.low_value > 0.0
    }

    pub fn expand(&self) -> Vec<f64> {
        let mut v = vec![self.high_value; self.type_index];
        v.extend(std::iter::repeat_n(self.low_value, self.complement));
        v
    }
}

/// A real number stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLog {
    /// -1, 0 or 1.
    pub sign: f64,
    /// `ln |value|`; `-inf` when `sign == 0`.
    pub log_abs: f64,
}

impl SignedLog {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i == 0 || i >= n {
        return Err(Error::InvalidTypeIndex { i, max: n - 1 });
    }
    Ok(())
}

/// `C(n, k)`, or `None` if it does not fit in `u128`.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for step in 0..k {
        // c * (n - step) is divisible by (step + 1) at every step.
        let num = (n - step) as u128;
        let den = (step + 1) as u128;
        let g = gcd(c, den);
        let (c_red, den_red) = (c / g, den / g);
        c = c_red.checked_mul(num / den_red)?;
    }
    Some(c)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn critical_point(i: usize, profile: &StatProfile) -> Result<CriticalPoint> {
    let n = profile.n();
    check_index(i, n)?;
    let j = n - i;
    let (mu, sigma) = (profile.mu(), profile.sigma());
    Ok(CriticalPoint {
        type_index: i,
        complement: j,
        high_value: mu + sigma * (j as f64 / i as f64).sqrt(),
        low_value: mu - sigma * (i as f64 / j as f64).sqrt(),
        multiplicity: binomial(n, i),
    })
}

/// `G(x_i)` as sign and log-magnitude. The low value may be non-positive
/// once `t >= sqrt(j/i)`; the sign is then `(-1)^j`.
pub fn critical_value_signed(i: usize, profile: &StatProfile) -> Result<SignedLog> {
    let cp = critical_point(i, profile)?;
    let (mu, sigma) = (profile.mu(), profile.sigma());
    let (fi, fj) = (i as f64, cp.complement as f64);
    let high = fi * ln_shifted(mu, sigma * (fj / fi).sqrt());
    let b = cp.low_value;
    if b > 0.0 {
        return Ok(SignedLog {
            sign: 1.0,
            log_abs: high + fj * ln_shifted(mu, -sigma * (fi / fj).sqrt()),
        });
    }
    if b == 0.0 {
        return Ok(SignedLog {
            sign: 0.0,
            log_abs: f64::NEG_INFINITY,
        });
    }
    let sign = if cp.complement % 2 == 0 { 1.0 } else { -1.0 };
    Ok(SignedLog {
        sign,
        log_abs: high + fj * (-b).ln(),
    })
}

pub fn critical_value(i: usize, profile: &StatProfile) -> Result<f64> {
    critical_value_signed(i, profile).map(|v| v.value())
}

/// `ln(1 + t sqrt(j/i))` and the signed `1 - t sqrt(i/j)` factor in log form.
fn normalized_factors(i: usize, n: usize, t: f64) -> (f64, SignedLog) {
    let j = n - i;
    let (fi, fj) = (i as f64, j as f64);
    let up = (t * (fj / fi).sqrt()).ln_1p();
    let down = t * (fi / fj).sqrt();
    let low = if down < 0.5 {
        SignedLog {
            sign: 1.0,
            log_abs: (-down).ln_1p(),
        }
    } else {
        // Written so the factor is exactly 0 at t = sqrt(j) / sqrt(i).
        let f = (fj.sqrt() - t * fi.sqrt()) / fj.sqrt();
        SignedLog {
            sign: if f > 0.0 {
                1.0
            } else if f < 0.0 {
                -1.0
            } else {
                0.0
            },
            log_abs: f.abs().ln(),
        }
    };
    (up, low)
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfDomain {
            t,
            limit: f64::INFINITY,
        });
    }
    Ok(())
}

/// `P_i(t) = (1 + t sqrt(j/i))^i (1 - t sqrt(i/j))^j`, `j = n - i`.
#[allow(non_snake_case)]
pub fn normalized_P(i: usize, n: usize, t: f64) -> Result<f64> {
    check_index(i, n)?;
    check_t(t)?;
    let (up, low) = normalized_factors(i, n, t);
    if low.sign == 0.0 {
        return Ok(0.0);
    }
    let j = n - i;
    let sign = if low.sign < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign * (i as f64 * up + j as f64 * low.log_abs).exp())
}

/// `ln P_i(t)` on `0 <= t < sqrt(j/i)`, where `P_i` is positive.
pub fn log_normalized_p(i: usize, n: usize, t: f64) -> Result<f64> {
    check_index(i, n)?;
    check_t(t)?;
    let limit = ((n - i) as f64 / i as f64).sqrt();
    if t >= limit {
        return Err(Error::OutOfDomain { t, limit });
    }
    let (up, low) = normalized_factors(i, n, t);
    if low.sign <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(i as f64 * up + (n - i) as f64 * low.log_abs)
}

/// `d/dt ln P_i(t) = -n t / ((1 + t sqrt(j/i)) (1 - t sqrt(i/j)))`.
#[allow(non_snake_case)]
pub fn logP_derivative(i: usize, n: usize, t: f64) -> Result<f64> {
    check_index(i, n)?;
    let j = n - i;
    let (fi, fj) = (i as f64, j as f64);
    let limit = (fj / fi).sqrt();
    if !(t >= 0.0) || t >= limit {
        return Err(Error::OutOfDomain { t, limit });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let up = 1.0 + t * (fj / fi).sqrt();
    let down = (fj.sqrt() - t * fi.sqrt()) / fj.sqrt();
    if down <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(-(n as f64) * t / (up * down))
}

/// `(n - 2i) / sqrt(i (n - i))`, strictly decreasing in real `i` on `(0, n)`.
/// Its monotonicity is what orders consecutive rungs of the ladder.
pub fn ordering_discriminant(i: f64, n: f64) -> f64 {
    (n - 2.0 * i) / (i * (n - i)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderEntry {
    pub type_index: usize,
    pub value: f64,
    pub log_abs: f64,
    pub sign: f64,
    /// `P_i = G_i / mu^n`.
    pub normalized: f64,
    /// False once the low value is `<= 0`; such points are not positive
    /// sequences and never bound a positive product.
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalLadder {
    pub profile: StatProfile,
    pub entries: Vec<LadderEntry>,
    /// Whether the strict ordering `G_1 > ... > G_{n-1}` is guaranteed (and
    /// was checked). Only holds for `t < 1/sqrt(n-1)`.
    pub ordered: bool,
}

impl CriticalLadder {
    /// Largest value among positive critical points.
    pub fn max_positive(&self) -> Option<&LadderEntry> {
        self.entries
            .iter()
            .filter(|e| e.positive)
            .max_by(|a, b| a.log_abs.total_cmp(&b.log_abs))
    }
}

pub fn build_ladder(profile: &StatProfile) -> Result<CriticalLadder> {
    if profile.sigma() == 0.0 {
        return Err(Error::DegenerateLadder);
    }
    let n = profile.n();
    let t = profile.ratio();
    let mut entries = Vec::with_capacity(n - 1);
    for i in 1..n {
        let cp = critical_point(i, profile)?;
        let v = critical_value_signed(i, profile)?;
        entries.push(LadderEntry {
            type_index: i,
            value: v.value(),
            log_abs: v.log_abs,
            sign: v.sign,
            normalized: normalized_P(i, n, t)?,
            positive: cp.is_positive(),
        });
    }
    let ordered = profile.mu() - profile.sigma() * ((n - 1) as f64).sqrt() > 0.0;
    if ordered {
        for w in entries.windows(2) {
            if !(w[1].log_abs < w[0].log_abs) {
                return Err(Error::LadderOrder { i: w[1].type_index });
            }
        }
    }
    Ok(CriticalLadder {
        profile: *profile,
        entries,
        ordered,
    })
}

/// `count` points strictly inside `(lo, hi)`, placed geometrically toward
/// both endpoints (closest approach `0.5e-6 * (hi - lo)`).
pub fn endpoint_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let width = hi - lo;
    let left = count.div_ceil(2);
    let right = count - left;
    let side = |k: usize, m: usize| 0.5 * 10f64.powf(-6.0 * (1.0 - k as f64 / m as f64));
    let mut out = Vec::with_capacity(count);
    for k in 0..left {
        out.push(lo + width * side(k, left));
    }
    for k in (0..right).rev() {
        out.push(hi - width * side(k, right.max(1)));
    }
    out
}
