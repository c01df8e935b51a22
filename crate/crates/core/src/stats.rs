//! Population mean and standard deviation.
//!
//! The variance always divides by `n`, never `n - 1`. Every bound in this
//! crate is stated for the population variance; feeding a sample variance
//! in silently widens the envelope.

use serde::Serialize;

use crate::bounds::StatProfile;
use crate::error::{Error, Result};

/// Mean and population standard deviation of a finite sequence.
///
/// Unlike [`StatProfile`] this carries no sign requirement on the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.std_dev * self.std_dev
    }

    /// Validates the moments as a bound profile (mean > 0).
    pub fn profile(&self) -> Result<StatProfile> {
        StatProfile::new(self.n, self.mean, self.std_dev)
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and population standard deviation of `values`.
pub fn stats_of(values: &[f64]) -> Result<Moments> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidLength { len: n });
    }
    let nf = n as f64;
    let mean = compensated_sum(values.iter().copied()) / nf;
    // Corrected two-pass: the residual term removes first-order error in `mean`.
    let resid = compensated_sum(values.iter().map(|&x| x - mean));
    let sq = compensated_sum(values.iter().map(|&x| (x - mean) * (x - mean)));
    let var = ((sq - resid * resid / nf) / nf).max(0.0);
    Ok(Moments {
        n,
        mean: mean + resid / nf,
        std_dev: var.sqrt(),
    })
}
