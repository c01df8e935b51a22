//! Brute-force corroboration of the product bounds.
//!
//! Sequences with mean `mu` and variance `sigma^2` form a sphere of radius
//! `sigma * sqrt(n)` around the centroid `(mu, ..., mu)` inside the hyperplane
//! `sum x = n mu`. The sampler draws isotropic directions in that hyperplane,
//! so every sample meets both constraints to rounding. Coverage matters here,
//! not uniformity over the positive part of the shell.
//!
//! Sampling is split into fixed-size chunks, each with its own ChaCha stream
//! derived from `(seed, chunk)`. Reports merge associatively, so the result is
//! independent of the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{classify, product_bounds, RegimeKind, StatProfile};
use crate::error::{Error, Result};
use crate::ladder::critical_point;
use crate::stats::compensated_sum;

/// Absolute slack, in log space, for containment checks.
pub const LOG_CONTAINMENT_TOL: f64 = 1e-9;

/// Samples per independently seeded chunk.
pub const CHUNK: usize = 1024;

/// The simplex `{x >= 0, sum x = n mu}` and its sphere of profile sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellGeometry {
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    /// `sigma * sqrt(n)`, distance from the centroid.
    pub shell_radius: f64,
    /// Distance from the centroid to the nearest boundary point of the simplex
    /// (a facet centroid), `r1^2 = mu^2 n / (n-1)`.
    pub r1: f64,
    /// Distance from the centroid to a vertex, `r2^2 = mu^2 n (n-1)`.
    pub r2: f64,
}

impl ShellGeometry {
    pub fn new(profile: &StatProfile) -> Self {
        let n = profile.n() as f64;
        let mu = profile.mu();
        ShellGeometry {
            n: profile.n(),
            mu,
            sigma: profile.sigma(),
            shell_radius: profile.sigma() * n.sqrt(),
            r1: mu * (n / (n - 1.0)).sqrt(),
            r2: mu * (n * (n - 1.0)).sqrt(),
        }
    }

    /// Nearest facet centroid `(0, n mu/(n-1), ..., n mu/(n-1))`.
    pub fn nearest_boundary_point(&self) -> Vec<f64> {
        let mut v = vec![self.n as f64 * self.mu / (self.n as f64 - 1.0); self.n];
        v[0] = 0.0;
        v
    }

    /// Vertex `(n mu, 0, ..., 0)`.
    pub fn vertex(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        v[0] = self.n as f64 * self.mu;
        v
    }

    /// Whole shell lies inside the open positive orthant.
    pub fn shell_inside_simplex(&self) -> bool {
        self.shell_radius < self.r1
    }

    /// Shell misses the closed simplex entirely.
    pub fn shell_outside_simplex(&self) -> bool {
        self.shell_radius >= self.r2
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Overwrites `out` with one point of the profile shell.
pub fn draw_on_shell<R: Rng + ?Sized>(profile: &StatProfile, rng: &mut R, out: &mut Vec<f64>) {
    let n = profile.n();
    out.clear();
    out.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let nf = n as f64;
    loop {
        // Two centering passes leave a residual mean at the rounding floor.
        for _ in 0..2 {
            let m = compensated_sum(out.iter().copied()) / nf;
            out.iter_mut().for_each(|z| *z -= m);
        }
        let norm = compensated_sum(out.iter().map(|z| z * z)).sqrt();
        if norm > 0.0 {
            let scale = profile.sigma() * nf.sqrt() / norm;
            out.iter_mut().for_each(|z| *z = profile.mu() + *z * scale);
            return;
        }
        out.clear();
        out.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    }
}

/// Deterministic stream of shell samples.
pub struct ShellSamples {
    profile: StatProfile,
    seed: u64,
    remaining: usize,
    index: usize,
    rng: ChaCha8Rng,
}

impl Iterator for ShellSamples {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.remaining == 0 {
            return None;
        }
        if self.index.is_multiple_of(CHUNK) {
            self.rng = chunk_rng(self.seed, (self.index / CHUNK) as u64);
        }
        let mut v = Vec::with_capacity(self.profile.n());
        draw_on_shell(&self.profile, &mut self.rng, &mut v);
        self.index += 1;
        self.remaining -= 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for ShellSamples {}

pub fn sample_on_shell(profile: &StatProfile, count: usize, seed: u64) -> ShellSamples {
    ShellSamples {
        profile: *profile,
        seed,
        remaining: count,
        index: 0,
        rng: chunk_rng(seed, 0),
    }
}

/// A point uniform on the slice `{x > 0, sum x = total}` of the positive
/// orthant (flat Dirichlet scaled by `total`).
pub fn draw_positive_simplex<R: Rng + ?Sized>(n: usize, total: f64, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| total * x / s).collect()
}

/// `ln(x_1 ... x_n)`, or `None` if some term is not strictly positive.
pub fn log_product(values: &[f64]) -> Option<f64> {
    if values.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    Some(compensated_sum(values.iter().map(|x| x.ln())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub requested: usize,
    pub all_positive_count: usize,
    /// `None` when no sample was positive.
    pub min_product_log: Option<f64>,
    pub max_product_log: Option<f64>,
    /// Positive samples whose log-product left
    /// `[lower_log - tol, upper_log + tol]`.
    pub containment_violations: usize,
    /// Non-positive samples drawn while the regime forces positivity.
    pub forced_positive_violations: usize,
    pub seed: u64,
    pub regime: RegimeKind,
    pub lower_log: Option<f64>,
    pub upper_log: Option<f64>,
}

impl SampleReport {
    pub fn passed(&self) -> bool {
        self.containment_violations == 0 && self.forced_positive_violations == 0
    }
}

#[derive(Debug, Clone, Copy)]
struct Tally {
    positive: usize,
    nonpositive: usize,
    min: f64,
    max: f64,
    violations: usize,
}

impl Tally {
    fn empty() -> Self {
        Tally {
            positive: 0,
            nonpositive: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            violations: 0,
        }
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            positive: self.positive + o.positive,
            nonpositive: self.nonpositive + o.nonpositive,
            min: self.min.min(o.min),
            max: self.max.max(o.max),
            violations: self.violations + o.violations,
        }
    }
}

/// Samples the shell and records the extreme log-products of the positive
/// samples, checking each against [`product_bounds`].
pub fn brute_force_extrema(profile: &StatProfile, count: usize, seed: u64) -> SampleReport {
    let regime = classify(profile).kind;
    let bounds = product_bounds(profile).ok();
    let chunks = count.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let todo = CHUNK.min(count - c * CHUNK);
            let mut buf = Vec::with_capacity(profile.n());
            let mut t = Tally::empty();
            for _ in 0..todo {
                draw_on_shell(profile, &mut rng, &mut buf);
                match log_product(&buf) {
                    Some(lp) => {
                        t.positive += 1;
                        t.min = t.min.min(lp);
                        t.max = t.max.max(lp);
                        let inside = bounds
                            .as_ref()
                            .is_some_and(|b| b.contains_log(lp, LOG_CONTAINMENT_TOL));
                        if !inside {
                            t.violations += 1;
                        }
                    }
                    None => t.nonpositive += 1,
                }
            }
            t
        })
        .reduce(Tally::empty, Tally::merge);

    let forced = matches!(regime, RegimeKind::ForcedPositive | RegimeKind::Degenerate);
    SampleReport {
        requested: count,
        all_positive_count: tally.positive,
        min_product_log: (tally.positive > 0).then_some(tally.min),
        max_product_log: (tally.positive > 0).then_some(tally.max),
        containment_violations: tally.violations,
        forced_positive_violations: if forced { tally.nonpositive } else { 0 },
        seed,
        regime,
        lower_log: bounds.map(|b| b.lower_log).filter(|l| l.is_finite()),
        upper_log: bounds.map(|b| b.upper_log),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoValueRow {
    pub type_index: usize,
    /// Product of the expanded sequence, multiplied term by term.
    pub product: f64,
    pub is_positive: bool,
}

/// Every two-valued critical sequence, multiplied out directly.
pub fn two_value_scan(profile: &StatProfile) -> Result<Vec<TwoValueRow>> {
    if profile.sigma() == 0.0 {
        return Err(Error::DegenerateLadder);
    }
    (1..profile.n())
        .map(|i| {
            let cp = critical_point(i, profile)?;
            Ok(TwoValueRow {
                type_index: i,
                product: cp.expand().iter().product(),
                is_positive: cp.is_positive(),
            })
        })
        .collect()
}

/// Type of the largest product among the positive rows of a scan.
pub fn best_positive_type(rows: &[TwoValueRow]) -> Option<usize> {
    rows.iter()
        .filter(|r| r.is_positive)
        .max_by(|a, b| a.product.total_cmp(&b.product))
        .map(|r| r.type_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::stats_of;

    fn p(n: usize, mu: f64, sigma: f64) -> StatProfile {
        StatProfile::new(n, mu, sigma).unwrap()
    }

    #[test]
    fn geometry_radii() {
        let g = ShellGeometry::new(&p(4, 2.0, 0.5));
        assert!((g.shell_radius * g.shell_radius - 4.0 * 0.25).abs() < 1e-14);
        assert!((g.r1 * g.r1 - 4.0 * 4.0 / 3.0).abs() < 1e-13);
        assert!((g.r2 * g.r2 - 4.0 * 4.0 * 3.0).abs() < 1e-12);
        assert!(g.r1 < g.r2);
        let g2 = ShellGeometry::new(&p(2, 1.5, 0.1));
        assert!((g2.r1 - g2.r2).abs() < 1e-15);
    }

    #[test]
    fn geometry_radii_match_boundary_points() {
        let g = ShellGeometry::new(&p(5, 1.3, 0.2));
        let dist = |v: &[f64]| v.iter().map(|x| (x - g.mu).powi(2)).sum::<f64>().sqrt();
        assert!((dist(&g.nearest_boundary_point()) - g.r1).abs() < 1e-13);
        assert!((dist(&g.vertex()) - g.r2).abs() < 1e-13);
    }

    #[test]
    fn radii_line_up_with_regimes() {
        for (n, sigma, kind) in [
            (5, 0.4, RegimeKind::ForcedPositive),
            (5, 1.0, RegimeKind::Conditional),
            (5, 2.5, RegimeKind::InfeasiblePositive),
        ] {
            let q = p(n, 1.0, sigma);
            let g = ShellGeometry::new(&q);
            assert_eq!(g.shell_inside_simplex(), kind == RegimeKind::ForcedPositive);
            assert_eq!(
                g.shell_outside_simplex(),
                kind == RegimeKind::InfeasiblePositive
            );
            assert_eq!(classify(&q).kind, kind);
        }
    }

    #[test]
    fn two_terms_are_the_pair() {
        for s in sample_on_shell(&p(2, 3.0, 0.7), 50, 9) {
            let (hi, lo) = if s[0] > s[1] { (s[0], s[1]) } else { (s[1], s[0]) };
            assert!((hi - 3.7).abs() < 1e-14 && (lo - 2.3).abs() < 1e-14);
        }
    }

    #[test]
    fn samples_hit_the_profile() {
        for s in sample_on_shell(&p(3, 1.0, 0.2), 2000, 1) {
            let m = stats_of(&s).unwrap();
            assert!((m.mean - 1.0).abs() <= 1e-13);
            assert!((m.std_dev - 0.2).abs() <= 1e-13 * 0.2);
        }
    }

    #[test]
    fn stream_is_seeded() {
        let a: Vec<_> = sample_on_shell(&p(4, 1.0, 0.3), 3000, 5).collect();
        let b: Vec<_> = sample_on_shell(&p(4, 1.0, 0.3), 3000, 5).collect();
        let c: Vec<_> = sample_on_shell(&p(4, 1.0, 0.3), 3000, 6).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn report_matches_stream() {
        let q = p(4, 1.0, 0.6);
        let report = brute_force_extrema(&q, 3000, 11);
        let logs: Vec<f64> = sample_on_shell(&q, 3000, 11)
            .filter_map(|s| log_product(&s))
            .collect();
        assert_eq!(report.all_positive_count, logs.len());
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(report.max_product_log, Some(max));
    }

    #[test]
    fn small_containment() {
        let r = brute_force_extrema(&p(4, 1.0, 0.4), 10_000, 3);
        assert_eq!(r.containment_violations, 0);
        assert!(r.passed());
    }

    #[test]
    fn infeasible_profile_has_no_positive_samples() {
        let r = brute_force_extrema(&p(3, 1.0, 1.5), 2000, 3);
        assert_eq!(r.all_positive_count, 0);
        assert_eq!(r.min_product_log, None);
        assert_eq!(r.upper_log, None);
    }

    #[test]
    fn scan_examples() {
        let rows = two_value_scan(&p(3, 1.0, 0.2)).unwrap();
        assert!(rows.iter().all(|r| r.is_positive));
        assert!(rows[0].product > rows[1].product);

        let rows = two_value_scan(&p(3, 1.0, 1.0)).unwrap();
        assert!(rows[0].is_positive);
        assert!(!rows[1].is_positive);
        assert_eq!(best_positive_type(&rows), Some(1));

        let rows = two_value_scan(&p(2, 1.0, 0.1)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].product - 0.99).abs() < 1e-15);

        assert_eq!(two_value_scan(&p(3, 1.0, 0.0)), Err(Error::DegenerateLadder));
    }

    #[test]
    fn positive_simplex_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = draw_positive_simplex(7, 7.0, &mut rng);
        assert!(x.iter().all(|&v| v > 0.0));
        assert!((x.iter().sum::<f64>() - 7.0).abs() < 1e-13);
    }
}
