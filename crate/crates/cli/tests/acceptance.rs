//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with its
//! runtime, written straight to stdout so it shows without `--nocapture`.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use gm_envelope::bounds::{
    classify, extremal_sequence, product_bounds, ExtremalKind, RegimeKind, StatProfile,
};
use gm_envelope::comparisons::evaluate_bounds;
use gm_envelope::finance::{doubling_grid, robust_decay_sweep, robust_relative_upper, RobustParams};
use gm_envelope::ladder::{
    critical_value, critical_value_signed, endpoint_grid, logP_derivative, log_normalized_p,
};
use gm_envelope::oracle::{brute_force_extrema, LOG_CONTAINMENT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID_N: [usize; 6] = [2, 3, 5, 10, 50, 500];
const GRID_MU: [f64; 3] = [0.5, 1.0, 7.0];
const GRID_FRAC: [f64; 3] = [0.1, 0.5, 0.9];

fn report(id: u32, name: &str, start: Instant, limit: Option<Duration>, outcome: Result<String, String>) {
    let elapsed = start.elapsed();
    let slow = limit.is_some_and(|l| elapsed >= l);
    let (status, detail) = match (&outcome, slow) {
        (Ok(d), false) => ("PASS", d.clone()),
        (Ok(d), true) => ("FAIL", format!("{d}; runtime over {:?}", limit.unwrap())),
        (Err(e), _) => ("FAIL", e.clone()),
    };
    let line = format!("criterion {id} {name}: {status} ({:.3} s) {detail}\n", elapsed.as_secs_f64());
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert_eq!(status, "PASS", "{}", line.trim_end());
}

/// The `(n, mu, sigma)` grid shared by several criteria.
fn attainment_grid() -> Vec<(usize, f64, f64)> {
    let mut g = Vec::new();
    for n in GRID_N {
        let s = ((n - 1) as f64).sqrt();
        for mu in GRID_MU {
            for frac in GRID_FRAC {
                g.push((n, mu, mu * frac / s));
            }
        }
    }
    g
}

fn profile(n: usize, mu: f64, sigma: f64) -> StatProfile {
    StatProfile::new(n, mu, sigma).unwrap()
}

/// Plain two-pass mean and population standard deviation.
fn plain_moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

#[test]
fn criterion_1_n2_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for _ in 0..1000 {
        let mu = 10f64.powf(rng.random_range(-3.0..3.0));
        let sigma = mu * rng.random_range(0.0..1.0);
        let b = product_bounds(&profile(2, mu, sigma)).unwrap();
        let want = (mu - sigma) * (mu + sigma);
        let e = rel(b.lower_product, want).max(rel(b.upper_product, want));
        worst = worst.max(e);
        if e > 1e-12 {
            failures.push((mu, sigma, b.lower_product, b.upper_product));
        }
    }
    let outcome = if failures.is_empty() {
        Ok(format!("1000 profiles, max rel err {worst:.2e}"))
    } else {
        Err(format!("{} profiles off, first {:?}", failures.len(), failures[0]))
    };
    report(1, "n=2 exactness", start, Some(Duration::from_secs(1)), outcome);
}

#[test]
fn criterion_2_extremal_attainment() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut moment_err, mut log_err) = (0.0f64, 0.0f64);
    for (n, mu, sigma) in attainment_grid() {
        let p = profile(n, mu, sigma);
        let b = product_bounds(&p).unwrap();
        for (kind, target) in [
            (ExtremalKind::UpperAttaining, b.upper_log),
            (ExtremalKind::LowerAttaining, b.lower_log),
        ] {
            let x = extremal_sequence(&p, kind).unwrap().expand();
            let (m, s) = plain_moments(&x);
            let me = rel(m, mu).max(rel(s, sigma));
            let lp: f64 = x.iter().map(|v| v.ln()).sum();
            let le = (lp - target).abs();
            moment_err = moment_err.max(me);
            log_err = log_err.max(le);
            if x.len() != n || me > 1e-12 || !(le <= 1e-10) {
                failures.push(format!("n={n} mu={mu} sigma={sigma} {kind:?}: moments {me:.1e} log {le:.1e}"));
            }
        }
    }
    let outcome = if failures.is_empty() {
        Ok(format!("54 profiles x 2, max moment rel err {moment_err:.2e}, max log err {log_err:.2e}"))
    } else {
        Err(failures.join("; "))
    };
    report(2, "extremal attainment", start, Some(Duration::from_secs(5)), outcome);
}

#[test]
fn criterion_3_containment() {
    let start = Instant::now();
    let mut points = attainment_grid();
    for n in GRID_N {
        let s = ((n - 1) as f64).sqrt();
        for mu in GRID_MU {
            for k in [1.2, 2.0] {
                // t = k / s must stay below s
                if k < (n - 1) as f64 {
                    points.push((n, mu, mu * k / s));
                }
            }
        }
    }
    let mut failures = Vec::new();
    let (mut forced, mut conditional) = (0, 0);
    for (idx, &(n, mu, sigma)) in points.iter().enumerate() {
        let p = profile(n, mu, sigma);
        let r = brute_force_extrema(&p, 100_000, 1000 + idx as u64);
        match classify(&p).kind {
            RegimeKind::ForcedPositive => {
                forced += 1;
                if r.all_positive_count != 100_000 || r.forced_positive_violations != 0 {
                    failures.push(format!("n={n} mu={mu} sigma={sigma}: non-positive samples"));
                }
            }
            RegimeKind::Conditional => conditional += 1,
            k => failures.push(format!("n={n} mu={mu} sigma={sigma}: unexpected regime {k:?}")),
        }
        if r.containment_violations != 0 {
            failures.push(format!(
                "n={n} mu={mu} sigma={sigma}: {} containment violations",
                r.containment_violations
            ));
        }
    }
    let outcome = if failures.is_empty() {
        Ok(format!(
            "{} points ({forced} forced, {conditional} conditional) x 1e5 samples, tol {LOG_CONTAINMENT_TOL:e}",
            points.len()
        ))
    } else {
        Err(failures.join("; "))
    };
    report(3, "containment", start, Some(Duration::from_secs(120)), outcome);
}

#[test]
fn criterion_4_ladder_ordering() {
    let start = Instant::now();
    let (mut checks, mut violations) = (0usize, Vec::new());
    for n in 3usize..=12 {
        let hi = 1.0 / ((n - 1) as f64).sqrt();
        let grid = endpoint_grid(0.0, hi, 64);
        for i in 1..=n - 2 {
            for &t in &grid {
                // log is strictly increasing, so this is P_{i+1} < P_i
                let a = log_normalized_p(i, n, t).unwrap();
                let b = log_normalized_p(i + 1, n, t).unwrap();
                checks += 1;
                if !(b < a) {
                    violations.push(format!("n={n} i={i} t={t:e}"));
                }
            }
        }
    }
    let outcome = if violations.is_empty() {
        Ok(format!("{checks} comparisons, 0 violations"))
    } else {
        Err(format!("{} violations: {}", violations.len(), violations.join("; ")))
    };
    report(4, "ladder ordering", start, Some(Duration::from_secs(1)), outcome);
}

/// `ln P_i(t)` from `ln1p`, independent of the library.
fn oracle_log_p(i: usize, n: usize, t: f64) -> f64 {
    let (fi, fj) = (i as f64, (n - i) as f64);
    fi * (t * (fj / fi).sqrt()).ln_1p() + fj * (-t * (fi / fj).sqrt()).ln_1p()
}

#[test]
fn criterion_5_derivative() {
    let start = Instant::now();
    let (mut checks, mut worst, mut failures) = (0usize, 0.0f64, Vec::new());
    for n in 2usize..=12 {
        for i in 1..n {
            let limit = ((n - i) as f64 / i as f64).sqrt();
            for t in endpoint_grid(0.0, limit, 64) {
                let h = 1e-3 * t.min(limit - t);
                let fd = (oracle_log_p(i, n, t + h) - oracle_log_p(i, n, t - h)) / (2.0 * h);
                let d = logP_derivative(i, n, t).unwrap();
                let e = rel(d, fd);
                worst = worst.max(e);
                checks += 1;
                if !(e < 1e-5) {
                    failures.push(format!("n={n} i={i} t={t:e}: {d} vs {fd}"));
                }
            }
        }
    }
    let outcome = if failures.is_empty() {
        Ok(format!("{checks} points, max rel err {worst:.2e}"))
    } else {
        Err(format!("{} failures: {}", failures.len(), failures.join("; ")))
    };
    report(5, "derivative check", start, Some(Duration::from_secs(1)), outcome);
}

fn random_positive_sequence(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(2..=20);
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    match rng.random_range(0..3) {
        0 => (0..n).map(|_| scale * rng.random_range(1e-3..1.0)).collect(),
        1 => (0..n).map(|_| scale * rng.random_range(-3.0f64..3.0).exp()).collect(),
        // tight cluster: tiny spread around the scale
        _ => (0..n).map(|_| scale * (1.0 + 1e-4 * rng.random_range(-1.0..1.0))).collect(),
    }
}

#[test]
fn criterion_6_gap_chain() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    for k in 0..100_000 {
        let x = random_positive_sequence(&mut rng);
        let r = evaluate_bounds(&x).unwrap();
        let n = x.len() as f64;
        let (mu, sigma) = plain_moments(&x);
        let gm = (x.iter().map(|v| v.ln()).sum::<f64>() / n).exp();
        let slack = 1e-12 * mu;
        let gap = r.gap_actual;
        let corollary = (n - 1.0).sqrt() * sigma;
        let aldaz = n * sigma;
        let max = x.iter().copied().fold(f64::MIN, f64::max);
        let min = x.iter().copied().fold(f64::MAX, f64::min);
        let ok = (mu - gm - gap).abs() <= 4.0 * slack
            && rel(r.gap_corollary, corollary) <= 1e-12
            && rel(r.gap_aldaz, aldaz) <= 1e-12
            && gap >= -slack
            && gap <= r.gap_corollary + slack
            && r.gap_corollary <= r.gap_aldaz + slack
            && sigma * sigma / (2.0 * max) <= gap + slack
            && gap <= sigma * sigma / (2.0 * min) + slack
            && r.cf_lower <= gap + slack
            && gap <= r.cf_upper + slack;
        if !ok {
            failures.push(format!("#{k} n={n} gap={gap:e} oracle={:e} sigma={sigma:e}", mu - gm));
        }
    }
    let outcome = if failures.is_empty() {
        Ok("1e5 sequences, 0 violations".to_string())
    } else {
        Err(format!("{} violations, first {}", failures.len(), failures[0]))
    };
    report(6, "gap-bound chain", start, Some(Duration::from_secs(30)), outcome);
}

#[test]
fn criterion_7_finance_decay() {
    let start = Instant::now();
    let params = RobustParams::with_mean_growth(1.0003, 0.0098, 1e-4);
    let at_million = robust_relative_upper(&params, 1_000_000).unwrap();
    let sweep = robust_decay_sweep(&params, &doubling_grid(10, 20)).unwrap();
    let tail: Vec<_> = sweep.iter().skip_while(|p| p.value >= 1.0).collect();
    let decreasing = tail.windows(2).all(|w| w[1].value < w[0].value);
    let outcome = if at_million < 1e-3 && !tail.is_empty() && decreasing {
        Ok(format!(
            "value(1e6) = {at_million:.3e}, {} of 11 grid points below 1, strictly decreasing",
            tail.len()
        ))
    } else {
        Err(format!("value(1e6) = {at_million:e}, below-1 tail {}, decreasing {decreasing}", tail.len()))
    };
    report(7, "finance decay", start, Some(Duration::from_secs(1)), outcome);
}

#[test]
fn criterion_8_identity_bridge() {
    let start = Instant::now();
    let (mut worst, mut failures) = (0.0f64, Vec::new());
    for (n, mu, sigma) in attainment_grid() {
        let p = profile(n, mu, sigma);
        let s = ((n - 1) as f64).sqrt();
        let m = (n - 1) as i32;
        let upper = (mu + sigma * s) * (mu - sigma / s).powi(m);
        let lower = (mu - sigma * s) * (mu + sigma / s).powi(m);
        for (i, want, want_log) in [
            (1, upper, (mu + sigma * s).ln() + m as f64 * (mu - sigma / s).ln()),
            (n - 1, lower, (mu - sigma * s).ln() + m as f64 * (mu + sigma / s).ln()),
        ] {
            let e = if want.is_finite() && want > f64::MIN_POSITIVE {
                rel(critical_value(i, &p).unwrap(), want)
            } else {
                // out of f64 range: compare log-magnitudes, an absolute log
                // error being the relative error of the value
                let got = critical_value_signed(i, &p).unwrap();
                (got.log_abs - want_log).abs()
            };
            worst = worst.max(e);
            if !(e <= 1e-12) {
                failures.push(format!("n={n} mu={mu} sigma={sigma} i={i}: rel err {e:e}"));
            }
        }
    }
    let outcome = if failures.is_empty() {
        Ok(format!("54 profiles, max rel err {worst:.2e}"))
    } else {
        Err(failures.join("; "))
    };
    report(8, "identity bridge", start, Some(Duration::from_secs(1)), outcome);
}

fn run_verify(threads: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gm-envelope"))
        .args(["verify", "--n", "7", "--mu", "1.5", "--sigma", "0.9", "--count", "50000", "--seed", "42"])
        .env("GM_ENVELOPE_THREADS", threads)
        .output()
        .expect("run gm-envelope")
}

#[test]
fn criterion_9_cli_determinism() {
    let start = Instant::now();
    let first = run_verify("0");
    let second = run_verify("0");
    let single = run_verify("1");
    let outcome = if !first.status.success() {
        Err(format!("verify failed: {}", String::from_utf8_lossy(&first.stderr)))
    } else if first.stdout != second.stdout {
        Err("two runs with the same seed differ".into())
    } else if first.stdout != single.stdout {
        Err("output depends on the thread count".into())
    } else {
        Ok(format!("{} identical bytes across 3 runs", first.stdout.len()))
    };
    report(9, "CLI determinism", start, None, outcome);
}
