//! gm-envelope: sharp mean-variance bounds on products, geometric means and
//! terminal wealth.
//!
//! Exit codes: 0 success, 2 bad arguments or input, 3 domain infeasibility,
//! 4 I/O failure. Errors are written to stderr as one JSON line.

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gm_envelope::bounds::*;
use gm_envelope::comparisons::{evaluate_bounds, product_bound_comparison};
use gm_envelope::error::Error;
use gm_envelope::finance::{
    doubling_grid, envelope_from_params, ingest_csv, robust_decay_sweep, wealth_envelope,
    RobustParams,
};
use gm_envelope::ladder::{build_ladder, critical_point, endpoint_grid, normalized_P};
use gm_envelope::oracle::{brute_force_extrema, two_value_scan};
use serde::Serialize;
use serde_json::json;

mod render;

use render::{csv_table, Format, OutputEnvelope};

const THREADS_ENV: &str = "GM_ENVELOPE_THREADS";

#[derive(Parser)]
#[command(name = "gm-envelope", version)]
#[command(about = "Sharp bounds on products and geometric means from mean and variance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy, Serialize)]
struct ProfileArgs {
    /// Number of terms (>= 2)
    #[arg(long)]
    n: usize,
    /// Arithmetic mean (> 0)
    #[arg(long, allow_negative_numbers = true)]
    mu: f64,
    /// Population standard deviation (divisor n, not n - 1)
    #[arg(long, allow_negative_numbers = true)]
    sigma: f64,
}

impl ProfileArgs {
    fn profile(&self) -> Result<StatProfile, Error> {
        StatProfile::new(self.n, self.mu, self.sigma)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Product and geometric-mean bounds with their extremal sequences
    Bounds {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// All n-1 critical values of the constrained product problem
    Ladder {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// CSV of the normalized critical polynomials P_i(t) over a t-grid
    Curves {
        #[arg(long)]
        n: usize,
        /// Number of t points
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Right end of the t range [default: 1/sqrt(n-1)]
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Sample the constraint sphere and check the bounds empirically
    Verify {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Classical AM-GM gap bounds for a positive sequence (one value per line)
    Compare {
        /// Input file; standard input when omitted
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Terminal-wealth envelopes for investment returns
    Finance {
        #[command(subcommand)]
        command: FinanceCommand,
    },
}

#[derive(Subcommand)]
enum FinanceCommand {
    /// Envelope and realized wealth for a CSV of returns
    Envelope {
        /// CSV file; standard input when omitted
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value = "period")]
        period_label: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Envelope from the number of periods, mean return and deviation
    Params {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        mu_n: f64,
        #[arg(long, allow_negative_numbers = true)]
        sigma_n: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// CSV sweep of the robust relative upper bound over n = 2^min..2^max
    Robust {
        /// Mean growth factor 1 + mu_0 (e.g. 1.0003)
        #[arg(long, conflicts_with = "mean_return", required_unless_present = "mean_return")]
        mean_growth: Option<f64>,
        /// Mean return mu_0 (e.g. 0.0003)
        #[arg(long, allow_negative_numbers = true)]
        mean_return: Option<f64>,
        #[arg(long)]
        sigma0: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 10)]
        min_exp: u32,
        #[arg(long, default_value_t = 20)]
        max_exp: u32,
    },
}

#[derive(Debug)]
enum Failure {
    Args(String),
    Domain(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            e => Failure::Domain(e),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Args(_) => 2,
            Failure::Io(_) => 4,
            Failure::Domain(e) => match e {
                Error::NoPositiveSequence { .. }
                | Error::InfimumNotAttained { .. }
                | Error::DegenerateLadder
                | Error::LadderOrder { .. }
                | Error::NonPositiveInput { .. }
                | Error::ImpossibleReturn { .. } => 3,
                Error::Io(_) => 4,
                _ => 2,
            },
        }
    }

    fn line(&self) -> String {
        let (kind, message) = match self {
            Failure::Args(m) => ("InvalidArguments", m.clone()),
            Failure::Io(m) => ("Io", m.clone()),
            Failure::Domain(e) => (e.kind(), e.to_string()),
        };
        json!({ "error": kind, "message": message }).to_string()
    }
}

fn read_input(file: &Option<PathBuf>) -> Result<String, Failure> {
    let mut text = String::new();
    match file {
        Some(path) => {
            text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?
        }
        None => {
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

/// One number per line; blank lines are ignored.
fn parse_sequence(text: &str) -> Result<Vec<f64>, Error> {
    let mut values = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        let v: f64 = s.replace('\u{2212}', "-").parse().map_err(|_| Error::ParseError {
            line: k as u64 + 1,
            message: format!("not a number: {s:?}"),
        })?;
        values.push(v);
    }
    Ok(values)
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::Args(format!("{THREADS_ENV}={v:?} is not a count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Args(e.to_string()))
}

#[derive(Serialize)]
struct BoundsResult {
    bounds: GmBounds,
    geometric_mean_lower: f64,
    geometric_mean_upper: f64,
    upper_extremal: ExtremalSequence,
    lower_extremal: Option<ExtremalSequence>,
    am_gm_gap_bound: f64,
}

fn cmd_bounds(args: &ProfileArgs) -> Result<OutputEnvelope, Failure> {
    let p = args.profile()?;
    let bounds = product_bounds(&p)?;
    let (gl, gu) = geometric_mean_bounds(&p)?;
    let lower_extremal = if bounds.lower_attained {
        Some(extremal_sequence(&p, ExtremalKind::LowerAttaining)?)
    } else {
        None
    };
    let result = BoundsResult {
        bounds,
        geometric_mean_lower: gl,
        geometric_mean_upper: gu,
        upper_extremal: extremal_sequence(&p, ExtremalKind::UpperAttaining)?,
        lower_extremal,
        am_gm_gap_bound: am_gm_gap_bound(&p),
    };
    Ok(OutputEnvelope::new("bounds", args, result))
}

#[derive(Serialize)]
struct LadderRow {
    type_index: usize,
    high_value: f64,
    low_value: f64,
    multiplicity: Option<String>,
    value: f64,
    log_abs: f64,
    normalized: f64,
    positive: bool,
}

fn cmd_ladder(args: &ProfileArgs) -> Result<OutputEnvelope, Failure> {
    let p = args.profile()?;
    let ladder = build_ladder(&p)?;
    let rows = ladder
        .entries
        .iter()
        .map(|e| {
            let cp = critical_point(e.type_index, &p)?;
            Ok(LadderRow {
                type_index: e.type_index,
                high_value: cp.high_value,
                low_value: cp.low_value,
                // u128 does not fit a JSON number losslessly
                multiplicity: cp.multiplicity.map(|m| m.to_string()),
                value: e.value,
                log_abs: e.log_abs,
                normalized: e.normalized,
                positive: e.positive,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(OutputEnvelope::new(
        "ladder",
        args,
        json!({ "ratio": p.ratio(), "ordered": ladder.ordered, "entries": rows }),
    ))
}

fn cmd_curves(n: usize, points: usize, t_max: Option<f64>) -> Result<String, Failure> {
    if n < 2 {
        return Err(Failure::Args(format!("n = {n}, need n >= 2")));
    }
    let hi = t_max.unwrap_or(1.0 / ((n - 1) as f64).sqrt());
    if !(hi > 0.0) || !hi.is_finite() {
        return Err(Failure::Args(format!("t-max = {hi} must be > 0")));
    }
    let mut header = vec!["t".to_string()];
    header.extend((1..n).map(|i| format!("P_{i}")));
    let rows = endpoint_grid(0.0, hi, points)
        .into_iter()
        .map(|t| {
            let mut row = vec![t];
            for i in 1..n {
                row.push(normalized_P(i, n, t)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(csv_table(&header, &rows))
}

fn cmd_verify(args: &ProfileArgs, count: usize, seed: u64) -> Result<OutputEnvelope, Failure> {
    let p = args.profile()?;
    if count == 0 {
        return Err(Failure::Args("count must be >= 1".into()));
    }
    let pool = thread_pool()?;
    let report = pool.install(|| brute_force_extrema(&p, count, seed));
    let scan = if p.sigma() > 0.0 {
        Some(two_value_scan(&p)?)
    } else {
        None
    };
    Ok(OutputEnvelope::new(
        "verify",
        json!({ "n": args.n, "mu": args.mu, "sigma": args.sigma, "count": count, "seed": seed }),
        json!({ "passed": report.passed(), "report": report, "two_value_scan": scan }),
    ))
}

fn cmd_compare(file: &Option<PathBuf>) -> Result<OutputEnvelope, Failure> {
    let values = parse_sequence(&read_input(file)?)?;
    let report = evaluate_bounds(&values)?;
    let products = product_bound_comparison(&values)?;
    Ok(OutputEnvelope::new(
        "compare",
        json!({ "count": values.len(), "source": file.as_ref().map(|f| f.display().to_string()) }),
        json!({ "gaps": report, "products": products }),
    ))
}

fn cmd_finance(cmd: &FinanceCommand, out: &mut String) -> Result<(), Failure> {
    match cmd {
        FinanceCommand::Envelope {
            file,
            period_label,
            format,
        } => {
            let text = read_input(file)?;
            let series = ingest_csv(text.as_bytes(), period_label)?;
            let env = wealth_envelope(&series)?;
            out.push_str(
                &OutputEnvelope::new(
                    "finance envelope",
                    json!({ "count": series.len(), "period_label": period_label }),
                    env,
                )
                .render(*format),
            );
        }
        FinanceCommand::Params {
            n,
            mu_n,
            sigma_n,
            format,
        } => {
            let env = envelope_from_params(*n, *mu_n, *sigma_n)?;
            out.push_str(
                &OutputEnvelope::new(
                    "finance params",
                    json!({ "n": n, "mu_n": mu_n, "sigma_n": sigma_n }),
                    env,
                )
                .render(*format),
            );
        }
        FinanceCommand::Robust {
            mean_growth,
            mean_return,
            sigma0,
            epsilon,
            min_exp,
            max_exp,
        } => {
            if min_exp > max_exp || *max_exp > 40 || *min_exp < 1 {
                return Err(Failure::Args(format!(
                    "need 1 <= min-exp <= max-exp <= 40, got {min_exp}..{max_exp}"
                )));
            }
            let params = match (mean_growth, mean_return) {
                (Some(g), _) => RobustParams::with_mean_growth(*g, *sigma0, *epsilon),
                (None, Some(m)) => RobustParams::with_mean_return(*m, *sigma0, *epsilon),
                (None, None) => return Err(Failure::Args("missing mean".into())),
            };
            let sweep = robust_decay_sweep(&params, &doubling_grid(*min_exp, *max_exp))?;
            let rows: Vec<Vec<f64>> = sweep
                .iter()
                .map(|d| vec![d.n as f64, d.log_value, d.value])
                .collect();
            let header = ["n", "log_value", "value"].map(String::from);
            out.push_str(&csv_table(&header, &rows));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, Failure> {
    let mut out = String::new();
    match &cli.command {
        Command::Bounds { profile, format } => out = cmd_bounds(profile)?.render(*format),
        Command::Ladder { profile, format } => out = cmd_ladder(profile)?.render(*format),
        Command::Curves { n, points, t_max } => out = cmd_curves(*n, *points, *t_max)?,
        Command::Verify {
            profile,
            count,
            seed,
            format,
        } => out = cmd_verify(profile, *count, *seed)?.render(*format),
        Command::Compare { file, format } => out = cmd_compare(file)?.render(*format),
        Command::Finance { command } => cmd_finance(command, &mut out)?,
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string().lines().next().unwrap_or("").to_string();
            let f = Failure::Args(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", f.line());
            return ExitCode::from(f.exit_code());
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                let f = Failure::Io("cannot write to stdout".into());
                eprintln!("{}", f.line());
                return ExitCode::from(f.exit_code());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.exit_code())
        }
    }
}
