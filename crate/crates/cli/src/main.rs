//! Command-line front end: distances, geodesics, tree embeddings, the
//! homogeneity isometry, hyperbolic distances, and the staged subcone
//! verification runs, over JSON/CSV files of exact rationals.
//!
//! Exit codes: 0 success, 1 a verification claim failed, 2 bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_traits::ToPrimitive;

use treecone::hyperbolic::{ConvergenceReport, EpsilonSchedule};
use treecone::selftest::{self, Inject};
use treecone::tree::{geodesic_point, DiscreteFunction, PlFunction};
use treecone::{
    brush, completion_csv, completion_stages, convergence_csv, discrete_from_json, float_cell,
    format_rational, homogenize, parse_polar, parse_rational, pl_from_json, pl_to_json,
    polar_distance_logdomain, rat, run_all_stages, stage_csv, tree_metric_from_csv,
    verify_embedding, CauchyChain, Rational, SlopeSchedule, StageError,
};

#[derive(Parser)]
#[command(
    name = "treecone",
    version,
    about = "Real trees from piecewise-linear functions, with hyperbolic subcone checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance and segregation moment of two functions
    Dist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Treat inputs as discrete functions
        #[arg(long)]
        discrete: bool,
    },
    /// Point at parameter x on the geodesic from a to b
    Geodesic {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Arc-length parameter, a rational in [0, d(a,b)]
        #[arg(long)]
        x: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed a tree metric (CSV matrix) as piecewise-linear functions
    Embed {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// "naturals" or comma-separated increasing positive rationals
        #[arg(long, default_value = "naturals")]
        slopes: String,
    },
    /// Apply the isometry that carries base to the zero function
    Homogenize {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hyperbolic distance between two polar points
    Hdist {
        /// "rho,phi" or "rho,logphi:<sign>,<ln |phi|>"
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Witness-scale convergence run for a pair of discrete functions
    VerifyAsymptotic {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// "pow2:HI..LO" for 2^-HI .. 2^-LO, or comma-separated floats
        #[arg(long, default_value = "pow2:4..20")]
        eps: String,
        /// Rows ignored by the monotonicity check
        #[arg(long, default_value_t = 4)]
        burn_in: usize,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Staged discretization of a set of functions with envelope checks
    VerifySubcone {
        #[arg(long, num_args = 2.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 8)]
        max_stage: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Cauchy chains without limit points: distances and completion rounds
    CauchyDemo {
        #[arg(long, default_value_t = 6)]
        rounds: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the built-in invariant suites with a fixed seed
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject: Option<String>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_pl(path: &Path) -> Result<PlFunction, String> {
    pl_from_json(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_discrete(path: &Path) -> Result<DiscreteFunction, String> {
    discrete_from_json(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn print_distance(d: &Rational, s: &Rational) {
    println!("d = {} ({})", format_rational(d), float_cell(d.to_f64().unwrap()));
    println!("s = {}", format_rational(s));
}

fn parse_eps(spec: &str) -> Result<EpsilonSchedule, String> {
    if let Some(range) = spec.strip_prefix("pow2:") {
        let (hi, lo) = range
            .split_once("..")
            .ok_or_else(|| format!("eps spec {spec:?}: want pow2:HI..LO"))?;
        let hi: u32 = hi.trim().parse().map_err(|_| format!("eps spec {spec:?}: bad exponent"))?;
        let lo: u32 = lo.trim().parse().map_err(|_| format!("eps spec {spec:?}: bad exponent"))?;
        if hi > lo {
            return Err(format!("eps spec {spec:?}: want HI <= LO"));
        }
        return Ok(EpsilonSchedule::dyadic(hi, lo));
    }
    let values = spec
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad eps value {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    EpsilonSchedule::new(values).map_err(|e| e.to_string())
}

fn parse_slopes(spec: &str, needed: usize) -> Result<SlopeSchedule, String> {
    if spec == "naturals" {
        return Ok(SlopeSchedule::naturals(needed));
    }
    let slopes = spec
        .split(',')
        .map(parse_rational)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("slope schedule: {e}"))?;
    SlopeSchedule::new(slopes).map_err(|e| e.to_string())
}

// Envelope and schedule failures are verification outcomes (exit 1);
// everything else is bad input.
fn stage_failure(e: StageError) -> Result<u8, String> {
    match e {
        StageError::EnvelopeViolated { .. } | StageError::ScheduleExhausted { .. } => {
            eprintln!("verification failed: {e}");
            Ok(1)
        }
        other => Err(other.to_string()),
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Dist { a, b, discrete } => {
            if discrete {
                let g1 = read_discrete(&a)?;
                let g2 = read_discrete(&b)?;
                print_distance(&g1.distance(&g2), &g1.segregation_moment(&g2));
            } else {
                let f1 = read_pl(&a)?;
                let f2 = read_pl(&b)?;
                print_distance(&f1.distance(&f2), &f1.segregation(&f2).moment);
            }
            Ok(0)
        }
        Command::Geodesic { a, b, x, out } => {
            let f1 = read_pl(&a)?;
            let f2 = read_pl(&b)?;
            let x = parse_rational(&x).map_err(|e| format!("--x: {e}"))?;
            let point = geodesic_point(&f1, &f2, &x).map_err(|e| e.to_string())?;
            let json = pl_to_json(&point);
            match out {
                Some(path) => write_text(&path, &json)?,
                None => println!("{json}"),
            }
            Ok(0)
        }
        Command::Embed { matrix, out, slopes } => {
            let metric = tree_metric_from_csv(&read_text(&matrix)?)
                .map_err(|e| format!("{}: {e}", matrix.display()))?;
            metric.certify().map_err(|e| format!("{}: {e}", matrix.display()))?;
            let schedule = parse_slopes(&slopes, metric.len().saturating_sub(1))?;
            let fns = brush(&metric, &schedule).map_err(|e| e.to_string())?;
            let max_error = verify_embedding(&metric, &fns).map_err(|e| e.to_string())?;
            fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            for (i, f) in fns.iter().enumerate() {
                write_text(&out.join(format!("function_{i:02}.json")), &pl_to_json(f))?;
            }
            let report =
                treecone::brush_report_json(&max_error, fns.len(), schedule.slopes());
            write_text(&out.join("report.json"), &report)?;
            println!(
                "wrote {} function files and report.json to {} (max_error = {})",
                fns.len(),
                out.display(),
                format_rational(&max_error)
            );
            Ok(0)
        }
        Command::Homogenize { base, input, out } => {
            let f0 = read_pl(&base)?;
            let f = read_pl(&input)?;
            let json = pl_to_json(&homogenize(&f0, &f));
            match out {
                Some(path) => write_text(&path, &json)?,
                None => println!("{json}"),
            }
            Ok(0)
        }
        Command::Hdist { p, q } => {
            let p = parse_polar(&p).map_err(|e| format!("--p: {e}"))?;
            let q = parse_polar(&q).map_err(|e| format!("--q: {e}"))?;
            println!("d = {}", float_cell(polar_distance_logdomain(&p, &q)));
            Ok(0)
        }
        Command::VerifyAsymptotic { a, b, eps, burn_in, csv } => {
            let g1 = read_discrete(&a)?;
            let g2 = read_discrete(&b)?;
            let schedule = parse_eps(&eps)?;
            let report = ConvergenceReport::from_pair(&g1, &g2, &schedule);
            write_text(&csv, &convergence_csv(&report))?;
            if report.non_increasing_after(burn_in) {
                println!(
                    "asymptotic convergence: ok (final error {})",
                    float_cell(report.final_error())
                );
                Ok(0)
            } else {
                println!("asymptotic convergence: FAIL (error grew after burn-in row {burn_in})");
                Ok(1)
            }
        }
        Command::VerifySubcone { inputs, max_stage, csv } => {
            let fns = inputs.iter().map(|p| read_pl(p)).collect::<Result<Vec<_>, _>>()?;
            match run_all_stages(&fns, max_stage, &EpsilonSchedule::dyadic(1, 60)) {
                Ok(records) => {
                    let text = stage_csv(&records);
                    match csv {
                        Some(path) => {
                            write_text(&path, &text)?;
                            println!(
                                "subcone envelope: ok through stage {max_stage} ({} functions)",
                                fns.len()
                            );
                        }
                        None => print!("{text}"),
                    }
                    Ok(0)
                }
                Err(e) => stage_failure(e),
            }
        }
        Command::CauchyDemo { rounds, csv } => {
            let chains = [
                CauchyChain::dyadic_zigzag(),
                CauchyChain::new(PlFunction::zero(), rat(2, 1)).map_err(|e| e.to_string())?,
            ];
            println!("zigzag chain: d(f_k, f_m) = 2^-k - 2^-m");
            for k in 0..3u32 {
                for m in (k + 1)..=3 {
                    println!(
                        "  d(f_{k}, f_{m}) = {}",
                        format_rational(&chains[0].distance(k, m))
                    );
                }
            }
            println!(
                "limit distance between the two chains = {}",
                format_rational(&chains[0].limit_distance(&chains[1]))
            );
            match completion_stages(&chains, rounds, &EpsilonSchedule::dyadic(1, 60)) {
                Ok(records) => {
                    for r in &records {
                        let worst = r.pairs.iter().map(|p| p.error).fold(0.0f64, f64::max);
                        println!(
                            "round {}: depth {}, eps = {}, max error = {}, bound = {}",
                            r.stage,
                            r.depth,
                            float_cell(r.epsilon),
                            float_cell(worst),
                            format_rational(&r.bound)
                        );
                    }
                    if let Some(path) = csv {
                        write_text(&path, &completion_csv(&records))?;
                    }
                    Ok(0)
                }
                Err(e) => stage_failure(e),
            }
        }
        Command::Selftest { seed, inject } => {
            let inject = match inject.as_deref() {
                None => Inject::None,
                Some("non-increasing-slopes") => Inject::NonIncreasingSlopes,
                Some(other) => return Err(format!("unknown injection {other:?}")),
            };
            let (report, ok) = selftest::run(seed, inject);
            print!("{report}");
            Ok(if ok { 0 } else { 1 })
        }
    }
}
