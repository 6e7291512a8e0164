// SPDX-License-Identifier: Apache-2.0

//! Command-line surface of the `freeconv` binary.
//!
//! Every input file is a JSON spec (see [`spec`]). Measure results are
//! written as JSON specs, or as plot data when `--out` ends in `.csv`;
//! tables are CSV. Without `--out`, results go to standard output.
//!
//! Exit codes: 0 on success, 2 for command-line usage errors, 3 when a
//! command fails while running (unreadable or invalid input, numerical
//! failure, I/O error). No command draws random numbers, so `--seed` is
//! accepted for pipeline uniformity and outputs depend on argv alone.

pub mod plot;
pub mod spec;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use plot::{emit_plot_data, measure_from_plot_data, PlotData};
pub use spec::{parse_measure_spec, MeasureSpec, Parsed};

use crate::error::{Error, Result};
use crate::harness::{berry_esseen_sweep, degenerate_report, lyapunov_sweep, norming_condition, norming_constant};
use crate::infdiv::{check_l_class_of_pair, classical_exponent, measure_of_pair, phi_of_pair, selfdecomp_remainder};
use crate::measures::{Measure, DEFAULT_GRID};
use crate::subordination::{free_convolve_with, free_power_with, SolverConfig};
use crate::transforms::{cauchy, stieltjes_invert_fn, voiculescu_eval, UpperHalfPoint, C};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "freeconv", version, about = "Free additive convolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Inversion resolution (grid nodes).
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Inversion window LO:HI.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<(f64, f64)>,
    /// Subordination solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted for reproducible pipelines; no command is random.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Free convolution of two or more measures.
    Conv {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// n-fold free convolution power.
    Power {
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Recover a measure from its Cauchy transform on a window.
    Invert {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Voiculescu transform of a measure or pair at points --z RE:IM.
    Phi {
        input: PathBuf,
        #[arg(long = "z", required = true, value_parser = parse_point, allow_hyphen_values = true)]
        points: Vec<(f64, f64)>,
        #[command(flatten)]
        common: Common,
    },
    /// Free infinitely divisible law of a generating pair.
    Pair2measure {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Classical exponent of a pair on --t LO:HI:COUNT.
    Pair2cf {
        input: PathBuf,
        #[arg(long = "t", value_parser = parse_range, allow_hyphen_values = true)]
        range: (f64, f64, usize),
        #[command(flatten)]
        common: Common,
    },
    /// Rate sweep of rescaled free powers against the semicircle law.
    SweepBe {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Rate sweep of rows built cyclically from the inputs.
    SweepLyapunov {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Law-of-large-numbers quantities for rows scaled by 1/n.
    Lln {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Norming constant b' of a row for a target mass.
    Norming {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        target: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Self-decomposability remainder of a pair.
    Selfdecomp {
        input: PathBuf,
        #[arg(long)]
        gamma: f64,
        #[arg(long = "z", required = true, value_parser = parse_point, allow_hyphen_values = true)]
        points: Vec<(f64, f64)>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_numbers(s: &str, count: usize) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != count {
        return Err(format!("expected {count} ':'-separated numbers, got {s:?}"));
    }
    parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = parse_numbers(s, 2)?;
    if !(v[0] < v[1]) || !v[0].is_finite() || !v[1].is_finite() {
        return Err(format!("window needs finite LO < HI, got {s:?}"));
    }
    Ok((v[0], v[1]))
}

fn parse_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = parse_numbers(s, 2)?;
    if !(v[1] > 0.0) || !v[0].is_finite() || !v[1].is_finite() {
        return Err(format!("point needs a finite real part and positive imaginary part, got {s:?}"));
    }
    Ok((v[0], v[1]))
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected LO:HI:COUNT, got {s:?}"));
    }
    let v = parse_numbers(&parts[..2].join(":"), 2)?;
    let count: usize = parts[2].trim().parse().map_err(|e| format!("{:?}: {e}", parts[2]))?;
    if count == 0 || !v[0].is_finite() || !v[1].is_finite() {
        return Err(format!("range needs finite ends and COUNT ≥ 1, got {s:?}"));
    }
    Ok((v[0], v[1], count))
}

/// Parses `argv` (without the program name), runs the command and writes
/// its outputs.
pub fn run_command<S: AsRef<str>>(argv: &[S]) -> CommandOutcome {
    let args = std::iter::once("freeconv").chain(argv.iter().map(AsRef::as_ref));
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return CommandOutcome {
                exit_code: code,
                artifacts: Vec::new(),
            };
        }
    };
    if let Err(msg) = check_arity(&cli.command) {
        eprintln!("error: {msg}");
        return CommandOutcome {
            exit_code: 2,
            artifacts: Vec::new(),
        };
    }
    match execute(cli.command) {
        Ok(artifacts) => CommandOutcome { exit_code: 0, artifacts },
        Err(e) => {
            eprintln!("error: {e}");
            CommandOutcome {
                exit_code: 3,
                artifacts: Vec::new(),
            }
        }
    }
}

fn check_arity(cmd: &Command) -> std::result::Result<(), String> {
    match cmd {
        Command::Conv { inputs, .. } if inputs.len() < 2 => {
            Err(format!("conv needs at least two inputs, got {}", inputs.len()))
        }
        Command::Power { n: 0, .. } => Err("--n must be at least 1".into()),
        Command::SweepBe { ns, .. } | Command::SweepLyapunov { ns, .. } | Command::Lln { ns, .. }
            if ns.contains(&0) =>
        {
            Err("--ns entries must be positive".into())
        }
        _ => Ok(()),
    }
}

fn read_spec(path: &Path) -> Result<Parsed> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_measure_spec(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn read_measures(paths: &[PathBuf]) -> Result<Vec<Measure>> {
    paths.iter().map(|p| read_spec(p)?.into_measure()).collect()
}

fn solver_config(common: &Common) -> Result<SolverConfig> {
    match common.tol {
        None => Ok(SolverConfig::default()),
        Some(tol) => {
            let d = SolverConfig::default();
            SolverConfig::new(tol, d.max_iter, d.damping)
        }
    }
}

fn write_output(out: &Option<PathBuf>, contents: &str) -> Result<Vec<PathBuf>> {
    match out {
        Some(path) => {
            plot::write_atomically(path, contents)?;
            Ok(vec![path.clone()])
        }
        None => {
            print!("{contents}");
            Ok(Vec::new())
        }
    }
}

fn write_measure(out: &Option<PathBuf>, m: &Measure) -> Result<Vec<PathBuf>> {
    let csv = out
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let contents = if csv {
        plot::render(&PlotData::Measure(m))
    } else {
        MeasureSpec::of_measure(m).to_json() + "\n"
    };
    write_output(out, &contents)
}

fn upper(p: (f64, f64)) -> Result<UpperHalfPoint> {
    UpperHalfPoint::new(p.0, p.1)
}

fn complex_table(header: &str, rows: &[((f64, f64), C)]) -> String {
    let mut s = format!("{header}\n");
    for ((re, im), v) in rows {
        writeln!(s, "{re},{im},{},{}", v.re, v.im).unwrap();
    }
    s
}

fn execute(cmd: Command) -> Result<Vec<PathBuf>> {
    match cmd {
        Command::Conv { inputs, common } => {
            let mus = read_measures(&inputs)?;
            let m = free_convolve_with(&mus, common.window, common.grid, &solver_config(&common)?)?;
            write_measure(&common.out, &m)
        }
        Command::Power { input, n, common } => {
            let mu = read_spec(&input)?.into_measure()?;
            let m = free_power_with(&mu, n, common.window, common.grid, &solver_config(&common)?)?;
            write_measure(&common.out, &m)
        }
        Command::Invert { input, common } => {
            let mu = read_spec(&input)?.into_measure()?;
            let window = match common.window {
                Some(w) => w,
                None => {
                    let (lo, hi) = mu.support_hull().unwrap_or((-1.0, 1.0));
                    let margin = 0.05 * (hi - lo).max(1.0);
                    (lo - margin, hi + margin)
                }
            };
            let m = stieltjes_invert_fn(|z| cauchy(&mu, z), window, common.grid)?;
            write_measure(&common.out, &m)
        }
        Command::Phi { input, points, common } => {
            let parsed = read_spec(&input)?;
            let mut rows = Vec::with_capacity(points.len());
            for p in points {
                let z = upper(p)?;
                let v = match &parsed {
                    Parsed::Measure(m) => voiculescu_eval(m, z)?.value,
                    Parsed::Pair(pair) => phi_of_pair(pair, z),
                };
                rows.push((p, v));
            }
            write_output(&common.out, &complex_table("z_re,z_im,phi_re,phi_im", &rows))
        }
        Command::Pair2measure { input, common } => {
            let pair = read_spec(&input)?.into_pair()?;
            let m = measure_of_pair(&pair, common.window, common.grid)?;
            write_measure(&common.out, &m)
        }
        Command::Pair2cf { input, range, common } => {
            let pair = read_spec(&input)?.into_pair()?;
            let (lo, hi, count) = range;
            let mut s = String::from("t,f,f_im\n");
            for j in 0..count {
                let t = if count == 1 {
                    lo
                } else {
                    lo + (hi - lo) * j as f64 / (count - 1) as f64
                };
                let f = classical_exponent(&pair, t);
                writeln!(s, "{t},{},{}", f.re, f.im).unwrap();
            }
            write_output(&common.out, &s)
        }
        Command::SweepBe { input, ns, common } => {
            let mu = read_spec(&input)?.into_measure()?;
            let report = berry_esseen_sweep(&mu, &ns, common.window, common.grid)?;
            eprintln!("slope {} constant {}", report.slope, report.constant);
            write_output(&common.out, &plot::render(&PlotData::Sweep(&report)))
        }
        Command::SweepLyapunov { inputs, ns, common } => {
            let mus = read_measures(&inputs)?;
            let family = |k: usize| mus[(k - 1) % mus.len()].clone();
            let report = lyapunov_sweep(&family, &ns, common.window, common.grid)?;
            eprintln!("slope {} constant {}", report.slope, report.constant);
            write_output(&common.out, &plot::render(&PlotData::Sweep(&report)))
        }
        Command::Lln { inputs, ns, common } => {
            let mus = read_measures(&inputs)?;
            let rows = ns
                .iter()
                .map(|&n| Ok((n, degenerate_report(&mus, n, common.window, common.grid)?)))
                .collect::<Result<Vec<_>>>()?;
            write_output(&common.out, &plot::render(&PlotData::Degenerate(&rows)))
        }
        Command::Norming { inputs, target, common } => {
            let mus = read_measures(&inputs)?;
            let b = norming_constant(&mus, target)?;
            let s = format!("b_prime,condition_max\n{b},{}\n", norming_condition(&mus, b));
            write_output(&common.out, &s)
        }
        Command::Selfdecomp { input, gamma, points, common } => {
            let pair = read_spec(&input)?.into_pair()?;
            let mut rows = Vec::with_capacity(points.len());
            for p in points {
                rows.push((p, selfdecomp_remainder(&pair, gamma, upper(p)?)?));
            }
            let verdict = check_l_class_of_pair(&pair)?;
            eprintln!("class L: {}", if verdict.accepted { "accepted" } else { "rejected" });
            write_output(&common.out, &complex_table("z_re,z_im,re,im", &rows))
        }
    }
}
