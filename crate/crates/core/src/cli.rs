//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 unconverged, 2 model invalid, 3 usage or parse
//! error, 4 I/O error, 5 internal error.

use crate::dta::Dta;
use crate::error::Error;
use crate::io::{load_dta, load_model};
use crate::kernel::{analyze, to_report_json, AnalysisOptions};
use crate::product::Product;
use crate::region::{bscc_decompose, build_region_graph};
use crate::simulator::{
    default_burn_in, estimate_discrete, estimate_reach, estimate_timed, SimConfig,
};
use crate::smp::SemiMarkovProcess;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNCONVERGED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "dta-measure",
    version,
    about = "Frequency measures of semi-Markov processes observed by timed automata"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Semi-Markov process (JSON)
    #[arg(long)]
    pub model: PathBuf,
    /// Deterministic timed automaton (JSON)
    #[arg(long)]
    pub dta: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check both inputs for well-formedness, determinism and totality
    Validate {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Build the region graph and print its summary
    Regions {
        #[command(flatten)]
        inputs: Inputs,
        /// Write the graph in DOT format
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Approximate reach probabilities and frequencies numerically
    Analyze {
        #[command(flatten)]
        inputs: Inputs,
        /// Cell width, as `1/8` or `0.125`, or cells per unit, as `8`
        #[arg(long, default_value = "1/8", value_parser = parse_grid)]
        grid: u32,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the same quantities by Monte Carlo simulation
    Simulate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
        /// Defaults to ten times the number of regions
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_grid(text: &str) -> Result<u32, String> {
    let bad = || format!("`{text}` is not a cell width like 1/8 or a positive cell count");
    let t = text.trim();
    if let Some((a, b)) = t.split_once('/') {
        let (a, b): (u32, u32) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        if a == 0 || b == 0 || b % a != 0 {
            return Err(bad());
        }
        return Ok(b / a);
    }
    if let Ok(n) = t.parse::<u32>() {
        return if n > 0 { Ok(n) } else { Err(bad()) };
    }
    let h: f64 = t.parse().map_err(|_| bad())?;
    if !(h > 0.0 && h <= 1.0) {
        return Err(bad());
    }
    let n = (1.0 / h).round();
    if (n * h - 1.0).abs() > 1e-9 {
        return Err(bad());
    }
    Ok(n as u32)
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_USAGE,
        Error::InvalidArgument(_) | Error::TotalityViolation { .. } | Error::DegenerateModel(_) => {
            EXIT_INVALID
        }
        Error::ConvergenceFailure { .. } => EXIT_UNCONVERGED,
        Error::DegenerateInput(_) | Error::Internal(_) => EXIT_INTERNAL,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: code_of(&e),
            message: e.to_string(),
        }
    }
}

fn load(inputs: &Inputs) -> Result<(SemiMarkovProcess, Dta), Failure> {
    Ok((load_model(&inputs.model)?, load_dta(&inputs.dta)?))
}

fn violations(smp: &SemiMarkovProcess, dta: &Dta) -> Vec<String> {
    let mut out: Vec<String> = smp
        .validate()
        .iter()
        .map(|v| format!("model: {v}"))
        .collect();
    out.extend(dta.validate().iter().map(|v| format!("automaton: {v}")));
    for s in 0..smp.num_states() {
        if dta.letter_index(smp.label(s)).is_none() {
            out.push(format!(
                "model: label `{}` of state `{}` is not in the automaton alphabet",
                smp.label(s),
                smp.state_name(s)
            ));
        }
    }
    out
}

fn load_valid(inputs: &Inputs) -> Result<(SemiMarkovProcess, Dta), Failure> {
    let (smp, dta) = load(inputs)?;
    let v = violations(&smp, &dta);
    if v.is_empty() {
        Ok((smp, dta))
    } else {
        Err(Failure::new(EXIT_INVALID, v.join("\n")))
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write output: {e}"))),
    }
}

#[derive(Serialize)]
struct RegionSummary {
    vertices: usize,
    edges: usize,
    k: usize,
    periods: Vec<usize>,
    sizes: Vec<usize>,
}

#[derive(Serialize)]
struct Quantities {
    #[serde(rename = "D")]
    d: BTreeMap<String, f64>,
    #[serde(rename = "C")]
    c: BTreeMap<String, f64>,
    reach: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct SimulationReport {
    estimates: Quantities,
    stderr: Quantities,
    runs: usize,
    config: SimConfig,
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Validate { inputs } => {
            load_valid(&inputs)?;
            let _ = writeln!(out, "valid");
            Ok(EXIT_OK)
        }
        Command::Regions { inputs, dot } => {
            let (smp, dta) = load_valid(&inputs)?;
            let product = Product::new(&smp, &dta)?;
            let graph = build_region_graph(&product)?;
            let dec = bscc_decompose(&graph);
            if let Some(path) = dot {
                write_file(&path, &graph.to_dot(&dec, smp.state_names(), &dta))?;
            }
            let summary = RegionSummary {
                vertices: graph.len(),
                edges: graph.edge_count(),
                k: dec.k(),
                periods: dec.bsccs.iter().map(|b| b.period).collect(),
                sizes: dec.bsccs.iter().map(|b| b.vertices.len()).collect(),
            };
            emit(out, None, &to_report_json(&summary))?;
            Ok(EXIT_OK)
        }
        Command::Analyze {
            inputs,
            grid,
            eps,
            tol,
            max_iters,
            out: path,
        } => {
            if !(eps > 0.0) || !(tol > 0.0) || max_iters == 0 {
                return Err(Failure::new(
                    EXIT_USAGE,
                    "--eps and --tol must be positive and --max-iters at least 1",
                ));
            }
            let (smp, dta) = load_valid(&inputs)?;
            let opts = AnalysisOptions {
                cells_per_unit: grid,
                eps,
                tol,
                max_iters,
            };
            let report = analyze(&smp, &dta, &opts).map_err(|e| match e {
                Error::Parse { .. } => Failure::new(EXIT_INTERNAL, e.to_string()),
                other => Failure::from(other),
            })?;
            emit(out, path.as_deref(), &report.to_json())?;
            Ok(if report.converged {
                EXIT_OK
            } else {
                EXIT_UNCONVERGED
            })
        }
        Command::Simulate {
            inputs,
            seed,
            runs,
            steps,
            burn_in,
            out: path,
        } => {
            let (smp, dta) = load_valid(&inputs)?;
            let product = Product::new(&smp, &dta)?;
            let graph = build_region_graph(&product)?;
            let dec = bscc_decompose(&graph);
            let steps = steps as usize;
            let burn_in = burn_in.unwrap_or_else(|| default_burn_in(Some(graph.len()), steps));
            let cfg = SimConfig::new(seed, runs as usize, steps, burn_in)
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            let d = estimate_discrete(&smp, &dta, &cfg)?;
            let c = estimate_timed(&smp, &dta, &cfg)?;
            let reach = estimate_reach(&smp, &dta, &graph, &dec, &cfg)?;
            let report = SimulationReport {
                estimates: Quantities {
                    d: d.estimates,
                    c: c.estimates,
                    reach: reach.estimates,
                },
                stderr: Quantities {
                    d: d.stderr,
                    c: c.stderr,
                    reach: reach.stderr,
                },
                runs: cfg.runs,
                config: cfg,
            };
            emit(out, path.as_deref(), &to_report_json(&report))?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
