mod specs;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cvteam::graph::{
    complete_unweighted, parse_adjacency, random_graph, to_json, to_text, toeplitz_family, AdjacencyMatrix,
    SqueezingParameter,
};
use cvteam::mmes::{is_perfect_mmes, typicality_scan, ScanMode, TrialMode, TypicalityConfig, DEFAULT_EXHAUSTIVE_CAP};
use cvteam::teamwork::{
    curve_to_csv, fidelity_curve, teamwork_fidelity, teleport_through, ChannelAssignment, ChannelSpec, InputState,
    Resource,
};

use specs::{Block, InputSpec, ResourceSpec, PERFECT_LIMIT_R};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "cvteam",
    version,
    about = "Gaussian MMES certification and teleportation teamwork"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    Toeplitz,
    Complete,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the rank criterion on every (or a sample of) bipartition of a graph.
    /// Exit status 0: perfect MMES, 1: not, 2: input error.
    CheckMmes {
        /// Adjacency file (text or JSON format)
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        /// Bipartitions drawn in sampled mode
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report `elapsed_ms` as null so output is reproducible byte for byte
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the adjacency matrix of a built-in graph family.
    Family {
        #[arg(value_enum)]
        kind: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Weight bound for random graphs; defaults to N
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Teleportation fidelity of a TMSS input through the four-mode resource
    /// for the (1,4), (1,2) and (1,3) splits, as CSV.
    FidelityCurve {
        /// Beam-splitter transmittivity; fractions such as 1/3 are accepted
        #[arg(long, value_parser = specs::real)]
        t: f64,
        /// Squeezing of the teleported TMSS
        #[arg(long, value_parser = specs::real)]
        z: f64,
        #[arg(long, value_parser = specs::real, default_value = "0")]
        r_min: f64,
        #[arg(long, value_parser = specs::real, default_value = "3")]
        r_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fraction of random integer-weight graphs that are perfect MMES.
    Typicality {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Largest N allowed in exhaustive mode
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
        cap: usize,
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Distil channels from a resource across a bipartition and teleport an input through them.
    Teamwork {
        /// psi4:R,T | tmss:R | graph:PATH | toeplitz:N | channels:R1,R2,...
        #[arg(long, value_parser = specs::parse_resource)]
        resource: ResourceSpec,
        /// Squeezing for graph:PATH and toeplitz:N resources
        #[arg(long, value_parser = specs::real)]
        r: Option<f64>,
        /// 1-based modes of block A, e.g. 1,2 (not used with channels:)
        #[arg(long, value_parser = specs::parse_block)]
        bipartition: Option<Block>,
        /// tmss:Z | ghz:K,Z | vacuum:K
        #[arg(long, value_parser = specs::parse_input)]
        input: InputSpec,
        /// 0-based channel index per input mode (default: descending squeezing)
        #[arg(long, value_delimiter = ',')]
        assignment: Option<Vec<usize>>,
        /// Replace the resource squeezing by 20, approaching perfect channels
        #[arg(long)]
        perfect_limit: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Failure carrying its exit status.
struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, &text)
}

fn read_graph(path: &Path) -> Result<AdjacencyMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    parse_adjacency(&text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn check_mmes(
    input: &Path,
    mode: Mode,
    samples: usize,
    seed: u64,
    no_timing: bool,
    output: Option<&Path>,
) -> CmdResult {
    let graph = read_graph(input)?;
    let scan = match mode {
        Mode::Exhaustive => ScanMode::Exhaustive,
        Mode::Sampled => ScanMode::Sampled { count: samples, seed },
    };
    let mut report = is_perfect_mmes(&graph, scan)?;
    if no_timing {
        report = report.without_timing();
    }
    emit_json(output, &report)?;
    Ok(if report.verdict { 0 } else { EXIT_NEGATIVE })
}

fn family(kind: Family, n: usize, seed: u64, bound: Option<i64>, format: Format, output: Option<&Path>) -> CmdResult {
    let graph = match kind {
        Family::Toeplitz => toeplitz_family(n)?,
        Family::Complete => complete_unweighted(n)?,
        Family::Random => random_graph(n, bound.unwrap_or(n as i64), seed)?,
    };
    match format {
        Format::Text => emit(output, &to_text(&graph))?,
        Format::Json => emit_json(output, &to_json(&graph))?,
    }
    Ok(0)
}

fn curve(t: f64, z: f64, r_min: f64, r_max: f64, steps: usize, output: Option<&Path>) -> CmdResult {
    if steps < 2 {
        return Err(Failure(EXIT_INPUT, "--steps must be at least 2".into()));
    }
    if !(r_min >= 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(Failure(EXIT_INPUT, "need 0 <= --r-min < --r-max".into()));
    }
    let grid: Vec<f64> = (0..steps)
        .map(|i| r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64)
        .collect();
    emit(output, &curve_to_csv(&fidelity_curve(t, z, &grid)?))?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn typicality(
    n: usize,
    trials: usize,
    seed: u64,
    mode: Mode,
    samples: usize,
    cap: usize,
    no_timing: bool,
    output: Option<&Path>,
) -> CmdResult {
    let trial_mode = match mode {
        Mode::Exhaustive => TrialMode::Exhaustive,
        Mode::Sampled => TrialMode::Sampled { count: samples },
    };
    let config = TypicalityConfig {
        exhaustive_cap: cap,
        ..TypicalityConfig::new(n, trials, seed, trial_mode)
    };
    let mut stats = typicality_scan(&config).map_err(|e| match e {
        cvteam::Error::ExhaustiveCapExceeded { .. } => {
            Failure(EXIT_INPUT, format!("{e}; use --mode sampled or raise --cap"))
        }
        other => other.into(),
    })?;
    if no_timing {
        stats = stats.without_timing();
    }
    emit_json(output, &stats)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn teamwork(
    resource: ResourceSpec,
    r: Option<f64>,
    block: Option<Block>,
    input: InputSpec,
    assignment: Option<Vec<usize>>,
    perfect_limit: bool,
    output: Option<&Path>,
) -> CmdResult {
    let input = match input {
        InputSpec::Tmss { z } => InputState::Tmss { z },
        InputSpec::Ghz { k, z } => InputState::Ghz { k, z },
        InputSpec::Vacuum { k } => InputState::Vacuum { k },
    };
    let assignment = assignment.map_or(ChannelAssignment::Descending, ChannelAssignment::Explicit);
    let graph_r = || -> Result<SqueezingParameter, Failure> {
        let r = if perfect_limit {
            PERFECT_LIMIT_R
        } else {
            r.ok_or_else(|| Failure(EXIT_INPUT, "--r is required for graph resources".into()))?
        };
        Ok(SqueezingParameter::new(r)?)
    };
    let resource = match resource {
        ResourceSpec::Channels(rs) => {
            let rs = if perfect_limit {
                vec![PERFECT_LIMIT_R; rs.len()]
            } else {
                rs
            };
            let report = teleport_through(&input, &ChannelSpec::new(rs)?, &assignment)?;
            emit_json(output, &report)?;
            return Ok(0);
        }
        ResourceSpec::Psi4 { r, t } => Resource::Psi4 {
            r: if perfect_limit { PERFECT_LIMIT_R } else { r },
            t,
        },
        ResourceSpec::Tmss { r } => Resource::Tmss {
            r: if perfect_limit { PERFECT_LIMIT_R } else { r },
        },
        ResourceSpec::GraphFile(path) => Resource::Graph {
            adjacency: read_graph(&path)?,
            r: graph_r()?,
        },
        ResourceSpec::Toeplitz(n) => Resource::Graph {
            adjacency: toeplitz_family(n)?,
            r: graph_r()?,
        },
    };
    let block = block.ok_or_else(|| Failure(EXIT_INPUT, "--bipartition is required for this resource".into()))?;
    let p = specs::bipartition(resource.n_modes(), &block.0)?;
    let report = teamwork_fidelity(&resource, &p, &input, &assignment)?;
    emit_json(output, &report)?;
    Ok(0)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::CheckMmes {
            input,
            mode,
            samples,
            seed,
            no_timing,
            output,
        } => check_mmes(&input, mode, samples, seed, no_timing, output.as_deref()),
        Command::Family {
            kind,
            n,
            seed,
            bound,
            format,
            output,
        } => family(kind, n, seed, bound, format, output.as_deref()),
        Command::FidelityCurve {
            t,
            z,
            r_min,
            r_max,
            steps,
            output,
        } => curve(t, z, r_min, r_max, steps, output.as_deref()),
        Command::Typicality {
            n,
            trials,
            seed,
            mode,
            samples,
            cap,
            no_timing,
            output,
        } => typicality(n, trials, seed, mode, samples, cap, no_timing, output.as_deref()),
        Command::Teamwork {
            resource,
            r,
            bipartition,
            input,
            assignment,
            perfect_limit,
            output,
        } => teamwork(
            resource,
            r,
            bipartition,
            input,
            assignment,
            perfect_limit,
            output.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
