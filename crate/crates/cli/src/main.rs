//! Command-line front end: every subcommand writes CSV (stdout, or a file
//! under `--out`) and a summary (stderr, and a file under `--out`).
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input or parameters.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dyadic_bumps::step::Interval;

mod commands;
mod config;
mod io;

use config::{parse_interval, Settings};
use io::{CliError, Output};

#[derive(Debug, Parser)]
#[command(name = "dyadic-bumps", version, about = "Orlicz bumps, dyadic grids and sparse operators")]
struct Cli {
    /// TOML file of flat keys named after the long flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write artifacts into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tag {
    Double,
    Weak11,
    Lemma61,
    Lsut,
    Maximal,
    Cz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Build,
    Double,
    Separated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Double,
    SeparatedA,
    SeparatedB,
}

fn interval(s: &str) -> Result<Interval, String> {
    parse_interval(s)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Luxemburg norm of a step function over a union of intervals.
    #[command(after_help = "CSV columns: norm")]
    OrliczNorm {
        /// Step function JSON: {"breakpoints": [...], "values": [...]}.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Young function JSON, e.g. '{"family":"power","p":2}'. Default t².
        #[arg(long)]
        young: Option<String>,
        /// Interval lo:hi of the set (repeatable). Default: the support.
        #[arg(long = "set", value_parser = interval)]
        sets: Vec<Interval>,
    },
    /// Double or separated bump constant of a weight pair.
    #[command(after_help = "CSV columns: kind,value,divergent,extremal_lo,extremal_hi,family,count")]
    BumpScan {
        /// JSON with "u", "sigma" (step functions) and optional "window", "tau".
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long)]
        p: Option<f64>,
        /// Log-bump exponent for the default A and B.
        #[arg(long)]
        delta: Option<f64>,
        /// A, measuring u^{1/p}. Default: log bump with exponent p.
        #[arg(long)]
        young: Option<String>,
        /// B, measuring σ^{1/p'}. Default: log bump with exponent p'.
        #[arg(long)]
        young_b: Option<String>,
        /// Dyadic refinements of the breakpoint interval family.
        #[arg(long)]
        m: Option<u32>,
        /// Scan the cubes of this line grid instead of breakpoint intervals.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Calderón–Zygmund decomposition at one level.
    #[command(after_help = "CSV columns: atom,lo,hi,f,g,b (lo, hi empty on finite spaces)")]
    CzDecompose {
        /// Step function JSON, or a JSON array of per-point values.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Sparse family from the stopping cubes at levels a^k.
    #[command(after_help = "Writes the family as JSON (family.json under --out).")]
    SparseBuild {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Young function for the cube norms. Default t.
        #[arg(long)]
        young: Option<String>,
        /// Level base; must exceed 2/ε. Default 4/ε.
        #[arg(long)]
        a: Option<f64>,
    },
    /// Sparse operator applied to a function.
    #[command(after_help = "CSV columns: atom,lo,hi,value (lo, hi empty on finite spaces)")]
    SparseApply {
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Build a line grid, or a grid on a finite space.
    #[command(after_help = "Writes the grid as JSON (grid.json under --out).")]
    GridBuild {
        /// Finite space JSON (points or distances, optional masses).
        #[arg(long)]
        space: Option<PathBuf>,
        /// Net parameter for finite spaces. Default 1/(12K³).
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        shift: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        k_min: Option<i32>,
        #[arg(long, allow_hyphen_values = true)]
        k_max: Option<i32>,
        /// Line window lo:hi. Default 0:1.
        #[arg(long, value_parser = interval, allow_hyphen_values = true)]
        window: Option<Interval>,
    },
    /// Check the five grid axioms.
    #[command(after_help = "CSV columns: property,name,holds,witness")]
    GridVerify {
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Run one of the norm-inequality suites.
    #[command(after_help = "CSV columns: instance,seed,size,param,lhs,rhs,ratio")]
    VerifyThm {
        #[arg(value_enum)]
        tag: Tag,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Exponent; the double suite cycles 1.5, 2, 3 when it is absent.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Oscillation of the random weights.
        #[arg(long)]
        osc: Option<f64>,
        /// Φ for the weak-type suite. Default t·log(e+t)².
        #[arg(long)]
        young: Option<String>,
        /// Exponent q of Φ(t^q) in the weak-type suite.
        #[arg(long)]
        q: Option<f64>,
    },
    /// The separated-versus-double bump example.
    #[command(after_help = "CSV columns: build: n,k_n,gap; double: n,product,product_over_log,global_product; \
                            separated: n,separated_a,separated_b,single_a,single_b,running_a,running_b")]
    Counterexample {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        n_max: Option<u32>,
        /// Endpoint refinements for spans inside one block.
        #[arg(long)]
        m_single: Option<u32>,
        /// Endpoint refinements for spans across blocks.
        #[arg(long)]
        m_cross: Option<u32>,
    },
    /// Cell averages of the Hilbert kernel applied to a step function.
    #[command(after_help = "CSV columns: lo,hi,value,collar")]
    Hilbert {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Cell width. Default 2^-10.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, value_parser = interval, allow_hyphen_values = true)]
        window: Option<Interval>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let s = Settings::load(cli.config.as_deref())?;
    let out = Output {
        dir: s.path("out", cli.out)?,
    };
    match cli.command {
        Command::OrliczNorm { input, young, sets } => commands::orlicz_norm(&s, &out, input, young, sets),
        Command::BumpScan {
            weights,
            kind,
            p,
            delta,
            young,
            young_b,
            m,
            grid,
        } => commands::bump_scan(&s, &out, commands::BumpArgs { weights, kind, p, delta, young, young_b, m, grid }),
        Command::CzDecompose { input, grid, lambda } => commands::cz_decompose(&s, &out, input, grid, lambda),
        Command::SparseBuild { input, grid, young, a } => commands::sparse_build(&s, &out, input, grid, young, a),
        Command::SparseApply { family, grid, input } => commands::sparse_apply(&s, &out, family, grid, input),
        Command::GridBuild {
            space,
            eta,
            seed,
            shift,
            k_min,
            k_max,
            window,
        } => commands::grid_build(&s, &out, commands::GridArgs { space, eta, seed, shift, k_min, k_max, window }),
        Command::GridVerify { grid } => commands::grid_verify(&s, &out, grid),
        Command::VerifyThm {
            tag,
            count,
            seed,
            p,
            delta,
            epsilon,
            osc,
            young,
            q,
        } => commands::verify_thm(&s, &out, tag, commands::SuiteArgs { count, seed, p, delta, epsilon, osc, young, q }),
        Command::Counterexample {
            mode,
            n_max,
            m_single,
            m_cross,
        } => commands::counterexample(&s, &out, mode, n_max, m_single, m_cross),
        Command::Hilbert { input, h, window } => commands::hilbert(&s, &out, input, h, window),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
