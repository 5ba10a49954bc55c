//! `wehrl`: states, entropies, channels and the verification suites from
//! the command line.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 usage error, 3 a
//! quadrature or truncation budget was exceeded, 4 a proven inequality
//! failed (a bug to investigate).

// `!(x >= a)` rejects NaN along with small values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod state;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ConfigFile, Overrides, RunConfig};
use state::StateSpec;

/// Invalid input: exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// A report exceeded the configured budget cap: exit code 3.
#[derive(Debug)]
pub struct BudgetOverflow(pub String);

impl fmt::Display for BudgetOverflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BudgetOverflow {}

pub const EXIT_VIOLATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "wehrl",
    version,
    about = "Husimi functions, Wehrl entropy and Gaussian channels on truncated Fock spaces"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "WEHRL_JOBS")]
    jobs: Option<usize>,
    /// Directory for timestamped report files.
    #[arg(long, global = true, env = "WEHRL_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Write the report to this file instead.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Leave timestamps and timings out of reports.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Quadrature accuracy.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Truncation tail for automatically sized cutoffs.
    #[arg(long, global = true)]
    tail: Option<f64>,
    /// Largest acceptable tolerance budget of a verification report.
    #[arg(long, global = true)]
    budget_cap: Option<f64>,
}

/// Ways to name a state on the command line.
#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    /// vacuum, thermal:Z, fock:N, coherent:RE,IM or a state file.
    #[arg(long, value_name = "SPEC")]
    pub state: Option<StateSpec>,
    #[arg(long, value_name = "Z", conflicts_with_all = ["state", "fock", "coherent"])]
    pub thermal: Option<f64>,
    #[arg(long, value_name = "N", conflicts_with_all = ["state", "coherent"])]
    pub fock: Option<usize>,
    #[arg(long, value_name = "RE,IM", conflicts_with = "state")]
    pub coherent: Option<String>,
    /// Fock cutoff (default: from --tail).
    #[arg(long)]
    pub dim: Option<usize>,
}

impl StateArgs {
    pub fn spec(&self) -> anyhow::Result<Option<StateSpec>> {
        Ok(if let Some(s) = &self.state {
            Some(s.clone())
        } else if let Some(z) = self.thermal {
            Some(StateSpec::Thermal { z })
        } else if let Some(n) = self.fock {
            Some(StateSpec::Fock { n })
        } else if let Some(c) = &self.coherent {
            Some(format!("coherent:{c}").parse()?)
        } else {
            None
        })
    }

    pub fn required(&self) -> anyhow::Result<StateSpec> {
        self.spec()?.ok_or_else(|| {
            Usage("a state is required (--state, --thermal, --fock or --coherent)".into()).into()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// One number for one state, with its error estimate.
    Compute {
        what: Quantity,
        #[command(flatten)]
        state: StateArgs,
        /// Schatten exponent.
        #[arg(long)]
        p: Option<f64>,
        /// Husimi norm exponent.
        #[arg(long)]
        q: Option<f64>,
    },
    /// Run a verification suite and write its reports.
    Verify {
        /// ha, majorization, pq, entropy, epni, klein, lemmas, channels, berezin or all.
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        state: StateArgs,
        /// Convex functions, comma separated (square, cube, xlogx, power:Q).
        #[arg(long = "f", value_delimiter = ',')]
        fs: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        kappas: Vec<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Largest cutoff for random states.
        #[arg(long)]
        max_dim: Option<usize>,
    },
    /// Tabulate a quantity over a parameter grid (CSV).
    Sweep {
        quantity: SweepQuantity,
        /// `a,b,c` or `start:stop:count` (default: the config `zs` or `kappas`).
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// State for `ha` sweeps.
        #[command(flatten)]
        state: StateArgs,
        /// Convex function for `ha` sweeps.
        #[arg(long = "f", default_value = "square")]
        f: String,
    },
    /// Export sampled Husimi values on a Cartesian grid (CSV).
    Husimi {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
    /// Apply a Gaussian channel to a state.
    Channel {
        kind: ChannelArg,
        /// κ for the amplifier-type channels, λ for the attenuator.
        #[arg(long)]
        param: f64,
        #[command(flatten)]
        state: StateArgs,
        /// Output cutoff (default: channel-specific).
        #[arg(long)]
        out_dim: Option<usize>,
        /// Save the output state in `fock-density v1` format.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Numerical extremality searches.
    Optimize {
        problem: Problem,
        /// Spectrum for `wehrl`: thermal:Z:LEN, a comma-separated list or a file
        /// (default thermal:0.5:16). Short spectra on a cutoff of the same
        /// length cannot reach the untruncated bound.
        #[arg(long)]
        spectrum: Option<String>,
        /// Fock cutoff (default: spectrum length, or 16 for norm-ratio).
        #[arg(long)]
        dim: Option<usize>,
        /// Objective evaluations per run.
        #[arg(long, default_value_t = 50_000)]
        budget: usize,
        /// Independent runs, seeds `seed, seed+1, …`.
        #[arg(long, default_value_t = 1)]
        restarts: u64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Quantity {
    Wehrl,
    #[value(alias = "vn_entropy")]
    VnEntropy,
    #[value(alias = "husimi_norm")]
    HusimiNorm,
    #[value(alias = "schatten_norm")]
    Schatten,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SweepQuantity {
    /// Wehrl entropy of thermal states against z.
    Wehrl,
    /// von Neumann entropy of thermal states against z.
    VnEntropy,
    /// ‖Q(ω_z)‖_q / ‖ω_z‖_p against z.
    NormRatio,
    /// Finite-κ amplifier functional of a state against κ.
    Ha,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ChannelArg {
    Amplifier,
    Attenuator,
    RandomDisplacement,
    MeasureReprepare,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Problem {
    /// Minimise the Wehrl entropy over an isospectral orbit.
    Wehrl,
    /// Maximise ‖Q(ρ)‖_q / ‖ρ‖_p.
    NormRatio,
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let g = cli.global;
    let file = match &g.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let cfg = RunConfig::resolve(
        file,
        Overrides {
            seed: g.seed,
            deterministic: g.deterministic,
            jobs: g.jobs,
            out_dir: g.out_dir,
            tol: g.tol,
            tail: g.tail,
            budget_cap: g.budget_cap,
        },
    )?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build_global()?;
    let sink = output::Sink::new(&cfg, g.out);
    match cli.command {
        Command::Compute { what, state, p, q } => commands::compute(&sink, what, &state, p, q),
        Command::Verify {
            suite,
            trials,
            state,
            fs,
            kappas,
            p,
            q,
            max_dim,
        } => commands::verify(
            &sink,
            commands::VerifyArgs {
                suite,
                trials,
                state,
                fs,
                kappas,
                p,
                q,
                max_dim,
            },
        ),
        Command::Sweep {
            quantity,
            grid,
            p,
            q,
            state,
            f,
        } => commands::sweep(&sink, quantity, grid.as_deref(), p, q, &state, &f),
        Command::Husimi {
            state,
            radius,
            points,
        } => commands::husimi(&sink, &state, radius, points),
        Command::Channel {
            kind,
            param,
            state,
            out_dim,
            save,
        } => commands::channel(&sink, kind, param, &state, out_dim, save.as_deref()),
        Command::Optimize {
            problem,
            spectrum,
            dim,
            budget,
            restarts,
            p,
            q,
        } => commands::optimize(
            &sink,
            problem,
            spectrum.as_deref(),
            dim,
            budget,
            restarts,
            p,
            q,
        ),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use wehrl_core::Error as E;
    if e.is::<Usage>() {
        return 2;
    }
    if e.is::<BudgetOverflow>() {
        return 3;
    }
    match e.downcast_ref::<E>() {
        Some(E::Accuracy(_) | E::Truncation(_)) => 3,
        Some(E::Domain(_) | E::NotAState(_) | E::Shape(_) | E::Precondition(_) | E::Parse(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
