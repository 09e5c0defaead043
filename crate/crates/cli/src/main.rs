//! `perconet`: batch driver for entanglement percolation experiments.

mod commands;
mod config;
mod output;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perconet_core::lattice::Strategy;

use config::{Defaults, Overrides, RunConfig};

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration (exit status 2).
    Usage(String),
    /// The computation itself failed (exit status 1).
    Runtime(String),
    /// Every step ran but some reproduced value is out of tolerance (exit status 1).
    Mismatch(String),
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<perconet_core::Error> for Failure {
    fn from(e: perconet_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "perconet",
    version,
    about = "Classical and multipartite entanglement percolation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML file with default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (default: $PERCONET_SEED, then 1).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output prefix; writes <out>.csv and the <out>.json sidecar.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct Target {
    /// Lattice kind, e.g. square, kagome, four-eight-eight, snub-square.
    #[arg(long)]
    lattice: Option<String>,
    /// Network document to use instead of a generated lattice.
    #[arg(long)]
    network: Vec<PathBuf>,
    /// Cells along both axes.
    #[arg(long)]
    size: Option<u32>,
    #[arg(long)]
    lx: Option<u32>,
    #[arg(long)]
    ly: Option<u32>,
    /// periodic or open.
    #[arg(long)]
    boundary: Option<String>,
    /// cep or qep.
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Args, Clone, Default)]
struct Grid {
    /// Occupation probabilities: list and/or ranges, e.g. 0.5,0.6:0.9:0.1.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Bond weights φ₁ instead of p; mapped through p = 2φ₁.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a lattice and write it as a network document.
    Lattice {
        #[command(flatten)]
        target: Target,
    },
    /// Apply the measurement pattern and write the resulting network.
    Transform {
        #[command(flatten)]
        target: Target,
    },
    /// Critical probability from crossing wrapping probabilities.
    Threshold {
        #[command(flatten)]
        target: Target,
        /// Two or more sizes, e.g. 64,128.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// θ(p): probability that a qualified node is in a wrapping cluster.
    Theta {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Connection probability of two distant qualified nodes.
    Pab {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// θ for both strategies on a common grid.
    Compare {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        samples: Option<usize>,
        /// Also estimate both thresholds at these sizes.
        #[arg(long)]
        sizes: Option<String>,
        /// Samples per threshold estimate.
        #[arg(long, default_value_t = 2000)]
        threshold_samples: usize,
    },
    /// High-density series of θ by perimeter enumeration.
    Series {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Check the measurement protocols against brute-force simulation.
    QuantumVerify {
        /// Largest number of links in a star.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Recompute a reference table or figure and compare.
    Reproduce {
        what: Artifact,
        /// Samples per Monte Carlo estimate.
        #[arg(long)]
        samples: Option<usize>,
        /// Threshold sizes.
        #[arg(long)]
        sizes: Option<String>,
        /// Lattice size for the θ curves.
        #[arg(long)]
        size: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Artifact {
    Table1,
    Table2,
    Fig2,
}

fn overrides(common: &Common, target: Option<&Target>) -> Overrides {
    let mut o = Overrides {
        config: common.config.clone(),
        seed: common.seed,
        out: common.out.clone(),
        threads: common.threads,
        ..Default::default()
    };
    if let Some(t) = target {
        o.lattice = t.lattice.clone();
        o.network = t.network.clone();
        o.size = t.size;
        o.lx = t.lx;
        o.ly = t.ly;
        o.boundary = t.boundary.clone();
        o.strategy = t.strategy.clone();
    }
    o
}

fn defaults(size: u32, samples: usize) -> Defaults {
    Defaults {
        size,
        samples,
        strategy: Strategy::Cep,
        order: 8,
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let (name, cfg) = match &cli.command {
        Command::Lattice { target } => (
            "lattice",
            RunConfig::resolve("lattice", overrides(common, Some(target)), defaults(8, 1))?,
        ),
        Command::Transform { target } => {
            let mut d = defaults(8, 1);
            d.strategy = Strategy::Qep;
            (
                "transform",
                RunConfig::resolve("transform", overrides(common, Some(target)), d)?,
            )
        }
        Command::Threshold {
            target,
            sizes,
            samples,
        } => {
            let mut o = overrides(common, Some(target));
            o.sizes = sizes.clone();
            o.samples = *samples;
            (
                "threshold",
                RunConfig::resolve("threshold", o, defaults(64, 2000))?,
            )
        }
        Command::Theta {
            target,
            grid,
            samples,
        } => {
            let mut o = overrides(common, Some(target));
            (o.p, o.phi, o.samples) = (grid.p.clone(), grid.phi.clone(), *samples);
            (
                "theta",
                RunConfig::resolve("theta", o, defaults(64, 100_000))?,
            )
        }
        Command::Pab {
            target,
            grid,
            samples,
        } => {
            let mut o = overrides(common, Some(target));
            (o.p, o.phi, o.samples) = (grid.p.clone(), grid.phi.clone(), *samples);
            ("pab", RunConfig::resolve("pab", o, defaults(64, 10_000))?)
        }
        Command::Compare {
            target,
            grid,
            samples,
            sizes,
            ..
        } => {
            let mut o = overrides(common, Some(target));
            (o.p, o.phi, o.samples, o.sizes) =
                (grid.p.clone(), grid.phi.clone(), *samples, sizes.clone());
            (
                "compare",
                RunConfig::resolve("compare", o, defaults(64, 100_000))?,
            )
        }
        Command::Series { target, order } => {
            let mut o = overrides(common, Some(target));
            o.order = *order;
            ("series", RunConfig::resolve("series", o, defaults(16, 1))?)
        }
        Command::QuantumVerify { n_max } => {
            let mut o = overrides(common, None);
            o.n_max = *n_max;
            (
                "quantum-verify",
                RunConfig::resolve("quantum-verify", o, defaults(1, 1))?,
            )
        }
        Command::Reproduce {
            samples,
            sizes,
            size,
            ..
        } => {
            let mut o = overrides(common, None);
            (o.samples, o.sizes, o.size) = (*samples, sizes.clone(), *size);
            (
                "reproduce",
                RunConfig::resolve("reproduce", o, defaults(64, 2000))?,
            )
        }
    };
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    match cli.command {
        Command::Lattice { .. } => commands::lattice(&cfg),
        Command::Transform { .. } => commands::transform(&cfg),
        Command::Threshold { .. } => commands::threshold(&cfg),
        Command::Theta { .. } => commands::theta(&cfg),
        Command::Pab { .. } => commands::pab(&cfg),
        Command::Compare {
            threshold_samples,
            sizes,
            ..
        } => commands::compare(&cfg, sizes.is_some(), threshold_samples),
        Command::Series { .. } => commands::series(&cfg),
        Command::QuantumVerify { .. } => commands::quantum_verify(&cfg),
        Command::Reproduce { what, samples, .. } => reproduce::run(&cfg, what, samples),
    }
    .map_err(|e| match e {
        Failure::Usage(m) => Failure::Usage(format!("{name}: {m}")),
        other => other,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}
