mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{GraphSource, RangeSpec, RunConfig};
use delaysync::network::SyncMeasure;

/// Delay-coupled network synchronization: spectra, simulation, theory and
/// (γ, τ) sweeps.
#[derive(Parser, Debug)]
#[command(name = "delaysync", version)]
struct Cli {
    /// TOML config file, or a JSON output whose embedded config to reuse.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Suppress the progress counter.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Laplacian eigenvalues of a graph.
    Spectrum {
        #[arg(long)]
        graph: Option<String>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one network and write its trajectory.
    Simulate {
        #[arg(long)]
        graph: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Record every n-th step.
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synchronization region over a (γ, τ) grid.
    Sweep {
        #[arg(long)]
        graph: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        sync: SyncArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form bounds for given constants and spectrum.
    Theory {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long)]
        lambda2: Option<f64>,
        #[arg(long)]
        lambdak: Option<f64>,
        /// Take the spectrum from this graph instead.
        #[arg(long)]
        graph: Option<String>,
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical optima of several topologies against the spectral predictions.
    Compare {
        /// Builtin topologies to sweep, comma separated.
        #[arg(long, value_delimiter = ',')]
        graphs: Option<Vec<String>>,
        /// Sweep summaries to compare instead of sweeping.
        #[arg(long, num_args = 1..)]
        regions: Option<Vec<PathBuf>>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        sync: SyncArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// γ grid as a:b:step.
    #[arg(long)]
    gamma_range: Option<RangeSpec>,
    /// τ grid as a:b:step.
    #[arg(long)]
    tau_range: Option<RangeSpec>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Several seeds; a cell must synchronize for all of them.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

#[derive(Args, Debug)]
struct SyncArgs {
    #[arg(long)]
    transient: Option<f64>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_parser = parse_measure)]
    measure: Option<SyncMeasure>,
    #[arg(long)]
    step: Option<f64>,
}

fn parse_measure(s: &str) -> Result<SyncMeasure, String> {
    match s {
        "full-state" => Ok(SyncMeasure::FullState),
        "output" => Ok(SyncMeasure::Output),
        _ => Err(format!("unknown measure `{s}` (full-state or output)")),
    }
}

/// A failure and the exit code it maps to.
pub enum Failure {
    /// Invalid input: exit code 2.
    Config(anyhow::Error),
    /// Failure while computing or writing: exit code 3.
    Runtime(anyhow::Error),
}

pub trait Classify<T> {
    fn config(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_graph(cfg: &mut RunConfig, graph: Option<String>) -> Result<(), Failure> {
    if let Some(g) = graph {
        cfg.graph = Some(GraphSource::from_arg(&g).config()?);
    }
    Ok(())
}

fn apply_sweep(cfg: &mut RunConfig, a: SweepArgs) {
    set(&mut cfg.sweep.gamma_range, a.gamma_range);
    set(&mut cfg.sweep.tau_range, a.tau_range);
    if a.workers.is_some() {
        cfg.sweep.workers = a.workers;
    }
    if let Some(s) = a.seed {
        cfg.sweep.seeds = vec![s];
    }
    set(&mut cfg.sweep.seeds, a.seeds);
}

fn apply_sync(cfg: &mut RunConfig, a: SyncArgs) {
    set(&mut cfg.sync.transient, a.transient);
    set(&mut cfg.sync.window, a.window);
    set(&mut cfg.sync.epsilon, a.epsilon);
    set(&mut cfg.sync.measure, a.measure);
    if a.step.is_some() {
        cfg.sync.step = a.step;
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).config()?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Spectrum { graph, out } => {
            set_graph(&mut cfg, graph)?;
            commands::spectrum_cmd(&cfg, out.as_deref())
        }
        Command::Simulate {
            graph,
            gamma,
            tau,
            t_end,
            seed,
            stride,
            step,
            out,
        } => {
            set_graph(&mut cfg, graph)?;
            let s = &mut cfg.simulate;
            if gamma.is_some() {
                s.gamma = gamma;
            }
            if tau.is_some() {
                s.tau = tau;
            }
            if step.is_some() {
                s.step = step;
            }
            set(&mut s.t_end, t_end);
            set(&mut s.seed, seed);
            set(&mut s.stride, stride);
            set(&mut s.out, out);
            commands::simulate_cmd(&cfg)
        }
        Command::Sweep { graph, sweep, sync, out } => {
            set_graph(&mut cfg, graph)?;
            apply_sweep(&mut cfg, sweep);
            apply_sync(&mut cfg, sync);
            set(&mut cfg.sweep.out, out);
            commands::sweep_cmd(&mut cfg, cli.quiet)
        }
        Command::Theory {
            alpha,
            c0,
            c1,
            c2,
            lambda2,
            lambdak,
            graph,
            gamma_max,
            samples,
            out,
        } => {
            set_graph(&mut cfg, graph)?;
            let t = &mut cfg.theory;
            set(&mut t.alpha, alpha);
            set(&mut t.c0, c0);
            set(&mut t.c1, c1);
            set(&mut t.c2, c2);
            if lambda2.is_some() || lambdak.is_some() {
                t.lambda2 = lambda2;
                t.lambdak = lambdak;
            }
            if gamma_max.is_some() {
                t.gamma_max = gamma_max;
            }
            set(&mut t.samples, samples);
            set(&mut t.out, out);
            commands::theory_cmd(&cfg)
        }
        Command::Compare {
            graphs,
            regions,
            tolerance,
            sweep,
            sync,
            out,
        } => {
            set(&mut cfg.compare.graphs, graphs);
            set(&mut cfg.compare.regions, regions);
            set(&mut cfg.compare.tolerance, tolerance);
            apply_sweep(&mut cfg, sweep);
            apply_sync(&mut cfg, sync);
            set(&mut cfg.compare.out, out);
            commands::compare_cmd(&mut cfg, cli.quiet)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
