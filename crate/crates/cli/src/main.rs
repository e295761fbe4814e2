//! Command-line front end: percolation tables, threshold sweeps, single
//! simulations and ergodic diagnostics.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ExperimentConfig, NRange, Preset};

#[derive(Parser)]
#[command(name = "codedcast", version, about = "Probabilistic forwarding of coded packets on random geometric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the percolation curve and write it as a CSV table.
    Theta(Common),
    /// Minimum forwarding probability and transmissions for a range of n.
    Sweep(Common),
    /// One graph, one forwarding run; JSON report.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the graph as an edge list.
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
    /// Monte Carlo checks of the ergodic limits; exits 1 if any |z| > 5.
    Diagnostics(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Simulated,
    MeanField,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    None,
    Giant,
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    lambda: Option<f64>,
    /// Window side (for `theta`, the table's window).
    #[arg(long)]
    m: Option<f64>,
    /// Connection radius.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Packet count `n` or inclusive range `a..b`.
    #[arg(long)]
    n: Option<NRange>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    theta_table: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    condition: Option<ConditionArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key=value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    graph_trials: Option<usize>,
    #[arg(long)]
    fwd_trials: Option<usize>,
    /// Graphs per grid point (`theta`) or per report (`diagnostics`).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    lambda_step: Option<f64>,
    /// Store the table without isotonic smoothing.
    #[arg(long)]
    no_smooth: bool,
    /// Steps of the forwarding-probability grid on [0, 1].
    #[arg(long)]
    grid_resolution: Option<u32>,
    /// Bisect down to the tolerance instead of stopping within one SE.
    #[arg(long)]
    exact_search: bool,
    /// Print the resolved configuration as a config file and exit.
    #[arg(long)]
    print_config: bool,
}

impl Common {
    /// Defaults, then preset, then config file, then flags.
    fn resolve(&self, theta_cmd: bool) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            None => String::new(),
        };
        let (file_preset, rest) = split_preset(&text)?;
        if let Some(p) = self.preset.or(file_preset) {
            cfg.apply_preset(p);
        }
        cfg.merge_text(&rest)?;
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field.clone() { cfg.$field = v; })* };
        }
        set!(lambda, r, k, n, delta, p, seed, graph_trials, fwd_trials, trials, lambda_min, lambda_max, lambda_step, grid_resolution);
        if let Some(m) = self.m {
            if theta_cmd {
                anyhow::ensure!(m.fract() == 0.0 && m >= 2.0, "table window must be an integer >= 2, got {m}");
                cfg.theta_m = m as u64;
            } else {
                cfg.m = m;
            }
        }
        if let Some(t) = &self.theta_table {
            cfg.theta_table = Some(t.clone());
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(m) = self.method {
            cfg.method = match m {
                MethodArg::Simulated => codedcast::Method::Simulated,
                MethodArg::MeanField => codedcast::Method::MeanField,
            };
        }
        if let Some(c) = self.condition {
            cfg.condition = match c {
                ConditionArg::None => codedcast::Condition::None,
                ConditionArg::Giant => codedcast::Condition::Giant,
            };
        }
        if self.no_smooth {
            cfg.smoothed = false;
        }
        if self.exact_search {
            cfg.exact_search = true;
        }
        if let Some(path) = &cfg.theta_table {
            anyhow::ensure!(path.exists(), "theta table {} does not exist", path.display());
        }
        Ok(cfg)
    }
}

/// Separates a `preset` entry from the other lines of a config file.
fn split_preset(text: &str) -> Result<(Option<Preset>, String)> {
    let mut preset = None;
    let mut rest = String::new();
    for line in text.lines() {
        match line.split_once('=') {
            Some((k, v)) if k.trim() == "preset" && !line.trim_start().starts_with('#') => preset = Some(v.trim().parse()?),
            _ => {
                rest.push_str(line);
                rest.push('\n');
            }
        }
    }
    Ok((preset, rest))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (common, graph_out) = match &cli.command {
        Command::Theta(c) | Command::Sweep(c) | Command::Diagnostics(c) => (c, None),
        Command::Simulate { common, graph_out } => (common, graph_out.clone()),
    };
    let cfg = common.resolve(matches!(cli.command, Command::Theta(_)))?;
    if common.print_config {
        print!("{}", cfg.render());
        return Ok(ExitCode::SUCCESS);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    pool.install(|| match cli.command {
        Command::Theta(_) => commands::theta(&cfg),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::Simulate { .. } => commands::simulate(&cfg, graph_out.as_deref()),
        Command::Diagnostics(_) => commands::diagnostics(&cfg),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
