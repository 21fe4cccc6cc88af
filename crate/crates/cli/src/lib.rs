//! Command-line front end: argument parsing, run configuration, file
//! formats and plots on top of `causens-core`.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod io;
pub mod plot;
pub mod results;

use std::path::PathBuf;

use causens_core::estimands::Bound;
use causens_core::models::ModelKind;
use causens_core::synthdata::DgpFamily;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{PlotKind, PlotRequest, SimulateRequest};
use config::{Overrides, RunConfig};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "causens", version, about = "Bayesian sensitivity analysis for causal effects")]
pub struct Cli {
    /// Worker threads for chains and grid points (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with a known effect.
    Simulate(SimulateArgs),
    /// Fit one model at fixed or prior-distributed sensitivity values.
    Fit(RunArgs),
    /// Fit a model at every point of a sensitivity grid.
    Sweep(RunArgs),
    /// Find where a sweep's credible interval crosses a threshold.
    Tipping(TippingArgs),
    /// Redraw a plot from saved results.
    Plot(PlotArgs),
    /// Convergence diagnostics of saved draws.
    Diagnostics(DiagnosticsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Data-generating family.
    #[arg(long)]
    pub family: Option<DgpFamily>,
    /// JSON spec file; --family then only checks it.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Spec field override, FIELD=JSON (repeatable).
    #[arg(long = "set", value_name = "FIELD=VALUE")]
    pub set: Vec<String>,
    /// Seed of the generator (overrides the spec's).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// File name inside the output directory.
    #[arg(long, default_value = "data.csv")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// complete, misclassification, unmeasured, mnar-binary or tsb-mnar.
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Dataset CSV written by `simulate` or in the same format.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory (default: results).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sampler seed; chains and grid points derive their own from it.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Post-warmup draws per chain.
    #[arg(long)]
    pub iter: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Mixture components of the stick-breaking model.
    #[arg(long)]
    pub components: Option<usize>,
    /// Fixed stick-breaking concentration.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fix a sensitivity parameter, NAME=VALUE (repeatable).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Grid for a sensitivity parameter, NAME=lo:hi:step or NAME=v1,v2,...
    #[arg(long = "grid", value_name = "NAME=GRID")]
    pub grid: Vec<String>,
    /// Prior for a sensitivity parameter, NAME=normal(m,s) or NAME=point(v).
    #[arg(long = "prior", value_name = "NAME=PRIOR")]
    pub prior: Vec<String>,
    #[arg(long)]
    pub no_plots: bool,
    /// Leave the timestamp out of SVG files.
    #[arg(long)]
    pub no_timestamp: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model,
            data: self.data.clone(),
            out: self.out.clone(),
            seed: self.seed,
            chains: self.chains,
            iter: self.iter,
            warmup: self.warmup,
            components: self.components,
            alpha: self.alpha,
            set: self.set.clone(),
            grid: self.grid.clone(),
            prior: self.prior.clone(),
            no_plots: self.no_plots,
            no_timestamp: self.no_timestamp,
        }
    }

    fn config(&self) -> Result<RunConfig> {
        RunConfig::from_sources(self.config.as_deref(), &self.overrides())
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundArg {
    Lower,
    Upper,
}

impl From<BoundArg> for Bound {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Lower => Bound::Lower,
            BoundArg::Upper => Bound::Upper,
        }
    }
}

#[derive(Debug, Args)]
pub struct TippingArgs {
    /// Sweep table written by `sweep`.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, value_enum, default_value = "upper")]
    pub bound: BoundArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub threshold: f64,
    /// Directory for tipping.json (default: next to the table).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlotKindArg {
    Curve,
    Heatmap,
    Tsb,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Sweep table for curve and heatmap plots, fit directory for tsb.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKindArg,
    /// Output SVG file or directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "upper")]
    pub bound: BoundArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub threshold: f64,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct DiagnosticsArgs {
    /// Fit directory or draws CSV.
    #[arg(long)]
    pub results: PathBuf,
}

fn dispatch(command: &Command) -> Result<Vec<String>> {
    match command {
        Command::Simulate(a) => commands::simulate(&SimulateRequest {
            family: a.family,
            spec_path: a.spec.clone(),
            set: a.set.clone(),
            seed: a.seed,
            out: a.out.clone(),
            file_name: a.name.clone(),
        }),
        Command::Fit(a) => commands::fit_command(&a.config()?),
        Command::Sweep(a) => commands::sweep_command(&a.config()?),
        Command::Tipping(a) => commands::tipping_command(&a.table, a.bound.into(), a.threshold, a.out.as_deref()),
        Command::Plot(a) => commands::plot_command(&PlotRequest {
            results: a.results.clone(),
            kind: match a.kind {
                PlotKindArg::Curve => PlotKind::Curve,
                PlotKindArg::Heatmap => PlotKind::Heatmap,
                PlotKindArg::Tsb => PlotKind::Tsb,
            },
            out: a.out.clone(),
            bound: a.bound.into(),
            threshold: a.threshold,
            timestamp: !a.no_timestamp,
        }),
        Command::Diagnostics(a) => commands::diagnostics_command(&a.results),
    }
}

/// Runs a parsed command line inside a thread pool of the requested size.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::validation("--threads must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::validation(format!("cannot start worker threads: {e}")))?;
    pool.install(|| dispatch(&cli.command))
}
