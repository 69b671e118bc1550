//! Command-line surface.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::run::{run, write_outputs, Command, Manifest, Preset};

#[derive(Debug, Parser)]
#[command(
    name = "wvsim",
    version,
    about = "Superluminal weak-velocity statistics under Lorentz boosts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Superluminal probability against boost velocity.
    Curve,
    /// Weak-velocity histogram at every boost of the grid.
    Hist,
    /// Effective moments and closed-form probability along the boost grid.
    Trajectory,
    /// Closed-form probability over a (u_bar, sigma) grid.
    Surface,
    /// Reproduce one of the standard figures.
    Preset {
        /// fig1 .. fig7
        name: Preset,
    },
}

#[derive(Debug, Args)]
pub struct Options {
    /// `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Also write a gnuplot script next to the CSV files.
    #[arg(long, global = true)]
    pub gnuplot: bool,

    /// kg | dirac
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theory: Option<String>,
    /// double | single
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub spectrum: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu2: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// Total number of partial waves, split evenly over the components.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub n_waves: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub samples: Option<String>,
    /// start:stop:step (inclusive) or a comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub boosts: Option<String>,
    /// phases | ergodic
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mode: Option<String>,
    /// uniform | haar
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub measure: Option<String>,
    /// lo:hi:count
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub bins: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub seed: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// jacobian | relabel
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub amplitudes: Option<String>,
    /// boosted | lab
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dirac_frame: Option<String>,
    /// intensity | amplitude
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub weighting: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window_scale: Option<String>,
    /// Surface nodes per axis.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub resolution: Option<String>,
}

impl Options {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs: [(&'static str, &Option<String>); 19] = [
            ("theory", &self.theory),
            ("spectrum", &self.spectrum),
            ("mu1", &self.mu1),
            ("mu2", &self.mu2),
            ("sigma", &self.sigma),
            ("n_waves", &self.n_waves),
            ("samples", &self.samples),
            ("boosts", &self.boosts),
            ("mode", &self.mode),
            ("measure", &self.measure),
            ("bins", &self.bins),
            ("seed", &self.seed),
            ("x", &self.x),
            ("t", &self.t),
            ("amplitudes", &self.amplitudes),
            ("dirac_frame", &self.dirac_frame),
            ("weighting", &self.weighting),
            ("window_scale", &self.window_scale),
            ("resolution", &self.resolution),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (k, v) in self.overrides() {
            cfg.set(k, v)?;
        }
        cfg.experiment()?;
        Ok(cfg)
    }
}

impl Cmd {
    pub fn command(&self) -> Command {
        match self {
            Cmd::Curve => Command::Curve,
            Cmd::Hist => Command::Hist,
            Cmd::Trajectory => Command::Trajectory,
            Cmd::Surface => Command::Surface,
            Cmd::Preset { name } => Command::Preset(*name),
        }
    }
}

/// Runs the parsed command on the current rayon pool and writes the outputs.
pub fn execute(cli: &Cli) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = cli.options.resolve()?;
    let command = cli.command.command();
    let start = Instant::now();
    let outputs = run(command, &cfg, cli.options.gnuplot)?;
    let manifest = Manifest {
        command,
        config: &cfg,
        threads: rayon::current_num_threads(),
        duration: start.elapsed(),
        outputs: &outputs,
    };
    write_outputs(&cli.options.out, &outputs, &manifest)
}
