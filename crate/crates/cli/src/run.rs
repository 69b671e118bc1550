//! Turns a configuration into named output files.
//!
//! Everything here is pure: outputs are returned as strings, and writing
//! them to disk happens in [`write_outputs`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use anyhow::Context;
use wvsim_core::montecarlo::{estimate_configured, p_super_curve, Theory};
use wvsim_core::relativity::{boost_spectrum_density, boost_wave_set_with, Boost};
use wvsim_core::universal::{boost_trajectory_with, surface_grid};

use crate::config::{label, RunConfig, SpectrumKind};
use crate::csv::{emit_curve, emit_histogram, emit_surface, emit_table, emit_trajectory};

pub const SURFACE_U_BAR: (f64, f64) = (-1.0, 1.0);
pub const SURFACE_SIGMA: (f64, f64) = (0.01, 1.0);
const FIG7_BOOST: f64 = 0.3;
const FIG7_GRID: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Fig1,
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
        Preset::Fig7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
        }
    }

    /// Spectrum and theory the preset is defined by. Applied on top of
    /// whatever the file and flags say.
    fn pin(self, cfg: &RunConfig) -> RunConfig {
        let mut c = cfg.clone();
        c.spectrum = SpectrumKind::Double;
        c.mu1 = 0.5;
        c.mu2 = -0.5;
        c.sigma = 0.1;
        c.theory = match self {
            Preset::Fig4 | Preset::Fig5 => Theory::Dirac,
            _ => Theory::KleinGordon,
        };
        if self == Preset::Fig7 {
            c.sigma = 0.01;
        }
        c
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset {s:?}, expected fig1..fig7"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Curve,
    Hist,
    Trajectory,
    Surface,
    Preset(Preset),
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::Curve => "curve".into(),
            Command::Hist => "hist".into(),
            Command::Trajectory => "trajectory".into(),
            Command::Surface => "surface".into(),
            Command::Preset(p) => format!("preset {}", p.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// File name relative to the output directory.
    pub name: String,
    pub contents: String,
    /// Degenerate (near-zero denominator) samples that went into this file.
    pub degenerate: Option<u64>,
}

impl Output {
    fn new(name: impl Into<String>, contents: String, degenerate: Option<u64>) -> Self {
        Self {
            name: name.into(),
            contents,
            degenerate,
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig, gnuplot: bool) -> anyhow::Result<Vec<Output>> {
    let mut outputs = match command {
        Command::Curve => vec![curve(cfg, "curve.csv")?],
        Command::Hist => hist(cfg)?,
        Command::Trajectory => vec![trajectory(cfg, "trajectory.csv")?],
        Command::Surface => vec![surface(cfg, "surface.csv")?],
        Command::Preset(p) => preset(p, cfg)?,
    };
    if gnuplot {
        let name = match command {
            Command::Preset(p) => p.name().to_string(),
            other => other.name(),
        };
        let script = gnuplot_script(&outputs);
        outputs.push(Output::new(format!("{name}.gp"), script, None));
    }
    Ok(outputs)
}

fn curve(cfg: &RunConfig, name: &str) -> anyhow::Result<Output> {
    let exp = cfg.experiment()?;
    let curve = p_super_curve(&exp)?;
    Ok(Output::new(name, emit_curve(&curve), Some(curve.n_degenerate())))
}

fn hist(cfg: &RunConfig) -> anyhow::Result<Vec<Output>> {
    let exp = cfg.experiment()?;
    exp.boosts
        .iter()
        .map(|&v| {
            let (h, est) = estimate_configured(&exp, &Boost::new(v)?)?;
            Ok(Output::new(
                format!("hist_v{}.csv", label(v)),
                emit_histogram(&h)?,
                Some(est.n_degenerate),
            ))
        })
        .collect()
}

fn trajectory(cfg: &RunConfig, name: &str) -> anyhow::Result<Output> {
    let exp = cfg.experiment()?;
    let boosts = exp
        .boosts
        .iter()
        .map(|&v| Boost::new(v))
        .collect::<Result<Vec<_>, _>>()?;
    let points = boost_trajectory_with(
        &exp.spectrum,
        exp.n_per_component,
        &boosts,
        exp.amplitude_transform,
        exp.weighting,
    )?;
    Ok(Output::new(name, emit_trajectory(&points), None))
}

fn surface(cfg: &RunConfig, name: &str) -> anyhow::Result<Output> {
    cfg.experiment()?;
    let grid = surface_grid(SURFACE_U_BAR, SURFACE_SIGMA, cfg.resolution)?;
    Ok(Output::new(name, emit_surface(&grid), None))
}

fn with_means(cfg: &RunConfig, mu: f64, sigma: f64) -> RunConfig {
    let mut c = cfg.clone();
    c.mu1 = mu;
    c.mu2 = -mu;
    c.sigma = sigma;
    c
}

fn mean_sweep(cfg: &RunConfig, prefix: &str) -> anyhow::Result<Vec<Output>> {
    [0.1, 0.5, 0.9]
        .iter()
        .map(|&mu| curve(&with_means(cfg, mu, 0.01), &format!("{prefix}_mu{}.csv", label(mu))))
        .collect()
}

fn width_sweep(cfg: &RunConfig, prefix: &str) -> anyhow::Result<Vec<Output>> {
    [0.1, 0.01]
        .iter()
        .map(|&s| curve(&with_means(cfg, 0.5, s), &format!("{prefix}_sigma{}.csv", label(s))))
        .collect()
}

fn preset(p: Preset, cfg: &RunConfig) -> anyhow::Result<Vec<Output>> {
    let cfg = p.pin(cfg);
    match p {
        Preset::Fig1 => Ok(vec![curve(&cfg, "fig1_curve.csv")?]),
        Preset::Fig2 => mean_sweep(&cfg, "fig2"),
        Preset::Fig3 => width_sweep(&cfg, "fig3"),
        Preset::Fig4 => Ok(vec![curve(&cfg, "fig4_curve.csv")?]),
        Preset::Fig5 => {
            let mut out = mean_sweep(&cfg, "fig5")?;
            out.extend(width_sweep(&cfg, "fig5")?);
            Ok(out)
        }
        Preset::Fig6 => Ok(vec![
            surface(&cfg, "fig6_surface.csv")?,
            trajectory(&cfg, "fig6_trajectory.csv")?,
        ]),
        Preset::Fig7 => fig7(&cfg),
    }
}

/// Lab and boosted spectra on a fine grid, plus the discrete nodes.
fn fig7(cfg: &RunConfig) -> anyhow::Result<Vec<Output>> {
    let exp = cfg.experiment()?;
    let boost = Boost::new(FIG7_BOOST)?;
    let spectrum = &exp.spectrum;
    let rows: Vec<Vec<f64>> = (0..FIG7_GRID)
        .map(|i| {
            let u = -1.0 + 2.0 * i as f64 / (FIG7_GRID - 1) as f64;
            let u = u.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
            let lab = spectrum.density(u);
            let boosted = boost_spectrum_density(|w| spectrum.density(w), u, &boost);
            vec![u, lab, boosted, lab.sqrt(), boosted.sqrt()]
        })
        .collect();
    let lab_waves = exp.lab_waves()?;
    let boosted_waves = boost_wave_set_with(&lab_waves, &boost, exp.amplitude_transform);
    let nodes: Vec<Vec<f64>> = lab_waves
        .waves()
        .iter()
        .zip(boosted_waves.waves())
        .map(|(l, b)| vec![l.u, l.c, b.u, b.c])
        .collect();
    Ok(vec![
        Output::new(
            "fig7_spectrum.csv",
            emit_table(
                &[
                    "u",
                    "lab_density",
                    "boosted_density",
                    "lab_amplitude",
                    "boosted_amplitude",
                ],
                &rows,
            ),
            None,
        ),
        Output::new(
            "fig7_nodes.csv",
            emit_table(&["u_lab", "c_lab", "u_boosted", "c_boosted"], &nodes),
            None,
        ),
    ])
}

fn gnuplot_script(outputs: &[Output]) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    let curves: Vec<&Output> = outputs
        .iter()
        .filter(|o| o.contents.starts_with(crate::csv::CURVE_HEADER))
        .collect();
    if !curves.is_empty() {
        s.push_str("set xlabel 'boost v'\nset ylabel 'P_super'\nplot ");
        let parts: Vec<String> = curves
            .iter()
            .map(|o| {
                format!(
                    "'{}' using 1:2:3 with yerrorlines title '{}'",
                    o.name,
                    o.name.trim_end_matches(".csv")
                )
            })
            .collect();
        s.push_str(&parts.join(", \\\n     "));
        s.push('\n');
    }
    for o in outputs {
        if o.contents.starts_with(crate::csv::SURFACE_HEADER) {
            let _ = writeln!(
                s,
                "set xlabel 'u_bar'\nset ylabel 'sigma'\nsplot '{}' using 1:2:3 with points palette",
                o.name
            );
        } else if o.contents.starts_with(crate::csv::TRAJECTORY_HEADER) {
            let _ = writeln!(
                s,
                "set xlabel 'boost v'\nset ylabel 'P_universal'\nplot '{}' using 1:4 with linespoints",
                o.name
            );
        } else if o.contents.starts_with(crate::csv::HISTOGRAM_HEADER) {
            let _ = writeln!(s, "set xrange [-4:4]\nplot '{}' using (($1+$2)/2):3 with steps", o.name);
        } else if o.name.ends_with("_spectrum.csv") {
            let _ = writeln!(
                s,
                "set xlabel 'u'\nplot '{0}' using 1:2 with lines, '{0}' using 1:3 with lines",
                o.name
            );
        }
    }
    s
}

pub struct Manifest<'a> {
    pub command: Command,
    pub config: &'a RunConfig,
    pub threads: usize,
    pub duration: Duration,
    pub outputs: &'a [Output],
}

impl Manifest<'_> {
    /// `key = value` text that parses back as a config file.
    pub fn render(&self) -> String {
        let mut s = String::from("# wvsim run manifest\n");
        let _ = writeln!(s, "run.version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "run.command = {}", self.command.name());
        let _ = writeln!(s, "run.threads = {}", self.threads);
        let _ = writeln!(s, "run.duration_seconds = {:.3}", self.duration.as_secs_f64());
        s.push_str(&self.config.echo_text());
        for (i, o) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "output.{i} = {}", o.name);
            if let Some(n) = o.degenerate {
                let _ = writeln!(s, "degenerate.{i} = {n}");
            }
        }
        s
    }
}

/// Writes every output plus `manifest.txt`; returns the written paths.
pub fn write_outputs(dir: &Path, outputs: &[Output], manifest: &Manifest<'_>) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut paths = Vec::with_capacity(outputs.len() + 1);
    for o in outputs {
        let path = dir.join(&o.name);
        std::fs::write(&path, &o.contents).with_context(|| format!("writing {}", path.display()))?;
        paths.push(path);
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest.render()).with_context(|| format!("writing {}", path.display()))?;
    paths.push(path);
    Ok(paths)
}
