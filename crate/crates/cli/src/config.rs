//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment. Every key mirrors a field
//! of the experiment configuration; keys under `run.`, `output.` and
//! `degenerate.` are run metadata and are skipped, so a manifest can be fed
//! back in as a config file.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;
use wvsim_core::dirac::PostSelectionMeasure;
use wvsim_core::montecarlo::{BinSpec, DiracFrame, ExperimentConfig, SamplingMode, Theory};
use wvsim_core::relativity::{AmplitudeTransform, SpacetimePoint};
use wvsim_core::spectrum::{build_double_gaussian, MomentWeighting, VelocitySpectrum};

use crate::csv::format_decimal;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },

    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("reading {path}: {reason}")]
    Io { path: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Double,
    Single,
}

/// All user-facing parameters of a run, before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub theory: Theory,
    pub spectrum: SpectrumKind,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma: f64,
    /// Total partial-wave count, split evenly over the spectrum components.
    pub n_waves: usize,
    pub samples: u64,
    pub boosts: Vec<f64>,
    pub mode: SamplingMode,
    pub measure: PostSelectionMeasure,
    pub bins: BinSpec,
    pub seed: u64,
    pub x: f64,
    pub t: f64,
    pub amplitudes: AmplitudeTransform,
    pub dirac_frame: DiracFrame,
    pub weighting: MomentWeighting,
    pub window_scale: f64,
    pub resolution: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            theory: Theory::KleinGordon,
            spectrum: SpectrumKind::Double,
            mu1: 0.5,
            mu2: -0.5,
            sigma: 0.1,
            n_waves: 200,
            samples: 5000,
            boosts: (0..10).map(|i| i as f64 / 10.0).collect(),
            mode: SamplingMode::Phases,
            measure: PostSelectionMeasure::Uniform,
            bins: BinSpec::default(),
            seed: 1,
            x: 0.0,
            t: 0.0,
            amplitudes: AmplitudeTransform::DensityJacobian,
            dirac_frame: DiracFrame::BoostedWaveSet,
            weighting: MomentWeighting::Intensity,
            window_scale: 1.0,
            resolution: 50,
        }
    }
}

pub const KEYS: &[&str] = &[
    "theory",
    "spectrum",
    "mu1",
    "mu2",
    "sigma",
    "n_waves",
    "samples",
    "boosts",
    "mode",
    "measure",
    "bins",
    "seed",
    "x",
    "t",
    "amplitudes",
    "dirac_frame",
    "weighting",
    "window_scale",
    "resolution",
];

const METADATA_PREFIXES: &[&str] = &["run.", "output.", "degenerate."];

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "theory" => {
                self.theory = match value {
                    "kg" | "klein-gordon" => Theory::KleinGordon,
                    "dirac" => Theory::Dirac,
                    _ => return Err(invalid(key, format!("expected kg|dirac, got {value:?}"))),
                }
            }
            "spectrum" => {
                self.spectrum = match value {
                    "double" => SpectrumKind::Double,
                    "single" => SpectrumKind::Single,
                    _ => return Err(invalid(key, format!("expected double|single, got {value:?}"))),
                }
            }
            "mu1" => self.mu1 = parse_f64(key, value)?,
            "mu2" => self.mu2 = parse_f64(key, value)?,
            "sigma" => self.sigma = parse_f64(key, value)?,
            "n_waves" => self.n_waves = parse_int(key, value)?,
            "samples" => self.samples = parse_int(key, value)?,
            "boosts" => self.boosts = parse_grid(key, value)?,
            "mode" => {
                self.mode = match value {
                    "phases" => SamplingMode::Phases,
                    "ergodic" => SamplingMode::Ergodic,
                    _ => return Err(invalid(key, format!("expected phases|ergodic, got {value:?}"))),
                }
            }
            "measure" => {
                self.measure = match value {
                    "uniform" => PostSelectionMeasure::Uniform,
                    "haar" => PostSelectionMeasure::Haar,
                    _ => return Err(invalid(key, format!("expected uniform|haar, got {value:?}"))),
                }
            }
            "bins" => {
                let parts: Vec<&str> = value.split(':').collect();
                let [lo, hi, n] = parts[..] else {
                    return Err(invalid(key, "expected lo:hi:count"));
                };
                self.bins = BinSpec::new(parse_f64(key, lo)?, parse_f64(key, hi)?, parse_int(key, n)?)
                    .map_err(|e| invalid(key, e.to_string()))?;
            }
            "seed" => self.seed = parse_int(key, value)?,
            "x" => self.x = parse_f64(key, value)?,
            "t" => self.t = parse_f64(key, value)?,
            "amplitudes" => {
                self.amplitudes = match value {
                    "jacobian" => AmplitudeTransform::DensityJacobian,
                    "relabel" => AmplitudeTransform::Relabel,
                    _ => return Err(invalid(key, format!("expected jacobian|relabel, got {value:?}"))),
                }
            }
            "dirac_frame" => {
                self.dirac_frame = match value {
                    "boosted" => DiracFrame::BoostedWaveSet,
                    "lab" => DiracFrame::LabWaveSet,
                    _ => return Err(invalid(key, format!("expected boosted|lab, got {value:?}"))),
                }
            }
            "weighting" => {
                self.weighting = match value {
                    "intensity" => MomentWeighting::Intensity,
                    "amplitude" => MomentWeighting::Amplitude,
                    _ => return Err(invalid(key, format!("expected intensity|amplitude, got {value:?}"))),
                }
            }
            "window_scale" => self.window_scale = parse_f64(key, value)?,
            "resolution" => self.resolution = parse_int(key, value)?,
            _ if METADATA_PREFIXES.iter().any(|p| key.starts_with(p)) => {}
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        self.apply_text(&text)
    }

    pub fn spectrum(&self) -> Result<VelocitySpectrum, ConfigError> {
        let built = match self.spectrum {
            SpectrumKind::Double => build_double_gaussian(self.mu1, self.mu2, self.sigma),
            SpectrumKind::Single => VelocitySpectrum::single(self.mu1, self.sigma),
        };
        built.map_err(|e| match e {
            wvsim_core::Error::InvalidParameter { field, reason } => {
                let key = if field == "mean" { "mu1" } else { field };
                invalid(key, reason)
            }
            other => invalid("spectrum", other.to_string()),
        })
    }

    pub fn n_components(&self) -> usize {
        match self.spectrum {
            SpectrumKind::Double => 2,
            SpectrumKind::Single => 1,
        }
    }

    /// Validated experiment configuration.
    pub fn experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let spectrum = self.spectrum()?;
        let comps = self.n_components();
        if !self.n_waves.is_multiple_of(comps) || self.n_waves / comps < 2 {
            return Err(invalid(
                "n_waves",
                format!(
                    "{} must be a multiple of {comps} with at least 2 per component",
                    self.n_waves
                ),
            ));
        }
        let cfg = ExperimentConfig {
            theory: self.theory,
            spectrum,
            n_per_component: self.n_waves / comps,
            n_samples: self.samples,
            boosts: self.boosts.clone(),
            mode: self.mode,
            measure: self.measure,
            bins: self.bins,
            seed: self.seed,
            point: SpacetimePoint::new(self.x, self.t),
            amplitude_transform: self.amplitudes,
            dirac_frame: self.dirac_frame,
            weighting: self.weighting,
            ergodic_window_scale: self.window_scale,
        };
        cfg.validate().map_err(|e| match e {
            wvsim_core::Error::InvalidParameter { field, reason } => invalid(config_key(field), reason),
            other => invalid("config", other.to_string()),
        })?;
        if self.resolution < 2 {
            return Err(invalid("resolution", "need at least 2 nodes per axis"));
        }
        Ok(cfg)
    }

    /// `(key, value)` pairs in canonical order; parsing them back gives the
    /// same configuration.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let f = |v: f64| format!("{v:?}");
        let boosts = self.boosts.iter().map(|&v| f(v)).collect::<Vec<_>>().join(",");
        vec![
            (
                "theory",
                match self.theory {
                    Theory::KleinGordon => "kg",
                    Theory::Dirac => "dirac",
                }
                .into(),
            ),
            (
                "spectrum",
                match self.spectrum {
                    SpectrumKind::Double => "double",
                    SpectrumKind::Single => "single",
                }
                .into(),
            ),
            ("mu1", f(self.mu1)),
            ("mu2", f(self.mu2)),
            ("sigma", f(self.sigma)),
            ("n_waves", self.n_waves.to_string()),
            ("samples", self.samples.to_string()),
            ("boosts", boosts),
            (
                "mode",
                match self.mode {
                    SamplingMode::Phases => "phases",
                    SamplingMode::Ergodic => "ergodic",
                }
                .into(),
            ),
            (
                "measure",
                match self.measure {
                    PostSelectionMeasure::Uniform => "uniform",
                    PostSelectionMeasure::Haar => "haar",
                }
                .into(),
            ),
            (
                "bins",
                format!("{}:{}:{}", f(self.bins.lo), f(self.bins.hi), self.bins.n),
            ),
            ("seed", self.seed.to_string()),
            ("x", f(self.x)),
            ("t", f(self.t)),
            (
                "amplitudes",
                match self.amplitudes {
                    AmplitudeTransform::DensityJacobian => "jacobian",
                    AmplitudeTransform::Relabel => "relabel",
                }
                .into(),
            ),
            (
                "dirac_frame",
                match self.dirac_frame {
                    DiracFrame::BoostedWaveSet => "boosted",
                    DiracFrame::LabWaveSet => "lab",
                }
                .into(),
            ),
            (
                "weighting",
                match self.weighting {
                    MomentWeighting::Intensity => "intensity",
                    MomentWeighting::Amplitude => "amplitude",
                }
                .into(),
            ),
            ("window_scale", f(self.window_scale)),
            ("resolution", self.resolution.to_string()),
        ]
    }

    pub fn echo_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.echo() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

fn config_key(field: &str) -> &str {
    match field {
        "n_per_component" => "n_waves",
        "ergodic_window_scale" => "window_scale",
        "point" => "x",
        other => other,
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| invalid(key, format!("{value:?} is not a number")))?;
    if !v.is_finite() {
        return Err(invalid(key, format!("{value:?} is not finite")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(key, format!("{value:?} is not a non-negative integer")))
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let value = value.trim();
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        let [a, b, s] = parts[..] else {
            return Err(invalid(key, "expected start:stop:step"));
        };
        let (start, stop, step) = (parse_f64(key, a)?, parse_f64(key, b)?, parse_f64(key, s)?);
        if !(step > 0.0) || stop < start {
            return Err(invalid(key, "need step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // Round away the accumulated binary error (0.30000000000000004).
        Ok((0..=n)
            .map(|i| {
                let v = start + step * i as f64;
                (v * 1e12).round() / 1e12
            })
            .collect())
    } else {
        value.split(',').map(|s| parse_f64(key, s)).collect()
    }
}

/// Grid label used in output file names.
pub fn label(v: f64) -> String {
    format_decimal(v)
}
