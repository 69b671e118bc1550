//! Ensemble estimates of the weak-velocity distribution.
//!
//! Each sample draws fresh random phases (and, for Dirac waves, a fresh
//! post-selected spinor), evaluates the weak velocity, and is tallied into a
//! [`Histogram`]. `P_super` is the fraction of samples with `|v| > 1`,
//! counting both tails.
//!
//! Samples run in parallel on the ambient rayon pool. Every sample seeds its
//! own generator from `(master seed, boost, sample index, attempt)` and the
//! tallies are integer counts, so results are bit-identical for any number
//! of worker threads.

mod histogram;

pub use histogram::{BinSpec, Histogram};

use rand::Rng;
use rayon::prelude::*;

use crate::dirac::{rho, sample_postselection, DiracEvaluator, PostSelectionMeasure};
use crate::kg::KgEvaluator;
use crate::relativity::{boost_wave_set_with, dispersion_unchecked, AmplitudeTransform, Boost, SpacetimePoint};
use crate::rng::{SampleRng, SeedStream};
use crate::spectrum::{
    discretize, fill_phases, moments_with, MomentWeighting, PhaseAssignment, PlaneWaveSet, VelocitySpectrum,
};
use crate::{Error, Result};

/// Highest tolerated fraction of degenerate evaluations.
pub const MAX_REDRAW_RATE: f64 = 0.01;

/// Attempts per sample before the run is abandoned.
const MAX_ATTEMPTS: u64 = 64;

const ERGODIC_PHASE_TAG: u64 = 0x6572_676f_6469_6321;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Theory {
    #[default]
    KleinGordon,
    Dirac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Random phases at a fixed space-time point.
    #[default]
    Phases,
    /// One fixed phase draw, random space-time points.
    Ergodic,
}

/// Which wave set the Dirac spinor is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiracFrame {
    /// Spinor from the boosted wave set, then the spinor boost `rho`.
    #[default]
    BoostedWaveSet,
    /// Spinor from the lab wave set; the boost enters only through `rho`.
    LabWaveSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub theory: Theory,
    pub spectrum: VelocitySpectrum,
    pub n_per_component: usize,
    pub n_samples: u64,
    pub boosts: Vec<f64>,
    pub mode: SamplingMode,
    pub measure: PostSelectionMeasure,
    pub bins: BinSpec,
    pub seed: u64,
    /// Evaluation point in phase mode.
    pub point: SpacetimePoint,
    pub amplitude_transform: AmplitudeTransform,
    pub dirac_frame: DiracFrame,
    pub weighting: MomentWeighting,
    /// Multiplier on the ergodic space-time window.
    pub ergodic_window_scale: f64,
}

impl ExperimentConfig {
    /// The reference Klein-Gordon setup: `mu = +-0.5`, `sigma = 0.1`,
    /// 200 waves, 5000 samples, boosts 0, 0.1, ..., 0.9.
    pub fn reference() -> Self {
        Self {
            theory: Theory::KleinGordon,
            spectrum: crate::spectrum::build_double_gaussian(0.5, -0.5, 0.1).expect("valid reference spectrum"),
            n_per_component: 100,
            n_samples: 5000,
            boosts: (0..10).map(|i| i as f64 / 10.0).collect(),
            mode: SamplingMode::Phases,
            measure: PostSelectionMeasure::Uniform,
            bins: BinSpec::default(),
            seed: 1,
            point: SpacetimePoint::ORIGIN,
            amplitude_transform: AmplitudeTransform::DensityJacobian,
            dirac_frame: DiracFrame::BoostedWaveSet,
            weighting: MomentWeighting::Intensity,
            ergodic_window_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("samples", "need at least one sample"));
        }
        if self.n_per_component < 2 {
            return Err(Error::invalid(
                "n_per_component",
                "need at least two waves per component",
            ));
        }
        if self.boosts.is_empty() {
            return Err(Error::invalid("boosts", "boost grid is empty"));
        }
        for &v in &self.boosts {
            if !(v.abs() < 1.0) {
                return Err(Error::invalid("boosts", format!("boost {v} must satisfy |v| < 1")));
            }
        }
        if self.boosts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("boosts", "boost grid must be strictly increasing"));
        }
        if !(self.ergodic_window_scale > 0.0 && self.ergodic_window_scale.is_finite()) {
            return Err(Error::invalid("ergodic_window_scale", "must be positive"));
        }
        if !(self.point.x.is_finite() && self.point.t.is_finite()) {
            return Err(Error::invalid("point", "evaluation point must be finite"));
        }
        Ok(())
    }

    pub fn lab_waves(&self) -> Result<PlaneWaveSet> {
        discretize(&self.spectrum, self.n_per_component)
    }

    /// Wave set as seen from the boosted frame.
    pub fn boosted_waves(&self, boost: &Boost) -> Result<PlaneWaveSet> {
        Ok(boost_wave_set_with(&self.lab_waves()?, boost, self.amplitude_transform))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperluminalEstimate {
    pub p_super: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub n_degenerate: u64,
}

impl SuperluminalEstimate {
    pub fn from_counts(n_super: u64, n_samples: u64, n_degenerate: u64) -> Self {
        let p = n_super as f64 / n_samples as f64;
        Self {
            p_super: p,
            stderr: (p * (1.0 - p) / n_samples as f64).sqrt(),
            n_samples,
            n_degenerate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub boost: f64,
    pub estimate: SuperluminalEstimate,
    pub u_bar_eff: f64,
    pub sigma_eff: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoostCurve {
    pub points: Vec<CurvePoint>,
}

impl BoostCurve {
    pub fn p_super(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.estimate.p_super).collect()
    }

    pub fn stderr(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.estimate.stderr).collect()
    }

    pub fn boosts(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.boost).collect()
    }

    pub fn n_degenerate(&self) -> u64 {
        self.points.iter().map(|p| p.estimate.n_degenerate).sum()
    }
}

/// Space-time box sampled in ergodic mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicWindow {
    pub x_max: f64,
    pub t_max: f64,
    pub periods: f64,
}

impl ErgodicWindow {
    /// `n` characteristic periods `2 pi / k_bar` in x and `2 pi / omega_bar`
    /// in t, where `k_bar, omega_bar` belong to the intensity-weighted mean
    /// speed and `n = ceil(k_bar / dk)` for the smallest wavenumber spacing
    /// `dk`. Over that window the relative phases of neighbouring modes
    /// wind through a full turn.
    pub fn for_waves(waves: &PlaneWaveSet, scale: f64) -> Self {
        let (mut w0, mut w1) = (0.0, 0.0);
        for w in waves.waves() {
            w0 += w.c * w.c;
            w1 += w.c * w.c * w.u.abs();
        }
        let mean_speed = w1 / w0;
        let mut d = dispersion_unchecked(mean_speed);
        if !(d.k > 1e-12) {
            d.k = 1.0;
        }
        let mut ks: Vec<f64> = waves.waves().iter().map(|w| dispersion_unchecked(w.u).k).collect();
        ks.sort_by(f64::total_cmp);
        let k_scale = ks.iter().fold(0.0f64, |m, k| m.max(k.abs())).max(1.0);
        let dk = ks
            .windows(2)
            .map(|p| p[1] - p[0])
            .filter(|&gap| gap > 1e-12 * k_scale)
            .fold(f64::INFINITY, f64::min);
        let periods = if dk.is_finite() {
            (d.k / dk).ceil().max(1.0)
        } else {
            1.0
        };
        let tau = std::f64::consts::TAU;
        Self {
            x_max: scale * periods * tau / d.k,
            t_max: scale * periods * tau / d.omega,
            periods,
        }
    }
}

/// Evaluation of one sample's weak velocity from its random stream.
enum Sampler {
    Kg(KgEvaluator),
    Dirac {
        ev: DiracEvaluator,
        rho: f64,
        measure: PostSelectionMeasure,
    },
}

impl Sampler {
    fn new(config: &ExperimentConfig, boost: &Boost) -> Result<Self> {
        Ok(match config.theory {
            Theory::KleinGordon => Sampler::Kg(KgEvaluator::new(&config.boosted_waves(boost)?)),
            Theory::Dirac => {
                let waves = match config.dirac_frame {
                    DiracFrame::BoostedWaveSet => config.boosted_waves(boost)?,
                    DiracFrame::LabWaveSet => config.lab_waves()?,
                };
                Sampler::Dirac {
                    ev: DiracEvaluator::new(&waves),
                    rho: rho(boost),
                    measure: config.measure,
                }
            }
        })
    }

    fn len(&self) -> usize {
        match self {
            Sampler::Kg(ev) => ev.len(),
            Sampler::Dirac { ev, .. } => ev.len(),
        }
    }

    fn eval(&self, mu: &[f64], p: SpacetimePoint, rng: &mut SampleRng) -> Result<f64> {
        match self {
            Sampler::Kg(ev) => ev.eval(mu, p),
            Sampler::Dirac { ev, rho, measure } => {
                let post = sample_postselection(rng, *measure);
                ev.eval(mu, p, &post, *rho)
            }
        }
    }
}

struct Tally {
    hist: Histogram,
    n_super: u64,
    n_degenerate: u64,
    buf: Vec<f64>,
}

impl Tally {
    fn new(bins: BinSpec) -> Self {
        Self {
            hist: Histogram::new(bins),
            n_super: 0,
            n_degenerate: 0,
            buf: Vec::new(),
        }
    }

    fn record(&mut self, v: f64) {
        self.hist.insert(v);
        if v.abs() > 1.0 {
            self.n_super += 1;
        }
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            hist: self.hist.merge(other.hist),
            n_super: self.n_super + other.n_super,
            n_degenerate: self.n_degenerate + other.n_degenerate,
            buf: self.buf,
        }
    }

    fn finish(self, n_samples: u64) -> Result<(Histogram, SuperluminalEstimate)> {
        check_redraws(self.n_degenerate, n_samples)?;
        Ok((
            self.hist,
            SuperluminalEstimate::from_counts(self.n_super, n_samples, self.n_degenerate),
        ))
    }
}

fn check_redraws(redraws: u64, samples: u64) -> Result<()> {
    let rate = redraws as f64 / samples as f64;
    if rate > MAX_REDRAW_RATE {
        return Err(Error::RedrawLimit { redraws, samples, rate });
    }
    Ok(())
}

fn run_samples<F>(config: &ExperimentConfig, draw: F) -> Result<(Histogram, SuperluminalEstimate)>
where
    F: Fn(u64, u64, &mut Vec<f64>) -> Result<f64> + Sync,
{
    let n = config.n_samples;
    let tally = (0..n)
        .into_par_iter()
        .try_fold(
            || Tally::new(config.bins),
            |mut tally, i| {
                for attempt in 0..MAX_ATTEMPTS {
                    match draw(i, attempt, &mut tally.buf) {
                        Ok(v) => {
                            tally.record(v);
                            return Ok(tally);
                        }
                        Err(Error::Degenerate(_)) => tally.n_degenerate += 1,
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::RedrawLimit {
                    redraws: tally.n_degenerate,
                    samples: n,
                    rate: tally.n_degenerate as f64 / n as f64,
                })
            },
        )
        .try_reduce(|| Tally::new(config.bins), |a, b| Ok(a.merge(b)))?;
    tally.finish(n)
}

fn boost_stream(config: &ExperimentConfig, boost: &Boost) -> SeedStream {
    SeedStream::new(config.seed).child(&[boost.velocity().to_bits()])
}

/// Random-phase estimate at the configured evaluation point.
pub fn estimate(config: &ExperimentConfig, boost: &Boost) -> Result<(Histogram, SuperluminalEstimate)> {
    config.validate()?;
    let sampler = Sampler::new(config, boost)?;
    let seeds = boost_stream(config, boost);
    let n_waves = sampler.len();
    run_samples(config, |i, attempt, buf| {
        let mut rng = seeds.substream(&[i, attempt]);
        fill_phases(buf, n_waves, &mut rng);
        sampler.eval(buf, config.point, &mut rng)
    })
}

/// Space-time estimate with a single fixed phase draw.
pub fn estimate_ergodic(config: &ExperimentConfig, boost: &Boost) -> Result<(Histogram, SuperluminalEstimate)> {
    config.validate()?;
    let sampler = Sampler::new(config, boost)?;
    let seeds = boost_stream(config, boost);
    let phases = ergodic_phases(config, boost, sampler.len())?;
    let window = ergodic_window(config, boost)?;
    run_samples(config, |i, attempt, _| {
        let mut rng = seeds.substream(&[i, attempt]);
        let p = SpacetimePoint::new(rng.gen::<f64>() * window.x_max, rng.gen::<f64>() * window.t_max);
        sampler.eval(phases.phases(), p, &mut rng)
    })
}

/// The fixed phases used by [`estimate_ergodic`].
pub fn ergodic_phases(config: &ExperimentConfig, boost: &Boost, n: usize) -> Result<PhaseAssignment> {
    let mut rng = boost_stream(config, boost).substream(&[ERGODIC_PHASE_TAG]);
    crate::spectrum::draw_phases(n, &mut rng)
}

pub fn ergodic_window(config: &ExperimentConfig, boost: &Boost) -> Result<ErgodicWindow> {
    let waves = match (config.theory, config.dirac_frame) {
        (Theory::Dirac, DiracFrame::LabWaveSet) => config.lab_waves()?,
        _ => config.boosted_waves(boost)?,
    };
    Ok(ErgodicWindow::for_waves(&waves, config.ergodic_window_scale))
}

/// Dispatches on `config.mode`.
pub fn estimate_configured(config: &ExperimentConfig, boost: &Boost) -> Result<(Histogram, SuperluminalEstimate)> {
    match config.mode {
        SamplingMode::Phases => estimate(config, boost),
        SamplingMode::Ergodic => estimate_ergodic(config, boost),
    }
}

/// `P_super` at every boost of the grid, with the effective moments of the
/// boosted wave set attached.
pub fn p_super_curve(config: &ExperimentConfig) -> Result<BoostCurve> {
    config.validate()?;
    let lab = config.lab_waves()?;
    let points = config
        .boosts
        .iter()
        .map(|&v| {
            let boost = Boost::new(v)?;
            let (_, estimate) = estimate_configured(config, &boost)?;
            let m = moments_with(
                &boost_wave_set_with(&lab, &boost, config.amplitude_transform),
                config.weighting,
            );
            Ok(CurvePoint {
                boost: v,
                estimate,
                u_bar_eff: m.u_bar,
                sigma_eff: m.sigma_eff,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoostCurve { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::build_double_gaussian;

    fn small(theory: Theory) -> ExperimentConfig {
        ExperimentConfig {
            theory,
            n_samples: 400,
            n_per_component: 20,
            boosts: vec![0.0, 0.5],
            ..ExperimentConfig::reference()
        }
    }

    #[test]
    fn single_velocity_is_never_superluminal() {
        let spectrum = VelocitySpectrum::single(0.3, 1e-9).unwrap();
        for theory in [Theory::KleinGordon] {
            let cfg = ExperimentConfig {
                spectrum: spectrum.clone(),
                ..small(theory)
            };
            for v in [0.0, 0.6] {
                let b = Boost::new(v).unwrap();
                assert_eq!(estimate(&cfg, &b).unwrap().1.p_super, 0.0);
                assert_eq!(estimate_ergodic(&cfg, &b).unwrap().1.p_super, 0.0);
            }
        }
    }

    #[test]
    fn p_super_equals_mass_outside_light_cone() {
        for theory in [Theory::KleinGordon, Theory::Dirac] {
            let cfg = small(theory);
            let (h, e) = estimate(&cfg, &Boost::new(0.3).unwrap()).unwrap();
            assert_eq!(h.total(), cfg.n_samples);
            assert_eq!(h.mass_outside(-1.0, 1.0), e.p_super);
            assert!(e.p_super > 0.0 && e.p_super < 1.0);
            let want = (e.p_super * (1.0 - e.p_super) / e.n_samples as f64).sqrt();
            assert_eq!(e.stderr, want);
        }
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let cfg = small(Theory::Dirac);
        let b = Boost::new(0.2).unwrap();
        assert_eq!(estimate(&cfg, &b).unwrap(), estimate(&cfg, &b).unwrap());
        let other = ExperimentConfig { seed: 2, ..cfg.clone() };
        assert_ne!(estimate(&cfg, &b).unwrap().0, estimate(&other, &b).unwrap().0);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = small(Theory::KleinGordon);
        let b = Boost::new(0.4).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| (estimate(&cfg, &b).unwrap(), estimate_ergodic(&cfg, &b).unwrap()))
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    #[test]
    fn single_point_curve_matches_estimate() {
        let cfg = ExperimentConfig {
            boosts: vec![0.0],
            ..small(Theory::KleinGordon)
        };
        let curve = p_super_curve(&cfg).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].estimate, estimate(&cfg, &Boost::identity()).unwrap().1);
    }

    #[test]
    fn curve_points_do_not_depend_on_the_rest_of_the_grid() {
        let a = p_super_curve(&ExperimentConfig {
            boosts: vec![0.0, 0.3],
            ..small(Theory::KleinGordon)
        })
        .unwrap();
        let b = p_super_curve(&ExperimentConfig {
            boosts: vec![-0.2, 0.3, 0.8],
            ..small(Theory::KleinGordon)
        })
        .unwrap();
        assert_eq!(a.points[1], b.points[1]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = small(Theory::KleinGordon);
        let bad = [
            ExperimentConfig {
                n_samples: 0,
                ..base.clone()
            },
            ExperimentConfig {
                boosts: vec![],
                ..base.clone()
            },
            ExperimentConfig {
                boosts: vec![0.2, 0.1],
                ..base.clone()
            },
            ExperimentConfig {
                boosts: vec![0.0, 1.0],
                ..base.clone()
            },
            ExperimentConfig {
                n_per_component: 1,
                ..base.clone()
            },
            ExperimentConfig {
                ergodic_window_scale: 0.0,
                ..base.clone()
            },
        ];
        for cfg in bad {
            assert!(
                matches!(p_super_curve(&cfg), Err(Error::InvalidParameter { .. })),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn degenerate_samples_abort_the_run() {
        // A set whose amplitudes are all zero has a vanishing denominator
        // at every draw.
        let mut cfg = small(Theory::KleinGordon);
        cfg.n_samples = 10;
        let zero = PlaneWaveSet::unnormalized(vec![crate::spectrum::PlaneWave { u: 0.2, c: 0.0 }; 3]).unwrap();
        let sampler = Sampler::Kg(KgEvaluator::new(&zero));
        let seeds = SeedStream::new(0);
        let r = run_samples(&cfg, |i, a, buf| {
            let mut rng = seeds.substream(&[i, a]);
            fill_phases(buf, 3, &mut rng);
            sampler.eval(buf, SpacetimePoint::ORIGIN, &mut rng)
        });
        assert!(matches!(r, Err(Error::RedrawLimit { .. })));
        assert!(check_redraws(1, 100).is_ok());
        assert!(check_redraws(2, 100).is_err());
    }

    #[test]
    fn ergodic_window_covers_mode_spacing() {
        let cfg = ExperimentConfig {
            spectrum: build_double_gaussian(0.5, -0.5, 0.1).unwrap(),
            ..ExperimentConfig::reference()
        };
        let w = ergodic_window(&cfg, &Boost::identity()).unwrap();
        let lab = cfg.lab_waves().unwrap();
        let mut ks: Vec<f64> = lab.velocities().map(|u| dispersion_unchecked(u).k).collect();
        ks.sort_by(f64::total_cmp);
        let dk = ks.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
        assert!(w.x_max * dk >= std::f64::consts::TAU * (1.0 - 1e-12));
        let doubled = ErgodicWindow::for_waves(&lab, 2.0);
        assert_eq!(doubled.x_max, 2.0 * w.x_max);
        assert_eq!(doubled.t_max, 2.0 * w.t_max);
    }
}
