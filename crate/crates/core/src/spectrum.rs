//! Group-velocity spectra and their discretization into plane-wave sets.
//!
//! Spectra are always written in group-velocity space `u = k / sqrt(k^2 + 1)`,
//! never in wavenumber space. A [`VelocitySpectrum`] describes the power
//! spectrum `c_u^2` as a Gaussian mixture; [`discretize`] samples it onto a
//! deterministic grid and returns a [`PlaneWaveSet`] of `(u_i, c_i)` pairs.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::{Error, Result};

/// Distance kept from `|u| = 1` when a grid is clamped, so that
/// `k = u / sqrt(1 - u^2)` stays finite.
pub const CLAMP_EPS: f64 = 1e-9;

/// Half-width of each component's grid, in units of its sigma.
pub const GRID_HALF_WIDTH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    mean: f64,
    sigma: f64,
    weight: f64,
}

impl GaussianComponent {
    pub fn new(mean: f64, sigma: f64, weight: f64) -> Result<Self> {
        if !(mean.abs() < 1.0) {
            return Err(Error::invalid("mean", format!("{mean} must satisfy |mean| < 1")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", format!("{sigma} must be positive")));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::invalid("weight", format!("{weight} must be positive")));
        }
        Ok(Self { mean, sigma, weight })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Weighted normal density `weight * N(u; mean, sigma)`.
    pub fn density(&self, u: f64) -> f64 {
        let z = (u - self.mean) / self.sigma;
        self.weight * (-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt())
    }
}

/// Gaussian mixture for `c_u^2`. Weights are normalized to sum to one on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySpectrum {
    components: Vec<GaussianComponent>,
}

impl VelocitySpectrum {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "spectrum needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        let components = components
            .into_iter()
            .map(|c| GaussianComponent {
                weight: c.weight / total,
                ..c
            })
            .collect();
        Ok(Self { components })
    }

    pub fn single(mean: f64, sigma: f64) -> Result<Self> {
        Self::new(vec![GaussianComponent::new(mean, sigma, 1.0)?])
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Mixture density `c_u^2`, integrating to one over the real line.
    pub fn density(&self, u: f64) -> f64 {
        self.components.iter().map(|c| c.density(u)).sum()
    }

    /// Amplitude profile `c_u = sqrt(c_u^2)`.
    pub fn amplitude(&self, u: f64) -> f64 {
        self.density(u).sqrt()
    }
}

/// Equal-weight two-component spectrum with a common width.
pub fn build_double_gaussian(mu1: f64, mu2: f64, sigma: f64) -> Result<VelocitySpectrum> {
    let a = GaussianComponent::new(mu1, sigma, 0.5).map_err(rename("mu1"))?;
    let b = GaussianComponent::new(mu2, sigma, 0.5).map_err(rename("mu2"))?;
    VelocitySpectrum::new(vec![a, b])
}

fn rename(field: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidParameter { field: "mean", reason } => Error::InvalidParameter { field, reason },
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    /// Group velocity, strictly inside (-1, 1).
    pub u: f64,
    /// Real amplitude, non-negative.
    pub c: f64,
}

/// Discrete pre-selected wavepacket: the partial waves `(u_i, c_i)`.
///
/// [`PlaneWaveSet::new`] normalizes to `sum c_i^2 = 1`. Weak values are
/// invariant under a global rescaling of the amplitudes, so
/// [`PlaneWaveSet::unnormalized`] exists for inputs that must keep their scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveSet {
    waves: Vec<PlaneWave>,
}

impl PlaneWaveSet {
    pub fn new(waves: Vec<PlaneWave>) -> Result<Self> {
        let mut set = Self::unnormalized(waves)?;
        set.normalize()?;
        Ok(set)
    }

    pub fn unnormalized(waves: Vec<PlaneWave>) -> Result<Self> {
        if waves.is_empty() {
            return Err(Error::invalid("waves", "wave set must not be empty"));
        }
        for w in &waves {
            if !(w.u.abs() < 1.0) {
                return Err(Error::Superluminal(w.u));
            }
            if !(w.c >= 0.0) || !w.c.is_finite() {
                return Err(Error::invalid("amplitude", format!("{} must be finite and >= 0", w.c)));
            }
        }
        Ok(Self { waves })
    }

    pub(crate) fn from_parts_unchecked(waves: Vec<PlaneWave>) -> Self {
        Self { waves }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(u, c)| PlaneWave { u, c }).collect())
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("amplitude", "all amplitudes vanish"));
        }
        for w in &mut self.waves {
            w.c /= norm;
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.waves.iter().map(|w| w.c * w.c).sum()
    }

    pub fn waves(&self) -> &[PlaneWave] {
        &self.waves
    }

    pub fn len(&self) -> usize {
        self.waves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    /// Sum of amplitudes, the scale used for the degenerate-denominator test.
    pub fn amplitude_sum(&self) -> f64 {
        self.waves.iter().map(|w| w.c).sum()
    }

    pub fn velocities(&self) -> impl Iterator<Item = f64> + '_ {
        self.waves.iter().map(|w| w.u)
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::unnormalized(
            self.waves
                .iter()
                .map(|w| PlaneWave {
                    u: w.u,
                    c: w.c * factor,
                })
                .collect(),
        )
    }
}

/// Samples every component on its own equispaced grid over `mean +- 4 sigma`
/// (clamped to `(-1 + eps, 1 - eps)`), with amplitudes `sqrt` of the
/// component's weighted density.
pub fn discretize(spectrum: &VelocitySpectrum, n_per_component: usize) -> Result<PlaneWaveSet> {
    if n_per_component < 2 {
        return Err(Error::invalid(
            "n_per_component",
            format!("{n_per_component} must be at least 2"),
        ));
    }
    let mut waves = Vec::with_capacity(n_per_component * spectrum.components.len());
    for comp in &spectrum.components {
        let lo = (comp.mean - GRID_HALF_WIDTH * comp.sigma).max(-1.0 + CLAMP_EPS);
        let hi = (comp.mean + GRID_HALF_WIDTH * comp.sigma).min(1.0 - CLAMP_EPS);
        if !(hi > lo) {
            return Err(Error::invalid(
                "sigma",
                format!("clamped support of component at {} collapses to a point", comp.mean),
            ));
        }
        let step = (hi - lo) / (n_per_component - 1) as f64;
        for j in 0..n_per_component {
            // Pin the last node to `hi` so rounding never leaves the clamp.
            let u = if j + 1 == n_per_component {
                hi
            } else {
                lo + step * j as f64
            };
            waves.push(PlaneWave {
                u,
                c: comp.density(u).sqrt(),
            });
        }
    }
    PlaneWaveSet::new(waves)
}

/// One draw of the random phases `mu_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAssignment {
    phases: Vec<f64>,
}

impl PhaseAssignment {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
            return Err(Error::invalid("phase", format!("{bad} outside [0, 2pi)")));
        }
        Ok(Self { phases })
    }

    /// Accepts any real phases, reducing them into `[0, 2pi)`.
    pub fn wrapped(phases: impl IntoIterator<Item = f64>) -> Self {
        Self {
            phases: phases.into_iter().map(wrap_phase).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self { phases: vec![0.0; n] }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

pub(crate) fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Uniform angle in `[0, 2pi)`.
#[inline]
pub(crate) fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let a = rng.gen::<f64>() * TAU;
    if a >= TAU {
        0.0
    } else {
        a
    }
}

pub fn draw_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PhaseAssignment> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one phase"));
    }
    let mut phases = Vec::with_capacity(n);
    fill_phases(&mut phases, n, rng);
    Ok(PhaseAssignment { phases })
}

/// Refills `buf` in place; used by the sampler to avoid reallocating.
pub(crate) fn fill_phases<R: Rng + ?Sized>(buf: &mut Vec<f64>, n: usize, rng: &mut R) {
    buf.clear();
    buf.extend((0..n).map(|_| uniform_angle(rng)));
}

/// How amplitudes weight the effective moments of a wave set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MomentWeighting {
    /// Weight `c_i^2` (power spectrum).
    #[default]
    Intensity,
    /// Weight `c_i`.
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub u_bar: f64,
    pub sigma_eff: f64,
}

pub fn moments(waves: &PlaneWaveSet) -> Moments {
    moments_with(waves, MomentWeighting::Intensity)
}

pub fn moments_with(waves: &PlaneWaveSet, weighting: MomentWeighting) -> Moments {
    let weight = |c: f64| match weighting {
        MomentWeighting::Intensity => c * c,
        MomentWeighting::Amplitude => c,
    };
    let (mut w0, mut w1, mut w2) = (0.0, 0.0, 0.0);
    for w in waves.waves() {
        let p = weight(w.c);
        w0 += p;
        w1 += p * w.u;
        w2 += p * w.u * w.u;
    }
    let u_bar = w1 / w0;
    let var = (w2 / w0 - u_bar * u_bar).max(0.0);
    Moments {
        u_bar,
        sigma_eff: var.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn double_gaussian_fig1_parameters() {
        let s = build_double_gaussian(0.5, -0.5, 0.1).unwrap();
        let c = s.components();
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].mean(), c[1].mean()), (0.5, -0.5));
        assert!(c.iter().all(|c| c.sigma() == 0.1 && c.weight() == 0.5));
        let s = build_double_gaussian(0.9, -0.9, 0.01).unwrap();
        assert_eq!(s.components()[0].mean(), 0.9);
        assert_eq!(s.components()[1].sigma(), 0.01);
    }

    #[test]
    fn coincident_components_act_as_one_gaussian() {
        let double = build_double_gaussian(0.0, 0.0, 0.1).unwrap();
        let single = VelocitySpectrum::single(0.0, 0.1).unwrap();
        for i in -50..=50 {
            let u = i as f64 * 0.01;
            assert_relative_eq!(double.density(u), single.density(u), max_relative = 1e-14);
        }
    }

    #[test]
    fn rejects_bad_spectra() {
        assert!(matches!(
            build_double_gaussian(1.0, 0.0, 0.1),
            Err(Error::InvalidParameter { field: "mu1", .. })
        ));
        assert!(matches!(
            build_double_gaussian(0.0, -1.2, 0.1),
            Err(Error::InvalidParameter { field: "mu2", .. })
        ));
        assert!(build_double_gaussian(0.0, 0.0, 0.0).is_err());
        assert!(build_double_gaussian(0.0, 0.0, -0.1).is_err());
        assert!(VelocitySpectrum::new(vec![]).is_err());
    }

    #[test]
    fn discretize_fig1_splits_left_and_right_movers() {
        let s = build_double_gaussian(0.5, -0.5, 0.1).unwrap();
        let w = discretize(&s, 100).unwrap();
        assert_eq!(w.len(), 200);
        assert_eq!(w.velocities().filter(|&u| u > 0.0).count(), 100);
        assert_eq!(w.velocities().filter(|&u| u < 0.0).count(), 100);
        assert!((w.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_node_grid() {
        let s = VelocitySpectrum::single(0.0, 0.1).unwrap();
        let w = discretize(&s, 2).unwrap();
        let waves = w.waves();
        assert_relative_eq!(waves[0].u, -0.4, epsilon = 1e-15);
        assert_relative_eq!(waves[1].u, 0.4, epsilon = 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(waves[0].c, h, epsilon = 1e-15);
        assert_relative_eq!(waves[1].c, h, epsilon = 1e-15);
    }

    #[test]
    fn clamped_grid_near_light_speed() {
        let s = build_double_gaussian(0.9, -0.9, 0.1).unwrap();
        let w = discretize(&s, 100).unwrap();
        let top = w.waves()[99];
        assert_eq!(top.u, 1.0 - CLAMP_EPS);
        // Direct evaluation of the clamped grid formula for the right component.
        let (lo, hi) = (0.9 - 0.4, 1.0 - CLAMP_EPS);
        let raw: Vec<f64> = (0..100)
            .map(|j| {
                let u = if j == 99 { hi } else { lo + (hi - lo) / 99.0 * j as f64 };
                0.5 * (-(u - 0.9f64).powi(2) / 0.02).exp() / (0.1 * (2.0 * PI).sqrt())
            })
            .collect();
        let left_norm: f64 = w.waves()[100..].iter().map(|w| w.c * w.c).sum();
        let scale = ((1.0 - left_norm) / raw.iter().sum::<f64>()).sqrt();
        for (j, d) in raw.iter().enumerate() {
            let node = w.waves()[j];
            assert_relative_eq!(node.u, lo + (hi - lo) / 99.0 * j as f64, epsilon = 1e-12);
            assert_relative_eq!(node.c, d.sqrt() * scale, max_relative = 1e-12);
            assert!(node.c.is_finite());
        }
    }

    #[test]
    fn collapsed_support_is_rejected() {
        assert!(discretize(&VelocitySpectrum::single(0.0, 0.1).unwrap(), 1).is_err());
        // Entire +-4 sigma window lies above the clamp.
        let s = VelocitySpectrum::single(1.0 - 1e-10, 1e-12).unwrap();
        assert!(discretize(&s, 4).is_err());
    }

    #[test]
    fn phases_are_reproducible_and_in_range() {
        let a = draw_phases(200, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = draw_phases(200, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        let one = draw_phases(1, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!((0.0..TAU).contains(&one.phases()[0]));
        assert!(draw_phases(0, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }

    #[test]
    fn phase_mean_is_pi() {
        let n = 100_000;
        let p = draw_phases(n, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let mean = p.phases().iter().sum::<f64>() / n as f64;
        // Uniform on [0, 2pi): variance (2pi)^2 / 12.
        let stderr = (TAU * TAU / 12.0 / n as f64).sqrt();
        assert!((mean - PI).abs() < 5.0 * stderr);
    }

    #[test]
    fn phase_assignment_validation() {
        assert!(PhaseAssignment::new(vec![0.0, 1.0, TAU - 1e-12]).is_ok());
        assert!(PhaseAssignment::new(vec![TAU]).is_err());
        assert!(PhaseAssignment::new(vec![-0.1]).is_err());
        let w = PhaseAssignment::wrapped([-PI, 3.0 * PI, TAU]);
        for (got, want) in w.phases().iter().zip([PI, PI, 0.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn moments_of_simple_sets() {
        let sym = PlaneWaveSet::from_pairs(&[(0.5, 1.0), (-0.5, 1.0)]).unwrap();
        let m = moments(&sym);
        assert_relative_eq!(m.u_bar, 0.0, epsilon = 1e-15);
        assert_relative_eq!(m.sigma_eff, 0.5, epsilon = 1e-15);
        let point = PlaneWaveSet::from_pairs(&[(0.3, 1.0)]).unwrap();
        let m = moments(&point);
        assert_eq!((m.u_bar, m.sigma_eff), (0.3, 0.0));
    }

    #[test]
    fn amplitude_weighting_differs_for_unequal_amplitudes() {
        let set = PlaneWaveSet::from_pairs(&[(0.5, 1.0), (-0.5, 2.0)]).unwrap();
        let i = moments_with(&set, MomentWeighting::Intensity);
        let a = moments_with(&set, MomentWeighting::Amplitude);
        // c^2 weights 1:4, c weights 1:2.
        assert_relative_eq!(i.u_bar, (0.5 - 2.0) / 5.0, epsilon = 1e-14);
        assert_relative_eq!(a.u_bar, (0.5 - 1.0) / 3.0, epsilon = 1e-14);
    }

    /// Quadrature oracle: moments of the continuous Gaussian truncated to
    /// +-4 sigma, by composite Simpson on a fine grid.
    fn truncated_gaussian_moments(mean: f64, sigma: f64) -> (f64, f64) {
        let n = 20_000;
        let (a, b) = (mean - 4.0 * sigma, mean + 4.0 * sigma);
        let h = (b - a) / n as f64;
        let mut m = [0.0; 3];
        for i in 0..=n {
            let x = a + h * i as f64;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let f = (-(x - mean).powi(2) / (2.0 * sigma * sigma)).exp();
            m[0] += w * f;
            m[1] += w * f * x;
            m[2] += w * f * x * x;
        }
        let mu = m[1] / m[0];
        (mu, (m[2] / m[0] - mu * mu).sqrt())
    }

    #[test]
    fn discretized_gaussian_moments_match_quadrature() {
        let s = VelocitySpectrum::single(0.5, 0.1).unwrap();
        let m = moments(&discretize(&s, 200).unwrap());
        let (mu, sd) = truncated_gaussian_moments(0.5, 0.1);
        assert!((m.u_bar - 0.5).abs() < 0.005);
        assert!((m.sigma_eff - 0.1).abs() < 0.005);
        assert!((m.u_bar - mu).abs() < 1e-12);
        assert!((m.sigma_eff - sd).abs() < 1e-3);
    }

    #[test]
    fn moment_error_decreases_with_resolution() {
        let s = VelocitySpectrum::single(0.2, 0.1).unwrap();
        let (_, sd) = truncated_gaussian_moments(0.2, 0.1);
        let errs: Vec<f64> = [50, 200, 800]
            .iter()
            .map(|&n| (moments(&discretize(&s, n).unwrap()).sigma_eff - sd).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }
}
