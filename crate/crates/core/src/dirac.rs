//! Weak value of the Dirac group-velocity operator `sigma_z` in 1+1
//! dimensions, with a random Bloch-sphere post-selection.
//!
//! A positive-energy plane wave of group velocity `u` has the spinor
//! `(sqrt(1 + u), sqrt(1 - u))`, so a wavepacket is the pair of coherent sums
//! `(eta, chi)`. Post-selecting on `(cos(theta/2), e^{-i phi} sin(theta/2))`
//! and boosting with `U = diag(f_eta, f_chi)` gives
//!
//! ```text
//! V = (1 - r^2 rho^2) / (1 + r^2 rho^2 + 2 r rho cos(phi~))
//! r = tan(theta/2) |chi/eta|,  rho = f_chi / f_eta = (1 - v)/(1 + v),
//! phi~ = phi - arg(chi/eta)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::kg::{check_lengths, WeakVelocitySample, DEGENERACY_THRESHOLD};
use crate::relativity::{add_velocity, dispersion_unchecked, Boost, SpacetimePoint};
use crate::spectrum::{uniform_angle, PhaseAssignment, PlaneWaveSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSelection {
    theta: f64,
    phi: f64,
}

impl PostSelection {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid("theta", format!("{theta} outside [0, pi]")));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::invalid("phi", format!("{phi} outside [0, 2pi)")));
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Distribution of the post-selected Bloch vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PostSelectionMeasure {
    /// `theta` and `phi` independently uniform.
    #[default]
    Uniform,
    /// Uniform on the sphere: `cos(theta)` uniform on [-1, 1].
    Haar,
}

pub fn sample_postselection<R: Rng + ?Sized>(rng: &mut R, measure: PostSelectionMeasure) -> PostSelection {
    let a: f64 = rng.gen();
    let theta = match measure {
        PostSelectionMeasure::Uniform => PI * a,
        PostSelectionMeasure::Haar => (1.0 - 2.0 * a).acos(),
    };
    PostSelection {
        theta: theta.clamp(0.0, PI),
        phi: uniform_angle(rng),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorAmplitude {
    eta: Complex64,
    chi: Complex64,
    at: SpacetimePoint,
}

impl SpinorAmplitude {
    pub fn new(eta: Complex64, chi: Complex64) -> Result<Self> {
        Self::at(eta, chi, SpacetimePoint::ORIGIN)
    }

    fn at(eta: Complex64, chi: Complex64, at: SpacetimePoint) -> Result<Self> {
        if eta == Complex64::new(0.0, 0.0) && chi == Complex64::new(0.0, 0.0) {
            return Err(Error::invalid("spinor", "both components vanish"));
        }
        Ok(Self { eta, chi, at })
    }

    pub fn eta(&self) -> Complex64 {
        self.eta
    }

    pub fn chi(&self) -> Complex64 {
        self.chi
    }

    pub fn point(&self) -> SpacetimePoint {
        self.at
    }

    /// Multiplies both components by the same complex number.
    pub fn rotated(&self, factor: Complex64) -> Result<Self> {
        Self::at(self.eta * factor, self.chi * factor, self.at)
    }
}

pub fn dirac_spinor_amplitudes(
    waves: &PlaneWaveSet,
    phases: &PhaseAssignment,
    p: SpacetimePoint,
) -> Result<SpinorAmplitude> {
    check_lengths(waves, phases)?;
    let mut eta = Complex64::new(0.0, 0.0);
    let mut chi = Complex64::new(0.0, 0.0);
    for (w, &mu) in waves.waves().iter().zip(phases.phases()) {
        let d = dispersion_unchecked(w.u);
        let e = Complex64::from_polar(w.c, mu + d.k * p.x - d.omega * p.t);
        eta += e * (1.0 + w.u).sqrt();
        chi += e * (1.0 - w.u).sqrt();
    }
    SpinorAmplitude::at(eta, chi, p)
}

/// Diagonal of the spinor boost `U` applied to `(eta, chi)`.
pub fn dirac_boost_factors(boost: &Boost) -> (f64, f64) {
    SpinorBoost::Printed.factors(boost)
}

/// `rho = f_chi / f_eta = (1 - v) / (1 + v)`.
pub fn rho(boost: &Boost) -> f64 {
    let v = boost.velocity();
    (1.0 - v) / (1.0 + v)
}

pub fn dirac_weak_velocity(s: &SpinorAmplitude, post: &PostSelection, boost: &Boost) -> Result<WeakVelocitySample> {
    let value = weak_value(s.eta, s.chi, post.theta, post.phi, rho(boost))?;
    Ok(WeakVelocitySample { value, at: s.at })
}

#[inline]
fn weak_value(eta: Complex64, chi: Complex64, theta: f64, phi: f64, rho: f64) -> Result<f64> {
    let eta_norm = eta.norm();
    if !(eta_norm > 0.0) {
        return Err(Error::Degenerate(eta_norm));
    }
    let ratio = chi / eta;
    let x = (0.5 * theta).tan() * ratio.norm() * rho;
    let phi_eff = phi - ratio.arg();
    let den = 1.0 + x * x + 2.0 * x * phi_eff.cos();
    // den = |1 + w|^2 with |w| = x; compare its root against the scale 1 + x.
    if !(den.sqrt() >= DEGENERACY_THRESHOLD * (1.0 + x)) {
        return Err(Error::Degenerate(den));
    }
    let value = (1.0 - x * x) / den;
    if !value.is_finite() {
        return Err(Error::Degenerate(den));
    }
    Ok(value)
}

/// Convention for the spinor boost matrix `U = diag(f_eta, f_chi)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SpinorBoost {
    /// `diag(sqrt((1+v)/(1-v)), sqrt((1-v)/(1+v)))`, the matrix entering the
    /// weak-value formula.
    #[default]
    Printed,
    /// `diag(((1-v)/(1+v))^(1/4), ((1+v)/(1-v))^(1/4))`, which carries the
    /// spinor of `u` onto the spinor of `add_velocity(u, v)`.
    HalfRapidity,
}

impl SpinorBoost {
    pub fn factors(&self, boost: &Boost) -> (f64, f64) {
        let v = boost.velocity();
        let q = (1.0 + v) / (1.0 - v);
        match self {
            SpinorBoost::Printed => (q.sqrt(), (1.0 / q).sqrt()),
            SpinorBoost::HalfRapidity => (q.powf(-0.25), q.powf(0.25)),
        }
    }
}

/// Distance between the unit directions of `U (sqrt(1+u), sqrt(1-u))` and
/// `(sqrt(1+u'), sqrt(1-u'))` with `u' = add_velocity(u_lab, v)`.
pub fn dirac_spinor_boost_consistency_check(u_lab: f64, boost: &Boost, convention: SpinorBoost) -> f64 {
    let (fe, fc) = convention.factors(boost);
    let a = unit([fe * (1.0 + u_lab).sqrt(), fc * (1.0 - u_lab).sqrt()]);
    let u = add_velocity(u_lab, boost);
    let b = unit([(1.0 + u).sqrt(), (1.0 - u).sqrt()]);
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Pre-computed spinor weights for repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct DiracEvaluator {
    up: Vec<f64>,
    down: Vec<f64>,
    k: Vec<f64>,
    omega: Vec<f64>,
}

impl DiracEvaluator {
    pub(crate) fn new(waves: &PlaneWaveSet) -> Self {
        let n = waves.len();
        let mut ev = DiracEvaluator {
            up: Vec::with_capacity(n),
            down: Vec::with_capacity(n),
            k: Vec::with_capacity(n),
            omega: Vec::with_capacity(n),
        };
        for w in waves.waves() {
            let d = dispersion_unchecked(w.u);
            ev.up.push(w.c * (1.0 + w.u).sqrt());
            ev.down.push(w.c * (1.0 - w.u).sqrt());
            ev.k.push(d.k);
            ev.omega.push(d.omega);
        }
        ev
    }

    pub(crate) fn len(&self) -> usize {
        self.up.len()
    }

    #[allow(clippy::needless_range_loop)]
    pub(crate) fn eval(&self, mu: &[f64], p: SpacetimePoint, post: &PostSelection, rho: f64) -> Result<f64> {
        let mut eta = Complex64::new(0.0, 0.0);
        let mut chi = Complex64::new(0.0, 0.0);
        for i in 0..self.up.len() {
            let (s, c) = (mu[i] + self.k[i] * p.x - self.omega[i] * p.t).sin_cos();
            eta += Complex64::new(self.up[i] * c, self.up[i] * s);
            chi += Complex64::new(self.down[i] * c, self.down[i] * s);
        }
        weak_value(eta, chi, post.theta, post.phi, rho)
    }
}
