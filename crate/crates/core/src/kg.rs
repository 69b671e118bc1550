//! Local group velocity of a Klein-Gordon random wave.
//!
//! With a position eigenstate as post-selection the weak value of the
//! group-velocity operator is
//!
//! ```text
//! v(x, t) = Re[ sum_i c_i u_i e^{i gamma_i} / sum_i c_i e^{i gamma_i} ]
//! ```
//!
//! which is unbounded: it blows up wherever the coherent sum in the
//! denominator nearly cancels.

use num_complex::Complex64;

use crate::relativity::{boost_wave_set, dispersion_unchecked, Boost, SpacetimePoint};
use crate::spectrum::{PhaseAssignment, PlaneWaveSet};
use crate::{Error, Result};

/// Relative size below which a weak-value denominator counts as zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakVelocitySample {
    pub value: f64,
    pub at: SpacetimePoint,
}

impl WeakVelocitySample {
    pub fn is_superluminal(&self) -> bool {
        self.value.abs() > 1.0
    }
}

pub fn kg_weak_velocity(
    waves: &PlaneWaveSet,
    phases: &PhaseAssignment,
    p: SpacetimePoint,
) -> Result<WeakVelocitySample> {
    check_lengths(waves, phases)?;
    let (num, den) = coherent_sums(waves, phases.phases(), p);
    let u0 = reference_velocity(waves.waves().iter().map(|w| w.u));
    ratio(num, den, waves.amplitude_sum())
        .map(|r| u0 + r)
        .map(|value| WeakVelocitySample { value, at: p })
}

/// Weak value in the frame moving with `boost`, for a wavepacket prepared
/// in the lab frame. Phases are Lorentz scalars, so only the wave set changes.
pub fn kg_weak_velocity_boosted(
    lab_waves: &PlaneWaveSet,
    phases: &PhaseAssignment,
    p: SpacetimePoint,
    boost: &Boost,
) -> Result<WeakVelocitySample> {
    kg_weak_velocity(&boost_wave_set(lab_waves, boost), phases, p)
}

pub(crate) fn check_lengths(waves: &PlaneWaveSet, phases: &PhaseAssignment) -> Result<()> {
    if waves.len() != phases.len() {
        return Err(Error::LengthMismatch {
            waves: waves.len(),
            phases: phases.len(),
        });
    }
    Ok(())
}

/// Velocities enter relative to the first wave's, so a state with a single
/// velocity gets exactly that velocity back.
fn reference_velocity(mut u: impl Iterator<Item = f64>) -> f64 {
    u.next().unwrap_or(0.0)
}

/// `(sum c (u - u0) e^{i gamma}, sum c e^{i gamma})`.
fn coherent_sums(waves: &PlaneWaveSet, mu: &[f64], p: SpacetimePoint) -> (Complex64, Complex64) {
    let u0 = reference_velocity(waves.waves().iter().map(|w| w.u));
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for (w, &m) in waves.waves().iter().zip(mu) {
        let d = dispersion_unchecked(w.u);
        let e = Complex64::from_polar(w.c, m + d.k * p.x - d.omega * p.t);
        den += e;
        num += e * (w.u - u0);
    }
    (num, den)
}

fn ratio(num: Complex64, den: Complex64, scale: f64) -> Result<f64> {
    let mag = den.norm();
    if !(mag >= DEGENERACY_THRESHOLD * scale) {
        return Err(Error::Degenerate(mag));
    }
    let value = (num * den.conj()).re / (mag * mag);
    if !value.is_finite() {
        return Err(Error::Degenerate(mag));
    }
    Ok(value)
}

/// Pre-computed wave data for repeated evaluation at many phase draws.
#[derive(Debug, Clone)]
pub(crate) struct KgEvaluator {
    c: Vec<f64>,
    u: Vec<f64>,
    k: Vec<f64>,
    omega: Vec<f64>,
    scale: f64,
}

impl KgEvaluator {
    pub(crate) fn new(waves: &PlaneWaveSet) -> Self {
        let mut ev = KgEvaluator {
            c: Vec::with_capacity(waves.len()),
            u: Vec::with_capacity(waves.len()),
            k: Vec::with_capacity(waves.len()),
            omega: Vec::with_capacity(waves.len()),
            scale: waves.amplitude_sum(),
        };
        for w in waves.waves() {
            let d = dispersion_unchecked(w.u);
            ev.c.push(w.c);
            ev.u.push(w.u);
            ev.k.push(d.k);
            ev.omega.push(d.omega);
        }
        ev
    }

    pub(crate) fn len(&self) -> usize {
        self.c.len()
    }

    #[allow(clippy::needless_range_loop)]
    pub(crate) fn eval(&self, mu: &[f64], p: SpacetimePoint) -> Result<f64> {
        let u0 = reference_velocity(self.u.iter().copied());
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for i in 0..self.c.len() {
            let g = mu[i] + self.k[i] * p.x - self.omega[i] * p.t;
            let (s, co) = g.sin_cos();
            let e = Complex64::new(self.c[i] * co, self.c[i] * s);
            den += e;
            num += e * (self.u[i] - u0);
        }
        ratio(num, den, self.scale).map(|r| u0 + r)
    }
}
