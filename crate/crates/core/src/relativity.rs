//! Relativistic kinematics in 1+1 dimensions.
//!
//! A plane wave of group velocity `u` has wavenumber `k = u / sqrt(1 - u^2)`
//! and frequency `omega = 1 / sqrt(1 - u^2)`. Under a boost with velocity `v`
//! the velocity maps as `u -> (u - v) / (1 - u v)` and the phase
//! `mu + k x - omega t` is unchanged.

use crate::spectrum::{PlaneWave, PlaneWaveSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boost {
    v: f64,
}

impl Boost {
    pub fn new(v: f64) -> Result<Self> {
        if !(v.abs() < 1.0) {
            return Err(Error::InvalidBoost(v));
        }
        Ok(Self { v })
    }

    pub const fn identity() -> Self {
        Self { v: 0.0 }
    }

    pub fn velocity(&self) -> f64 {
        self.v
    }

    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.v * self.v).sqrt()
    }

    pub fn inverse(&self) -> Self {
        Self { v: -self.v }
    }

    /// The single boost equivalent to applying `self` and then `next`.
    pub fn then(&self, next: &Boost) -> Self {
        Self {
            v: (self.v + next.v) / (1.0 + self.v * next.v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpacetimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpacetimePoint {
    pub const ORIGIN: SpacetimePoint = SpacetimePoint { x: 0.0, t: 0.0 };

    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }

    /// Coordinates of the same event in the boosted frame.
    pub fn boosted(&self, boost: &Boost) -> Self {
        let (g, v) = (boost.gamma(), boost.v);
        Self {
            x: g * (self.x - v * self.t),
            t: g * (self.t - v * self.x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub k: f64,
    pub omega: f64,
}

pub fn dispersion(u: f64) -> Result<Dispersion> {
    if !(u.abs() < 1.0) {
        return Err(Error::Superluminal(u));
    }
    Ok(dispersion_unchecked(u))
}

#[inline]
pub(crate) fn dispersion_unchecked(u: f64) -> Dispersion {
    let omega = 1.0 / ((1.0 - u) * (1.0 + u)).sqrt();
    Dispersion { k: u * omega, omega }
}

/// `gamma = mu + k x - omega t`.
pub fn phase(u: f64, mu: f64, p: SpacetimePoint) -> Result<f64> {
    let d = dispersion(u)?;
    Ok(mu + d.k * p.x - d.omega * p.t)
}

/// Group velocity seen in the boosted frame.
pub fn add_velocity(u_lab: f64, boost: &Boost) -> f64 {
    let v = boost.v;
    (u_lab - v) / (1.0 - u_lab * v)
}

/// Boosts a two-wavevector directly: `k -> gamma (k - v omega)`,
/// `omega -> gamma (omega - v k)`.
pub fn boost_momentum(d: Dispersion, boost: &Boost) -> Dispersion {
    let (g, v) = (boost.gamma(), boost.v);
    Dispersion {
        k: g * (d.k - v * d.omega),
        omega: g * (d.omega - v * d.k),
    }
}

/// `du_lab / du` evaluated at a boosted-frame velocity `u`.
pub fn density_jacobian(u: f64, boost: &Boost) -> f64 {
    let v = boost.v;
    let d = 1.0 + u * v;
    (1.0 - v * v) / (d * d)
}

/// Pulls a lab-frame density back to the boosted frame:
/// `c_u = c_lab((u + v) / (1 + u v)) (1 - v^2) / (1 + u v)^2`.
pub fn boost_spectrum_density<F>(lab_density: F, u: f64, boost: &Boost) -> f64
where
    F: Fn(f64) -> f64,
{
    let u_lab = add_velocity(u, &boost.inverse());
    lab_density(u_lab) * density_jacobian(u, boost)
}

/// How amplitudes change when a wave set is boosted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AmplitudeTransform {
    /// Amplitudes follow the boosted spectrum: each node keeps its lab
    /// amplitude times the density Jacobian at its new velocity.
    #[default]
    DensityJacobian,
    /// Velocities are relabelled, amplitudes left untouched.
    Relabel,
}

pub fn boost_wave_set(waves: &PlaneWaveSet, boost: &Boost) -> PlaneWaveSet {
    boost_wave_set_with(waves, boost, AmplitudeTransform::default())
}

pub fn boost_wave_set_with(waves: &PlaneWaveSet, boost: &Boost, transform: AmplitudeTransform) -> PlaneWaveSet {
    if boost.v == 0.0 {
        return waves.clone();
    }
    let limit = 1.0 - f64::EPSILON;
    let mapped = waves
        .waves()
        .iter()
        .map(|w| {
            let u = add_velocity(w.u, boost).clamp(-limit, limit);
            let c = match transform {
                AmplitudeTransform::DensityJacobian => w.c * density_jacobian(u, boost),
                AmplitudeTransform::Relabel => w.c,
            };
            PlaneWave { u, c }
        })
        .collect();
    let mut out = PlaneWaveSet::from_parts_unchecked(mapped);
    // Keep the input's overall scale so that normalized sets stay normalized.
    let scale = (waves.norm_sqr() / out.norm_sqr()).sqrt();
    if scale.is_finite() && scale > 0.0 {
        out = PlaneWaveSet::from_parts_unchecked(
            out.waves()
                .iter()
                .map(|w| PlaneWave { u: w.u, c: w.c * scale })
                .collect(),
        );
    }
    out
}
