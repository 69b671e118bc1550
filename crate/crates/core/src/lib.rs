//! Weak values of the local group velocity for 1+1 dimensional relativistic
//! random waves, and how a Lorentz boost changes the probability that they
//! exceed the speed of light.
//!
//! Natural units throughout: `hbar = c = m = 1`, so a weak velocity is
//! superluminal when `|v| > 1`.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectrum`] builds group-velocity spectra and discretizes them into
//!   plane-wave sets with random phases.
//! * [`relativity`] holds the kinematics: dispersion, phases, velocity
//!   addition and the action of a boost on a wave set.
//! * [`kg`] and [`dirac`] evaluate the weak velocity for Klein-Gordon and
//!   Dirac wavepackets.
//! * [`montecarlo`] turns single evaluations into ensemble estimates of
//!   `P_super` and boost curves.
//! * [`universal`] is the closed-form generalized Lorentzian used to
//!   cross-check the Klein-Gordon Monte Carlo.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirac;
pub mod error;
pub mod kg;
pub mod montecarlo;
pub mod relativity;
pub mod rng;
pub mod spectrum;
pub mod universal;

pub use error::{Error, Result};
