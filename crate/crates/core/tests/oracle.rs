//! The Monte Carlo pipeline against brute-force estimators written from the
//! formulas alone, with their own random streams.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::{PI, TAU};
use wvsim_core::montecarlo::{estimate, estimate_ergodic, ExperimentConfig, Theory};
use wvsim_core::relativity::Boost;
use wvsim_core::spectrum::discretize;

/// Lab waves seen from a frame moving at `v`: velocities added, amplitudes
/// weighted by the density Jacobian, total intensity kept.
fn boosted(lab: &[(f64, f64)], v: f64) -> Vec<(f64, f64)> {
    let raw: Vec<(f64, f64)> = lab
        .iter()
        .map(|&(u, c)| {
            let w = (u - v) / (1.0 - u * v);
            (w, c * (1.0 - v * v) / (1.0 + w * v).powi(2))
        })
        .collect();
    let before: f64 = lab.iter().map(|w| w.1 * w.1).sum();
    let after: f64 = raw.iter().map(|w| w.1 * w.1).sum();
    let s = (before / after).sqrt();
    raw.into_iter().map(|(u, c)| (u, c * s)).collect()
}

fn lab_waves(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    discretize(&cfg.spectrum, cfg.n_per_component)
        .unwrap()
        .waves()
        .iter()
        .map(|w| (w.u, w.c))
        .collect()
}

/// `(p, stderr)` from a fresh ensemble at the origin.
fn brute_force(waves: &[(f64, f64)], theory: Theory, v: f64, m: usize, seed: u64) -> (f64, f64) {
    let mut rng = StdRng::seed_from_u64(seed);
    let rho = (1.0 - v) / (1.0 + v);
    let mut hits = 0usize;
    for _ in 0..m {
        let value = match theory {
            Theory::KleinGordon => {
                let (mut num, mut den) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for &(u, c) in waves {
                    let e = Complex64::from_polar(c, rng.gen::<f64>() * TAU);
                    num += e * u;
                    den += e;
                }
                (num / den).re
            }
            Theory::Dirac => {
                let (mut eta, mut chi) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for &(u, c) in waves {
                    let e = Complex64::from_polar(c, rng.gen::<f64>() * TAU);
                    eta += e * (1.0 + u).sqrt();
                    chi += e * (1.0 - u).sqrt();
                }
                let theta = rng.gen::<f64>() * PI;
                let phi = rng.gen::<f64>() * TAU;
                // <post| sigma_z |psi> / <post|psi> with the chi component scaled by rho.
                let (a, b) = (
                    Complex64::new((theta / 2.0).cos(), 0.0),
                    Complex64::from_polar((theta / 2.0).sin(), phi),
                );
                let (top, bottom) = (a * eta, b * chi * rho);
                ((top - bottom) / (top + bottom)).re
            }
        };
        if value.abs() > 1.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / m as f64;
    (p, (p * (1.0 - p) / m as f64).sqrt())
}

fn agree(theory: Theory, v: f64) {
    let mut cfg = ExperimentConfig::reference();
    cfg.theory = theory;
    cfg.n_samples = 20_000;
    let (_, lib) = estimate(&cfg, &Boost::new(v).unwrap()).unwrap();
    let waves = boosted(&lab_waves(&cfg), v);
    let (p, se) = brute_force(&waves, theory, v, 20_000, 77 + (v * 100.0) as u64);
    let z = (lib.p_super - p).abs() / lib.stderr.hypot(se);
    assert!(
        z < 3.0,
        "{theory:?} v={v}: library {} vs oracle {p} ({z:.2} sigma)",
        lib.p_super
    );
}

#[test]
fn klein_gordon_matches_brute_force() {
    for v in [0.0, 0.3, 0.6, 0.9] {
        agree(Theory::KleinGordon, v);
    }
}

#[test]
fn dirac_matches_brute_force() {
    for v in [0.0, 0.5, 0.9] {
        agree(Theory::Dirac, v);
    }
}

#[test]
fn ergodic_estimate_is_stable_under_a_longer_window() {
    let mut cfg = ExperimentConfig::reference();
    cfg.n_samples = 20_000;
    let b = Boost::new(0.3).unwrap();
    let (_, one) = estimate_ergodic(&cfg, &b).unwrap();
    cfg.ergodic_window_scale = 3.0;
    let (_, three) = estimate_ergodic(&cfg, &b).unwrap();
    let z = (one.p_super - three.p_super).abs() / one.stderr.hypot(three.stderr);
    assert!(z < 3.0, "{} vs {} ({z:.2} sigma)", one.p_super, three.p_super);
}
