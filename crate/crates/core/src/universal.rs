//! Universal distribution of Klein-Gordon weak velocities.
//!
//! For many random partial waves the weak velocity follows a generalized
//! Lorentzian that depends only on the mean `u_bar` and width `sigma` of the
//! spectrum:
//!
//! ```text
//! P(v) = sigma^2 / (2 ((v - u_bar)^2 + sigma^2)^{3/2})
//! ```
//!
//! Its antiderivative is `(v - u_bar) / (2 sqrt((v - u_bar)^2 + sigma^2))`,
//! which gives `P_super` in closed form.

use crate::relativity::{boost_wave_set_with, AmplitudeTransform, Boost};
use crate::spectrum::{discretize, moments_with, MomentWeighting, VelocitySpectrum};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalParams {
    u_bar: f64,
    sigma: f64,
}

impl UniversalParams {
    pub fn new(u_bar: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", format!("{sigma} must be positive")));
        }
        if !u_bar.is_finite() {
            return Err(Error::invalid("u_bar", "must be finite"));
        }
        Ok(Self { u_bar, sigma })
    }

    pub fn u_bar(&self) -> f64 {
        self.u_bar
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

pub fn universal_pdf(v_weak: f64, params: &UniversalParams) -> f64 {
    let s2 = params.sigma * params.sigma;
    let d = v_weak - params.u_bar;
    s2 / (2.0 * (d * d + s2).powf(1.5))
}

/// `1 - a / sqrt(a^2 + s^2)`, without cancellation for `a >> s`.
fn tail(a: f64, s: f64) -> f64 {
    let r = a.hypot(s);
    if a > 0.0 {
        s * s / (r * (r + a))
    } else {
        1.0 - a / r
    }
}

pub fn universal_p_super(params: &UniversalParams) -> f64 {
    let s = params.sigma;
    0.5 * tail(1.0 - params.u_bar, s) + 0.5 * tail(1.0 + params.u_bar, s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub boost: f64,
    pub u_bar_eff: f64,
    pub sigma_eff: f64,
    pub p_universal: f64,
}

pub fn boost_trajectory(
    spectrum: &VelocitySpectrum,
    n_per_component: usize,
    boost_grid: &[Boost],
) -> Result<Vec<TrajectoryPoint>> {
    boost_trajectory_with(
        spectrum,
        n_per_component,
        boost_grid,
        AmplitudeTransform::default(),
        MomentWeighting::default(),
    )
}

pub fn boost_trajectory_with(
    spectrum: &VelocitySpectrum,
    n_per_component: usize,
    boost_grid: &[Boost],
    transform: AmplitudeTransform,
    weighting: MomentWeighting,
) -> Result<Vec<TrajectoryPoint>> {
    let lab = discretize(spectrum, n_per_component)?;
    boost_grid
        .iter()
        .map(|b| {
            let m = moments_with(&boost_wave_set_with(&lab, b, transform), weighting);
            // A collapsed spectrum still has a well-defined limit; keep sigma
            // strictly positive so the closed form applies.
            let params = UniversalParams::new(m.u_bar, m.sigma_eff.max(f64::MIN_POSITIVE))?;
            Ok(TrajectoryPoint {
                boost: b.velocity(),
                u_bar_eff: m.u_bar,
                sigma_eff: m.sigma_eff,
                p_universal: universal_p_super(&params),
            })
        })
        .collect()
}

/// `P_super` tabulated on a rectangular `(u_bar, sigma)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub u_bars: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// `values[i][j]` belongs to `(u_bars[i], sigmas[j])`.
    pub values: Vec<Vec<f64>>,
}

/// Inclusive, evenly spaced grid over both ranges with `resolution` nodes
/// per axis.
pub fn surface_grid(u_bar_range: (f64, f64), sigma_range: (f64, f64), resolution: usize) -> Result<SurfaceGrid> {
    if resolution < 2 {
        return Err(Error::invalid("resolution", "need at least two nodes per axis"));
    }
    if !(sigma_range.0 > 0.0 && sigma_range.1 >= sigma_range.0) {
        return Err(Error::invalid(
            "sigma_range",
            "sigma values must be positive and ordered",
        ));
    }
    if !(u_bar_range.1 >= u_bar_range.0) {
        return Err(Error::invalid("u_bar_range", "range must be ordered"));
    }
    let axis = |(a, b): (f64, f64)| -> Vec<f64> {
        (0..resolution)
            .map(|i| a + (b - a) * i as f64 / (resolution - 1) as f64)
            .collect()
    };
    let u_bars = axis(u_bar_range);
    let sigmas = axis(sigma_range);
    let values = u_bars
        .iter()
        .map(|&u| {
            sigmas
                .iter()
                .map(|&s| UniversalParams::new(u, s).map(|p| universal_p_super(&p)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGrid { u_bars, sigmas, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::build_double_gaussian;
    use approx::assert_relative_eq;

    fn p(u: f64, s: f64) -> UniversalParams {
        UniversalParams::new(u, s).unwrap()
    }

    /// Adaptive Simpson, the independent route to the tail integrals.
    fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn step<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            eps: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * eps {
                return left + right + delta / 15.0;
            }
            step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, 50)
    }

    /// Both tails by quadrature, mapping `[1, inf)` onto `[0, 1)`.
    fn p_super_quadrature(params: &UniversalParams) -> f64 {
        let right = |s: f64| {
            if s >= 1.0 {
                return 0.0;
            }
            let u = 1.0 + s / (1.0 - s);
            universal_pdf(u, params) / ((1.0 - s) * (1.0 - s))
        };
        let left = |s: f64| {
            if s >= 1.0 {
                return 0.0;
            }
            let u = -1.0 - s / (1.0 - s);
            universal_pdf(u, params) / ((1.0 - s) * (1.0 - s))
        };
        adaptive_simpson(&right, 0.0, 1.0, 1e-13) + adaptive_simpson(&left, 0.0, 1.0, 1e-13)
    }

    #[test]
    fn pdf_examples() {
        let q = p(0.3, 0.2);
        assert_relative_eq!(universal_pdf(0.3, &q), 1.0 / 0.4, max_relative = 1e-15);
        assert_relative_eq!(
            universal_pdf(0.5, &q),
            1.0 / (0.4 * 2f64.powf(1.5)),
            max_relative = 1e-14
        );
        assert_relative_eq!(universal_pdf(0.1, &q), universal_pdf(0.5, &q), max_relative = 1e-14);
    }

    #[test]
    fn pdf_is_normalized() {
        for (u, s) in [(0.0, 0.1), (0.7, 0.5), (-0.4, 0.02)] {
            let q = p(u, s);
            // Over the whole line via u = u_bar + tan-free map s/(1-s^2).
            let f = |x: f64| {
                let d = 1.0 - x * x;
                if d <= 0.0 {
                    return 0.0;
                }
                let v = u + x / d;
                universal_pdf(v, &q) * (1.0 + x * x) / (d * d)
            };
            let total = adaptive_simpson(&f, -1.0, 1.0, 1e-12);
            assert!((total - 1.0).abs() < 1e-8, "{total}");
        }
    }

    #[test]
    fn p_super_examples() {
        assert!(universal_p_super(&p(0.0, 1e-9)) < 1e-17);
        assert_relative_eq!(
            universal_p_super(&p(0.0, 0.1)),
            1.0 - 1.0 / 1.01f64.sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(universal_p_super(&p(0.0, 0.1)), 4.963e-3, max_relative = 1e-3);
        let want = 0.5 + 0.5 * (1.0 - 2.0 / 4.01f64.sqrt());
        assert_relative_eq!(universal_p_super(&p(1.0, 0.1)), want, max_relative = 1e-12);
        assert!((universal_p_super(&p(1.0, 0.1)) - 0.5006).abs() < 1e-4);
        // Quadrature agrees on the same examples.
        for (u, s) in [(0.0, 0.1), (1.0, 0.1), (1.5, 0.3), (-2.0, 0.05)] {
            let q = p(u, s);
            assert!((universal_p_super(&q) - p_super_quadrature(&q)).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_matches_quadrature_on_a_coarse_grid() {
        // The full 100 x 100 sweep lives in the acceptance suite.
        for i in 0..15 {
            for j in 0..15 {
                let q = p(-0.98 + 1.96 * i as f64 / 14.0, 0.01 + 0.98 * j as f64 / 14.0);
                let d = (universal_p_super(&q) - p_super_quadrature(&q)).abs();
                assert!(d < 1e-10, "{q:?}: {d}");
            }
        }
    }

    #[test]
    fn surface_grid_properties() {
        let g = surface_grid((-0.9, 0.9), (0.1, 0.9), 9).unwrap();
        assert_eq!(g.values.len(), 9);
        assert!(g.values.iter().all(|row| row.len() == 9));
        assert_eq!(g.values[4][0], universal_p_super(&p(0.0, 0.1)));
        for (i, row) in g.values.iter().enumerate() {
            assert!(row.windows(2).all(|w| w[1] > w[0]), "not monotone in sigma");
            let mirror = &g.values[8 - i];
            for (a, b) in row.iter().zip(mirror) {
                assert!((a - b).abs() < 1e-15);
            }
            assert!(row.iter().all(|&v| v > 0.0 && v < 1.0));
        }
        assert!(surface_grid((0.0, 1.0), (0.0, 1.0), 5).is_err());
        assert!(surface_grid((0.0, 1.0), (0.1, 1.0), 1).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let s = build_double_gaussian(0.5, -0.5, 0.1).unwrap();
        let grid: Vec<Boost> = [0.0, 0.3, 0.999].iter().map(|&v| Boost::new(v).unwrap()).collect();
        let traj = boost_trajectory(&s, 100, &grid).unwrap();
        let lab = crate::spectrum::moments(&discretize(&s, 100).unwrap());
        assert_eq!(traj[0].u_bar_eff, lab.u_bar);
        assert_eq!(traj[0].sigma_eff, lab.sigma_eff);
        assert!(traj[0].u_bar_eff.abs() < 1e-15);
        assert_eq!(traj[0].p_universal, universal_p_super(&p(lab.u_bar, lab.sigma_eff)));
        // Boosting forward shifts all speeds toward -1.
        assert!(traj[1].u_bar_eff < 0.0);
        let end = traj[2];
        assert!(end.u_bar_eff < -0.99, "{end:?}");
        assert!(end.sigma_eff < 0.01, "{end:?}");
        assert_eq!(end.p_universal, universal_p_super(&p(end.u_bar_eff, end.sigma_eff)));
    }
}
