//! CSV emission and parsing.
//!
//! Floats are written with 12 significant digits in plain decimal notation,
//! so output is byte-stable across platforms and thread counts.

use std::fmt::Write as _;

use anyhow::{bail, Context};
use wvsim_core::montecarlo::{BoostCurve, Histogram};
use wvsim_core::universal::{SurfaceGrid, TrajectoryPoint};

pub const CURVE_HEADER: &str = "boost,p_super,stderr,n_samples,u_bar_eff,sigma_eff";
pub const HISTOGRAM_HEADER: &str = "bin_low,bin_high,density";
pub const TRAJECTORY_HEADER: &str = "boost,u_bar_eff,sigma_eff,p_universal";
pub const SURFACE_HEADER: &str = "u_bar,sigma,p_super";

/// 12 significant digits, no exponent, trailing zeros trimmed.
pub fn format_decimal(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let mut out = String::new();
    if v < 0.0 {
        out.push('-');
    }
    if exp >= 11 {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', (exp - 11) as usize));
        return out;
    }
    if exp >= 0 {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        out.push('.');
        out.push_str(&digits[split..]);
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    }
    let trimmed = out.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

fn row(out: &mut String, fields: &[String]) {
    let _ = writeln!(out, "{}", fields.join(","));
}

pub fn emit_curve(curve: &BoostCurve) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for p in &curve.points {
        row(
            &mut out,
            &[
                format_decimal(p.boost),
                format_decimal(p.estimate.p_super),
                format_decimal(p.estimate.stderr),
                p.estimate.n_samples.to_string(),
                format_decimal(p.u_bar_eff),
                format_decimal(p.sigma_eff),
            ],
        );
    }
    out
}

/// Per-bin densities followed by the two tail masses, written as
/// `-inf,lo,mass` and `hi,inf,mass`.
pub fn emit_histogram(hist: &Histogram) -> anyhow::Result<String> {
    if hist.total() == 0 {
        bail!("histogram is empty");
    }
    let edges = hist.edges();
    let mut out = format!("{HISTOGRAM_HEADER}\n");
    for (i, d) in hist.density().iter().enumerate() {
        row(
            &mut out,
            &[
                format_decimal(edges[i]),
                format_decimal(edges[i + 1]),
                format_decimal(*d),
            ],
        );
    }
    let spec = hist.spec();
    row(
        &mut out,
        &[
            "-inf".into(),
            format_decimal(spec.lo),
            format_decimal(hist.underflow_mass()),
        ],
    );
    row(
        &mut out,
        &[
            format_decimal(spec.hi),
            "inf".into(),
            format_decimal(hist.overflow_mass()),
        ],
    );
    Ok(out)
}

pub fn emit_trajectory(points: &[TrajectoryPoint]) -> String {
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    for p in points {
        row(
            &mut out,
            &[
                format_decimal(p.boost),
                format_decimal(p.u_bar_eff),
                format_decimal(p.sigma_eff),
                format_decimal(p.p_universal),
            ],
        );
    }
    out
}

/// Long format, `u_bar` outer and `sigma` inner.
pub fn emit_surface(grid: &SurfaceGrid) -> String {
    let mut out = format!("{SURFACE_HEADER}\n");
    for (i, &u) in grid.u_bars.iter().enumerate() {
        for (j, &s) in grid.sigmas.iter().enumerate() {
            row(
                &mut out,
                &[format_decimal(u), format_decimal(s), format_decimal(grid.values[i][j])],
            );
        }
    }
    out
}

/// Generic table writer for auxiliary outputs.
pub fn emit_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = format!("{}\n", header.join(","));
    for r in rows {
        row(&mut out, &r.iter().map(|&v| format_decimal(v)).collect::<Vec<_>>());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub boost: f64,
    pub p_super: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub u_bar_eff: f64,
    pub sigma_eff: f64,
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, want: &str) -> anyhow::Result<()> {
    let got = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if got != want {
        bail!("unexpected header {got:?}, expected {want:?}");
    }
    Ok(())
}

fn parse_field(s: &str) -> anyhow::Result<f64> {
    s.parse::<f64>().with_context(|| format!("bad number {s:?}"))
}

pub fn parse_curve(text: &str) -> anyhow::Result<Vec<CurveRow>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, CURVE_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(CurveRow {
                boost: parse_field(&rec[0])?,
                p_super: parse_field(&rec[1])?,
                stderr: parse_field(&rec[2])?,
                n_samples: rec[3].parse().context("bad sample count")?,
                u_bar_eff: parse_field(&rec[4])?,
                sigma_eff: parse_field(&rec[5])?,
            })
        })
        .collect()
}

/// `(low, high, value)` rows; the tail rows carry infinite bounds and a mass.
pub fn parse_histogram(text: &str) -> anyhow::Result<Vec<(f64, f64, f64)>> {
    let mut rdr = reader(text);
    check_header(&mut rdr, HISTOGRAM_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok((parse_field(&rec[0])?, parse_field(&rec[1])?, parse_field(&rec[2])?))
        })
        .collect()
}

/// Total probability recorded in a parsed histogram.
pub fn histogram_mass(rows: &[(f64, f64, f64)]) -> f64 {
    rows.iter()
        .map(|&(lo, hi, v)| {
            if lo.is_finite() && hi.is_finite() {
                v * (hi - lo)
            } else {
                v
            }
        })
        .sum()
}
