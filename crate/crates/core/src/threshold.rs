//! Sweeps of the optimized coherent information over a noise family, and the
//! noise strength where it reaches zero.
//!
//! Numerically only `Ic <= tol_zero` is decidable, so a threshold is the
//! boundary of `{p : Ic(p) > tol_zero}`. Bisection assumes `Ic` is
//! nonincreasing in the parameter and aborts when an evaluation contradicts it.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{prop1_bound, BoundValue};
use crate::channels::NoiseFamily;
use crate::coherent::{maximize_coherent_information, maximize_renyi_coherent_information, OptimizerOptions};
use crate::error::{Error, Result};

/// Default zero tolerance in bits, the optimizer noise floor on noiseless channels.
pub const DEFAULT_TOL_ZERO: f64 = 1e-4;
pub const DEFAULT_TOL_PARAM: f64 = 1e-3;
/// Points of the coarse scan that brackets the sign change before bisection.
pub const SCAN_POINTS: usize = 17;

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub param: f64,
    pub ic: f64,
    pub prop1: BoundValue,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub family: &'static str,
    pub param_name: &'static str,
    pub g: usize,
    pub d: u64,
    /// Sorted by parameter.
    pub points: Vec<SweepPoint>,
    pub tol_zero: f64,
    /// Linear interpolation of `Ic - tol_zero` across the first sign change.
    pub threshold: Option<f64>,
    pub bracket: Option<(f64, f64)>,
}

/// Coherent information of `N(p)^{⊗g}` and the resulting qubit bound at each grid point.
pub fn sweep_family(
    family: &NoiseFamily,
    g: usize,
    grid: &[f64],
    d: u64,
    opts: &OptimizerOptions,
) -> Result<SweepResult> {
    sweep_family_with(family, g, grid, d, DEFAULT_TOL_ZERO, opts)
}

pub fn sweep_family_with(
    family: &NoiseFamily,
    g: usize,
    grid: &[f64],
    d: u64,
    tol_zero: f64,
    opts: &OptimizerOptions,
) -> Result<SweepResult> {
    check_tolerance("tol_zero", tol_zero)?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    if g == 0 {
        return Err(Error::InvalidArgument("gate size g must be >= 1".into()));
    }
    for &p in grid {
        if !p.is_finite() || !family.contains(p) {
            return Err(Error::OutOfRange {
                name: "grid point",
                value: p,
                range: format!("[{}, {}] for family {}", family.range.0, family.range.1, family.name()),
            });
        }
    }
    // validates d >= 2g before any optimization runs
    prop1_bound(d, g as u64, 0.0)?;
    opts.validate()?;

    let mut params = grid.to_vec();
    params.sort_by(f64::total_cmp);
    params.dedup();

    let points = params
        .par_iter()
        .map(|&p| {
            let report = maximize_coherent_information(&family.gate_channel(p, g)?, opts)?;
            // optimizer values sit at or above zero up to rounding
            let ic = report.value;
            Ok(SweepPoint {
                param: p,
                ic,
                prop1: prop1_bound(d, g as u64, ic.max(0.0))?,
                converged: report.all_converged(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut threshold = None;
    let mut bracket = None;
    for w in points.windows(2) {
        if w[0].ic > tol_zero && w[1].ic <= tol_zero {
            let (a, b) = (w[0].ic - tol_zero, w[1].ic - tol_zero);
            let t = w[0].param + (w[1].param - w[0].param) * a / (a - b);
            threshold = Some(t.clamp(w[0].param, w[1].param));
            bracket = Some((w[0].param, w[1].param));
            break;
        }
    }

    Ok(SweepResult {
        family: family.name(),
        param_name: family.param_name,
        g,
        d,
        points,
        tol_zero,
        threshold,
        bracket,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdResult {
    /// Midpoint of the final bracket.
    pub threshold: f64,
    pub bracket: (f64, f64),
    /// `Ic` at the bracket ends: above `tol_zero` at `lo`, at most `tol_zero` at `hi`.
    pub ic_at_bracket: (f64, f64),
    /// Every evaluation, sorted by parameter.
    pub evaluations: Vec<(f64, f64)>,
    pub tol_zero: f64,
    pub tol_param: f64,
    pub all_converged: bool,
    /// Set for the Rényi variant, whose inner minimization is uncertified.
    pub heuristic: bool,
}

fn check_tolerance(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: v,
            range: "(0, inf)".into(),
        })
    }
}

/// Noise strength where the optimized `Ic(N(p)^{⊗g})` drops to `tol_zero`.
pub fn find_threshold(
    family: &NoiseFamily,
    g: usize,
    tol_zero: f64,
    tol_param: f64,
    opts: &OptimizerOptions,
) -> Result<ThresholdResult> {
    opts.validate()?;
    locate_zero(family, g, tol_zero, tol_param, false, |p| {
        let r = maximize_coherent_information(&family.gate_channel(p, g)?, opts)?;
        Ok((r.value, r.all_converged()))
    })
}

/// As [`find_threshold`] for the Rényi coherent information of order `alpha`.
pub fn find_renyi_threshold(
    family: &NoiseFamily,
    g: usize,
    alpha: f64,
    tol_zero: f64,
    tol_param: f64,
    opts: &OptimizerOptions,
) -> Result<ThresholdResult> {
    opts.validate()?;
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(1, inf)".into(),
        });
    }
    locate_zero(family, g, tol_zero, tol_param, true, |p| {
        let r = maximize_renyi_coherent_information(&family.gate_channel(p, g)?, alpha, opts)?;
        Ok((r.value, r.all_converged()))
    })
}

fn locate_zero<F>(
    family: &NoiseFamily,
    g: usize,
    tol_zero: f64,
    tol_param: f64,
    heuristic: bool,
    eval: F,
) -> Result<ThresholdResult>
where
    F: Fn(f64) -> Result<(f64, bool)> + Sync,
{
    check_tolerance("tol_zero", tol_zero)?;
    check_tolerance("tol_param", tol_param)?;
    if g == 0 {
        return Err(Error::InvalidArgument("gate size g must be >= 1".into()));
    }
    let (lo, hi) = family.range;
    let scan: Vec<f64> = if hi > lo {
        (0..SCAN_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
            .collect()
    } else {
        vec![lo]
    };
    let values = scan.par_iter().map(|&p| eval(p)).collect::<Result<Vec<_>>>()?;

    let mut all_converged = values.iter().all(|v| v.1);
    let mut evaluations: Vec<(f64, f64)> = scan.iter().zip(&values).map(|(&p, v)| (p, v.0)).collect();
    let (ic_lo, ic_hi) = (evaluations[0].1, evaluations[evaluations.len() - 1].1);
    if !(ic_lo > tol_zero && ic_hi <= tol_zero) {
        return Err(Error::NoSignChange { lo, hi, ic_lo, ic_hi });
    }
    check_monotone(&evaluations, tol_zero)?;

    let first_zero = evaluations.iter().position(|e| e.1 <= tol_zero).expect("hi end is at or below tol_zero");
    let (mut a, mut b) = (evaluations[first_zero - 1], evaluations[first_zero]);
    while b.0 - a.0 > tol_param {
        let mid = 0.5 * (a.0 + b.0);
        let (ic, converged) = eval(mid)?;
        all_converged &= converged;
        let at = evaluations.partition_point(|e| e.0 < mid);
        evaluations.insert(at, (mid, ic));
        check_monotone(&evaluations, tol_zero)?;
        if ic > tol_zero {
            a = (mid, ic);
        } else {
            b = (mid, ic);
        }
    }

    Ok(ThresholdResult {
        threshold: 0.5 * (a.0 + b.0),
        bracket: (a.0, b.0),
        ic_at_bracket: (a.1, b.1),
        evaluations,
        tol_zero,
        tol_param,
        all_converged,
        heuristic,
    })
}

/// Errors on the first point that exceeds its left neighbour by more than `slack`.
fn check_monotone(sorted: &[(f64, f64)], slack: f64) -> Result<()> {
    for i in 1..sorted.len() {
        if sorted[i].1 > sorted[i - 1].1 + slack {
            let triple = if i >= 2 {
                [sorted[i - 2], sorted[i - 1], sorted[i]]
            } else if sorted.len() >= 3 {
                [sorted[0], sorted[1], sorted[2]]
            } else {
                [sorted[0], sorted[1], sorted[1]]
            };
            return Err(Error::NotMonotone { triple });
        }
    }
    Ok(())
}
