//! Projected gradient ascent on the sphere `||A||_F = 1`.
//!
//! Objectives here are invariant under `A -> cA`, so the radial component of
//! the gradient is dropped and the iterate renormalized after every step.

use crate::error::Result;
use crate::linalg::{frob_inner, CMatrix, C64};

/// Value and ascent direction `D` with `df = Re <D, dA>`.
pub(crate) type Evaluation = (f64, CMatrix);

pub(crate) struct AscentSettings {
    pub max_iters: usize,
    pub initial_step: f64,
    pub step_decay: f64,
    pub grad_tol: f64,
    /// Converged when the value gains less than this over `STALL_WINDOW` steps.
    pub value_tol: f64,
}

pub(crate) struct AscentOutcome {
    pub value: f64,
    pub point: CMatrix,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 50;
const MAX_STEP: f64 = 1e4;
const STALL_WINDOW: usize = 20;

pub(crate) fn normalize(a: &CMatrix) -> CMatrix {
    let n = a.norm();
    a / C64::from(n)
}

fn tangent(a: &CMatrix, d: &CMatrix) -> CMatrix {
    let radial = frob_inner(a, d).re;
    d - a * C64::from(radial)
}

pub(crate) fn ascend<F>(start: &CMatrix, settings: &AscentSettings, eval: F) -> Result<AscentOutcome>
where
    F: Fn(&CMatrix) -> Result<Evaluation>,
{
    let mut a = normalize(start);
    let (mut value, raw) = eval(&a)?;
    let mut grad = tangent(&a, &raw);
    let mut step = settings.initial_step;
    let mut converged = false;
    let mut iterations = 0;
    let mut history = std::collections::VecDeque::with_capacity(STALL_WINDOW + 1);
    history.push_back(value);

    while iterations < settings.max_iters {
        let gnorm2 = grad.norm_squared();
        if gnorm2.sqrt() < settings.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = normalize(&(&a + &grad * C64::from(step)));
            let (cand_value, cand_raw) = eval(&cand)?;
            if cand_value >= value + ARMIJO * step * gnorm2 {
                accepted = Some((cand, cand_value, cand_raw));
                break;
            }
            step *= settings.step_decay;
        }
        match accepted {
            Some((cand, cand_value, cand_raw)) => {
                grad = tangent(&cand, &cand_raw);
                a = cand;
                value = cand_value;
                step = (step / settings.step_decay).min(MAX_STEP);
                history.push_back(value);
                if history.len() > STALL_WINDOW {
                    let old = history.pop_front().expect("window is nonempty");
                    if value - old < settings.value_tol * value.abs().max(1.0) {
                        converged = true;
                        break;
                    }
                }
            }
            None => {
                // no representable increase left along the gradient
                converged = true;
                break;
            }
        }
    }

    Ok(AscentOutcome {
        value,
        point: a,
        iterations,
        converged,
    })
}

/// Central finite-difference gradient over the real and imaginary parts of `A`.
pub(crate) fn finite_difference_gradient<F>(a: &CMatrix, h: f64, f: F) -> Result<CMatrix>
where
    F: Fn(&CMatrix) -> Result<f64>,
{
    let mut grad = CMatrix::zeros(a.nrows(), a.ncols());
    for idx in 0..a.len() {
        let mut partial = [0.0f64; 2];
        for (part, dir) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
            let mut plus = a.clone();
            plus[idx] += dir * h;
            let mut minus = a.clone();
            minus[idx] -= dir * h;
            partial[part] = (f(&plus)? - f(&minus)?) / (2.0 * h);
        }
        grad[idx] = C64::new(partial[0], partial[1]);
    }
    Ok(grad)
}
