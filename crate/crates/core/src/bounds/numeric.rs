//! Numeric maximization of separable objectives `sum_i f(x_i)` over the budget
//! set `{x_i >= 0, sum_i x_i <= c}`: a lattice scan followed by projected
//! gradient ascent from the best lattice points. Used to cross-check the
//! closed-form optima.

use crate::error::{Error, Result};

/// Lattice points visited at most, across all dimensions.
const LATTICE_BUDGET: usize = 200_000;
const REFINE_FROM: usize = 4;
const REFINE_ITERS: usize = 5000;
const FD_STEP: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct BudgetOptimum {
    pub value: f64,
    pub point: Vec<f64>,
}

/// Maximizes `sum_i f(x_i)` over `x in R^n`, `x >= 0`, `sum x <= budget`.
///
/// `f` must be finite on `[0, budget]`.
pub fn maximize_separable<F>(n: usize, budget: f64, f: F) -> Result<BudgetOptimum>
where
    F: Fn(f64) -> f64,
{
    if n == 0 || n > 8 {
        return Err(Error::InvalidArgument(format!("dimension {n} outside 1..=8")));
    }
    if !(budget >= 0.0) || !budget.is_finite() {
        return Err(Error::InvalidArgument(format!("budget {budget} must be finite and >= 0")));
    }
    let objective = |x: &[f64]| x.iter().map(|&v| f(v)).sum::<f64>();
    let m = lattice_resolution(n);

    // best few lattice points, value descending
    let mut top: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut counts = vec![0usize; n];
    loop {
        let x: Vec<f64> = counts.iter().map(|&c| budget * c as f64 / m as f64).collect();
        let v = objective(&x);
        if top.len() < REFINE_FROM || v > top[top.len() - 1].0 {
            top.push((v, counts.clone()));
            top.sort_by(|a, b| b.0.total_cmp(&a.0));
            top.truncate(REFINE_FROM);
        }
        if !next_composition(&mut counts, m) {
            break;
        }
    }

    let mut best = BudgetOptimum {
        value: f64::NEG_INFINITY,
        point: Vec::new(),
    };
    for (_, counts) in top {
        let start: Vec<f64> = counts.iter().map(|&c| budget * c as f64 / m as f64).collect();
        let (value, point) = projected_ascent(start, budget, &f);
        if value > best.value {
            best = BudgetOptimum { value, point };
        }
    }
    Ok(best)
}

fn lattice_resolution(n: usize) -> usize {
    // number of points with sum <= m is C(m + n, n)
    let mut m = 1;
    while binomial(m + 1 + n, n) <= LATTICE_BUDGET {
        m += 1;
    }
    m
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Advances to the next `c` with `c_i >= 0`, `sum c <= m`, odometer order.
fn next_composition(c: &mut [usize], m: usize) -> bool {
    let total: usize = c.iter().sum();
    if total < m {
        c[0] += 1;
        return true;
    }
    for i in 0..c.len() - 1 {
        if c[i] > 0 {
            c[i] = 0;
            c[i + 1] += 1;
            let total: usize = c.iter().sum();
            if total <= m {
                return true;
            }
        }
    }
    false
}

fn projected_ascent<F: Fn(f64) -> f64>(mut x: Vec<f64>, budget: f64, f: &F) -> (f64, Vec<f64>) {
    let objective = |x: &[f64]| x.iter().map(|&v| f(v)).sum::<f64>();
    let mut value = objective(&x);
    let mut step = budget.max(1e-12);
    for _ in 0..REFINE_ITERS {
        let grad: Vec<f64> = x.iter().map(|&v| derivative(f, v, budget)).collect();
        let mut improved = false;
        while step > 1e-16 * budget.max(1.0) {
            let cand = project(
                &x.iter().zip(&grad).map(|(v, g)| v + step * g).collect::<Vec<_>>(),
                budget,
            );
            let cv = objective(&cand);
            if cv > value {
                x = cand;
                value = cv;
                improved = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (value, x)
}

// one-sided at the ends of [0, budget] so f is never evaluated outside it
fn derivative<F: Fn(f64) -> f64>(f: &F, v: f64, budget: f64) -> f64 {
    let lo = (v - FD_STEP).max(0.0);
    let hi = (v + FD_STEP).min(budget);
    if hi <= lo {
        return 0.0;
    }
    (f(hi) - f(lo)) / (hi - lo)
}

/// Euclidean projection onto `{x >= 0, sum x <= budget}`.
pub(crate) fn project(y: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = y.iter().map(|&v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    // projection onto the simplex {x >= 0, sum x = budget}
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - budget) / (j + 1) as f64;
        if u - t > 0.0 {
            shift = t;
        }
    }
    y.iter().map(|&v| (v - shift).max(0.0)).collect()
}
