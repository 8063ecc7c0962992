//! Closed-form space-overhead bounds.
//!
//! Every formula is evaluated exactly as written, mixed `ln`/`log2` factors
//! included. Coherent-information values are inputs, so a bound can be driven
//! by an analytic value, optimizer output, or a user-supplied number.
//!
//! Shorthand used below: `l = ln(1/(1 - eps*L))`, `k = 1/(1 - 4l)`.

mod numeric;

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::channels::QuantumChannel;
use crate::coherent::{maximize_coherent_information, OptimizerOptions};
use crate::error::{Error, Result};
use crate::linalg::h2;

pub use numeric::{maximize_separable, BudgetOptimum};

/// Largest admissible accuracy `eps` (exclusive).
pub const EPS_MAX: f64 = 0.11;

/// Largest admissible `eps * L`, `1 - e^{-1/8}`; at this value `2l = 1/4`.
pub fn max_eps_lip() -> f64 {
    -(-0.125f64).exp_m1()
}

// Lets `eps * L` land on the boundary despite the rounding of the product.
const BOUNDARY_SLACK: f64 = 1e-12;

pub mod formulas {
    pub const ONESHOT: &str = "(Ic + h2(eps_i)) / (1 - 2 eps_i)";
    pub const LEMMA1: &str = "sum_i (Ic_g + h2(eps_i)) / (1 - 2 eps_i)";
    pub const P1: &str = "Ic_g [(G - 1) + 1/(1 - 4 ln(1/(1 - eps L)))]";
    pub const P3: &str = "G/(1 - 4 ln(1/(1 - eps L))) h2((2/G) ln(1/(1 - eps L)))";
    pub const THM1: &str = "(d - Ic_g/(1 - 4 ln(1/(1 - eps L)))) / (Ic_g/g + (G/(g(G - 1))) h2((2g/d) ln(1/(1 - eps L)))/(1 - 4 ln(1/(1 - eps L))))";
    pub const PROP1: &str = "d / (Ic_g/g + (ln(4d/g) + 8/7)/(2(d - g) ln 2)) - 2g";
    pub const COROLLARY1: &str = "g / Ic_g";
    pub const PROP2: &str = "(g/4) exp(2 ln2 d - 4/3) - 1";
    pub const RENYI_BOUND: &str = "G Ic_alpha + (alpha/(ln2 (alpha - 1))) (2 ln(1/(1 - eps L)))/(1 - 2 ln(1/(1 - eps L)))";
    pub const RENYI_DMAX: &str = "alpha / (3 ln2 (alpha - 1))";
    pub const CAPACITY_RATIO: &str = "min_k k / Ic(N^{(x)k})";
}

/// Parameters shared by the fault-tolerance bounds.
#[derive(Clone, Debug, Serialize)]
pub struct BoundParams {
    /// Logical qubits.
    pub d: u64,
    /// Gate size.
    pub g: u64,
    /// Target accuracy, in `(0, 0.11)`.
    pub eps: f64,
    /// Inverse-Lipschitz constant.
    pub lip: f64,
    /// Gate count; required by the theorem-level bound.
    pub gates: Option<u64>,
    pub alpha: Option<f64>,
}

impl BoundParams {
    pub fn new(d: u64, g: u64, eps: f64, lip: f64) -> Result<Self> {
        if d == 0 || g == 0 {
            return Err(Error::InvalidArgument("d and g must be >= 1".into()));
        }
        check_eps_lip(eps, lip)?;
        Ok(Self {
            d,
            g,
            eps,
            lip,
            gates: None,
            alpha: None,
        })
    }

    pub fn with_gates(mut self, gates: u64) -> Result<Self> {
        if gates == 0 {
            return Err(Error::InvalidArgument("gate count G must be >= 1".into()));
        }
        self.gates = Some(gates);
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        self.alpha = Some(alpha);
        Ok(self)
    }

    /// `l = ln(1/(1 - eps L))`.
    pub fn log_term(&self) -> f64 {
        log_term(self.eps, self.lip)
    }

    /// `k = 1/(1 - 4l)`, at most 2 for admissible parameters.
    pub fn inverse_margin(&self) -> f64 {
        1.0 / (1.0 - 4.0 * self.log_term())
    }
}

fn check_eps_lip(eps: f64, lip: f64) -> Result<()> {
    if !(eps > 0.0 && eps < EPS_MAX) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: format!("(0, {EPS_MAX})"),
        });
    }
    if !(lip > 0.0 && lip.is_finite()) {
        return Err(Error::OutOfRange {
            name: "L",
            value: lip,
            range: "(0, inf)".into(),
        });
    }
    let cap = max_eps_lip();
    if eps * lip > cap * (1.0 + BOUNDARY_SLACK) {
        return Err(Error::OutOfRange {
            name: "eps*L",
            value: eps * lip,
            range: format!("(0, 1 - e^(-1/8)] = (0, {cap:.12}]"),
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(1, inf)".into(),
        })
    }
}

fn check_ic(ic: f64) -> Result<()> {
    if ic.is_finite() && ic >= 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "Ic",
            value: ic,
            range: "[0, inf)".into(),
        })
    }
}

fn log_term(eps: f64, lip: f64) -> f64 {
    // the boundary slack may push eps*L a hair past the cap; 2l stays <= 1/4 + O(1e-12)
    -(-(eps * lip)).ln_1p()
}

/// A lower bound on the number of physical qubits `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    /// The value does not beat trivial counting (`N >= d`). Never clamped.
    pub vacuous: bool,
}

impl BoundValue {
    fn qubit_count(value: f64, d: u64) -> Self {
        Self {
            value,
            vacuous: !(value > d as f64),
        }
    }
}

/// Which product constraint an allocation must satisfy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintVariant {
    /// `prod (1 - eps_i/2) >= 1 - eps L`, after classical post-processing.
    #[default]
    Halved,
    /// `prod (1 - eps_i) >= 1 - eps L`.
    Plain,
}

/// Per-gate accuracies `eps_i in [0, 1/2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonAllocation {
    eps: Vec<f64>,
}

impl EpsilonAllocation {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidArgument("allocation needs at least one gate".into()));
        }
        for &e in &eps {
            if !(0.0..0.5).contains(&e) {
                return Err(Error::OutOfRange {
                    name: "eps_i",
                    value: e,
                    range: "[0, 0.5)".into(),
                });
            }
        }
        Ok(Self { eps })
    }

    /// `G` equal entries.
    pub fn uniform(gates: usize, eps_i: f64) -> Result<Self> {
        Self::new(vec![eps_i; gates])
    }

    pub fn values(&self) -> &[f64] {
        &self.eps
    }

    pub fn gates(&self) -> usize {
        self.eps.len()
    }

    /// `prod (1 - eps_i/2)` or `prod (1 - eps_i)`.
    pub fn product(&self, variant: ConstraintVariant) -> f64 {
        let scale = match variant {
            ConstraintVariant::Halved => 0.5,
            ConstraintVariant::Plain => 1.0,
        };
        self.eps.iter().map(|e| 1.0 - scale * e).product()
    }

    pub fn check_feasible(&self, eps: f64, lip: f64, variant: ConstraintVariant) -> Result<()> {
        let product = self.product(variant);
        let target = 1.0 - eps * lip;
        if product < target {
            return Err(Error::InfeasibleAllocation {
                product,
                target,
                halved: match variant {
                    ConstraintVariant::Halved => "/2",
                    ConstraintVariant::Plain => "",
                },
            });
        }
        Ok(())
    }
}

/// Qubits transmittable in one use at fidelity `1 - eps_i`: `(Ic + h2(eps_i))/(1 - 2 eps_i)`.
pub fn oneshot_converse(eps_i: f64, ic: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps_i) {
        return Err(Error::OutOfRange {
            name: "eps_i",
            value: eps_i,
            range: "[0, 0.5) (the bound is vacuous from 1/2 on)".into(),
        });
    }
    check_ic(ic)?;
    Ok((ic + h2(eps_i)) / (1.0 - 2.0 * eps_i))
}

/// `sum_i (Ic_g + h2(eps_i))/(1 - 2 eps_i)` without the feasibility check.
pub fn lemma1_objective(alloc: &EpsilonAllocation, ic_g: f64) -> Result<f64> {
    alloc.values().iter().map(|&e| oneshot_converse(e, ic_g)).sum()
}

/// Upper bound on `d` from a feasible per-gate allocation.
pub fn lemma1_rhs(
    alloc: &EpsilonAllocation,
    eps: f64,
    lip: f64,
    ic_g: f64,
    variant: ConstraintVariant,
) -> Result<f64> {
    check_eps_lip(eps, lip)?;
    alloc.check_feasible(eps, lip, variant)?;
    lemma1_objective(alloc, ic_g)
}

fn check_gates(gates: u64) -> Result<()> {
    if gates == 0 {
        Err(Error::InvalidArgument("gate count G must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// Optimum of `max sum_i Ic_g/(1 - 2 eps_i)` s.t. `sum eps_i <= 2l`, attained
/// at the vertex `eps_1 = 2l`: `Ic_g [(G - 1) + k]`.
pub fn p1_optimum(gates: u64, eps: f64, lip: f64, ic_g: f64) -> Result<f64> {
    check_gates(gates)?;
    check_eps_lip(eps, lip)?;
    check_ic(ic_g)?;
    let k = 1.0 / (1.0 - 4.0 * log_term(eps, lip));
    Ok(ic_g * ((gates as f64 - 1.0) + k))
}

/// Optimum of `max k sum_i h2(eps_i)` s.t. `sum eps_i <= 2l`, attained at the
/// symmetric point `eps_i = 2l/G`: `G k h2(2l/G)`.
pub fn p3_optimum(gates: u64, eps: f64, lip: f64) -> Result<f64> {
    check_gates(gates)?;
    check_eps_lip(eps, lip)?;
    let l = log_term(eps, lip);
    let g = gates as f64;
    Ok(g / (1.0 - 4.0 * l) * h2(2.0 * l / g))
}

/// Lower bound on physical qubits for an explicit gate count `G >= 2`.
pub fn thm1_bound(params: &BoundParams, ic_g: f64) -> Result<BoundValue> {
    check_ic(ic_g)?;
    let gates = params
        .gates
        .ok_or_else(|| Error::InvalidArgument("the gate count G is required".into()))?;
    if gates < 2 {
        return Err(Error::OutOfRange {
            name: "G",
            value: gates as f64,
            range: "[2, inf)".into(),
        });
    }
    check_d_vs_g(params.d, params.g)?;
    let (d, g, gc) = (params.d as f64, params.g as f64, gates as f64);
    let l = params.log_term();
    let k = params.inverse_margin();
    let entropy_term = gc / (g * (gc - 1.0)) * h2(2.0 * g * l / d) * k;
    let denom = ic_g / g + entropy_term;
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "Ic_g = 0 and the binary-entropy term vanishes; the denominator is zero".into(),
        ));
    }
    Ok(BoundValue::qubit_count((d - ic_g * k) / denom, params.d))
}

fn check_d_vs_g(d: u64, g: u64) -> Result<()> {
    if d < 2 * g {
        return Err(Error::OutOfRange {
            name: "d",
            value: d as f64,
            range: format!("[2g, inf) = [{}, inf)", 2 * g),
        });
    }
    Ok(())
}

/// Lower bound on physical qubits with the gate count eliminated.
pub fn prop1_bound(d: u64, g: u64, ic_g: f64) -> Result<BoundValue> {
    if g == 0 {
        return Err(Error::InvalidArgument("gate size g must be >= 1".into()));
    }
    check_d_vs_g(d, g)?;
    check_ic(ic_g)?;
    let (df, gf) = (d as f64, g as f64);
    let log_term = ((4.0 * df / gf).ln() + 8.0 / 7.0) / (2.0 * (df - gf) * LN_2);
    Ok(BoundValue::qubit_count(df / (ic_g / gf + log_term) - 2.0 * gf, d))
}

/// Limiting space overhead `g / Ic_g`.
pub fn corollary1_overhead(g: u64, ic_g: f64) -> Result<f64> {
    if g == 0 {
        return Err(Error::InvalidArgument("gate size g must be >= 1".into()));
    }
    if !(ic_g > 0.0) || !ic_g.is_finite() {
        return Err(Error::OutOfRange {
            name: "Ic",
            value: ic_g,
            range: "(0, inf); at Ic = 0 the overhead is unbounded, locate that region with the threshold search".into(),
        });
    }
    Ok(g as f64 / ic_g)
}

/// Lower bound on physical qubits in the zero-coherent-information regime.
pub fn prop2_bound(d: u64, g: u64) -> Result<BoundValue> {
    if d == 0 || g == 0 {
        return Err(Error::InvalidArgument("d and g must be >= 1".into()));
    }
    let value = (g as f64 / 4.0) * (2.0 * LN_2 * d as f64 - 4.0 / 3.0).exp() - 1.0;
    Ok(BoundValue::qubit_count(value, d))
}

/// Upper bound on `d` from the Rényi coherent information `Ic_alpha` of `N^{⊗g}`.
pub fn appendix_d_bound(gates: u64, eps: f64, lip: f64, alpha: f64, ic_alpha: f64) -> Result<f64> {
    check_gates(gates)?;
    check_eps_lip(eps, lip)?;
    check_alpha(alpha)?;
    check_ic(ic_alpha)?;
    let l = log_term(eps, lip);
    Ok(gates as f64 * ic_alpha + alpha / (LN_2 * (alpha - 1.0)) * (2.0 * l) / (1.0 - 2.0 * l))
}

/// Largest `d` compatible with `Ic_alpha = 0` at the boundary `eps L = 1 - e^{-1/8}`.
pub fn appendix_d_dmax(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha / (3.0 * LN_2 * (alpha - 1.0)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub k: usize,
    pub ic: f64,
    /// `k / Ic_k`; `None` when `Ic_k <= 0`.
    pub ratio: Option<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityComparison {
    pub rows: Vec<ComparisonRow>,
    pub min_ratio: Option<f64>,
    pub argmin_k: Option<usize>,
    /// Always true: the true infimum over all `k` can only be smaller.
    pub upper_estimate: bool,
}

/// `k / Ic(N^{⊗k})` for `k = 1..=k_max` and its minimum.
pub fn capacity_comparison(
    channel: &QuantumChannel,
    k_max: usize,
    opts: &OptimizerOptions,
) -> Result<CapacityComparison> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let report = maximize_coherent_information(&channel.tensor_power(k)?, opts)?;
        rows.push(ComparisonRow {
            k,
            ic: report.value,
            ratio: (report.value > 0.0).then(|| k as f64 / report.value),
            converged: report.all_converged(),
        });
    }
    let best = rows
        .iter()
        .filter_map(|r| r.ratio.map(|x| (r.k, x)))
        .fold(None, |acc: Option<(usize, f64)>, (k, x)| match acc {
            Some((_, y)) if y <= x => acc,
            _ => Some((k, x)),
        });
    Ok(CapacityComparison {
        rows,
        min_ratio: best.map(|b| b.1),
        argmin_k: best.map(|b| b.0),
        upper_estimate: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oneshot_examples() {
        assert_eq!(oneshot_converse(0.0, 0.7).unwrap(), 0.7);
        assert!((oneshot_converse(0.25, 0.0).unwrap() - 1.622_556_248_918_265_7).abs() < 1e-12);
        let mut prev = f64::MIN;
        for i in 0..50 {
            let v = oneshot_converse(i as f64 * 0.0099, 0.3).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(oneshot_converse(0.5, 0.0).is_err());
        assert!(oneshot_converse(0.1, -1.0).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let zeros = EpsilonAllocation::uniform(7, 0.0).unwrap();
        assert!((lemma1_rhs(&zeros, 0.05, 1.0, 0.4, ConstraintVariant::Halved).unwrap() - 2.8).abs() < 1e-12);

        let gates = 6;
        let mut eps = vec![0.0; gates];
        eps[0] = 0.1;
        let alloc = EpsilonAllocation::new(eps).unwrap();
        let v = lemma1_rhs(&alloc, 0.1, 1.0, 0.5, ConstraintVariant::Halved).unwrap();
        let expected = 1.211_244_491_986_60 + (gates as f64 - 1.0) * 0.5;
        assert!((v - expected).abs() < 1e-12);

        // 1 - 0.1/2 = 0.95 < 1 - 0.04
        let err = lemma1_rhs(&alloc, 0.04, 1.0, 0.5, ConstraintVariant::Halved).unwrap_err();
        assert!(err.to_string().contains("eps_i/2"));
        // the unhalved constraint is stricter
        assert!(lemma1_rhs(&alloc, 0.08, 1.0, 0.5, ConstraintVariant::Halved).is_ok());
        assert!(lemma1_rhs(&alloc, 0.08, 1.0, 0.5, ConstraintVariant::Plain).is_err());
    }

    #[test]
    fn p1_p3_examples() {
        let lip = max_eps_lip() / 0.05;
        assert!((p1_optimum(4, 0.05, lip, 1.0).unwrap() - 5.0).abs() < 1e-9);
        assert!((p3_optimum(4, 0.05, lip).unwrap() - 2.698_320_532_936_11).abs() < 1e-9);
        assert!((p1_optimum(4, 1e-12, 1.0, 0.3).unwrap() - 1.2).abs() < 1e-9);
        assert!(p3_optimum(4, 1e-12, 1.0).unwrap() < 1e-9);
        assert!(p1_optimum(4, 0.2, 1.0, 1.0).is_err());
        assert!(p3_optimum(4, 0.1, 1.5).is_err());
    }

    #[test]
    fn thm1_example_and_limits() {
        let p = BoundParams::new(100, 2, 0.05, 1.0).unwrap().with_gates(50).unwrap();
        let v = thm1_bound(&p, 1.062009).unwrap();
        assert!(((v.value - 181.146_865_203_161) / 181.146_865_203_161).abs() < 1e-9);
        assert!(!v.vacuous);

        let tiny = BoundParams::new(100, 2, 1e-13, 1.0).unwrap().with_gates(50).unwrap();
        // k -> 1 and the entropy term vanishes: (d - Ic) g / Ic
        assert!((thm1_bound(&tiny, 0.8).unwrap().value - (100.0 - 0.8) * 2.0 / 0.8).abs() < 1e-6);

        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let v = thm1_bound(&p, 0.1 * i as f64).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
        assert!(thm1_bound(&BoundParams::new(100, 2, 0.05, 1.0).unwrap(), 1.0).is_err());
        let one_gate = BoundParams::new(100, 2, 0.05, 1.0).unwrap().with_gates(1).unwrap();
        assert!(thm1_bound(&one_gate, 1.0).is_err());
    }

    #[test]
    fn prop1_examples() {
        let v = prop1_bound(100, 2, 1.0620086).unwrap();
        assert!((v.value - 168.886_015_678_775).abs() < 1e-6);
        let v = prop1_bound(100, 2, 0.0).unwrap();
        assert!((v.value - 2_105.193_706_697_06).abs() < 1e-6);
        assert!(prop1_bound(3, 2, 1.0).is_err());
    }

    #[test]
    fn corollary1_examples() {
        assert_eq!(corollary1_overhead(2, 2.0).unwrap(), 1.0);
        assert!((corollary1_overhead(2, 1.0620086).unwrap() - 1.883_223_543_773_24).abs() < 1e-6);
        let err = corollary1_overhead(2, 0.0).unwrap_err();
        assert!(err.to_string().contains("threshold"));
    }

    #[test]
    fn prop2_examples() {
        let v = prop2_bound(10, 2).unwrap();
        assert!((v.value - 138_199.816_348_418).abs() < 1e-6);
        let v = prop2_bound(1, 1).unwrap();
        assert!((v.value + 0.736_402_861_884_273).abs() < 1e-12);
        assert!(v.vacuous);
        // (b(2d) + 1)/(b(d) + 1) = 4^d e^{4/3}... relative to the shifted values
        let (a, b) = (prop2_bound(3, 2).unwrap().value + 1.0, prop2_bound(6, 2).unwrap().value + 1.0);
        let predicted = 4f64.powi(3) * a;
        assert!((b - predicted).abs() / b < 1e-12);
    }

    #[test]
    fn renyi_bound_examples() {
        let lip = max_eps_lip() / 0.05;
        for &alpha in &[1.5, 2.0, 7.0] {
            let v = appendix_d_bound(10, 0.05, lip, alpha, 0.0).unwrap();
            assert!((v - appendix_d_dmax(alpha).unwrap()).abs() < 1e-9);
        }
        assert!((appendix_d_dmax(2.0).unwrap() - 0.961_796_693_925_975_6).abs() < 1e-12);
        assert!((appendix_d_dmax(1e12).unwrap() - 0.480_898_346_962_987_8).abs() < 1e-9);
        let b10 = appendix_d_bound(10, 0.05, 1.0, 2.0, 0.3).unwrap();
        let b5 = appendix_d_bound(5, 0.05, 1.0, 2.0, 0.3).unwrap();
        assert!((b10 - b5 - 1.5).abs() < 1e-12);
        assert!(appendix_d_dmax(1.0).is_err());
        let mut prev = f64::INFINITY;
        for i in 1..40 {
            let v = appendix_d_dmax(1.0 + 0.25 * i as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn params_validation() {
        assert!(BoundParams::new(10, 1, 0.0, 1.0).is_err());
        assert!(BoundParams::new(10, 1, 0.11, 1.0).is_err());
        assert!(BoundParams::new(10, 1, 0.05, 0.0).is_err());
        assert!(BoundParams::new(10, 1, 0.05, 3.0).is_err());
        assert!(BoundParams::new(10, 1, 0.05, max_eps_lip() / 0.05).is_ok());
        assert!(BoundParams::new(0, 1, 0.05, 1.0).is_err());
        let p = BoundParams::new(10, 1, 0.05, max_eps_lip() / 0.05).unwrap();
        assert!((p.log_term() - 0.125).abs() < 1e-12);
        assert!((p.inverse_margin() - 2.0).abs() < 1e-9);
    }
}
