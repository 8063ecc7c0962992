//! Coherent information `I_c(N, rho) = S(N(rho)) - S(N^c(rho))` and its
//! maximization over input states, plus the sandwiched Rényi variant.
//!
//! The maximization parameterizes `rho = A A^dag / Tr(A A^dag)` and runs local
//! gradient ascent on `A` from several starting points. The restart set always
//! contains the maximally mixed state and a pure state; for tensor-power
//! channels it also contains the product of the single-copy argmax, so the
//! reported value of `N^{⊗g}` is never below `g` times the reported value of `N`.

mod ascent;
mod renyi;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    gaussian_factor, psd_sqrt, spectrum_entropy, state_from_factor, tensor_all, CMatrix,
    DensityMatrix, HermitianSpectrum, C64,
};

use ascent::{ascend, finite_difference_gradient, AscentSettings, Evaluation};

pub use renyi::{
    maximize_renyi_coherent_information, renyi_coherent_information_at,
    renyi_coherent_information_gradient, renyi_coherent_information_with, sandwiched_relative_entropy,
    InnerRenyiOptions,
};

/// Floor applied to eigenvalues inside `log2` when forming gradients.
const LOG_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, Serialize)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub initial_step: f64,
    /// Backtracking factor; the step grows by its inverse after a success.
    pub step_decay: f64,
    pub grad_tol: f64,
    /// Stop once the value stalls: gain below `value_tol * max(1, |value|)` over 20 steps.
    pub value_tol: f64,
    pub seed: u64,
    /// Ranks of the random factors `A`. Empty means full rank only.
    pub ranks: Vec<usize>,
    /// Use central differences instead of the analytic gradient.
    pub finite_difference: bool,
    /// Settings for the inner minimization of the Rényi quantities.
    pub inner: InnerRenyiOptions,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 2000,
            initial_step: 0.1,
            step_decay: 0.5,
            grad_tol: 1e-7,
            value_tol: 1e-12,
            seed: 0,
            ranks: Vec::new(),
            finite_difference: false,
            inner: InnerRenyiOptions::default(),
        }
    }
}

impl OptimizerOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.restarts == 0 {
            return bad("restarts must be >= 1");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1");
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return bad("initial step must be positive");
        }
        if !(self.step_decay > 0.0 && self.step_decay < 1.0) {
            return bad("step decay must lie in (0, 1)");
        }
        if !(self.grad_tol > 0.0) {
            return bad("gradient tolerance must be positive");
        }
        if !(self.value_tol >= 0.0) {
            return bad("value tolerance must be >= 0");
        }
        if self.ranks.contains(&0) {
            return bad("ranks must be >= 1");
        }
        self.inner.validate()
    }

    fn ascent_settings(&self) -> AscentSettings {
        AscentSettings {
            max_iters: self.max_iters,
            initial_step: self.initial_step,
            step_decay: self.step_decay,
            grad_tol: self.grad_tol,
            value_tol: self.value_tol,
        }
    }
}

/// How a restart's starting point was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartKind {
    MaximallyMixed,
    ProductSeed,
    Pure,
    Random { rank: usize },
}

#[derive(Clone, Debug)]
pub struct OptimizationReport {
    /// Best value in bits (maximum over `restart_values`).
    pub value: f64,
    pub argmax: DensityMatrix,
    pub restart_values: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    pub restart_kinds: Vec<RestartKind>,
    /// Set when the value rests on an uncertified inner optimization (Rényi).
    pub heuristic: bool,
}

impl OptimizationReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

fn check_factor(channel: &QuantumChannel, a: &CMatrix) -> Result<()> {
    if a.nrows() != channel.in_dim() || a.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "factor is {}x{}, channel input dimension is {}",
            a.nrows(),
            a.ncols(),
            channel.in_dim()
        )));
    }
    if a.norm() == 0.0 {
        return Err(Error::InvalidArgument("factor A must be nonzero".into()));
    }
    Ok(())
}

/// `S(N(rho)) - S(N^c(rho))` in bits.
pub fn coherent_information_at(channel: &QuantumChannel, rho: &DensityMatrix) -> Result<f64> {
    let out = channel.apply(rho)?;
    let env = channel.complementary_apply(rho)?;
    Ok(spectrum_entropy(&out.spectrum()?.eigenvalues)? - spectrum_entropy(&env.spectrum()?.eigenvalues)?)
}

/// `I_c` at `rho = A A^dag / Tr(A A^dag)`.
pub fn coherent_information_of_factor(channel: &QuantumChannel, a: &CMatrix) -> Result<f64> {
    check_factor(channel, a)?;
    coherent_information_at(channel, &state_from_factor(a))
}

/// Value and ascent direction of `A -> I_c(N, A A^dag / Tr(A A^dag))`.
///
/// With `G = -N^dag(log2 N(rho)) + (N^c)^dag(log2 N^c(rho))` the derivative in
/// `rho`, the returned direction is `(2/t)(G - Tr(G rho) I) A`, `t = Tr(A A^dag)`,
/// normalized so that `df = Re Tr(D^dag dA)`.
pub fn coherent_information_gradient(channel: &QuantumChannel, a: &CMatrix) -> Result<(f64, CMatrix)> {
    check_factor(channel, a)?;
    let t = a.norm_squared();
    let rho = (a * a.adjoint()) / C64::from(t);
    let out = HermitianSpectrum::new(&channel.apply_matrix(&rho))?;
    let env = HermitianSpectrum::new(&channel.complementary_matrix(&rho))?;
    let value = spectrum_entropy(&clamp_negative(&out.eigenvalues))?
        - spectrum_entropy(&clamp_negative(&env.eigenvalues))?;
    let log_out = out.map(|l| l.max(LOG_FLOOR).log2());
    let log_env = env.map(|l| l.max(LOG_FLOOR).log2());
    let g = channel.complementary_adjoint_matrix(&log_env) - channel.adjoint_matrix(&log_out);
    let shift = (&g * &rho).trace().re;
    let n = a.nrows();
    let centered = g - CMatrix::identity(n, n) * C64::from(shift);
    Ok((value, centered * a * C64::from(2.0 / t)))
}

// Rounding in the Gram construction can leave eigenvalues of order -1e-16.
fn clamp_negative(eigs: &[f64]) -> Vec<f64> {
    eigs.iter().map(|&l| if l < 0.0 && l > -1e-9 { 0.0 } else { l }).collect()
}

/// Deterministic starting factors: mandatory seeds first, random ones after.
pub(crate) fn restart_plan(
    dim: usize,
    opts: &OptimizerOptions,
    product_seed: Option<CMatrix>,
) -> Vec<(RestartKind, CMatrix)> {
    let mut plan: Vec<(RestartKind, CMatrix)> = Vec::new();
    plan.push((RestartKind::MaximallyMixed, CMatrix::identity(dim, dim)));
    if let Some(seed) = product_seed {
        plan.push((RestartKind::ProductSeed, seed));
    }
    plan.push((RestartKind::Pure, random_factor(dim, 1, opts.seed, plan.len())));
    let ranks: Vec<usize> = if opts.ranks.is_empty() {
        vec![dim]
    } else {
        opts.ranks.iter().map(|&r| r.clamp(1, dim)).collect()
    };
    let mut k = 0;
    while plan.len() < opts.restarts {
        let rank = ranks[k % ranks.len()];
        let idx = plan.len();
        plan.push((RestartKind::Random { rank }, random_factor(dim, rank, opts.seed, idx)));
        k += 1;
    }
    plan
}

/// Gaussian factor from the stream `index` of the master seed.
fn random_factor(dim: usize, rank: usize, seed: u64, index: usize) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    gaussian_factor(dim, rank, &mut rng)
}

/// `sqrt(rho)^{⊗g}`, a factor whose Gram matrix is `rho^{⊗g}`.
pub(crate) fn product_factor(rho: &DensityMatrix, g: usize) -> Result<CMatrix> {
    let root = psd_sqrt(rho.matrix())?;
    Ok(tensor_all(std::iter::repeat_n(&root, g)))
}

pub(crate) fn run_restarts<F>(
    channel: &QuantumChannel,
    opts: &OptimizerOptions,
    product_seed: Option<CMatrix>,
    heuristic: bool,
    eval: F,
) -> Result<OptimizationReport>
where
    F: Fn(&CMatrix) -> Result<Evaluation> + Sync,
{
    let plan = restart_plan(channel.in_dim(), opts, product_seed);
    let settings = opts.ascent_settings();
    let outcomes: Vec<_> = plan
        .par_iter()
        .map(|(_, start)| ascend(start, &settings, &eval))
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = i;
        }
    }
    Ok(OptimizationReport {
        value: outcomes[best].value,
        argmax: state_from_factor(&outcomes[best].point),
        restart_values: outcomes.iter().map(|o| o.value).collect(),
        iterations: outcomes.iter().map(|o| o.iterations).collect(),
        converged: outcomes.iter().map(|o| o.converged).collect(),
        restart_kinds: plan.iter().map(|(k, _)| *k).collect(),
        heuristic,
    })
}

/// Multi-restart local maximization of `I_c(N, rho)` over input states.
pub fn maximize_coherent_information(
    channel: &QuantumChannel,
    opts: &OptimizerOptions,
) -> Result<OptimizationReport> {
    opts.validate()?;
    let product_seed = match channel.tensor_factor() {
        Some((factor, g)) => {
            let single = maximize_coherent_information(factor, opts)?;
            Some(product_factor(&single.argmax, g)?)
        }
        None => None,
    };
    if opts.finite_difference {
        run_restarts(channel, opts, product_seed, false, |a| {
            let value = coherent_information_of_factor(channel, a)?;
            let grad = finite_difference_gradient(a, 1e-6, |x| coherent_information_of_factor(channel, x))?;
            Ok((value, grad))
        })
    } else {
        run_restarts(channel, opts, product_seed, false, |a| {
            coherent_information_gradient(channel, a)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, dephasing, depolarizing};
    use crate::linalg::{binary_entropy, random_density_matrix};

    #[test]
    fn pointwise_examples() {
        let id = QuantumChannel::identity(2);
        let v = coherent_information_at(&id, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = coherent_information_at(&dephasing(0.1).unwrap(), &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((v - (1.0 - binary_entropy(0.1).unwrap())).abs() < 1e-12);
        for seed in 0..5 {
            let ch = QuantumChannel::random(2, 2, 3, seed).unwrap();
            let psi = random_density_matrix(2, 1, seed + 50).unwrap();
            assert!(coherent_information_at(&ch, &psi).unwrap().abs() < 1e-8);
        }
        let rho3 = DensityMatrix::maximally_mixed(3);
        assert!(coherent_information_at(&id, &rho3).is_err());
    }

    #[test]
    fn restart_plan_is_deterministic_and_contains_mandatory_seeds() {
        let opts = OptimizerOptions::default().with_seed(3).with_restarts(5);
        let a = restart_plan(4, &opts, Some(CMatrix::identity(4, 4)));
        let b = restart_plan(4, &opts, Some(CMatrix::identity(4, 4)));
        assert_eq!(a.len(), 5);
        assert_eq!(a[0].0, RestartKind::MaximallyMixed);
        assert_eq!(a[1].0, RestartKind::ProductSeed);
        assert_eq!(a[2].0, RestartKind::Pure);
        assert_eq!(a[2].1.ncols(), 1);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.1, y.1);
        }
        // one restart still keeps every mandatory seed
        let small = restart_plan(2, &OptimizerOptions::default().with_restarts(1), None);
        assert_eq!(small.len(), 2);
    }

    #[test]
    fn identity_and_dephasing_optima() {
        let opts = OptimizerOptions::default().with_restarts(4);
        let r = maximize_coherent_information(&QuantumChannel::identity(2), &opts).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
        let r = maximize_coherent_information(&dephasing(0.1).unwrap(), &opts).unwrap();
        assert!((r.value - 0.531_004_406_410_718_8).abs() < 1e-4);
        assert_eq!(r.value, r.restart_values.iter().cloned().fold(f64::MIN, f64::max));
    }

    #[test]
    fn finite_difference_mode_agrees() {
        let ch = amplitude_damping(0.2).unwrap();
        let analytic = maximize_coherent_information(&ch, &OptimizerOptions::default().with_restarts(3)).unwrap();
        let mut fd = OptimizerOptions::default().with_restarts(3);
        fd.finite_difference = true;
        let numeric = maximize_coherent_information(&ch, &fd).unwrap();
        assert!((analytic.value - numeric.value).abs() < 1e-6);
    }

    #[test]
    fn high_noise_optimum_is_zero_not_negative() {
        let r = maximize_coherent_information(&depolarizing(0.6).unwrap(), &OptimizerOptions::default().with_restarts(4)).unwrap();
        assert!(r.value >= -1e-9 && r.value < 1e-6);
    }

    #[test]
    fn invalid_options_rejected() {
        let ch = dephasing(0.1).unwrap();
        assert!(maximize_coherent_information(&ch, &OptimizerOptions::default().with_restarts(0)).is_err());
        let o = OptimizerOptions {
            step_decay: 1.5,
            ..OptimizerOptions::default()
        };
        assert!(maximize_coherent_information(&ch, &o).is_err());
    }
}
