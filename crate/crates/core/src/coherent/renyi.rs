//! Sandwiched Rényi divergence and the Rényi coherent information
//! `I_c(N, rho; alpha) = min_sigma D_alpha(omega_RB || I_R ⊗ sigma_B)`,
//! `omega_RB = (id ⊗ N)(phi_rho)`.
//!
//! The inner minimization iterates the map
//! `sigma -> normalize[(sigma^{(a-1)/2} T sigma^{(a-1)/2})^{1/a}]`,
//! `T = Tr_R[(Gamma omega Gamma)^a]`, `Gamma = I ⊗ sigma^{(1-a)/2a}`, whose fixed
//! points satisfy `T ∝ sigma`. It is exact in one step when everything commutes.
//! Steps that do not decrease the objective are damped toward the current
//! iterate. There is no optimality certificate, so reports are marked heuristic.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ascent::finite_difference_gradient;
use super::{check_factor, product_factor, run_restarts, OptimizationReport, OptimizerOptions};
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    gaussian_factor, state_from_factor, CMatrix, DensityMatrix, HermitianSpectrum, C64,
};

/// Eigenvalues of `sigma` below this are lifted before negative powers.
const EIG_LIFT: f64 = 1e-12;
/// A kernel direction of `sigma` may carry at most this much weight of `rho`.
const SUPPORT_TOL: f64 = 1e-8;
/// Eigenvalues of `omega_B` below this are outside the support the inner problem uses.
const SUPPORT_CUT: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct InnerRenyiOptions {
    /// Random restarts on top of the start at `Tr_R omega`.
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the relative decrease of `Tr[(Gamma omega Gamma)^a]` falls below this.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for InnerRenyiOptions {
    fn default() -> Self {
        Self {
            restarts: 4,
            max_iters: 500,
            rel_tol: 1e-13,
            seed: 0,
        }
    }
}

impl InnerRenyiOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "inner Rényi options need max_iters >= 1 and rel_tol > 0".into(),
            ));
        }
        Ok(())
    }
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

fn sandwich_exponent(alpha: f64) -> f64 {
    (1.0 - alpha) / (2.0 * alpha)
}

/// `D_alpha(rho || sigma) = log2 Tr[(sigma^g rho sigma^g)^alpha] / (alpha - 1)`,
/// `g = (1 - alpha) / (2 alpha)`, in bits.
pub fn sandwiched_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "divergence of {}-dim and {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let spec = sigma.spectrum()?;
    let mut overlap = 0.0f64;
    for (j, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam < EIG_LIFT {
            let v = spec.eigenvectors.column(j);
            overlap = overlap.max((v.adjoint() * rho.matrix() * v)[(0, 0)].re);
        }
    }
    if overlap > SUPPORT_TOL {
        return Err(Error::Support { overlap });
    }
    let gamma = spec.map(|l| l.max(EIG_LIFT).powf(sandwich_exponent(alpha)));
    let x = &gamma * rho.matrix() * &gamma;
    let q: f64 = HermitianSpectrum::new(&x)?
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).powf(alpha))
        .sum();
    Ok(q.log2() / (alpha - 1.0))
}

/// `omega_RB` for the purification `sum_k |k>_R ⊗ B|k>` of `B B^dag`, with the
/// vectors `w_i = (I ⊗ K_i) b` as columns of `w` (so `omega = w w^dag`).
struct Purified {
    omega: CMatrix,
    w: CMatrix,
    r: usize,
}

fn purified_output(channel: &QuantumChannel, b: &CMatrix) -> Purified {
    let r = b.ncols();
    let out = channel.out_dim();
    let n = channel.env_dim();
    let mut w = CMatrix::zeros(r * out, n);
    for (i, k) in channel.kraus_ops().iter().enumerate() {
        // column-major storage of K_i B is exactly the R ⊗ B ordering
        let kb = k * b;
        w.column_mut(i).copy_from_slice(kb.as_slice());
    }
    Purified {
        omega: &w * w.adjoint(),
        w,
        r,
    }
}

fn trace_out_reference(m: &CMatrix, r: usize, d: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(d, d);
    for k in 0..r {
        acc += m.view((k * d, k * d), (d, d));
    }
    acc
}

fn kron_identity(r: usize, m: &CMatrix) -> CMatrix {
    let (rows, cols) = m.shape();
    let mut out = CMatrix::zeros(r * rows, r * cols);
    for k in 0..r {
        out.view_mut((k * rows, k * cols), (rows, cols)).copy_from(m);
    }
    out
}

/// Evaluated objective at one `sigma`.
struct Sandwich {
    q: f64,
    gamma_full: CMatrix,
    x: HermitianSpectrum,
}

fn sandwich(omega: &CMatrix, r: usize, sigma: &HermitianSpectrum, alpha: f64) -> Result<Sandwich> {
    let gamma = sigma.map(|l| l.max(EIG_LIFT).powf(sandwich_exponent(alpha)));
    let gamma_full = kron_identity(r, &gamma);
    let x = HermitianSpectrum::new(&(&gamma_full * omega * &gamma_full))?;
    let q = x.eigenvalues.iter().map(|&l| l.max(0.0).powf(alpha)).sum();
    Ok(Sandwich { q, gamma_full, x })
}

struct InnerOptimum {
    q: f64,
    sandwich: Sandwich,
    /// Isometry onto the support of `omega_B` (columns).
    support: CMatrix,
}

/// `min_sigma Tr[(Gamma omega Gamma)^alpha]` with `sigma` on the support of `omega_B`.
fn minimize_over_sigma(
    omega: &CMatrix,
    r: usize,
    d: usize,
    alpha: f64,
    opts: &InnerRenyiOptions,
) -> Result<InnerOptimum> {
    let omega_b = trace_out_reference(omega, r, d);
    let spec_b = HermitianSpectrum::new(&omega_b)?;
    let s = spec_b.eigenvalues.iter().filter(|&&l| l > SUPPORT_CUT * spec_b.max_eigenvalue().max(1e-300)).count().max(1);
    let support = spec_b.eigenvectors.columns(0, s).into_owned();
    let lift = kron_identity(r, &support);
    let omega_s = lift.adjoint() * omega * &lift;
    let tr = omega_s.trace().re;
    let start = support.adjoint() * &omega_b * &support / C64::from(tr);

    let mut starts = vec![start.clone()];
    for k in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64 + 1);
        let rand = state_from_factor(&gaussian_factor(s, s, &mut rng)).into_matrix();
        starts.push((&start + rand) * C64::from(0.5));
    }

    let mut best: Option<(f64, Sandwich)> = None;
    for sigma0 in starts {
        let (q, sw) = fixed_point(&omega_s, r, sigma0, alpha, opts)?;
        if best.as_ref().is_none_or(|(bq, _)| q < *bq) {
            best = Some((q, sw));
        }
    }
    let (q, sandwich) = best.expect("at least one start");
    Ok(InnerOptimum {
        q,
        sandwich,
        support,
    })
}

fn fixed_point(
    omega: &CMatrix,
    r: usize,
    mut sigma: CMatrix,
    alpha: f64,
    opts: &InnerRenyiOptions,
) -> Result<(f64, Sandwich)> {
    let d = sigma.nrows();
    let mut spec = HermitianSpectrum::new(&sigma)?;
    let mut cur = sandwich(omega, r, &spec, alpha)?;
    for _ in 0..opts.max_iters {
        let t = trace_out_reference(&cur.x.map(|l| l.max(0.0).powf(alpha)), r, d);
        let half = spec.map(|l| l.max(EIG_LIFT).powf((alpha - 1.0) / 2.0));
        let inner = HermitianSpectrum::new(&(&half * t * &half))?;
        let mut proposal = inner.map(|l| l.max(0.0).powf(1.0 / alpha));
        let tr = proposal.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            break;
        }
        proposal /= C64::from(tr);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let cand = if step == 1.0 {
                proposal.clone()
            } else {
                &sigma * C64::from(1.0 - step) + &proposal * C64::from(step)
            };
            let cand_spec = HermitianSpectrum::new(&cand)?;
            let cand_sw = sandwich(omega, r, &cand_spec, alpha)?;
            if cand_sw.q <= cur.q {
                accepted = Some((cand, cand_spec, cand_sw));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cand_spec, cand_sw)) = accepted else {
            break;
        };
        let decrease = (cur.q - cand_sw.q) / cur.q;
        sigma = cand;
        spec = cand_spec;
        cur = cand_sw;
        if decrease < opts.rel_tol {
            break;
        }
    }
    Ok((cur.q, cur))
}

fn purify(rho: &DensityMatrix) -> Result<CMatrix> {
    let spec = rho.spectrum()?;
    let keep: Vec<usize> = (0..spec.dim()).filter(|&j| spec.eigenvalues[j] > 1e-14).collect();
    let mut b = CMatrix::zeros(rho.dim(), keep.len().max(1));
    for (col, &j) in keep.iter().enumerate() {
        let s = C64::from(spec.eigenvalues[j].sqrt());
        b.set_column(col, &(spec.eigenvectors.column(j) * s));
    }
    Ok(b)
}

/// Rényi coherent information at `rho`, default inner settings.
pub fn renyi_coherent_information_at(channel: &QuantumChannel, rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    renyi_coherent_information_with(channel, rho, alpha, &InnerRenyiOptions::default())
}

pub fn renyi_coherent_information_with(
    channel: &QuantumChannel,
    rho: &DensityMatrix,
    alpha: f64,
    inner: &InnerRenyiOptions,
) -> Result<f64> {
    check_alpha(alpha)?;
    if rho.dim() != channel.in_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel takes {}-dim inputs, got {}",
            channel.in_dim(),
            rho.dim()
        )));
    }
    let b = purify(rho)?;
    renyi_value(channel, &b, alpha, inner)
}

fn renyi_value(channel: &QuantumChannel, b: &CMatrix, alpha: f64, inner: &InnerRenyiOptions) -> Result<f64> {
    let p = purified_output(channel, b);
    let opt = minimize_over_sigma(&p.omega, p.r, channel.out_dim(), alpha, inner)?;
    Ok(opt.q.log2() / (alpha - 1.0))
}

/// Value and ascent direction of `A -> I_c(N, A A^dag / Tr(A A^dag); alpha)`.
///
/// The direction comes from the envelope theorem at the inner minimizer:
/// with `G = alpha Gamma X^{alpha-1} Gamma / ((alpha-1) Q ln 2)`, the derivative
/// in the purification vector is `2 sum_i (I ⊗ K_i^dag) G w_i`.
pub fn renyi_coherent_information_gradient(
    channel: &QuantumChannel,
    a: &CMatrix,
    alpha: f64,
    inner: &InnerRenyiOptions,
) -> Result<(f64, CMatrix)> {
    check_alpha(alpha)?;
    check_factor(channel, a)?;
    let n = a.norm();
    let b = a / C64::from(n);
    let p = purified_output(channel, &b);
    let d = channel.out_dim();
    let opt = minimize_over_sigma(&p.omega, p.r, d, alpha, inner)?;
    let value = opt.q.log2() / (alpha - 1.0);

    let sw = &opt.sandwich;
    let x_pow = sw.x.map(|l| l.max(0.0).powf(alpha - 1.0));
    let scale = alpha / ((alpha - 1.0) * opt.q * std::f64::consts::LN_2);
    let g_support = &sw.gamma_full * x_pow * &sw.gamma_full * C64::from(scale);
    let lift = kron_identity(p.r, &opt.support);
    let g_omega = &lift * g_support * lift.adjoint();

    let gw = g_omega * &p.w;
    let mut grad = CMatrix::zeros(b.nrows(), b.ncols());
    for (i, k) in channel.kraus_ops().iter().enumerate() {
        let col = CMatrix::from_column_slice(d, p.r, gw.column(i).as_slice());
        grad += k.adjoint() * col;
    }
    grad *= C64::from(2.0);
    let radial = crate::linalg::frob_inner(&b, &grad).re;
    let tangent = (grad - &b * C64::from(radial)) / C64::from(n);
    Ok((value, tangent))
}

fn renyi_of_factor(channel: &QuantumChannel, a: &CMatrix, alpha: f64, inner: &InnerRenyiOptions) -> Result<f64> {
    check_factor(channel, a)?;
    renyi_value(channel, &(a / C64::from(a.norm())), alpha, inner)
}

/// Multi-restart maximization of the Rényi coherent information.
pub fn maximize_renyi_coherent_information(
    channel: &QuantumChannel,
    alpha: f64,
    opts: &OptimizerOptions,
) -> Result<OptimizationReport> {
    check_alpha(alpha)?;
    opts.validate()?;
    let product_seed = match channel.tensor_factor() {
        Some((factor, g)) => {
            let single = maximize_renyi_coherent_information(factor, alpha, opts)?;
            Some(product_factor(&single.argmax, g)?)
        }
        None => None,
    };
    let inner = &opts.inner;
    if opts.finite_difference {
        run_restarts(channel, opts, product_seed, true, |a| {
            let value = renyi_of_factor(channel, a, alpha, inner)?;
            let grad = finite_difference_gradient(a, 1e-6, |x| renyi_of_factor(channel, x, alpha, inner))?;
            Ok((value, grad))
        })
    } else {
        run_restarts(channel, opts, product_seed, true, |a| {
            renyi_coherent_information_gradient(channel, a, alpha, inner)
        })
    }
}
