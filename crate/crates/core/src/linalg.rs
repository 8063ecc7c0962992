//! Dense complex-matrix primitives for quantum states.
//!
//! All entropies are in bits. Matrices are `nalgebra::DMatrix<Complex<f64>>`;
//! tensor products use the Kronecker layout where the pair `(i_a, i_b)` maps to
//! row `i_a * dim(B) + i_b`, so subsystem 0 is the most significant index.

use nalgebra::{linalg::SymmetricEigen, Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for the density-matrix validity checks.
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues below this (and above `-STATE_TOL`) count as zero in entropy sums.
pub const ZERO_EIG: f64 = 1e-12;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates `mat` and stores its Hermitian part.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square and non-empty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let asym = hermitian_deviation(&mat);
        if asym > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |rho_ij - conj(rho_ji)| = {asym:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = hermitian_part(&mat);
        let spec = HermitianSpectrum::new(&herm)?;
        let min = spec.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { mat: herm })
    }

    /// Wraps a matrix known to be a state up to rounding (outputs of CPTP maps,
    /// normalized Gram matrices). Only the Hermitian part is kept.
    pub(crate) fn from_matrix_unchecked(mat: CMatrix) -> Self {
        Self {
            mat: hermitian_part(&mat),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim, dim) * C64::from(1.0 / dim as f64),
        }
    }

    /// `|psi><psi|` for the normalized version of `psi`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if psi.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "pure state needs a nonzero finite vector".into(),
            ));
        }
        let v = psi / C64::from(norm);
        Ok(Self::from_matrix_unchecked(&v * v.adjoint()))
    }

    /// Computational-basis state `|index><index|`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Ok(Self { mat: m })
    }

    /// Diagonal state; `probs` must be a probability vector.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| C64::from(p)),
        ));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn spectrum(&self) -> Result<HermitianSpectrum> {
        HermitianSpectrum::new(&self.mat)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self {
            mat: tensor_product(&self.mat, &other.mat),
        }
    }
}

/// Eigendecomposition `H = U diag(eigenvalues) U^dag` with eigenvalues sorted
/// in descending order.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    /// Decomposes the Hermitian part of `h`.
    pub fn new(h: &CMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let n = h.nrows();
        let eig = SymmetricEigen::try_new(hermitian_part(h), f64::EPSILON, 0).ok_or(Error::Eigen)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut eigenvectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `U diag(f(lambda)) U^dag`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            for x in scaled.column_mut(j).iter_mut() {
                *x *= s;
            }
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }
}

/// `max |H_ij - conj(H_ji)|`.
pub fn hermitian_deviation(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()) * C64::from(0.5)
}

/// Kronecker product `A ⊗ B`.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a sequence of matrices; the empty product is `[1]`.
pub fn tensor_all<'a>(mats: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    mats.into_iter()
        .fold(CMatrix::from_element(1, 1, ONE), |acc, m| acc.kronecker(m))
}

/// Partial trace keeping the subsystems listed in `keep` (in ascending order).
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_matrix(rho.matrix(), dims, keep).map(DensityMatrix::from_matrix_unchecked)
}

/// Partial trace of an arbitrary square operator on `⊗ dims`.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || !m.is_square() || m.nrows() != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but subsystem dims {:?} multiply to {}",
            m.nrows(),
            m.ncols(),
            dims,
            total
        )));
    }
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set must be nonempty".into()));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || kept[k] {
            return Err(Error::InvalidArgument(format!(
                "keep set {keep:?} invalid for {} subsystems",
                dims.len()
            )));
        }
        kept[k] = true;
    }
    let kept_dims: Vec<usize> = (0..dims.len()).filter(|&i| kept[i]).map(|i| dims[i]).collect();
    let traced_dims: Vec<usize> = (0..dims.len()).filter(|&i| !kept[i]).map(|i| dims[i]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();

    // full_index[ik * dt + it] = row of the full operator for (kept ik, traced it)
    let mut full_index = vec![0usize; dk * dt];
    let mut digits = vec![0usize; dims.len()];
    for flat in 0..total {
        let mut rem = flat;
        for s in (0..dims.len()).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let (mut ik, mut it) = (0usize, 0usize);
        for s in 0..dims.len() {
            if kept[s] {
                ik = ik * dims[s] + digits[s];
            } else {
                it = it * dims[s] + digits[s];
            }
        }
        full_index[ik * dt + it] = flat;
    }

    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for t in 0..dt {
                acc += m[(full_index[i * dt + t], full_index[j * dt + t])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// `-sum p log2 p` over a spectrum, with eigenvalues in `(-STATE_TOL, ZERO_EIG)`
/// treated as zero. More negative eigenvalues mean the input was not a state.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &lam in eigenvalues {
        if lam < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lam:.3e} in entropy"
            )));
        }
        if lam > ZERO_EIG {
            s -= lam * lam.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy of a raw Hermitian PSD matrix, in bits.
pub fn entropy_bits(m: &CMatrix) -> Result<f64> {
    spectrum_entropy(&HermitianSpectrum::new(m)?.eigenvalues)
}

/// Von Neumann entropy `S(rho)` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    // A validated state has no eigenvalue below -STATE_TOL, up to rounding in
    // the second decomposition, so clamp rather than fail.
    match HermitianSpectrum::new(rho.matrix()) {
        Ok(spec) => {
            let clamped: Vec<f64> = spec.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
            spectrum_entropy(&clamped).unwrap_or(0.0)
        }
        Err(_) => f64::NAN,
    }
}

/// Binary entropy `h2(x)` in bits, with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange {
            name: "x",
            value: x,
            range: "[0, 1]".into(),
        });
    }
    Ok(h2(x))
}

/// Unchecked binary entropy for arguments already known to lie in `[0, 1]`.
pub(crate) fn h2(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Fidelity `F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {}-dim and {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let spec_rho = rho.spectrum()?;
    if let Some(psi) = pure_vector(&spec_rho) {
        return Ok(expectation(sigma.matrix(), &psi).clamp(0.0, 1.0));
    }
    let spec_sigma = sigma.spectrum()?;
    if let Some(phi) = pure_vector(&spec_sigma) {
        return Ok(expectation(rho.matrix(), &phi).clamp(0.0, 1.0));
    }
    let sqrt_rho = spec_rho.map(|l| l.max(0.0).sqrt());
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let root_sum: f64 = HermitianSpectrum::new(&inner)?
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

fn pure_vector(spec: &HermitianSpectrum) -> Option<CVector> {
    if spec.max_eigenvalue() > 1.0 - ZERO_EIG {
        Some(spec.eigenvectors.column(0).into_owned())
    } else {
        None
    }
}

fn expectation(m: &CMatrix, v: &CVector) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// `dim x rank` matrix of i.i.d. standard complex Gaussians.
pub(crate) fn gaussian_factor<R: Rng>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, rank, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `A A^dag / Tr(A A^dag)` for a nonzero factor `A`.
pub(crate) fn state_from_factor(a: &CMatrix) -> DensityMatrix {
    let gram = a * a.adjoint();
    let tr = gram.trace().re;
    DensityMatrix::from_matrix_unchecked(gram / C64::from(tr))
}

/// Random state `A A^dag / Tr(A A^dag)` with a Gaussian `dim x rank` factor.
pub fn random_density_matrix(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "rank must satisfy 1 <= rank <= dim, got rank {rank}, dim {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(state_from_factor(&gaussian_factor(dim, rank, &mut rng)))
}

/// Principal square root of a PSD matrix (negative eigenvalues clamped).
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    Ok(HermitianSpectrum::new(m)?.map(|l| l.max(0.0).sqrt()))
}

/// Frobenius inner product `Tr(X^dag Y)`.
pub(crate) fn frob_inner(x: &CMatrix, y: &CMatrix) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&CVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)])).unwrap()
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn tensor_identities() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(tensor_product(&i2, &i2), CMatrix::identity(4, 4));
        let p0 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(0.0)]));
        let p1 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0), c(1.0)]));
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0), c(1.0), c(0.0), c(0.0)]));
        assert_eq!(tensor_product(&p0, &p1), expect);
    }

    #[test]
    fn tensor_acts_on_product_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = gaussian_factor(2, 2, &mut rng);
        let b = gaussian_factor(2, 2, &mut rng);
        let x = gaussian_factor(2, 1, &mut rng);
        let y = gaussian_factor(2, 1, &mut rng);
        let lhs = tensor_product(&a, &b) * tensor_product(&x, &y);
        let rhs = tensor_product(&(&a * &x), &(&b * &y));
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let r = partial_trace(&bell(), &[2, 2], &[0]).unwrap();
        assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = random_density_matrix(2, 2, 1).unwrap();
        let b = random_density_matrix(3, 3, 2).unwrap();
        let ab = a.tensor(&b);
        let ra = partial_trace(&ab, &[2, 3], &[0]).unwrap();
        let rb = partial_trace(&ab, &[2, 3], &[1]).unwrap();
        assert!(max_abs(&(ra.matrix() - a.matrix())) < 1e-12);
        assert!(max_abs(&(rb.matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_summation() {
        let dims = [2usize, 3, 2];
        let rho = random_density_matrix(12, 12, 99).unwrap();
        let got = partial_trace(&rho, &dims, &[0, 2]).unwrap();
        // naive sum over the middle index
        let m = rho.matrix();
        let idx = |a: usize, b: usize, c: usize| (a * 3 + b) * 2 + c;
        for a in 0..2 {
            for cc in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        let mut acc = ZERO;
                        for b in 0..3 {
                            acc += m[(idx(a, b, cc), idx(a2, b, c2))];
                        }
                        let diff = (got.matrix()[(a * 2 + cc, a2 * 2 + c2)] - acc).norm();
                        assert!(diff < 1e-14);
                    }
                }
            }
        }
        assert_abs_diff_eq!(got.matrix().trace().re, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = random_density_matrix(4, 4, 3).unwrap();
        assert!(matches!(
            partial_trace(&rho, &[2, 3], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[0, 0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(von_neumann_entropy(&DensityMatrix::basis(2, 0).unwrap()), 0.0);
        assert_abs_diff_eq!(von_neumann_entropy(&DensityMatrix::maximally_mixed(2)), 1.0, epsilon = 1e-14);
        let rho = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho), 0.468_995_593_589_281_2, epsilon = 1e-12);
    }

    #[test]
    fn entropy_rejects_negative_spectrum() {
        assert!(spectrum_entropy(&[1.1, -0.1]).is_err());
        assert_abs_diff_eq!(spectrum_entropy(&[1.0, -1e-11]).unwrap(), 0.0);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.1).unwrap(), 0.468_995_593_589_281_2, epsilon = 1e-15);
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let rho = random_density_matrix(3, 3, 5).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-9);
        let z0 = DensityMatrix::basis(2, 0).unwrap();
        let z1 = DensityMatrix::basis(2, 1).unwrap();
        assert_abs_diff_eq!(fidelity(&z0, &z1).unwrap(), 0.0, epsilon = 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(fidelity(&z0, &mixed).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&mixed, &z0).unwrap(), 0.5, epsilon = 1e-12);
        assert!(fidelity(&z0, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn random_states() {
        let pure = random_density_matrix(4, 1, 11).unwrap();
        assert_abs_diff_eq!(pure.spectrum().unwrap().max_eigenvalue(), 1.0, epsilon = 1e-9);
        assert_eq!(
            random_density_matrix(4, 4, 3).unwrap(),
            random_density_matrix(4, 4, 3).unwrap()
        );
        let full = random_density_matrix(4, 4, 42).unwrap();
        assert!(DensityMatrix::new(full.matrix().clone()).is_ok());
        assert!(random_density_matrix(4, 5, 0).is_err());
        assert!(random_density_matrix(4, 0, 0).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = CMatrix::identity(2, 2) * c(0.5);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(DensityMatrix::new(neg).is_err());
    }

    #[test]
    fn spectrum_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = gaussian_factor(6, 6, &mut rng);
        let h = hermitian_part(&a);
        let spec = HermitianSpectrum::new(&h).unwrap();
        assert!(max_abs(&(spec.reconstruct() - &h)) <= 1e-9);
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }
}
