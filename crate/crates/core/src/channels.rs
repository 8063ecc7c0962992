//! Quantum channels in Kraus form.
//!
//! The complementary channel comes from the Stinespring isometry
//! `V|psi> = sum_i (K_i|psi>) ⊗ |i>_E`, so its output is the
//! `env_dim x env_dim` matrix with entries `Tr(K_j^dag K_i rho)`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{frob_inner, gaussian_factor, tensor_all, CMatrix, DensityMatrix, C64};

/// Completeness tolerance for channels built in code.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Completeness tolerance for channels read from files.
pub const FILE_COMPLETENESS_TOL: f64 = 1e-8;
/// Largest supported input/output dimension (six qubits).
pub const MAX_DIM: usize = 64;
/// Largest number of Kraus operators a tensor power may produce.
pub const MAX_KRAUS: usize = 4096;

#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    in_dim: usize,
    out_dim: usize,
    label: String,
    // Set by `tensor_power`; the optimizer seeds with products of the factor's argmax.
    power_of: Option<(Arc<QuantumChannel>, usize)>,
}

impl QuantumChannel {
    pub fn new(label: impl Into<String>, kraus: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerance(label, kraus, COMPLETENESS_TOL)
    }

    /// Builds a channel, requiring `max |sum K^dag K - I| <= tol`.
    pub fn with_tolerance(label: impl Into<String>, kraus: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("a channel needs at least one Kraus operator".into()))?;
        let (out_dim, in_dim) = first.shape();
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::DimensionMismatch("Kraus operators must be non-empty".into()));
        }
        if let Some((i, k)) = kraus.iter().enumerate().find(|(_, k)| k.shape() != (out_dim, in_dim)) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {i} is {}x{}, expected {out_dim}x{in_dim}",
                k.nrows(),
                k.ncols()
            )));
        }
        if in_dim > MAX_DIM || out_dim > MAX_DIM {
            return Err(Error::OverBudget(format!(
                "channel dimensions {in_dim} -> {out_dim} exceed {MAX_DIM}"
            )));
        }
        let deviation = completeness_deviation(&kraus, in_dim);
        if !(deviation <= tol) {
            return Err(Error::Completeness {
                deviation,
                tolerance: tol,
            });
        }
        Ok(Self {
            kraus,
            in_dim,
            out_dim,
            label: label.into(),
            power_of: None,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(dim, dim)],
            in_dim: dim,
            out_dim: dim,
            label: format!("identity({dim})"),
            power_of: None,
        }
    }

    /// Random channel from a Haar-like isometry built out of a Gaussian matrix.
    pub fn random(in_dim: usize, out_dim: usize, n_kraus: usize, seed: u64) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 || n_kraus == 0 || out_dim * n_kraus < in_dim {
            return Err(Error::InvalidArgument(format!(
                "cannot build an isometry {in_dim} -> {out_dim}x{n_kraus}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gaussian_factor(out_dim * n_kraus, in_dim, &mut rng);
        let q = g.qr().q();
        let kraus = (0..n_kraus)
            .map(|i| q.rows(i * out_dim, out_dim).into_owned())
            .collect();
        Self::new(format!("random({in_dim},{out_dim},{n_kraus};seed={seed})"), kraus)
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Number of Kraus operators, i.e. the environment dimension of the dilation.
    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Some((factor, g))` when this channel was built as `factor^{⊗g}`.
    pub fn tensor_factor(&self) -> Option<(&QuantumChannel, usize)> {
        self.power_of.as_ref().map(|(c, g)| (c.as_ref(), *g))
    }

    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.kraus, self.in_dim)
    }

    fn check_input(&self, dim: usize) -> Result<()> {
        if dim != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "channel `{}` takes {}-dim inputs, got {dim}",
                self.label, self.in_dim
            )));
        }
        Ok(())
    }

    /// `sum_i K_i rho K_i^dag`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho.dim())?;
        Ok(DensityMatrix::from_matrix_unchecked(self.apply_matrix(rho.matrix())))
    }

    /// Environment output `M_ij = Tr(K_j^dag K_i rho)` of the Stinespring dilation.
    pub fn complementary_apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho.dim())?;
        Ok(DensityMatrix::from_matrix_unchecked(
            self.complementary_matrix(rho.matrix()),
        ))
    }

    pub(crate) fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    pub(crate) fn complementary_matrix(&self, m: &CMatrix) -> CMatrix {
        let n = self.kraus.len();
        let km: Vec<CMatrix> = self.kraus.iter().map(|k| k * m).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // Tr(K_j^dag K_i m) = <K_j, K_i m>_F
                out[(i, j)] = frob_inner(&self.kraus[j], &km[i]);
            }
        }
        out
    }

    /// Heisenberg picture `sum_i K_i^dag X K_i`.
    pub(crate) fn adjoint_matrix(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        out
    }

    /// Adjoint of the complementary channel: `sum_ij Y_ji K_j^dag K_i`.
    pub(crate) fn complementary_adjoint_matrix(&self, y: &CMatrix) -> CMatrix {
        let n = self.kraus.len();
        let mut out = CMatrix::zeros(self.in_dim, self.in_dim);
        for i in 0..n {
            // L_i = sum_j conj(Y_ji) K_j, contributes L_i^dag K_i
            let mut l = CMatrix::zeros(self.out_dim, self.in_dim);
            for j in 0..n {
                let c = y[(j, i)].conj();
                if c != C64::new(0.0, 0.0) {
                    l += &self.kraus[j] * c;
                }
            }
            out += l.adjoint() * &self.kraus[i];
        }
        out
    }

    /// `N^{⊗g}`, with all `env_dim^g` product Kraus operators kept.
    pub fn tensor_power(&self, g: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidArgument("tensor power needs g >= 1".into()));
        }
        if g == 1 {
            return Ok(self.clone());
        }
        let n = self.kraus.len();
        let too_big = |base: usize| {
            (0..g).try_fold(1usize, |acc, _| acc.checked_mul(base)).is_none_or(|v| v > MAX_DIM)
        };
        if too_big(self.in_dim) || too_big(self.out_dim) {
            return Err(Error::OverBudget(format!(
                "({}-dim)^{g} exceeds dimension {MAX_DIM}",
                self.in_dim.max(self.out_dim)
            )));
        }
        let count = (0..g)
            .try_fold(1usize, |acc, _| acc.checked_mul(n))
            .filter(|&c| c <= MAX_KRAUS)
            .ok_or_else(|| {
                Error::OverBudget(format!("{n}^{g} Kraus operators exceed {MAX_KRAUS}"))
            })?;
        let mut kraus = Vec::with_capacity(count);
        let mut digits = vec![0usize; g];
        for _ in 0..count {
            kraus.push(tensor_all(digits.iter().map(|&d| &self.kraus[d])));
            for slot in digits.iter_mut().rev() {
                *slot += 1;
                if *slot < n {
                    break;
                }
                *slot = 0;
            }
        }
        let base = match &self.power_of {
            // (N^a)^b keeps N as the factor so product seeds stay single-copy
            Some((inner, a)) => (inner.clone(), a * g),
            None => (Arc::new(self.clone()), g),
        };
        Ok(Self {
            kraus,
            in_dim: self.in_dim.pow(g as u32),
            out_dim: self.out_dim.pow(g as u32),
            label: format!("({})^⊗{g}", self.label),
            power_of: Some(base),
        })
    }

    /// `outer ∘ inner`, Kraus set `{A_j B_i}`.
    pub fn compose(outer: &QuantumChannel, inner: &QuantumChannel) -> Result<Self> {
        if inner.out_dim != outer.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose `{}` ({} inputs) after `{}` ({} outputs)",
                outer.label, outer.in_dim, inner.label, inner.out_dim
            )));
        }
        let count = outer.kraus.len() * inner.kraus.len();
        if count > MAX_KRAUS {
            return Err(Error::OverBudget(format!(
                "composition has {count} Kraus operators, limit {MAX_KRAUS}"
            )));
        }
        let mut kraus = Vec::with_capacity(count);
        for a in &outer.kraus {
            for b in &inner.kraus {
                kraus.push(a * b);
            }
        }
        Ok(Self {
            kraus,
            in_dim: inner.in_dim,
            out_dim: outer.out_dim,
            label: format!("{} ∘ {}", outer.label, inner.label),
            power_of: None,
        })
    }

    pub fn to_spec(&self) -> ChannelSpec {
        ChannelSpec {
            label: self.label.clone(),
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            kraus: self
                .kraus
                .iter()
                .map(|k| {
                    (0..k.nrows())
                        .map(|r| (0..k.ncols()).map(|c| [k[(r, c)].re, k[(r, c)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

impl fmt::Display for QuantumChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{} -> {}, {} Kraus]",
            self.label,
            self.in_dim,
            self.out_dim,
            self.kraus.len()
        )
    }
}

fn completeness_deviation(kraus: &[CMatrix], in_dim: usize) -> f64 {
    let mut sum = CMatrix::zeros(in_dim, in_dim);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    sum -= CMatrix::identity(in_dim, in_dim);
    sum.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn pauli(which: char) -> CMatrix {
    let (o, z) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
    let i = Complex::new(0.0, 1.0);
    match which {
        'x' => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'y' => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'z' => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => CMatrix::identity(2, 2),
    }
}

/// Qubit depolarizing channel `rho -> (1-p) rho + p I/2`.
pub fn depolarizing(p: f64) -> Result<QuantumChannel> {
    check_range("p", p, 0.0, 1.0)?;
    let a = C64::from((1.0 - 0.75 * p).sqrt());
    let b = C64::from((p / 4.0).sqrt());
    QuantumChannel::new(
        format!("depolarizing({p})"),
        vec![pauli('i') * a, pauli('x') * b, pauli('y') * b, pauli('z') * b],
    )
}

/// Qubit dephasing channel with Kraus `{sqrt(1-p) I, sqrt(p) Z}`.
pub fn dephasing(p: f64) -> Result<QuantumChannel> {
    check_range("p", p, 0.0, 1.0)?;
    QuantumChannel::new(
        format!("dephasing({p})"),
        vec![
            pauli('i') * C64::from((1.0 - p).sqrt()),
            pauli('z') * C64::from(p.sqrt()),
        ],
    )
}

/// Qubit amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<QuantumChannel> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    let (o, z) = (C64::from(1.0), C64::from(0.0));
    let k0 = CMatrix::from_row_slice(2, 2, &[o, z, z, C64::from((1.0 - gamma).sqrt())]);
    let k1 = CMatrix::from_row_slice(2, 2, &[z, C64::from(gamma.sqrt()), z, z]);
    QuantumChannel::new(format!("amplitude_damping({gamma})"), vec![k0, k1])
}

/// On-disk channel description. Matrices are row-major, entries `[re, im]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChannelSpec {
    pub label: String,
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelSpec {
    pub fn into_channel(self) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len());
        for (i, rows) in self.kraus.iter().enumerate() {
            if rows.len() != self.out_dim || rows.iter().any(|r| r.len() != self.in_dim) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {i} is not {}x{} as declared",
                    self.out_dim, self.in_dim
                )));
            }
            kraus.push(CMatrix::from_fn(self.out_dim, self.in_dim, |r, c| {
                let [re, im] = rows[r][c];
                C64::new(re, im)
            }));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("channel file lists no Kraus operators".into()));
        }
        QuantumChannel::with_tolerance(self.label, kraus, FILE_COMPLETENESS_TOL)
    }
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<QuantumChannel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_channel(&text)
}

pub fn parse_channel(text: &str) -> Result<QuantumChannel> {
    serde_json::from_str::<ChannelSpec>(text)?.into_channel()
}

/// Which built-in noise model a family instantiates.
#[derive(Clone, Debug)]
pub enum NoiseKind {
    Depolarizing,
    Dephasing,
    AmplitudeDamping,
    /// A fixed channel (usually from a file); the parameter is ignored.
    Custom(QuantumChannel),
}

/// A single-parameter noise family and the parameter range it is swept over.
#[derive(Clone, Debug)]
pub struct NoiseFamily {
    pub kind: NoiseKind,
    pub param_name: &'static str,
    pub range: (f64, f64),
}

impl NoiseFamily {
    pub fn depolarizing() -> Self {
        Self {
            kind: NoiseKind::Depolarizing,
            param_name: "p",
            range: (0.0, 1.0),
        }
    }

    /// Dephasing over `[0, 1/2]`; beyond that the channel approaches a unitary again.
    pub fn dephasing() -> Self {
        Self {
            kind: NoiseKind::Dephasing,
            param_name: "p",
            range: (0.0, 0.5),
        }
    }

    pub fn amplitude_damping() -> Self {
        Self {
            kind: NoiseKind::AmplitudeDamping,
            param_name: "gamma",
            range: (0.0, 1.0),
        }
    }

    pub fn custom(channel: QuantumChannel) -> Self {
        Self {
            kind: NoiseKind::Custom(channel),
            param_name: "none",
            range: (0.0, 0.0),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "depolarizing" => Some(Self::depolarizing()),
            "dephasing" => Some(Self::dephasing()),
            "amplitude_damping" | "amplitude-damping" => Some(Self::amplitude_damping()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::Dephasing => "dephasing",
            NoiseKind::AmplitudeDamping => "amplitude_damping",
            NoiseKind::Custom(_) => "custom_file",
        }
    }

    /// Restricts the sweep range; it must stay inside the constructor's domain.
    pub fn with_range(mut self, lo: f64, hi: f64) -> Result<Self> {
        let domain = match self.kind {
            NoiseKind::Custom(_) => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, 1.0),
        };
        if !(lo <= hi) || lo < domain.0 || hi > domain.1 {
            return Err(Error::InvalidArgument(format!(
                "range [{lo}, {hi}] invalid for family {}",
                self.name()
            )));
        }
        self.range = (lo, hi);
        Ok(self)
    }

    pub fn contains(&self, param: f64) -> bool {
        param >= self.range.0 && param <= self.range.1
    }

    /// The single-use channel `N(param)`.
    pub fn instantiate(&self, param: f64) -> Result<QuantumChannel> {
        match &self.kind {
            NoiseKind::Depolarizing => depolarizing(param),
            NoiseKind::Dephasing => dephasing(param),
            NoiseKind::AmplitudeDamping => amplitude_damping(param),
            NoiseKind::Custom(c) => Ok(c.clone()),
        }
    }

    /// `N(param)^{⊗g}`.
    pub fn gate_channel(&self, param: f64, g: usize) -> Result<QuantumChannel> {
        self.instantiate(param)?.tensor_power(g)
    }
}
