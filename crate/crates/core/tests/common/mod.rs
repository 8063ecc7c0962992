//! Independent scalar oracles shared by the integration tests.
#![allow(dead_code)]

use ftq_core::linalg::{CMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn h2(x: f64) -> f64 {
    let term = |t: f64| if t <= 0.0 { 0.0 } else { -t * t.log2() };
    term(x) + term(1.0 - x)
}

fn entropy(eigs: &[f64]) -> f64 {
    eigs.iter().map(|&l| if l <= 0.0 { 0.0 } else { -l * l.log2() }).sum()
}

fn sym2_eigs(a: f64, d: f64, off_abs: f64) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + off_abs * off_abs).sqrt();
    [mean + rad, mean - rad]
}

/// `Ic` of depolarizing(p) at Bloch radius `r`, from hand-derived spectra.
///
/// Output eigenvalues are `(1 ± (1-p) r)/2`. In the Pauli basis of the
/// environment the state splits into the blocks {I, Z} and {X, Y}, with
/// off-diagonal magnitudes `sqrt(w_I w_Z) r` and `sqrt(w_X w_Y) r`.
pub fn depolarizing_ic_at_radius(p: f64, r: f64) -> f64 {
    let w0 = 1.0 - 0.75 * p;
    let w = 0.25 * p;
    let out = [(1.0 + (1.0 - p) * r) / 2.0, (1.0 - (1.0 - p) * r) / 2.0];
    let a = sym2_eigs(w0, w, (w0 * w).sqrt() * r);
    let b = sym2_eigs(w, w, w * r);
    entropy(&out) - entropy(&[a[0], a[1], b[0], b[1]])
}

/// Max over the Bloch radius on a 1e-4 grid.
pub fn depolarizing_oracle(p: f64) -> f64 {
    (0..=10_000)
        .map(|i| depolarizing_ic_at_radius(p, i as f64 * 1e-4))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `max_q h2((1-gamma) q) - h2(gamma q)` over diagonal inputs, 1e-4 grid.
pub fn amplitude_damping_oracle(gamma: f64) -> f64 {
    (0..=10_000)
        .map(|i| {
            let q = i as f64 * 1e-4;
            h2((1.0 - gamma) * q) - h2(gamma * q)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Root of the hashing value `1 - h2(3p/4) - (3p/4) log2 3`, by bisection.
pub fn hashing_root() -> f64 {
    let f = |p: f64| 1.0 - h2(0.75 * p) - 0.75 * p * 3f64.log2();
    let (mut lo, mut hi) = (0.1, 0.4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    })
}

/// Central differences over real and imaginary parts.
pub fn fd_gradient(a: &CMatrix, h: f64, f: impl Fn(&CMatrix) -> f64) -> CMatrix {
    let mut g = CMatrix::zeros(a.nrows(), a.ncols());
    for idx in 0..a.len() {
        let mut parts = [0.0; 2];
        for (k, dir) in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)].into_iter().enumerate() {
            let mut plus = a.clone();
            plus[idx] += dir * h;
            let mut minus = a.clone();
            minus[idx] -= dir * h;
            parts[k] = (f(&plus) - f(&minus)) / (2.0 * h);
        }
        g[idx] = C64::new(parts[0], parts[1]);
    }
    g
}
