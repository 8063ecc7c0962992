use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical routines and bound formulas.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("parameter `{name}` = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Kraus completeness violated: max |sum K^dag K - I| = {deviation:.3e} > {tolerance:.1e}")]
    Completeness { deviation: f64, tolerance: f64 },

    #[error("size over budget: {0}")]
    OverBudget(String),

    #[error("cannot read channel file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse channel file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("support condition violated: overlap {overlap:.3e} of the first argument with the kernel of the second")]
    Support { overlap: f64 },

    #[error("infeasible epsilon allocation: prod(1 - eps_i{halved}) = {product:.12} < 1 - eps*L = {target:.12}")]
    InfeasibleAllocation {
        product: f64,
        target: f64,
        halved: &'static str,
    },

    #[error("degenerate bound: {0}")]
    Degenerate(String),

    #[error("no sign change of Ic - tol_zero over [{lo}, {hi}]: Ic(lo) = {ic_lo:.6e}, Ic(hi) = {ic_hi:.6e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        ic_lo: f64,
        ic_hi: f64,
    },

    #[error("coherent information not monotone in the noise parameter: Ic({:.6}) = {:.6e}, Ic({:.6}) = {:.6e}, Ic({:.6}) = {:.6e}", .triple[0].0, .triple[0].1, .triple[1].0, .triple[1].1, .triple[2].0, .triple[2].1)]
    NotMonotone { triple: [(f64, f64); 3] },

    #[error("eigendecomposition did not converge")]
    Eigen,
}

impl Error {
    /// `true` for errors caused by bad inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Eigen
                | Error::NoSignChange { .. }
                | Error::NotMonotone { .. }
                | Error::Degenerate(_)
                | Error::Support { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: format!("[{lo}, {hi}]"),
        })
    }
}
