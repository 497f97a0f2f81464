//! Dense real matrix kernel for dimensions 2 to 4.
//!
//! Eigenvalues come from closed-form root solvers on the characteristic
//! polynomial, with a Hessenberg QR fallback near multiple roots. Jordan
//! structure is read off numerical rank sequences. The exponential uses
//! scaling and squaring; the principal logarithm uses inverse scaling and
//! squaring.

mod eigen;
mod expm;
mod jordan;
mod logm;
mod mat;
pub mod poly;
mod svd;

pub use eigen::{char_poly, eigenvalues, hessenberg_qr_eigenvalues, Spectrum};
pub use expm::mat_exp;
pub use jordan::{
    jordan_from_spectrum, jordan_structure, nullity_real, real_jordan, JordanStructure, RealBlock,
    RealJordanDecomposition,
};
pub use logm::{principal_log, principal_log_with, sqrtm};
pub use mat::{Mat, MAX_DIM};
pub use num_complex::Complex64 as C64;
pub use svd::{null_space, singular_values, svd};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension {0} is not supported (expected 2, 3 or 4)")]
    RejectsDimension(usize),
    #[error("row {row} has {found} entries, expected {expected}")]
    Shape { row: usize, expected: usize, found: usize },
    #[error("entry ({row},{col}) is not a finite number")]
    NonFinite { row: usize, col: usize },
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("an eigenvalue lies on the closed negative real axis")]
    SpectrumOnCut,
    #[error("iteration did not converge: {0}")]
    NotConverged(&'static str),
}

/// Numerical tolerance policy shared by every decision in the workspace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative eigenvalue clustering radius (relative to max(1, spectral radius)).
    pub spec_cluster: f64,
    /// Absolute threshold for sign decisions.
    pub nonneg: f64,
    /// Absolute threshold on row sums.
    pub rowsum: f64,
    /// Certificate threshold on ‖exp(Q) − M‖, scaled by max(1, ‖M‖).
    pub residual: f64,
    /// Relative singular-value threshold for numerical rank.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { spec_cluster: 1e-8, nonneg: 1e-10, rowsum: 1e-10, residual: 1e-8, rank: 1e-9 }
    }
}

impl Tolerances {
    pub fn is_valid(&self) -> bool {
        [self.spec_cluster, self.nonneg, self.rowsum, self.residual, self.rank]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0)
    }
}

/// Residual scale used by every certificate: max(1, ‖M‖∞).
pub fn scale(m: &Mat) -> f64 {
    m.norm_inf().max(1.0)
}

/// Non-negative entries and unit row sums, within tolerance.
pub fn is_markov(m: &Mat, tol: &Tolerances) -> bool {
    m.is_finite()
        && m.iter().all(|(_, _, v)| v >= -tol.nonneg)
        && (0..m.dim()).all(|i| (m.row_sum(i) - 1.0).abs() <= tol.rowsum)
}

/// Non-negative off-diagonal entries and zero row sums, within tolerance.
pub fn is_generator(q: &Mat, tol: &Tolerances) -> bool {
    q.is_finite()
        && q.iter().all(|(i, j, v)| i == j || v >= -tol.nonneg)
        && (0..q.dim()).all(|i| q.row_sum(i).abs() <= tol.rowsum)
}

/// `Σ coeffs[i-1] · A^i` for i = 1..=coeffs.len(), evaluated by Horner's rule.
pub fn poly_in(coeffs: &[f64], a: &Mat) -> Mat {
    let d = a.dim();
    let mut acc = Mat::zeros(d);
    for c in coeffs.iter().rev() {
        acc = (acc + Mat::identity(d).scale(*c)) * *a;
    }
    acc
}
