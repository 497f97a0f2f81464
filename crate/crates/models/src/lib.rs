//! Nucleotide substitution model classes: equal-input (with constant-input
//! and Jukes–Cantor), Tamura–Nei (with HKY) and Kimura 3ST (with K2P).
//!
//! States are ordered `(A, G, C, T)` throughout. Recognizers match the
//! entry pattern in that order and do not search over relabelings.

mod equal_input;
mod k3st;
mod recognize;
mod tn;

pub use equal_input::{
    commutant_basis_d3, embed_equal_input, equal_input_matrix, recognize_equal_input, EqualInputParams,
};
pub use k3st::{embed_k3st, k3st_generator, k3st_matrix, k3st_spectrum, K3STParams};
pub use recognize::{model_recognize, recognize_k3st, recognize_tn, ModelTag};
pub use tn::{embed_tn, is_tn_shaped, tn_cond, tn_eigen_in_unit_interval, tn_matrix, tn_spectrum, TNParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("infeasible model parameters: {0}")]
    InfeasibleParams(String),
    #[error("parameters must be strictly positive")]
    NonpositiveParameter,
}

/// Every value finite and non-negative.
pub(crate) fn check_nonneg(name: &str, vals: &[f64]) -> Result<(), ModelError> {
    match vals.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        Some(v) => Err(ModelError::InfeasibleParams(format!("{name} has entry {v}"))),
        None => Ok(()),
    }
}

/// Fill the diagonal so every row sums to `target`.
pub(crate) fn close_rows(m: &mut embed_linalg::Mat, target: f64) {
    for i in 0..m.dim() {
        m[(i, i)] = 0.0;
        m[(i, i)] = target - m.row_sum(i);
    }
}
