use embed_core::{certify, decide, Construction, EmbeddingResult, Reason, Uniqueness};
use embed_linalg::{principal_log_with, scale, Mat, Tolerances};
use serde::{Deserialize, Serialize};

use crate::{check_nonneg, close_rows, ModelError};

/// Tamura–Nei parameters. Purines `(A, G)` exchange at rate `κ₁` relative to
/// the base rates, pyrimidines `(C, T)` at `κ₂`. HKY is `κ₁ = κ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TNParams {
    pub a: [f64; 4],
    pub kappa1: f64,
    pub kappa2: f64,
}

impl TNParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_nonneg("a", &self.a)?;
        check_nonneg("kappa", &[self.kappa1, self.kappa2])?;
        let m = off_diagonal(self);
        for i in 0..4 {
            let s: f64 = (0..4).filter(|j| *j != i).map(|j| m[(i, j)]).sum();
            if s > 1.0 {
                return Err(ModelError::InfeasibleParams(format!("row {i} leaves the diagonal at {}", 1.0 - s)));
            }
        }
        Ok(())
    }
}

fn off_diagonal(p: &TNParams) -> Mat {
    let [a1, a2, a3, a4] = p.a;
    let (k1, k2) = (p.kappa1, p.kappa2);
    Mat::from_rows(&[
        [0.0, a2 * k1, a3, a4],
        [a1 * k1, 0.0, a3, a4],
        [a1, a2, 0.0, a4 * k2],
        [a1, a2, a3 * k2, 0.0],
    ])
    .expect("4x4")
}

pub fn tn_matrix(p: &TNParams) -> Result<Mat, ModelError> {
    p.validate()?;
    let mut m = off_diagonal(p);
    close_rows(&mut m, 1.0);
    Ok(m)
}

/// The three non-unit eigenvalues.
pub fn tn_spectrum(p: &TNParams) -> (f64, f64, f64) {
    let [a1, a2, a3, a4] = p.a;
    let (r, y) = (a1 + a2, a3 + a4);
    (1.0 - r - y, 1.0 - p.kappa1 * r - y, 1.0 - r - p.kappa2 * y)
}

/// The double inequality `0 < min{1,κ₁}·r + min{1,κ₂}·y` and
/// `max{1,κ₁}·r + max{1,κ₂}·y < 1`, with `r = a₁+a₂`, `y = a₃+a₄`.
///
/// It implies that all non-unit eigenvalues lie in `(0, 1)`, but when both
/// `κ` exceed 1 the upper line is stricter than the eigenvalues need:
/// those only ask `κ₁r + y < 1` and `r + κ₂y < 1` separately.
/// [`tn_eigen_in_unit_interval`] is the exact eigenvalue test.
pub fn tn_cond(p: &TNParams) -> bool {
    let [a1, a2, a3, a4] = p.a;
    let (r, y) = (a1 + a2, a3 + a4);
    let lo = p.kappa1.min(1.0) * r + p.kappa2.min(1.0) * y;
    let hi = p.kappa1.max(1.0) * r + p.kappa2.max(1.0) * y;
    0.0 < lo && hi < 1.0
}

/// All three non-unit eigenvalues lie in `(0, 1)`.
pub fn tn_eigen_in_unit_interval(p: &TNParams) -> bool {
    let (l1, l2, l3) = tn_spectrum(p);
    [l1, l2, l3].iter().all(|l| *l > 0.0 && *l < 1.0)
}

/// Zero pattern of a TN generator: entries tied as in the TN matrix, within
/// `eps`, with non-negative rates and zero row sums.
pub fn is_tn_shaped(q: &Mat, eps: f64) -> bool {
    if q.dim() != 4 {
        return false;
    }
    let tied = |x: (usize, usize), y: (usize, usize)| (q[x] - q[y]).abs() <= eps;
    let rates_ok = q.iter().all(|(i, j, v)| i == j || v >= -eps);
    let rows_ok = (0..4).all(|i| q.row_sum(i).abs() <= eps);
    let base_ok = tied((2, 0), (3, 0)) && tied((2, 1), (3, 1)) && tied((0, 2), (1, 2)) && tied((0, 3), (1, 3));
    // q₀₁·q₂₀ = q₁₀·q₂₁ and q₂₃·q₀₂ = q₃₂·q₀₃ tie each κ to the base rates.
    let k1_ok = (q[(0, 1)] * q[(2, 0)] - q[(1, 0)] * q[(2, 1)]).abs() <= eps * (1.0 + q.max_abs());
    let k2_ok = (q[(2, 3)] * q[(0, 2)] - q[(3, 2)] * q[(0, 3)]).abs() <= eps * (1.0 + q.max_abs());
    rates_ok && rows_ok && base_ok && k1_ok && k2_ok
}

/// Simple spectrum: the principal logarithm is the only real logarithm, so
/// the matrix embeds exactly when that logarithm is a generator, which is
/// then TN-shaped. All eigenvalues in `(0, 1)` is necessary but not
/// sufficient: a small `κ` with both base rates of its group positive gives
/// a negative rate (at `κ₁ = 0`, `m₀₁ = 0` while `m₀₃·m₃₁ > 0`).
/// Degenerate spectra go to the general engine.
pub fn embed_tn(p: &TNParams, tol: &Tolerances) -> Result<EmbeddingResult, ModelError> {
    let m = tn_matrix(p)?;
    let (l1, l2, l3) = tn_spectrum(p);
    let ls = [1.0, l1, l2, l3];
    let simple = (0..4).all(|i| (i + 1..4).all(|j| (ls[i] - ls[j]).abs() > tol.spec_cluster));
    if !simple {
        return Ok(decide(&m, tol));
    }
    let mut out = if tn_eigen_in_unit_interval(p) {
        match principal_log_with(&m, tol) {
            Ok(l) if l.iter().any(|(i, j, v)| i != j && v < -tol.residual * scale(&m)) => {
                EmbeddingResult::not_embeddable(Reason::LogNotGenerator)
            }
            Ok(l) => match certify(&m, &l, 0, Construction::PrincipalLog, tol) {
                Some(g) => EmbeddingResult::embeddable(vec![g], Uniqueness::Unique),
                None => EmbeddingResult::undecided(Reason::ResidualCertificateFailed),
            },
            Err(_) => EmbeddingResult::undecided(Reason::IllConditioned),
        }
    } else if ls.contains(&0.0) {
        EmbeddingResult::not_embeddable(Reason::DetNonpositive)
    } else {
        EmbeddingResult::not_embeddable(Reason::NegativeEigenvalueCulver)
    };
    out.pattern = Some(embed_classifier::Pattern::D4SimpleReal);
    Ok(out)
}
