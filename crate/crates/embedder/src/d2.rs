use embed_classifier::Pattern;
use embed_linalg::{Mat, Tolerances};

use crate::{certify, Construction, EmbeddingResult, Reason, Uniqueness};

/// Two states: `M = [[1−a, a], [b, 1−b]]` is embeddable exactly when
/// `a + b < 1`, and then only by `−log(1−a−b)/(a+b) · (M − I)`.
///
/// The generator direction is built from `a` and `b` themselves rather than
/// from `M − I`, so no cancellation happens on the diagonal.
pub fn embed_d2(m: &Mat, tol: &Tolerances) -> EmbeddingResult {
    let (a, b) = (m[(0, 1)], m[(1, 0)]);
    let s = a + b;
    if s == 0.0 {
        return match certify(m, &Mat::zeros(2), 0, Construction::PrincipalLog, tol) {
            Some(c) => EmbeddingResult::embeddable(vec![c], Uniqueness::Unique).with_pattern(Pattern::D2Identity),
            None => EmbeddingResult::undecided(Reason::ResidualCertificateFailed),
        };
    }
    if s >= 1.0 {
        return EmbeddingResult::not_embeddable(Reason::DetNonpositive).with_pattern(Pattern::D2Generic);
    }
    let dir = Mat::from_rows(&[[-a, a], [b, -b]]).expect("2x2");
    let q = dir.scale(-(-s).ln_1p() / s);
    let out = match certify(m, &q, 0, Construction::PrincipalLog, tol) {
        Some(c) => EmbeddingResult::embeddable(vec![c], Uniqueness::Unique),
        None => EmbeddingResult::undecided(Reason::ResidualCertificateFailed),
    };
    out.with_pattern(Pattern::D2Generic)
}
