use std::f64::consts::PI;

use embed_classifier::{CaseTag, Pattern};
use embed_linalg::{Mat, Tolerances};

use crate::d3::{embed_complex, with_pair_branches};
use crate::hyperbola::{angle_range, scan_pair};
use crate::{certificate_fires, identity_result, principal_only, EmbeddingResult, Reason, Uniqueness, Verdict};

/// Four-state dispatch over the Jordan-structure cases.
pub fn embed_d4(m: &Mat, tag: &CaseTag, tol: &Tolerances) -> EmbeddingResult {
    use Pattern::*;
    let real = &tag.eigen_data.real;
    let last = real.last().copied().unwrap_or(f64::NAN);
    match tag.pattern {
        D4Identity => identity_result(m, tol),
        // diag(1,1,1,λ): a non-principal branch would need a purely
        // imaginary eigenvalue pair of a 3-state block with a zero row,
        // which Gershgorin rules out.
        D4Deg2TripleOne | D4Deg3TwoOnesDistinct | D4Deg3TwoOnesJordan | D4Deg3LJordanL | D4SimpleReal
        | D4Jordan3 | D4MixedJordan2 => {
            if real.iter().any(|l| *l <= 0.0) {
                return EmbeddingResult::not_embeddable(Reason::NegativeEigenvalueCulver);
            }
            principal_only(m, tag, tol)
        }
        D4Deg2TripleL => {
            let base = principal_only(m, tag, tol);
            if base.verdict != Verdict::Embeddable {
                return base;
            }
            // Rotating the triple eigenspace needs 2π ≤ |log λ|.
            if last > (-2.0 * PI).exp() || certificate_fires(m) {
                base
            } else {
                EmbeddingResult::embeddable(base.generators, Uniqueness::PossiblyMore)
            }
        }
        D4Deg2DoublePos | D4Deg3DoubleL2Pos => {
            let base = principal_only(m, tag, tol);
            if base.verdict != Verdict::Embeddable || certificate_fires(m) {
                return base;
            }
            with_pair_branches(m, base, last, tol)
        }
        D4Deg2DoubleNeg | D4Deg3DoubleL2Neg => embed_negative_pair(m, last, tol),
        D4Deg3Complex | D4SimpleComplex => embed_complex(m, tag, tol),
        _ => EmbeddingResult::undecided(Reason::IllConditioned),
    }
}

/// A negative double eigenvalue: every real logarithm rotates its
/// eigenspace by an odd multiple of π, so only the hyperbola branches exist.
fn embed_negative_pair(m: &Mat, lambda: f64, tol: &Tolerances) -> EmbeddingResult {
    if angle_range(lambda, 4).is_empty() {
        return EmbeddingResult::not_embeddable(Reason::KRangeEmpty);
    }
    let scan = scan_pair(m, lambda, false, tol);
    if scan.generators.is_empty() {
        return if scan.open > 0 {
            EmbeddingResult::undecided(Reason::SearchInconclusive)
        } else {
            EmbeddingResult::not_embeddable(Reason::NoBranchFeasible)
        };
    }
    let u = if scan.open == 0 { Uniqueness::Unique } else { Uniqueness::PossiblyMore };
    EmbeddingResult::embeddable(scan.generators, u)
}
