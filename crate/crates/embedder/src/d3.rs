use std::f64::consts::PI;

use embed_classifier::CaseTag;
use embed_linalg::{poly_in, Mat, Tolerances};

use crate::hyperbola::scan_pair;
use crate::smt::{complex_branches, smt_coeffs, WEDGE_SLACK};
use crate::{
    certificate_fires, certify, certify_inner, principal_candidate, principal_only, Construction, EmbedError,
    EmbeddingResult, GeneratorCandidate, Reason, Rejection, Uniqueness,
};

/// Minimal polynomial of degree 2: `diag(1, 1, λ)` or `diag(1, λ, λ)` with
/// `λ > 0`.
///
/// The principal generator `−log λ/(1−λ)·A` always exists. For a double
/// `λ` the rotating branches of its eigenspace are searched as well, unless
/// a uniqueness certificate already rules them out.
pub fn embed_d3_deg2(m: &Mat, tag: &CaseTag, tol: &Tolerances) -> EmbeddingResult {
    let base = principal_only(m, tag, tol);
    if base.generators.is_empty() || tag.pattern != embed_classifier::Pattern::D3Deg2OneLLPos {
        return base;
    }
    if certificate_fires(m) {
        return base;
    }
    let lambda = *tag.eigen_data.real.last().expect("double eigenvalue");
    with_pair_branches(m, base, lambda, tol)
}

/// Add the non-principal branches of a positive double eigenvalue to an
/// embeddable `base` result.
pub(crate) fn with_pair_branches(m: &Mat, base: EmbeddingResult, lambda: f64, tol: &Tolerances) -> EmbeddingResult {
    let scan = scan_pair(m, lambda, true, tol);
    let mut gens = base.generators;
    gens.extend(scan.generators);
    let u = if scan.open == 0 { Uniqueness::Unique } else { Uniqueness::PossiblyMore };
    EmbeddingResult::embeddable(gens, u)
}

/// `π κ √c / √(c₁c₂c₃)` with `κ = max cᵢ` and `c = c₁ + c₂ + c₃`: the
/// smallest decay rate of a generator commuting with `C(c₁, c₂, c₃)` whose
/// exponential has a negative double eigenvalue.
pub fn delta_min(c1: f64, c2: f64, c3: f64) -> Result<f64, EmbedError> {
    if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0) {
        return Err(EmbedError::NonpositiveParameter);
    }
    let kappa = c1.max(c2).max(c3);
    Ok(PI * kappa * (c1 + c2 + c3).sqrt() / (c1 * c2 * c3).sqrt())
}

/// The two generators `Q₊, Q₋` reaching the extremal equal-input matrix on
/// the ray through `(c₁, c₂, c₃)`. Both depend on the direction only.
pub fn eq_input_extremal_generators(c1: f64, c2: f64, c3: f64) -> Result<(Mat, Mat), EmbedError> {
    if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0) {
        return Err(EmbedError::NonpositiveParameter);
    }
    let k = c1.max(c2).max(c3);
    let f = PI / ((c1 + c2 + c3) * c1 * c2 * c3).sqrt();
    let build = |s: f64| {
        Mat::from_rows(&[
            [-k * (c2 + c3), c2 * (k + s * c3), c3 * (k - s * c2)],
            [c1 * (k - s * c3), -k * (c1 + c3), c3 * (k + s * c1)],
            [c1 * (k + s * c2), c2 * (k - s * c1), -k * (c1 + c2)],
        ])
        .expect("3x3")
        .scale(f)
    };
    Ok((build(1.0), build(-1.0)))
}

/// Off-diagonal column values of a three-state equal-input matrix, or
/// `None` when the rows disagree.
fn equal_input_columns(m: &Mat, tol: &Tolerances) -> Option<[f64; 3]> {
    let mut c = [0.0; 3];
    for j in 0..3 {
        let vals: Vec<f64> = (0..3).filter(|i| *i != j).map(|i| m[(i, j)]).collect();
        if (vals[0] - vals[1]).abs() > 10.0 * tol.rowsum {
            return None;
        }
        c[j] = (vals[0] + vals[1]) / 2.0;
    }
    Some(c)
}

/// Equal-input matrix with summatory parameter `c > 1`, so a negative
/// double eigenvalue `1 − c`.
///
/// Embeddable exactly when `c ≤ 1 + e^{−Δmin}`. At the extremal point the
/// two generators are `Q±`; inside, `Q± + τ·Q_C` with `Q_C` the equal-input
/// generator of the same direction, which commutes with `Q±`.
pub fn embed_d3_eq_input_neg(m: &Mat, tol: &Tolerances) -> EmbeddingResult {
    let Some(cv) = equal_input_columns(m, tol) else {
        return EmbeddingResult::undecided(Reason::IllConditioned);
    };
    let c: f64 = cv.iter().sum();
    let lambda = 1.0 - c;
    if lambda < -(-PI * 3f64.sqrt()).exp() * (1.0 + WEDGE_SLACK) {
        return EmbeddingResult::not_embeddable(Reason::KRangeEmpty);
    }
    let (Ok(dmin), Ok((qp, qm))) = (delta_min(cv[0], cv[1], cv[2]), eq_input_extremal_generators(cv[0], cv[1], cv[2]))
    else {
        return EmbeddingResult::undecided(Reason::IllConditioned);
    };
    let cmax = 1.0 + (-dmin).exp();
    if c > cmax + tol.nonneg {
        return EmbeddingResult::not_embeddable(Reason::BeyondExtremal);
    }
    let raws = if c >= cmax - tol.nonneg {
        [(qp, Construction::EqInputExtremalPlus), (qm, Construction::EqInputExtremalMinus)]
    } else {
        let s = cmax / c;
        let qc = Mat::from_fn(3, |i, j| cv[j] * s - if i == j { cmax } else { 0.0 });
        let tau = -((c - 1.0) / (cmax - 1.0)).ln() / cmax;
        [
            (qp + qc.scale(tau), Construction::EqInputExtremalPlus),
            (qm + qc.scale(tau), Construction::EqInputExtremalMinus),
        ]
    };
    let gens: Vec<GeneratorCandidate> =
        raws.iter().filter_map(|(q, how)| certify(m, q, 0, *how, tol)).collect();
    if gens.is_empty() {
        return EmbeddingResult::undecided(Reason::ResidualCertificateFailed);
    }
    EmbeddingResult::embeddable(gens, Uniqueness::MultipleKnown)
}

/// Cyclic real cases `diag(1, λ₁, λ₂)` and `1 ⊕ J₂(λ)`: the only candidate
/// is the principal logarithm, so the embedding is unique when it exists.
pub fn embed_d3_cyclic_real(m: &Mat, tag: &CaseTag, tol: &Tolerances) -> EmbeddingResult {
    if tag.eigen_data.real.iter().any(|l| *l <= 0.0) {
        return EmbeddingResult::not_embeddable(Reason::NegativeEigenvalueCulver);
    }
    principal_only(m, tag, tol)
}

/// `diag(1, λ, λ̄)`: every branch in the generator wedge is tried.
pub fn embed_d3_complex(m: &Mat, tag: &CaseTag, tol: &Tolerances) -> EmbeddingResult {
    embed_complex(m, tag, tol)
}

/// Branch enumeration shared by all cases with a non-real pair.
pub(crate) fn embed_complex(m: &Mat, tag: &CaseTag, tol: &Tolerances) -> EmbeddingResult {
    let Some(z) = tag.eigen_data.complex else {
        return EmbeddingResult::undecided(Reason::IllConditioned);
    };
    if z.norm() >= 1.0 {
        return EmbeddingResult::not_embeddable(Reason::EigenvalueOnUnitCircle);
    }
    let range = complex_branches(z, m.dim());
    if range.is_empty() {
        return EmbeddingResult::not_embeddable(Reason::KRangeEmpty);
    }
    let mut gens = Vec::new();
    let mut numeric_failure = false;
    for k in range {
        let res = if k == 0 {
            principal_candidate(m, Some(tag), tol)
        } else {
            match smt_coeffs(tag, k, tol) {
                Ok(c) => certify_inner(m, &poly_in(&c, &(*m - Mat::identity(m.dim()))), k, Construction::PolySmt, tol),
                Err(_) => Err(Rejection::Residual),
            }
        };
        match res {
            Ok(c) => gens.push(c),
            Err(Rejection::Residual) => numeric_failure = true,
            Err(Rejection::NotGenerator) => {}
        }
    }
    if gens.is_empty() {
        return if numeric_failure {
            EmbeddingResult::undecided(Reason::ResidualCertificateFailed)
        } else {
            EmbeddingResult::not_embeddable(Reason::NoBranchFeasible)
        };
    }
    // Every admissible branch was checked, so a single hit is the only one.
    let u = if numeric_failure { Uniqueness::PossiblyMore } else { Uniqueness::Unique };
    EmbeddingResult::embeddable(gens, u)
}
