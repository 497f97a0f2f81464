//! Decision engine for the Markov embedding problem in dimensions 2 to 4.
//!
//! [`decide`] runs the cheap necessary conditions, sorts the matrix into its
//! Jordan-structure case and hands it to the matching case handler. Every
//! generator that leaves this crate has been cleaned and re-verified through
//! the matrix exponential.

mod d2;
mod d3;
mod d4;
mod hyperbola;
mod smt;

pub use d2::embed_d2;
pub use d3::{
    delta_min, embed_d3_complex, embed_d3_cyclic_real, embed_d3_deg2, embed_d3_eq_input_neg,
    eq_input_extremal_generators,
};
pub use d4::embed_d4;
pub use hyperbola::{
    angle_range, hyperbola_search, rotation_logarithm, HyperbolaPoint, SearchOutcome, SearchStatus,
};
pub use smt::{
    branch_count_bound, coeffs_d3_complex, coeffs_deg2, coeffs_d3_confluent, coeffs_d3_distinct,
    coeffs_d4_complex, coeffs_d4_jordan3, coeffs_d4_mixed_jordan2, coeffs_d4_real, complex_branches,
    smt_coeffs,
};

use std::f64::consts::PI;

use embed_classifier::{classify, necessary_checks, CaseTag, NecessaryReport, Pattern};
use embed_linalg::{
    is_generator, is_markov, mat_exp, principal_log_with, scale, LinalgError, Mat, Tolerances,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("coefficient formula has a vanishing denominator")]
    DegenerateDenominator,
    #[error("a real logarithm is needed of a non-positive eigenvalue")]
    NonpositiveEigenvalue,
    #[error("case {0} has no polynomial logarithm on branch {1}")]
    NoPolynomialForm(Pattern, i64),
    #[error("parameters must be strictly positive")]
    NonpositiveParameter,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How a candidate generator was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Construction {
    PrincipalLog,
    PolySmt,
    Hyperbola,
    EqInputExtremalPlus,
    EqInputExtremalMinus,
}

/// A verified generator: off-diagonal entries non-negative, rows summing to
/// zero, and `‖exp(matrix) − M‖∞ = residual ≤ residual tolerance · scale(M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorCandidate {
    pub matrix: Mat,
    /// Logarithm branch; 0 for the principal one.
    pub branch: i64,
    pub construction: Construction,
    pub residual: f64,
    /// Rotation parameters for candidates found on the hyperbola.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<HyperbolaPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Embeddable,
    NotEmbeddable,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Uniqueness {
    Unique,
    MultipleKnown,
    PossiblyMore,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    NotMarkov,
    DetNonpositive,
    ZeroDiagonal,
    NegativeEigenvalueCulver,
    EigenvalueOnUnitCircle,
    TransitivityViolated,
    /// The only candidate logarithm has a negative off-diagonal entry.
    LogNotGenerator,
    /// Every admissible branch was checked and none gives a generator.
    NoBranchFeasible,
    /// No logarithm branch satisfies the eigenvalue wedge bound.
    KRangeEmpty,
    /// Equal-input with summatory parameter beyond the extremal point.
    BeyondExtremal,
    SearchInconclusive,
    IllConditioned,
    ResidualCertificateFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub verdict: Verdict,
    pub generators: Vec<GeneratorCandidate>,
    pub uniqueness: Uniqueness,
    /// Set for every verdict other than `Embeddable`.
    pub reason: Option<Reason>,
    pub pattern: Option<Pattern>,
}

impl EmbeddingResult {
    pub fn not_embeddable(reason: Reason) -> Self {
        EmbeddingResult {
            verdict: Verdict::NotEmbeddable,
            generators: Vec::new(),
            uniqueness: Uniqueness::Unknown,
            reason: Some(reason),
            pattern: None,
        }
    }

    pub fn undecided(reason: Reason) -> Self {
        EmbeddingResult { verdict: Verdict::Undecided, ..Self::not_embeddable(reason) }
    }

    /// `uniqueness` is overridden to `MultipleKnown` when more than one
    /// generator is listed. An empty list turns into `Undecided`.
    pub fn embeddable(generators: Vec<GeneratorCandidate>, uniqueness: Uniqueness) -> Self {
        if generators.is_empty() {
            return Self::undecided(Reason::ResidualCertificateFailed);
        }
        let uniqueness = if generators.len() > 1 { Uniqueness::MultipleKnown } else { uniqueness };
        EmbeddingResult { verdict: Verdict::Embeddable, generators, uniqueness, reason: None, pattern: None }
    }

    fn with_pattern(mut self, p: Pattern) -> Self {
        self.pattern = Some(p);
        self
    }
}

/// Why a raw logarithm was not accepted as a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rejection {
    NotGenerator,
    Residual,
}

/// Clean a raw logarithm and verify it.
///
/// Off-diagonal entries in `[−residual·scale(M), 0)` are set to zero and the
/// diagonal is reset to minus the off-diagonal row sum, so the result is an
/// exact generator. It is accepted when its exponential reproduces `m`.
pub fn certify(
    m: &Mat,
    raw: &Mat,
    branch: i64,
    construction: Construction,
    tol: &Tolerances,
) -> Option<GeneratorCandidate> {
    certify_inner(m, raw, branch, construction, tol).ok()
}

pub(crate) fn certify_inner(
    m: &Mat,
    raw: &Mat,
    branch: i64,
    construction: Construction,
    tol: &Tolerances,
) -> Result<GeneratorCandidate, Rejection> {
    if !raw.is_finite() {
        return Err(Rejection::Residual);
    }
    let d = m.dim();
    let bound = tol.residual * scale(m);
    let mut q = *raw;
    for i in 0..d {
        for j in 0..d {
            if i != j && q[(i, j)] < 0.0 {
                if q[(i, j)] < -bound {
                    return Err(Rejection::NotGenerator);
                }
                q[(i, j)] = 0.0;
            }
        }
    }
    for i in 0..d {
        q[(i, i)] = 0.0;
        q[(i, i)] = -q.row_sum(i);
    }
    let residual = (mat_exp(&q) - *m).norm_inf();
    if residual <= bound {
        Ok(GeneratorCandidate { matrix: q, branch, construction, residual, point: None })
    } else {
        Err(Rejection::Residual)
    }
}

/// Sufficient conditions for a unique embedding, given that `q` embeds `m`:
/// all diagonal entries above 1/2, or `det(M)·min m_ii > e^{−π}·Π m_ii`.
pub fn uniqueness_certificates(m: &Mat, q: &Mat, tol: &Tolerances) -> Uniqueness {
    if !is_generator(q, tol) || (mat_exp(q) - *m).norm_inf() > tol.residual * scale(m) {
        return Uniqueness::Unknown;
    }
    if certificate_fires(m) {
        Uniqueness::Unique
    } else {
        Uniqueness::Unknown
    }
}

/// The certificate test alone, without checking a generator.
pub(crate) fn certificate_fires(m: &Mat) -> bool {
    let d = m.dim();
    let diag: Vec<f64> = (0..d).map(|i| m[(i, i)]).collect();
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let prod: f64 = diag.iter().product();
    min > 0.5 || m.det() * min > (-PI).exp() * prod
}

fn first_failure(r: &NecessaryReport) -> Option<Reason> {
    if !r.det_positive {
        Some(Reason::DetNonpositive)
    } else if !r.diag_positive {
        Some(Reason::ZeroDiagonal)
    } else if !r.culver_ok {
        Some(Reason::NegativeEigenvalueCulver)
    } else if !r.unit_circle_ok {
        Some(Reason::EigenvalueOnUnitCircle)
    } else if !r.transitivity_ok {
        Some(Reason::TransitivityViolated)
    } else {
        None
    }
}

/// Best verified candidate on the principal branch: the principal logarithm
/// and, when the case has one, its polynomial form. Lower residual wins.
pub(crate) fn principal_candidate(
    m: &Mat,
    tag: Option<&CaseTag>,
    tol: &Tolerances,
) -> Result<GeneratorCandidate, Rejection> {
    let mut raws: Vec<(Mat, Construction)> = Vec::new();
    if let Ok(l) = principal_log_with(m, tol) {
        raws.push((l, Construction::PrincipalLog));
    }
    if let Some(tag) = tag {
        if let Ok(c) = smt_coeffs(tag, 0, tol) {
            let a = *m - Mat::identity(m.dim());
            raws.push((embed_linalg::poly_in(&c, &a), Construction::PolySmt));
        }
    }
    let mut best: Result<GeneratorCandidate, Rejection> = Err(Rejection::Residual);
    for (raw, how) in raws {
        match certify_inner(m, &raw, 0, how, tol) {
            Ok(c) => {
                if best.as_ref().map_or(true, |b| c.residual < b.residual) {
                    best = Ok(c);
                }
            }
            Err(Rejection::NotGenerator) if best.is_err() => best = Err(Rejection::NotGenerator),
            Err(_) => {}
        }
    }
    best
}

/// Result for cases whose only candidate is the principal branch.
pub(crate) fn principal_only(m: &Mat, tag: &CaseTag, tol: &Tolerances) -> EmbeddingResult {
    match principal_candidate(m, Some(tag), tol) {
        Ok(c) => EmbeddingResult::embeddable(vec![c], Uniqueness::Unique),
        Err(Rejection::NotGenerator) => EmbeddingResult::not_embeddable(Reason::LogNotGenerator),
        Err(Rejection::Residual) => EmbeddingResult::undecided(Reason::ResidualCertificateFailed),
    }
}

/// Decide embeddability of a Markov matrix of dimension 2, 3 or 4.
pub fn decide(m: &Mat, tol: &Tolerances) -> EmbeddingResult {
    if !is_markov(m, tol) {
        return EmbeddingResult::not_embeddable(Reason::NotMarkov);
    }
    if m.dim() == 2 {
        return embed_d2(m, tol);
    }
    if let Some(r) = first_failure(&necessary_checks(m, tol)) {
        return EmbeddingResult::not_embeddable(r);
    }
    let tag = match classify(m, tol) {
        Ok(t) => t,
        Err(_) => return rescue(m, tol, EmbeddingResult::undecided(Reason::IllConditioned)),
    };
    let result = if tag.dim == 3 {
        match tag.pattern {
            Pattern::D3Identity => identity_result(m, tol),
            Pattern::D3Deg2OneOneL | Pattern::D3Deg2OneLLPos => embed_d3_deg2(m, &tag, tol),
            Pattern::D3Deg2OneLLNeg => embed_d3_eq_input_neg(m, tol),
            Pattern::D3SimpleReal | Pattern::D3Jordan2 => embed_d3_cyclic_real(m, &tag, tol),
            Pattern::D3ComplexPair => embed_d3_complex(m, &tag, tol),
            _ => EmbeddingResult::undecided(Reason::IllConditioned),
        }
    } else {
        embed_d4(m, &tag, tol)
    };
    let mut out = rescue(m, tol, result.with_pattern(tag.pattern));
    if out.uniqueness == Uniqueness::PossiblyMore && out.generators.len() == 1 && certificate_fires(m) {
        out.uniqueness = Uniqueness::Unique;
    }
    out
}

/// The identity is embedded by the zero generator only.
pub(crate) fn identity_result(m: &Mat, tol: &Tolerances) -> EmbeddingResult {
    let zero = Mat::zeros(m.dim());
    match certify(m, &zero, 0, Construction::PrincipalLog, tol) {
        Some(c) => EmbeddingResult::embeddable(vec![c], Uniqueness::Unique),
        None => EmbeddingResult::undecided(Reason::ResidualCertificateFailed),
    }
}

/// An undecided case still has an answer if the principal logarithm
/// happens to verify as a generator.
fn rescue(m: &Mat, tol: &Tolerances, r: EmbeddingResult) -> EmbeddingResult {
    if r.verdict != Verdict::Undecided {
        return r;
    }
    match principal_candidate(m, None, tol) {
        Ok(c) => {
            let u = if certificate_fires(m) { Uniqueness::Unique } else { Uniqueness::PossiblyMore };
            let out = EmbeddingResult::embeddable(vec![c], u);
            match r.pattern {
                Some(p) => out.with_pattern(p),
                None => out,
            }
        }
        Err(_) => r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_is_embedded_by_zero() {
        for d in 2..=4 {
            let r = decide(&Mat::identity(d), &tol());
            assert_eq!(r.verdict, Verdict::Embeddable);
            assert_eq!(r.uniqueness, Uniqueness::Unique);
            assert_eq!(r.generators[0].matrix, Mat::zeros(d));
        }
    }

    #[test]
    fn singular_two_state_matrix() {
        let m = Mat::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let r = decide(&m, &tol());
        assert_eq!(r.verdict, Verdict::NotEmbeddable);
        assert_eq!(r.reason, Some(Reason::DetNonpositive));
    }

    #[test]
    fn flow_product_fails_transitivity() {
        let (a, b) = (0.3f64, 0.45f64);
        let m = Mat::from_rows(&[
            [(1.0 - a) * (1.0 - b), a, (1.0 - a) * b],
            [a * (1.0 - b), 1.0 - a, a * b],
            [b, 0.0, 1.0 - b],
        ])
        .unwrap();
        let r = decide(&m, &tol());
        assert_eq!(r.verdict, Verdict::NotEmbeddable);
        assert_eq!(r.reason, Some(Reason::TransitivityViolated));
    }

    #[test]
    fn non_markov_input_is_rejected() {
        let m = Mat::from_rows(&[[1.2, -0.2], [0.1, 0.9]]).unwrap();
        assert_eq!(decide(&m, &tol()).reason, Some(Reason::NotMarkov));
    }

    #[test]
    fn certificates() {
        let t = tol();
        let q = Mat::from_rows(&[[-0.2, 0.1, 0.1], [0.05, -0.1, 0.05], [0.1, 0.1, -0.2]]).unwrap();
        let m = mat_exp(&q);
        assert_eq!(uniqueness_certificates(&m, &q, &t), Uniqueness::Unique);

        // Diagonal 0.8 everywhere.
        let m = Mat::from_fn(3, |i, j| if i == j { 0.8 } else { 0.1 });
        assert!(certificate_fires(&m));

        // det = 0.05 with a small diagonal entry: only the determinant test fires.
        let (a, b) = (0.9f64, 0.05f64);
        let two = Mat::from_rows(&[[1.0 - a, a], [b, 1.0 - b]]).unwrap();
        assert!((two.det() - 0.05).abs() < 1e-12);
        assert!(two[(0, 0)] < 0.5 && certificate_fires(&two));

        // det = 0.001 with min diagonal 0.3.
        let (a, b) = (0.7f64, 0.299f64);
        let two = Mat::from_rows(&[[1.0 - a, a], [b, 1.0 - b]]).unwrap();
        assert!((two.det() - 0.001).abs() < 1e-12);
        assert!(!certificate_fires(&two));
    }

    #[test]
    fn certify_clamps_roundoff_and_rejects_real_negatives() {
        let t = tol();
        let q = Mat::from_rows(&[[-0.3, 0.3, 0.0], [0.0, -0.2, 0.2], [0.1, 0.0, -0.1]]).unwrap();
        let m = mat_exp(&q);
        let mut noisy = q;
        noisy[(0, 2)] = -1e-13;
        let c = certify(&m, &noisy, 0, Construction::PrincipalLog, &t).unwrap();
        assert_eq!(c.matrix[(0, 2)], 0.0);
        assert!(c.residual < 1e-12);
        let mut bad = q;
        bad[(0, 2)] = -1e-3;
        bad[(0, 0)] += 1e-3;
        assert!(certify(&m, &bad, 0, Construction::PrincipalLog, &t).is_none());
    }
}
