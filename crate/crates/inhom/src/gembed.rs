use embed_linalg::{is_markov, Mat, Tolerances};
use serde::{Deserialize, Serialize};

use crate::poisson::PoissonFactor;
use crate::InhomError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GVerdict {
    GEmbeddable,
    NotGEmbeddable,
    Undecided,
}

/// Which three-state criterion produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GRoute {
    /// `det M ≤ 0`.
    Singular,
    /// `Π m_ii ≥ det M` fails.
    NecessaryFailed,
    /// Some off-diagonal entry vanishes: the necessary condition suffices.
    ZeroOffDiagonal,
    /// Totally positive with `B_M ≥ det M`.
    AboveB,
    /// Totally positive with `B_M < det M`.
    BelowB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GReport {
    pub necessary_ok: bool,
    /// Only for totally positive input.
    pub b_quantity: Option<f64>,
    pub verdict: GVerdict,
    pub route: GRoute,
    /// Upper bound on the number of Poisson factors of a representation.
    pub factor_bound: Option<u32>,
    /// Explicit factors; not constructed yet.
    pub factors: Option<Vec<PoissonFactor>>,
}

/// `Π m_ii ≥ det M > 0`, necessary for any flow `Ṁ = M·Q(t)` to reach `M`.
pub fn g_necessary(m: &Mat, tol: &Tolerances) -> bool {
    let det = m.det();
    let prod: f64 = (0..m.dim()).map(|i| m[(i, i)]).product();
    det > 0.0 && prod >= det - tol.nonneg
}

/// `B_M = max_{i,j} (m_ii m_jj / m_ij)·(−1)^{i+j+δ_ij−1}·M^{(ij)}`, with
/// `M^{(ij)}` the minor that deletes row `i` and column `j`.
pub fn b_quantity(m: &Mat) -> Result<f64, InhomError> {
    if m.dim() != 3 {
        return Err(InhomError::Dimension { expected: "3", got: m.dim() });
    }
    if !m.iter().all(|(_, _, v)| v > 0.0) {
        return Err(InhomError::NotTotallyPositive);
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..3 {
        for j in 0..3 {
            let sign = if (i + j + usize::from(i == j)) % 2 == 1 { 1.0 } else { -1.0 };
            best = best.max(m[(i, i)] * m[(j, j)] / m[(i, j)] * sign * m.minor(i, j));
        }
    }
    Ok(best)
}

/// `6⌈log(det M)/log(1/2)⌉`, a bound on the number of Poisson factors of
/// any g-embeddable three-state matrix.
pub fn factor_bound_from_det(det: f64) -> Option<u32> {
    (det > 0.0 && det <= 1.0).then(|| 6 * (det.ln() / 0.5f64.ln()).ceil() as u32)
}

/// The sharper bound `n_k` for `B_M < det M`, where `8^{−k} ≤ det < 8^{1−k}`.
fn factor_bound_below_b(det: f64) -> Option<u32> {
    if !(det > 0.0 && det < 0.125) {
        return None;
    }
    let k = (-det.ln() / 8f64.ln()).ceil().max(2.0);
    let upper_half = det >= 0.5 * 8f64.powf(1.0 - k);
    Some(if upper_half { 5.0 * k - 2.0 } else { 5.0 * k - 1.0 } as u32)
}

/// Three-state g-embeddability from the classical criteria.
///
/// With a vanishing off-diagonal entry the necessary condition is also
/// sufficient. For totally positive matrices `B_M ≥ det M` suffices, and
/// `B_M < det M` rules out `det M ≥ 1/8`. The region `B_M < det M < 1/8`
/// needs conditions not implemented here and stays `Undecided`.
pub fn g_embed_d3(m: &Mat, tol: &Tolerances) -> Result<GReport, InhomError> {
    if m.dim() != 3 {
        return Err(InhomError::Dimension { expected: "3", got: m.dim() });
    }
    if !is_markov(m, tol) {
        return Err(InhomError::NotMarkov);
    }
    let det = m.det();
    let necessary_ok = g_necessary(m, tol);
    let report = |verdict, route, b_quantity, factor_bound| GReport {
        necessary_ok,
        b_quantity,
        verdict,
        route,
        factor_bound,
        factors: None,
    };
    if det <= 0.0 {
        return Ok(report(GVerdict::NotGEmbeddable, GRoute::Singular, None, None));
    }
    if !necessary_ok {
        return Ok(report(GVerdict::NotGEmbeddable, GRoute::NecessaryFailed, None, None));
    }
    if m.iter().any(|(i, j, v)| i != j && v <= tol.nonneg) {
        return Ok(report(GVerdict::GEmbeddable, GRoute::ZeroOffDiagonal, None, Some(5)));
    }
    let b = b_quantity(m)?;
    Ok(if b >= det {
        report(GVerdict::GEmbeddable, GRoute::AboveB, Some(b), Some(6))
    } else if det >= 0.125 {
        report(GVerdict::NotGEmbeddable, GRoute::BelowB, Some(b), None)
    } else {
        let bound = match (factor_bound_from_det(det), factor_bound_below_b(det)) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        report(GVerdict::Undecided, GRoute::BelowB, Some(b), bound)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_input(c: f64) -> Mat {
        Mat::from_fn(3, |i, j| c / 3.0 + if i == j { 1.0 - c } else { 0.0 })
    }

    #[test]
    fn b_for_constant_input() {
        // Off-diagonal 1/5, diagonal 3/5: diagonal terms 3/5·(9−1)/25 = 24/125,
        // off-diagonal terms (9/25)/(1/5)·2/25 = 18/125.
        let b = b_quantity(&constant_input(0.6)).unwrap();
        assert!((b - 24.0 / 125.0).abs() < 1e-15);
    }

    #[test]
    fn identity_and_zero_diagonal() {
        let t = Tolerances::default();
        assert!(g_necessary(&Mat::identity(3), &t));
        let m = Mat::from_rows(&[[0.0, 0.5, 0.5], [0.2, 0.8, 0.0], [0.1, 0.1, 0.8]]).unwrap();
        assert!(!g_necessary(&m, &t));
    }

    #[test]
    fn singular_is_rejected() {
        let m = constant_input(1.0);
        let r = g_embed_d3(&m, &Tolerances::default()).unwrap();
        assert_eq!((r.verdict, r.route), (GVerdict::NotGEmbeddable, GRoute::Singular));
    }

    #[test]
    fn factor_bounds() {
        assert_eq!(factor_bound_from_det(1.0), Some(0));
        assert_eq!(factor_bound_from_det(0.3), Some(12));
        // k = 2 band [1/64, 1/8), split at 1/16.
        assert_eq!(factor_bound_below_b(0.02), Some(9));
        assert_eq!(factor_bound_below_b(0.1), Some(8));
        assert_eq!(factor_bound_below_b(0.01), Some(13));
        assert_eq!(factor_bound_below_b(0.2), None);
    }
}
