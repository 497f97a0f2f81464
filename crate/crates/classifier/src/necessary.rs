use embed_linalg::{eigenvalues, jordan_from_spectrum, Mat, Tolerances, C64};
use serde::{Deserialize, Serialize};

/// Necessary conditions for embeddability. Any false flag rules it out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub diag_positive: bool,
    pub det_positive: bool,
    /// Every eigenvalue other than 1 lies strictly inside the unit disc.
    pub unit_circle_ok: bool,
    /// Nonsingular, and at each negative eigenvalue every block size occurs
    /// an even number of times (existence of a real logarithm).
    pub culver_ok: bool,
    /// `m_ik > 0` and `m_kj > 0` imply `m_ij > 0`, with zero meaning at
    /// most `nonneg` and the path weight `m_ik·m_kj` above `√nonneg`.
    pub transitivity_ok: bool,
}

impl NecessaryReport {
    pub fn all_ok(&self) -> bool {
        self.diag_positive && self.det_positive && self.unit_circle_ok && self.culver_ok && self.transitivity_ok
    }
}

/// A zero entry `m_ij` is only held against a path `i → k → j` whose
/// weight `m_ik·m_kj` exceeds `√tol`; exponentials of generators with small
/// rates have entries far below `tol` that are positive all the same.
fn transitive(m: &Mat, tol: f64) -> bool {
    let d = m.dim();
    let path = tol.sqrt();
    for i in 0..d {
        for j in 0..d {
            if m[(i, j)] > tol {
                continue;
            }
            if (0..d).any(|k| m[(i, k)] * m[(k, j)] > path) {
                return false;
            }
        }
    }
    true
}

/// Necessary conditions for a Markov matrix `m`.
///
/// When the Jordan structure cannot be resolved, the block-pairing part of
/// `culver_ok` falls back to even algebraic multiplicity.
pub fn necessary_checks(m: &Mat, tol: &Tolerances) -> NecessaryReport {
    let d = m.dim();
    let diag_positive = (0..d).all(|i| m[(i, i)] > tol.nonneg);
    let det_positive = m.det() > 0.0;
    let transitivity_ok = transitive(m, tol.nonneg);

    let (unit_circle_ok, culver_ok) = match eigenvalues(m, tol) {
        Err(_) => (false, false),
        Ok(spec) => {
            let one = C64::new(1.0, 0.0);
            let unit = spec.roots.iter().all(|(z, _)| *z == one || z.norm() < 1.0 - tol.nonneg);
            let nonsingular = spec.roots.iter().all(|(z, _)| z.norm() > tol.nonneg);
            let negatives: Vec<(C64, usize)> =
                spec.roots.iter().filter(|(z, _)| z.im == 0.0 && z.re < -tol.nonneg).cloned().collect();
            let culver = nonsingular
                && match jordan_from_spectrum(m, &spec, tol) {
                    Ok(js) => negatives.iter().all(|(z, _)| {
                        let sizes = js.sizes_of(*z).unwrap_or(&[]);
                        (1..=d).all(|s| sizes.iter().filter(|b| **b == s).count() % 2 == 0)
                    }),
                    Err(_) => negatives.iter().all(|(_, mult)| mult % 2 == 0),
                };
            (unit, culver)
        }
    };

    NecessaryReport { diag_positive, det_positive, unit_circle_ok, culver_ok, transitivity_ok }
}
