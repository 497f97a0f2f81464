use embed_core::{certify, decide, Construction, EmbeddingResult, Reason, Uniqueness};
use embed_linalg::{Mat, Tolerances};
use serde::{Deserialize, Serialize};

use crate::equal_input::{embed_equal_input, EqualInputParams};
use crate::{check_nonneg, close_rows, ModelError};

/// Kimura 3ST parameters; K2P is `y = z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K3STParams {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl K3STParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        check_nonneg("(x, y, z)", &[self.x, self.y, self.z])?;
        if self.x + self.y + self.z > 1.0 {
            return Err(ModelError::InfeasibleParams(format!("x + y + z = {} > 1", self.x + self.y + self.z)));
        }
        Ok(())
    }
}

/// `(1 − x − y − z)·I + x·K₁ + y·K₂ + z·K₃` with the Klein four-group
/// permutation matrices `Kᵢ`.
fn klein(x: f64, y: f64, z: f64) -> Mat {
    Mat::from_rows(&[[0.0, x, y, z], [x, 0.0, z, y], [y, z, 0.0, x], [z, y, x, 0.0]]).expect("4x4")
}

pub fn k3st_matrix(p: &K3STParams) -> Result<Mat, ModelError> {
    p.validate()?;
    let mut m = klein(p.x, p.y, p.z);
    close_rows(&mut m, 1.0);
    Ok(m)
}

/// `(1 − 2(x+z), 1 − 2(y+z), 1 − 2(x+y))`, in the order the generator
/// formula expects.
pub fn k3st_spectrum(p: &K3STParams) -> (f64, f64, f64) {
    (1.0 - 2.0 * (p.x + p.z), 1.0 - 2.0 * (p.y + p.z), 1.0 - 2.0 * (p.x + p.y))
}

/// The logarithm built from signed quarter-sums of `log λᵢ`. Its rates are
/// `x' = (−L₁ + L₂ − L₃)/4`, `y' = (L₁ − L₂ − L₃)/4`, `z' = (−L₁ − L₂ + L₃)/4`.
/// `None` unless all three eigenvalues are positive.
pub fn k3st_generator(p: &K3STParams) -> Option<Mat> {
    let (l1, l2, l3) = k3st_spectrum(p);
    if !(l1 > 0.0 && l2 > 0.0 && l3 > 0.0) {
        return None;
    }
    let (a, b, c) = (l1.ln(), l2.ln(), l3.ln());
    let mut q = klein((-a + b - c) / 4.0, (a - b - c) / 4.0, (-a - b + c) / 4.0);
    // (+,+,+)/4 on the diagonal; closing the rows gives the same value.
    close_rows(&mut q, 0.0);
    Some(q)
}

/// Simple spectrum (distinct `x, y, z`): embeddable exactly when all
/// eigenvalues are positive and each dominates the product of the other
/// two; the embedding is then unique and of K3ST type. `x = y = z` is
/// constant input; the K2P-like cases go to the general engine.
pub fn embed_k3st(p: &K3STParams, tol: &Tolerances) -> Result<EmbeddingResult, ModelError> {
    let m = k3st_matrix(p)?;
    let near = |u: f64, v: f64| (u - v).abs() <= tol.spec_cluster;
    let (x, y, z) = (p.x, p.y, p.z);
    if near(x, y) && near(y, z) {
        let c = (x + y + z) / 3.0;
        let ei = EqualInputParams::constant(4, 4.0 * c)?;
        // Average away the parameter spread so the closed form applies to `m`.
        let mut out = embed_equal_input(&ei, 4, tol)?;
        if out.verdict == embed_core::Verdict::Embeddable {
            let g = certify(&m, &out.generators[0].matrix, 0, Construction::PrincipalLog, tol);
            out = match g {
                Some(g) => EmbeddingResult { generators: vec![g], ..out },
                None => decide(&m, tol),
            };
        }
        return Ok(out);
    }
    if near(x, y) || near(y, z) || near(x, z) {
        return Ok(decide(&m, tol));
    }
    let (l1, l2, l3) = k3st_spectrum(p);
    let mut out = if l1 <= 0.0 || l2 <= 0.0 || l3 <= 0.0 {
        let reason = if l1 * l2 * l3 <= 0.0 { Reason::DetNonpositive } else { Reason::NegativeEigenvalueCulver };
        EmbeddingResult::not_embeddable(reason)
    } else {
        let q = k3st_generator(p).expect("positive spectrum");
        let worst = [q[(0, 1)], q[(0, 2)], q[(0, 3)]].into_iter().fold(f64::INFINITY, f64::min);
        if worst < -tol.nonneg {
            EmbeddingResult::not_embeddable(Reason::LogNotGenerator)
        } else {
            match certify(&m, &q, 0, Construction::PrincipalLog, tol) {
                Some(g) => EmbeddingResult::embeddable(vec![g], Uniqueness::Unique),
                None => EmbeddingResult::undecided(Reason::ResidualCertificateFailed),
            }
        }
    };
    out.pattern = Some(embed_classifier::Pattern::D4SimpleReal);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use embed_core::Verdict;
    use embed_linalg::{mat_exp, principal_log};

    fn k(x: f64, y: f64, z: f64) -> K3STParams {
        K3STParams { x, y, z }
    }

    #[test]
    fn generator_reproduces_the_matrix() {
        let p = k(0.05, 0.1, 0.15);
        let m = k3st_matrix(&p).unwrap();
        let q = k3st_generator(&p).unwrap();
        assert!(mat_exp(&q).max_abs_diff(&m) < 1e-13);
        assert!(principal_log(&m).unwrap().max_abs_diff(&q) < 1e-12);
        let r = embed_k3st(&p, &Tolerances::default()).unwrap();
        assert_eq!((r.verdict, r.uniqueness), (Verdict::Embeddable, Uniqueness::Unique));
    }

    #[test]
    fn boundary_gives_a_zero_rate() {
        let t = Tolerances::default();
        // λ₁ = λ₂λ₃ with λ = (0.4, 0.8, 0.5) kills the (+,−,−) entry, the y rate.
        let p = k(0.225, 0.025, 0.075);
        let (l1, l2, l3) = k3st_spectrum(&p);
        assert!((l1 - l2 * l3).abs() < 1e-15);
        let r = embed_k3st(&p, &t).unwrap();
        assert_eq!(r.verdict, Verdict::Embeddable);
        let rate = r.generators[0].matrix[(0, 2)];
        assert!(rate.abs() < 1e-14, "{rate}");
        // λ₂ = λ₁λ₃ with λ = (0.8, 0.4, 0.5) kills the (−,+,−) entry, the x rate.
        let p = k(0.025, 0.225, 0.075);
        let r = embed_k3st(&p, &t).unwrap();
        assert_eq!(r.verdict, Verdict::Embeddable);
        let rate = r.generators[0].matrix[(0, 1)];
        assert!(rate.abs() < 1e-14, "{rate}");
    }

    #[test]
    fn product_violation_is_rejected() {
        // λ = (0.2, 0.7, 0.3): λ₁ < λ₂λ₃ = 0.21.
        let p = k(0.3, 0.05, 0.1);
        let (l1, l2, l3) = k3st_spectrum(&p);
        assert!(l1 < l2 * l3, "{l1} {l2} {l3}");
        let r = embed_k3st(&p, &Tolerances::default()).unwrap();
        assert_eq!((r.verdict, r.reason), (Verdict::NotEmbeddable, Some(Reason::LogNotGenerator)));
    }

    #[test]
    fn constant_input_cases() {
        let t = Tolerances::default();
        let r = embed_k3st(&k(0.2, 0.2, 0.2), &t).unwrap();
        assert_eq!(r.verdict, Verdict::Embeddable);
        let r = embed_k3st(&k(0.3, 0.3, 0.3), &t).unwrap();
        assert_eq!(r.verdict, Verdict::NotEmbeddable);
    }

    #[test]
    fn negative_eigenvalue() {
        let r = embed_k3st(&k(0.5, 0.3, 0.1), &Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotEmbeddable);
    }
}
