use embed_classifier::classify;
use embed_core::{
    certify, embed_d2, embed_d3_eq_input_neg, uniqueness_certificates, Construction, EmbeddingResult, Reason,
    Uniqueness,
};
use embed_linalg::{Mat, Tolerances};
use serde::{Deserialize, Serialize};

use crate::{check_nonneg, close_rows, ModelError};

/// Slack on the Markov feasibility inequalities, so parameters read back
/// from a matrix are accepted again.
const FEASIBILITY_SLACK: f64 = 1e-10;

/// `M_c = (1 − c)·I + C(c₁, …, c_d)`, where every row of `C` is `c_vec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualInputParams {
    pub c_vec: Vec<f64>,
    /// Summatory parameter `Σ cᵢ`.
    pub c: f64,
}

impl EqualInputParams {
    pub fn new(c_vec: Vec<f64>) -> Result<Self, ModelError> {
        let p = EqualInputParams { c: c_vec.iter().sum(), c_vec };
        p.validate()?;
        Ok(p)
    }

    /// Constant input `cᵢ = c/d`; for `d = 4` this is the Jukes–Cantor family.
    pub fn constant(dim: usize, c: f64) -> Result<Self, ModelError> {
        Self::new(vec![c / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.c_vec.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_nonneg("c_vec", &self.c_vec)?;
        if !(2..=4).contains(&self.dim()) {
            return Err(ModelError::InfeasibleParams(format!("dimension {} not in 2..=4", self.dim())));
        }
        let sum: f64 = self.c_vec.iter().sum();
        if (sum - self.c).abs() > FEASIBILITY_SLACK {
            return Err(ModelError::InfeasibleParams(format!("c = {} but the entries sum to {sum}", self.c)));
        }
        if let Some(ci) = self.c_vec.iter().find(|ci| self.c > 1.0 + **ci + FEASIBILITY_SLACK) {
            return Err(ModelError::InfeasibleParams(format!("c = {} exceeds 1 + {ci}", self.c)));
        }
        Ok(())
    }
}

pub fn equal_input_matrix(p: &EqualInputParams) -> Result<Mat, ModelError> {
    p.validate()?;
    let mut m = Mat::from_fn(p.dim(), |_, j| p.c_vec[j]);
    close_rows(&mut m, 1.0);
    Ok(m)
}

/// Parameters of an equal-input matrix: every column is constant off the
/// diagonal, within `10·rowsum`.
pub fn recognize_equal_input(m: &Mat, tol: &Tolerances) -> Option<EqualInputParams> {
    let d = m.dim();
    let mut c_vec = Vec::with_capacity(d);
    for j in 0..d {
        let vals: Vec<f64> = (0..d).filter(|i| *i != j).map(|i| m[(i, j)]).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > 10.0 * tol.rowsum {
            return None;
        }
        c_vec.push((vals.iter().sum::<f64>() / vals.len() as f64).max(0.0));
    }
    EqualInputParams::new(c_vec).ok()
}

/// Decide embeddability of an equal-input matrix from its parameters.
///
/// For `c < 1` the equal-input generator `−log(1−c)/c · (M − I)` works in
/// every dimension. At `c = 1` the matrix is singular. Above 1, four states
/// leave a triple negative eigenvalue with no real logarithm, while three
/// states may still embed up to the extremal point.
pub fn embed_equal_input(p: &EqualInputParams, dim: usize, tol: &Tolerances) -> Result<EmbeddingResult, ModelError> {
    if p.dim() != dim {
        return Err(ModelError::InfeasibleParams(format!("{} parameters for dimension {dim}", p.dim())));
    }
    let m = equal_input_matrix(p)?;
    if dim == 2 {
        return Ok(embed_d2(&m, tol));
    }
    let c = p.c;
    let mut out = if (c - 1.0).abs() <= tol.nonneg {
        EmbeddingResult::not_embeddable(Reason::DetNonpositive)
    } else if c < 1.0 {
        let factor = if c == 0.0 { 1.0 } else { -(-c).ln_1p() / c };
        let mut a = Mat::from_fn(dim, |_, j| p.c_vec[j]);
        for i in 0..dim {
            a[(i, i)] -= c;
        }
        let q = a.scale(factor);
        match certify(&m, &q, 0, Construction::PrincipalLog, tol) {
            Some(g) => {
                let u = if c == 0.0 {
                    Uniqueness::Unique
                } else {
                    match uniqueness_certificates(&m, &g.matrix, tol) {
                        Uniqueness::Unique => Uniqueness::Unique,
                        _ => Uniqueness::PossiblyMore,
                    }
                };
                EmbeddingResult::embeddable(vec![g], u)
            }
            None => EmbeddingResult::undecided(Reason::ResidualCertificateFailed),
        }
    } else if dim == 3 {
        embed_d3_eq_input_neg(&m, tol)
    } else {
        EmbeddingResult::not_embeddable(Reason::NegativeEigenvalueCulver)
    };
    if out.pattern.is_none() {
        out.pattern = classify(&m, tol).ok().map(|t| t.pattern);
    }
    Ok(out)
}

/// A basis of the commutant of `C(c₁, c₂, c₃)` inside the zero-row-sum
/// matrices. Each basis element `B` satisfies `C·B = 0`.
pub fn commutant_basis_d3(c1: f64, c2: f64, c3: f64) -> Result<[Mat; 4], ModelError> {
    if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0) || ![c1, c2, c3].iter().all(|c| c.is_finite()) {
        return Err(ModelError::NonpositiveParameter);
    }
    let alpha = (c1 + c3) * (c2 + c3);
    let beta = (c1 + c2) * (c1 + c3);
    let gamma = (c1 + c2) * (c2 + c3);
    let raw = [
        [[0.0, 0.0, 0.0], [0.0, 0.0, c3], [0.0, c2, 0.0]],
        [[0.0, 0.0, c3], [0.0, 0.0, 0.0], [c1, 0.0, 0.0]],
        [[0.0, c2, 0.0], [c1, 0.0, 0.0], [0.0, 0.0, 0.0]],
        [[0.0, alpha, -gamma], [-alpha, 0.0, beta], [gamma, -beta, 0.0]],
    ];
    Ok(raw.map(|r| {
        let mut b = Mat::from_rows(&r).expect("3x3");
        close_rows(&mut b, 0.0);
        b
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use embed_core::{eq_input_extremal_generators, Verdict};
    use embed_linalg::mat_exp;
    use std::f64::consts::PI;

    #[test]
    fn four_state_jukes_cantor() {
        let t = Tolerances::default();
        let p = EqualInputParams::constant(4, 0.9).unwrap();
        let r = embed_equal_input(&p, 4, &t).unwrap();
        assert_eq!(r.verdict, Verdict::Embeddable);
        let q = &r.generators[0].matrix;
        assert!((q[(0, 1)] - q[(2, 1)]).abs() < 1e-15, "equal-input generator");
        assert!(mat_exp(q).max_abs_diff(&equal_input_matrix(&p).unwrap()) < 1e-10);

        let p = EqualInputParams::constant(4, 1.1).unwrap();
        assert_eq!(embed_equal_input(&p, 4, &t).unwrap().verdict, Verdict::NotEmbeddable);
        let p = EqualInputParams::constant(4, 1.0).unwrap();
        let r = embed_equal_input(&p, 4, &t).unwrap();
        assert_eq!(r.reason, Some(Reason::DetNonpositive));
    }

    #[test]
    fn three_state_extremal_point_has_two_generators() {
        let c = 1.0 + (-PI * 3f64.sqrt()).exp();
        let p = EqualInputParams::constant(3, c).unwrap();
        let r = embed_equal_input(&p, 3, &Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Embeddable);
        assert_eq!(r.generators.len(), 2);
        assert_eq!(r.uniqueness, Uniqueness::MultipleKnown);
    }

    #[test]
    fn infeasible_parameters() {
        assert!(EqualInputParams::new(vec![0.9, 0.9, 0.0]).is_err());
        assert!(EqualInputParams::new(vec![-0.1, 0.2]).is_err());
        assert!(EqualInputParams::new(vec![0.1; 5]).is_err());
        let p = EqualInputParams::constant(3, 0.3).unwrap();
        assert!(embed_equal_input(&p, 4, &Tolerances::default()).is_err());
    }

    #[test]
    fn recognizer() {
        let t = Tolerances::default();
        let id = recognize_equal_input(&Mat::identity(4), &t).unwrap();
        assert_eq!(id.c, 0.0);
        let p = EqualInputParams::new(vec![0.1, 0.2, 0.3, 0.15]).unwrap();
        let back = recognize_equal_input(&equal_input_matrix(&p).unwrap(), &t).unwrap();
        assert!((back.c - p.c).abs() < 1e-15);
        let (a, b) = (1.0 - (-1f64).exp(), 1.0 - (-1f64).exp());
        let bad = Mat::from_rows(&[
            [(1.0 - a) * (1.0 - b), a, (1.0 - a) * b],
            [a * (1.0 - b), 1.0 - a, a * b],
            [b, 0.0, 1.0 - b],
        ])
        .unwrap();
        assert!(recognize_equal_input(&bad, &t).is_none());
    }

    #[test]
    fn commutant_basis() {
        let (c1, c2, c3) = (0.2, 0.5, 0.35);
        let basis = commutant_basis_d3(c1, c2, c3).unwrap();
        let cm = Mat::from_fn(3, |_, j| [c1, c2, c3][j]);
        for b in &basis {
            assert!((cm * *b).max_abs() < 1e-15);
            assert!((0..3).all(|i| b.row_sum(i).abs() < 1e-15));
            assert!(cm.commutator(b).max_abs() < 1e-15);
        }
        assert!(commutant_basis_d3(0.0, 1.0, 1.0).is_err());
        // Q₊ lies in the span: solve the normal equations on the flattened basis.
        let (qp, _) = eq_input_extremal_generators(c1, c2, c3).unwrap();
        let flat: Vec<Vec<f64>> = basis.iter().map(|b| b.iter().map(|(_, _, v)| v).collect()).collect();
        let target: Vec<f64> = qp.iter().map(|(_, _, v)| v).collect();
        let g = Mat::from_fn(4, |i, j| dot(&flat[i], &flat[j]));
        let rhs: Vec<f64> = flat.iter().map(|f| dot(f, &target)).collect();
        let w = g.solve(&rhs).expect("independent basis");
        let fit: Vec<f64> = (0..9).map(|k| (0..4).map(|i| w[i] * flat[i][k]).sum()).collect();
        let res = fit.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10, "residual {res}");
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}
