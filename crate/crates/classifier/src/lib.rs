//! Sort a Markov matrix of dimension 2 to 4 into its Jordan-structure case
//! and run the inexpensive necessary conditions for embeddability.

mod necessary;

pub use necessary::{necessary_checks, NecessaryReport};

use std::fmt;

use embed_linalg::{
    eigenvalues, is_markov, jordan_from_spectrum, JordanStructure, LinalgError, Mat, Spectrum,
    Tolerances, C64,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("input is not a Markov matrix")]
    NotMarkov,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One value per row of the case tables, plus the two-state dichotomy.
///
/// Names read as: multiplicity pattern of the eigenvalues other than 1
/// (`L` a repeated eigenvalue λ, `L2` the repeated λ₂), and `POS`/`NEG` the
/// sign of a repeated semisimple eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    #[serde(rename = "D2_IDENTITY")]
    D2Identity,
    #[serde(rename = "D2_GENERIC")]
    D2Generic,
    #[serde(rename = "D3_IDENTITY")]
    D3Identity,
    /// diag(1, 1, λ)
    #[serde(rename = "D3_DEG2_1_1_L")]
    D3Deg2OneOneL,
    /// diag(1, λ, λ), λ ≥ 0
    #[serde(rename = "D3_DEG2_1_L_L_POS")]
    D3Deg2OneLLPos,
    /// diag(1, λ, λ), λ < 0
    #[serde(rename = "D3_DEG2_1_L_L_NEG")]
    D3Deg2OneLLNeg,
    /// diag(1, λ₁, λ₂), distinct real
    #[serde(rename = "D3_SIMPLE_REAL")]
    D3SimpleReal,
    /// 1 ⊕ J₂(λ)
    #[serde(rename = "D3_JORDAN2")]
    D3Jordan2,
    /// diag(1, λ, λ̄)
    #[serde(rename = "D3_COMPLEX_PAIR")]
    D3ComplexPair,
    #[serde(rename = "D4_IDENTITY")]
    D4Identity,
    /// diag(1, 1, 1, λ)
    #[serde(rename = "D4_DEG2_TRIPLE_ONE")]
    D4Deg2TripleOne,
    /// diag(1, λ, λ, λ)
    #[serde(rename = "D4_DEG2_TRIPLE_L")]
    D4Deg2TripleL,
    /// diag(1, 1, λ, λ), λ ≥ 0
    #[serde(rename = "D4_DEG2_DOUBLE_POS")]
    D4Deg2DoublePos,
    /// diag(1, 1, λ, λ), λ < 0
    #[serde(rename = "D4_DEG2_DOUBLE_NEG")]
    D4Deg2DoubleNeg,
    /// diag(1, 1, λ₁, λ₂)
    #[serde(rename = "D4_DEG3_TWO_ONES_DISTINCT")]
    D4Deg3TwoOnesDistinct,
    /// 1₂ ⊕ J₂(λ)
    #[serde(rename = "D4_DEG3_TWO_ONES_JORDAN")]
    D4Deg3TwoOnesJordan,
    /// diag(1, λ) ⊕ J₂(λ)
    #[serde(rename = "D4_DEG3_L_JORDAN_L")]
    D4Deg3LJordanL,
    /// diag(1, λ₁, λ₂, λ₂), λ₂ ≥ 0
    #[serde(rename = "D4_DEG3_DOUBLE_L2_POS")]
    D4Deg3DoubleL2Pos,
    /// diag(1, λ₁, λ₂, λ₂), λ₂ < 0
    #[serde(rename = "D4_DEG3_DOUBLE_L2_NEG")]
    D4Deg3DoubleL2Neg,
    /// diag(1, 1, λ, λ̄)
    #[serde(rename = "D4_DEG3_COMPLEX")]
    D4Deg3Complex,
    /// diag(1, λ₁, λ₂, λ₃), distinct real
    #[serde(rename = "D4_SIMPLE_REAL")]
    D4SimpleReal,
    /// diag(1, λ, ϑ, ϑ̄)
    #[serde(rename = "D4_SIMPLE_COMPLEX")]
    D4SimpleComplex,
    /// 1 ⊕ J₃(λ)
    #[serde(rename = "D4_JORDAN3")]
    D4Jordan3,
    /// diag(1, λ₁) ⊕ J₂(λ₂)
    #[serde(rename = "D4_MIXED_JORDAN2")]
    D4MixedJordan2,
}

impl Pattern {
    pub const ALL: [Pattern; 24] = [
        Pattern::D2Identity,
        Pattern::D2Generic,
        Pattern::D3Identity,
        Pattern::D3Deg2OneOneL,
        Pattern::D3Deg2OneLLPos,
        Pattern::D3Deg2OneLLNeg,
        Pattern::D3SimpleReal,
        Pattern::D3Jordan2,
        Pattern::D3ComplexPair,
        Pattern::D4Identity,
        Pattern::D4Deg2TripleOne,
        Pattern::D4Deg2TripleL,
        Pattern::D4Deg2DoublePos,
        Pattern::D4Deg2DoubleNeg,
        Pattern::D4Deg3TwoOnesDistinct,
        Pattern::D4Deg3TwoOnesJordan,
        Pattern::D4Deg3LJordanL,
        Pattern::D4Deg3DoubleL2Pos,
        Pattern::D4Deg3DoubleL2Neg,
        Pattern::D4Deg3Complex,
        Pattern::D4SimpleReal,
        Pattern::D4SimpleComplex,
        Pattern::D4Jordan3,
        Pattern::D4MixedJordan2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::D2Identity => "D2_IDENTITY",
            Pattern::D2Generic => "D2_GENERIC",
            Pattern::D3Identity => "D3_IDENTITY",
            Pattern::D3Deg2OneOneL => "D3_DEG2_1_1_L",
            Pattern::D3Deg2OneLLPos => "D3_DEG2_1_L_L_POS",
            Pattern::D3Deg2OneLLNeg => "D3_DEG2_1_L_L_NEG",
            Pattern::D3SimpleReal => "D3_SIMPLE_REAL",
            Pattern::D3Jordan2 => "D3_JORDAN2",
            Pattern::D3ComplexPair => "D3_COMPLEX_PAIR",
            Pattern::D4Identity => "D4_IDENTITY",
            Pattern::D4Deg2TripleOne => "D4_DEG2_TRIPLE_ONE",
            Pattern::D4Deg2TripleL => "D4_DEG2_TRIPLE_L",
            Pattern::D4Deg2DoublePos => "D4_DEG2_DOUBLE_POS",
            Pattern::D4Deg2DoubleNeg => "D4_DEG2_DOUBLE_NEG",
            Pattern::D4Deg3TwoOnesDistinct => "D4_DEG3_TWO_ONES_DISTINCT",
            Pattern::D4Deg3TwoOnesJordan => "D4_DEG3_TWO_ONES_JORDAN",
            Pattern::D4Deg3LJordanL => "D4_DEG3_L_JORDAN_L",
            Pattern::D4Deg3DoubleL2Pos => "D4_DEG3_DOUBLE_L2_POS",
            Pattern::D4Deg3DoubleL2Neg => "D4_DEG3_DOUBLE_L2_NEG",
            Pattern::D4Deg3Complex => "D4_DEG3_COMPLEX",
            Pattern::D4SimpleReal => "D4_SIMPLE_REAL",
            Pattern::D4SimpleComplex => "D4_SIMPLE_COMPLEX",
            Pattern::D4Jordan3 => "D4_JORDAN3",
            Pattern::D4MixedJordan2 => "D4_MIXED_JORDAN2",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Pattern::D2Identity | Pattern::D2Generic => 2,
            Pattern::D3Identity
            | Pattern::D3Deg2OneOneL
            | Pattern::D3Deg2OneLLPos
            | Pattern::D3Deg2OneLLNeg
            | Pattern::D3SimpleReal
            | Pattern::D3Jordan2
            | Pattern::D3ComplexPair => 3,
            _ => 4,
        }
    }

    /// Degree of the minimal polynomial shared by every matrix in the case.
    pub fn min_poly_degree(self) -> usize {
        use Pattern::*;
        match self {
            D2Identity | D3Identity | D4Identity => 1,
            D2Generic => 2,
            D3Deg2OneOneL | D3Deg2OneLLPos | D3Deg2OneLLNeg => 2,
            D3SimpleReal | D3Jordan2 | D3ComplexPair => 3,
            D4Deg2TripleOne | D4Deg2TripleL | D4Deg2DoublePos | D4Deg2DoubleNeg => 2,
            D4Deg3TwoOnesDistinct | D4Deg3TwoOnesJordan | D4Deg3LJordanL | D4Deg3DoubleL2Pos
            | D4Deg3DoubleL2Neg | D4Deg3Complex => 3,
            D4SimpleReal | D4SimpleComplex | D4Jordan3 | D4MixedJordan2 => 4,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The named eigenvalues of a case, excluding the eigenvalue 1.
///
/// `real` lists λ, or λ₁, λ₂(, λ₃), in decreasing order, except that a
/// repeated or Jordan eigenvalue λ₂ always comes last. `complex` is the
/// member of a non-real pair with positive imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub real: Vec<f64>,
    pub complex: Option<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseTag {
    pub dim: usize,
    pub min_poly_degree: usize,
    pub pattern: Pattern,
    pub eigen_data: EigenData,
    pub spectrum: Spectrum,
    pub jordan: JordanStructure,
}

fn ill(msg: &str) -> ClassifyError {
    ClassifyError::Linalg(LinalgError::IllConditioned(msg.to_string()))
}

/// Case of a Markov matrix.
pub fn classify(m: &Mat, tol: &Tolerances) -> Result<CaseTag, ClassifyError> {
    if !is_markov(m, tol) {
        return Err(ClassifyError::NotMarkov);
    }
    let spectrum = eigenvalues(m, tol)?;
    let jordan = jordan_from_spectrum(m, &spectrum, tol)?;
    classify_structure(m.dim(), spectrum, jordan, tol)
}

/// Case from an already computed spectrum and Jordan structure.
pub fn classify_structure(
    d: usize,
    spectrum: Spectrum,
    jordan: JordanStructure,
    tol: &Tolerances,
) -> Result<CaseTag, ClassifyError> {
    use Pattern::*;
    // Markov input arrives with the unit eigenvalue snapped to exactly 1.
    let one = spectrum
        .roots
        .iter()
        .map(|r| r.0)
        .filter(|z| (z - 1.0).norm() <= tol.spec_cluster)
        .min_by(|a, b| (a - 1.0).norm().total_cmp(&(b - 1.0).norm()))
        .ok_or_else(|| ill("no eigenvalue at 1"))?;
    let m1 = spectrum.multiplicity(one);
    if jordan.sizes_of(one).is_none_or(|s| s.iter().any(|b| *b > 1)) {
        return Err(ill("nontrivial Jordan block at eigenvalue 1"));
    }

    let others: Vec<(C64, Vec<usize>)> =
        jordan.blocks.iter().filter(|(z, _)| *z != one).cloned().collect();
    let complex = others.iter().find(|(z, _)| z.im > 0.0).map(|(z, _)| *z);
    let reals: Vec<(f64, Vec<usize>)> =
        others.iter().filter(|(z, _)| z.im == 0.0).map(|(z, s)| (z.re, s.clone())).collect();
    let neg = |x: f64| x < -tol.nonneg;
    // Simple eigenvalues first (decreasing), repeated one last.
    let mut ordered = reals.clone();
    ordered.sort_by(|a, b| {
        let ma: usize = a.1.iter().sum();
        let mb: usize = b.1.iter().sum();
        ma.cmp(&mb).then(b.0.total_cmp(&a.0))
    });
    let values: Vec<f64> = ordered.iter().map(|r| r.0).collect();
    let last_sizes = ordered.last().map(|r| r.1.clone()).unwrap_or_default();
    let last_neg = values.last().is_some_and(|v| neg(*v));

    let pattern = match (d, m1) {
        (2, 2) => D2Identity,
        (2, 1) => D2Generic,
        (3, 3) => D3Identity,
        (3, 2) => D3Deg2OneOneL,
        (3, 1) => {
            if complex.is_some() {
                D3ComplexPair
            } else if values.len() == 2 {
                D3SimpleReal
            } else if last_sizes == [1, 1] {
                if last_neg { D3Deg2OneLLNeg } else { D3Deg2OneLLPos }
            } else {
                D3Jordan2
            }
        }
        (4, 4) => D4Identity,
        (4, 3) => D4Deg2TripleOne,
        (4, 2) => {
            if complex.is_some() {
                D4Deg3Complex
            } else if values.len() == 2 {
                D4Deg3TwoOnesDistinct
            } else if last_sizes == [1, 1] {
                if last_neg { D4Deg2DoubleNeg } else { D4Deg2DoublePos }
            } else {
                D4Deg3TwoOnesJordan
            }
        }
        (4, 1) => {
            if complex.is_some() {
                D4SimpleComplex
            } else if values.len() == 3 {
                D4SimpleReal
            } else if values.len() == 2 {
                if last_sizes == [1, 1] {
                    if last_neg { D4Deg3DoubleL2Neg } else { D4Deg3DoubleL2Pos }
                } else {
                    D4MixedJordan2
                }
            } else {
                match last_sizes.as_slice() {
                    [1, 1, 1] => D4Deg2TripleL,
                    [2, 1] => D4Deg3LJordanL,
                    _ => D4Jordan3,
                }
            }
        }
        _ => return Err(ClassifyError::Linalg(LinalgError::RejectsDimension(d))),
    };

    if pattern.min_poly_degree() != jordan.min_poly_degree {
        return Err(ill("minimal polynomial degree disagrees with the case"));
    }
    Ok(CaseTag {
        dim: d,
        min_poly_degree: jordan.min_poly_degree,
        pattern,
        eigen_data: EigenData { real: values, complex },
        spectrum,
        jordan,
    })
}
