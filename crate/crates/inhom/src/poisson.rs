use embed_linalg::Mat;
use serde::{Deserialize, Serialize};

use crate::InhomError;

/// `I − a·E_ii + a·E_ij`: state `i` jumps to `j` with probability `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonFactor {
    pub i: usize,
    pub j: usize,
    pub a: f64,
}

impl PoissonFactor {
    pub fn is_singular(&self) -> bool {
        self.a == 1.0
    }
}

pub fn poisson_matrix(f: &PoissonFactor, dim: usize) -> Result<Mat, InhomError> {
    if f.i == f.j || f.i >= dim || f.j >= dim {
        return Err(InhomError::InvalidFactor(format!("indices ({}, {}) in dimension {dim}", f.i, f.j)));
    }
    if !(0.0..=1.0).contains(&f.a) {
        return Err(InhomError::InvalidFactor(format!("a = {} outside [0, 1]", f.a)));
    }
    let mut m = Mat::identity(dim);
    m[(f.i, f.i)] = 1.0 - f.a;
    m[(f.i, f.j)] = f.a;
    Ok(m)
}

/// Ordered product of Poisson matrices; the empty product is `I`.
pub fn bangbang_product(fs: &[PoissonFactor], dim: usize) -> Result<Mat, InhomError> {
    fs.iter().try_fold(Mat::identity(dim), |acc, f| Ok(acc * poisson_matrix(f, dim)?))
}

/// `J_d`, the idempotent with all entries `1/d`.
pub fn star_point(dim: usize) -> Result<Mat, InhomError> {
    if !(2..=4).contains(&dim) {
        return Err(InhomError::Dimension { expected: "2, 3 or 4", got: dim });
    }
    Ok(Mat::from_fn(dim, |_, _| 1.0 / dim as f64))
}
