//! Numerical Jordan structure from rank sequences, and a real Jordan
//! decomposition for the cases the embedder needs.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::svd::{null_space, singular_values};
use crate::{eigenvalues, LinalgError, Mat, Spectrum, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanStructure {
    /// One entry per distinct eigenvalue (conjugates listed separately),
    /// with block sizes in decreasing order.
    pub blocks: Vec<(C64, Vec<usize>)>,
    pub min_poly_degree: usize,
}

impl JordanStructure {
    /// Every eigenvalue has a single Jordan block.
    pub fn is_cyclic(&self) -> bool {
        self.blocks.iter().all(|(_, b)| b.len() == 1)
    }

    pub fn sizes_of(&self, z: C64) -> Option<&[usize]> {
        self.blocks.iter().find(|(w, _)| *w == z).map(|(_, b)| b.as_slice())
    }
}

/// Numerical nullity of `b`: singular values below `rank_tol · σ_max`.
///
/// Fails with `IllConditioned` when a singular value sits within a factor
/// 10 of the threshold, where the decision is not trustworthy.
pub fn nullity_real(b: &Mat, rank_tol: f64) -> Result<usize, LinalgError> {
    let sv = singular_values(b);
    if sv[0] == 0.0 {
        return Ok(b.dim());
    }
    let mut n = 0;
    for s in &sv {
        let r = s / sv[0];
        if r >= rank_tol / 10.0 && r <= rank_tol * 10.0 {
            return Err(LinalgError::IllConditioned(format!(
                "singular value ratio {r:.3e} is too close to the rank threshold {rank_tol:.1e}"
            )));
        }
        if r < rank_tol {
            n += 1;
        }
    }
    Ok(n)
}

/// The real matrix whose kernel is the (generalised) eigenspace of `z` and,
/// for non-real `z`, of `z̄` as well.
fn eigen_operator(m: &Mat, z: C64) -> Mat {
    let n = m.shift(-z.re);
    if z.im == 0.0 {
        n
    } else {
        (n * n).shift(z.im * z.im)
    }
}

/// Block sizes at `z` from the nullity sequence of powers of the eigen operator.
fn block_sizes(m: &Mat, z: C64, mult: usize, rank_tol: f64) -> Result<Vec<usize>, LinalgError> {
    let op = eigen_operator(m, z);
    let per = if z.im == 0.0 { 1 } else { 2 };
    let mut nulls = vec![0usize];
    let mut pw = Mat::identity(m.dim());
    for _ in 0..mult {
        pw = pw * op;
        let n = nullity_real(&pw, rank_tol)?;
        if n % per != 0 {
            return Err(LinalgError::IllConditioned("odd nullity for a complex pair".into()));
        }
        nulls.push(n / per);
    }
    nulls.push(*nulls.last().unwrap());
    if nulls[mult] != mult {
        return Err(LinalgError::IllConditioned(format!(
            "generalised eigenspace has dimension {} but the multiplicity is {mult}",
            nulls[mult]
        )));
    }
    let mut sizes = Vec::new();
    for p in 1..=mult {
        let at_least_p = nulls[p] as isize - nulls[p - 1] as isize;
        let at_least_next = nulls[p + 1] as isize - nulls[p] as isize;
        let exactly = at_least_p - at_least_next;
        if exactly < 0 || at_least_p < 0 {
            return Err(LinalgError::IllConditioned("inconsistent rank sequence".into()));
        }
        sizes.extend(std::iter::repeat_n(p, exactly as usize));
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sizes)
}

/// Jordan structure given a spectrum already computed for `m`.
pub fn jordan_from_spectrum(
    m: &Mat,
    spec: &Spectrum,
    tol: &Tolerances,
) -> Result<JordanStructure, LinalgError> {
    let mut blocks = Vec::new();
    for (z, mult) in &spec.roots {
        let sizes = if *mult == 1 { vec![1] } else { block_sizes(m, *z, *mult, tol.rank)? };
        blocks.push((*z, sizes));
    }
    let min_poly_degree = blocks.iter().map(|(_, b)| b[0]).sum();
    Ok(JordanStructure { blocks, min_poly_degree })
}

/// Jordan block sizes for every eigenvalue of `m`.
pub fn jordan_structure(m: &Mat, tol: &Tolerances) -> Result<JordanStructure, LinalgError> {
    let spec = eigenvalues(m, tol)?;
    jordan_from_spectrum(m, &spec, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RealBlock {
    /// `J_size(lambda)` with ones on the superdiagonal.
    Real { lambda: f64, size: usize },
    /// `[[re, −im], [im, re]]`.
    Complex { re: f64, im: f64 },
}

impl RealBlock {
    pub fn size(&self) -> usize {
        match self {
            RealBlock::Real { size, .. } => *size,
            RealBlock::Complex { .. } => 2,
        }
    }
}

/// `M = T · canonical · T⁻¹` with `canonical` block diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealJordanDecomposition {
    pub t: Mat,
    pub canonical: Mat,
    pub blocks: Vec<RealBlock>,
    /// 1-norm condition number of `T` after scaling its columns to unit length.
    pub cond: f64,
    /// Set when `cond > 1e8`.
    pub ill_conditioned: bool,
}

impl RealJordanDecomposition {
    fn assemble(d: usize, blocks: Vec<RealBlock>, columns: Vec<Vec<f64>>) -> Self {
        let mut t = Mat::zeros(d);
        for (j, c) in columns.iter().enumerate() {
            t.set_col(j, c);
        }
        let mut canonical = Mat::zeros(d);
        let mut off = 0;
        for b in &blocks {
            match *b {
                RealBlock::Real { lambda, size } => {
                    for k in 0..size {
                        canonical[(off + k, off + k)] = lambda;
                        if k + 1 < size {
                            canonical[(off + k, off + k + 1)] = 1.0;
                        }
                    }
                }
                RealBlock::Complex { re, im } => {
                    canonical[(off, off)] = re;
                    canonical[(off + 1, off + 1)] = re;
                    canonical[(off, off + 1)] = -im;
                    canonical[(off + 1, off)] = im;
                }
            }
            off += b.size();
        }
        let mut unit = t;
        for j in 0..d {
            let n: f64 = t.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            let c: Vec<f64> = t.col(j).iter().map(|x| x / n).collect();
            unit.set_col(j, &c);
        }
        let cond = match unit.inverse() {
            Some(inv) => unit.norm_1() * inv.norm_1(),
            None => f64::INFINITY,
        };
        RealJordanDecomposition { t, canonical, blocks, cond, ill_conditioned: !(cond <= 1e8) }
    }

    /// `T · canonical · T⁻¹`.
    pub fn reconstruct(&self) -> Option<Mat> {
        Some(self.t * self.canonical * self.t.inverse()?)
    }

    /// Same decomposition with the blocks permuted into `order`.
    pub fn reorder(&self, order: &[usize]) -> Self {
        let d = self.t.dim();
        let mut starts = Vec::new();
        let mut off = 0;
        for b in &self.blocks {
            starts.push(off);
            off += b.size();
        }
        let mut blocks = Vec::new();
        let mut columns = Vec::new();
        for &k in order {
            blocks.push(self.blocks[k]);
            for c in 0..self.blocks[k].size() {
                columns.push(self.t.col(starts[k] + c));
            }
        }
        Self::assemble(d, blocks, columns)
    }
}

/// Smallest singular value of the unit-normalised columns, as an
/// independence score.
fn independence(columns: &[Vec<f64>], d: usize) -> f64 {
    if columns.is_empty() {
        return 1.0;
    }
    // Pad to a square matrix with zero columns; only the leading
    // `columns.len()` singular values matter.
    let mut a = Mat::zeros(d);
    for (j, c) in columns.iter().enumerate() {
        let n: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let u: Vec<f64> = c.iter().map(|x| x / n).collect();
        a.set_col(j, &u);
    }
    singular_values(&a)[columns.len() - 1]
}

/// Real Jordan decomposition of `m`.
///
/// Real eigenvalues may be defective; chains are built greedily from null
/// spaces of powers of `M − λI`. Non-real eigenvalues must be semisimple.
pub fn real_jordan(m: &Mat, tol: &Tolerances) -> Result<RealJordanDecomposition, LinalgError> {
    let d = m.dim();
    let spec = eigenvalues(m, tol)?;
    let js = jordan_from_spectrum(m, &spec, tol)?;
    let mut blocks = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();

    for (z, sizes) in &js.blocks {
        if z.im < 0.0 {
            continue;
        }
        if z.im > 0.0 {
            if sizes.iter().any(|s| *s > 1) {
                return Err(LinalgError::IllConditioned(
                    "defective non-real eigenvalue is not supported".into(),
                ));
            }
            let n = m.shift(-z.re);
            let basis = null_space(&eigen_operator(m, *z), tol.rank);
            for _ in 0..sizes.len() {
                let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
                for v in &basis {
                    let w: Vec<f64> = n.mul_vec(v).iter().map(|x| x / z.im).collect();
                    let mut trial = columns.clone();
                    trial.push(v.clone());
                    trial.push(w.clone());
                    let score = independence(&trial, d);
                    if best.as_ref().is_none_or(|b| score > b.0) {
                        best = Some((score, v.clone(), w));
                    }
                }
                let (score, v, w) = best.ok_or_else(|| LinalgError::IllConditioned("empty eigenspace".into()))?;
                if score < 1e-12 {
                    return Err(LinalgError::IllConditioned("dependent eigenvectors".into()));
                }
                columns.push(v);
                columns.push(w);
                blocks.push(RealBlock::Complex { re: z.re, im: z.im });
            }
            continue;
        }

        let lambda = z.re;
        let n = m.shift(-lambda);
        let mut kernels: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
        let mut pw = Mat::identity(d);
        for _ in 0..sizes[0] {
            pw = pw * n;
            kernels.push(null_space(&pw, tol.rank));
        }
        for &s in sizes {
            let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
            for h in &kernels[s] {
                // Chain ordered v_1 = N^{s−1} h, .., v_s = h.
                let mut chain = vec![h.clone()];
                for _ in 1..s {
                    let next = n.mul_vec(chain.last().unwrap());
                    chain.push(next);
                }
                chain.reverse();
                let mut trial = columns.clone();
                trial.extend(chain.iter().cloned());
                let score = independence(&trial, d);
                if best.as_ref().is_none_or(|b| score > b.0) {
                    best = Some((score, chain));
                }
            }
            let (score, chain) = best.ok_or_else(|| LinalgError::IllConditioned("empty eigenspace".into()))?;
            if score < 1e-12 {
                return Err(LinalgError::IllConditioned("could not complete a Jordan chain".into()));
            }
            columns.extend(chain);
            blocks.push(RealBlock::Real { lambda, size: s });
        }
    }
    if columns.len() != d {
        return Err(LinalgError::IllConditioned("incomplete Jordan basis".into()));
    }
    Ok(RealJordanDecomposition::assemble(d, blocks, columns))
}
