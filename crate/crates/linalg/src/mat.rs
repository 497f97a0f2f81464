//! Fixed-capacity dense real matrices of dimension 2 to 4.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::LinalgError;

pub const MAX_DIM: usize = 4;

/// Dense square real matrix with `dim` in `1..=4`, stored row-major in a
/// fixed 4×4 buffer. Entries outside the active `dim × dim` block are zero.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat {
    dim: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl Mat {
    pub fn zeros(dim: usize) -> Mat {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} outside 1..=4");
        Mat { dim, a: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(dim: usize) -> Mat {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Mat {
        let mut m = Mat::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.a[i][i] = *v;
        }
        m
    }

    /// Build from row slices; rejects ragged, non-square, non-finite or
    /// out-of-range input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Mat, LinalgError> {
        let d = rows.len();
        if !(2..=MAX_DIM).contains(&d) {
            return Err(LinalgError::RejectsDimension(d));
        }
        let mut m = Mat::zeros(d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(LinalgError::Shape { row: i, expected: d, found: r.len() });
            }
            for (j, v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
                m.a[i][j] = *v;
            }
        }
        Ok(m)
    }

    /// Build from a function of the index pair.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.a[i][..self.dim].to_vec()).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i][..self.dim]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.a[i][j]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        for i in 0..self.dim {
            self.a[i][j] = v[i];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|(_, _, v)| v.is_finite())
    }

    /// Iterate over `(i, j, value)` of the active block.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let d = self.dim;
        (0..d).flat_map(move |i| (0..d).map(move |j| (i, j, self.a[i][j])))
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.dim, |i, j| self.a[j][i])
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat::from_fn(self.dim, |i, j| s * self.a[i][j])
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    /// `self + s·I`.
    pub fn shift(&self, s: f64) -> Mat {
        let mut m = *self;
        for i in 0..self.dim {
            m.a[i][i] += s;
        }
        m
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.a[i][j].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.iter().map(|(_, _, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().map(|(_, _, v)| v.abs()).fold(0.0, f64::max)
    }

    /// Entry-wise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.iter()
            .map(|(i, j, v)| (v - other.a[i][j]).abs())
            .fold(0.0, f64::max)
    }

    pub fn powi(&self, p: u32) -> Mat {
        let mut r = Mat::identity(self.dim);
        for _ in 0..p {
            r = r * *self;
        }
        r
    }

    /// LU factorisation with partial pivoting. Returns `None` when a pivot
    /// vanishes exactly.
    fn lu(&self) -> Option<([[f64; MAX_DIM]; MAX_DIM], [usize; MAX_DIM], f64)> {
        let n = self.dim;
        let mut a = self.a;
        let mut perm = [0, 1, 2, 3];
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))
                .unwrap();
            if a[p][k] == 0.0 {
                return None;
            }
            if p != k {
                a.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                a[i][k] = f;
                for j in k + 1..n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            2 => self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0],
            3 => {
                let a = &self.a;
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
            _ => match self.lu() {
                None => 0.0,
                Some((lu, _, sign)) => (0..self.dim).fold(sign, |acc, i| acc * lu[i][i]),
            },
        }
    }

    /// Solve `self · x = b`.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.dim;
        let (lu, perm, _) = self.lu()?;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[perm[i]];
            for j in 0..i {
                s -= lu[i][j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= lu[i][j] * y[j];
            }
            y[i] = s / lu[i][i];
        }
        Some(y)
    }

    pub fn inverse(&self) -> Option<Mat> {
        let n = self.dim;
        let mut inv = Mat::zeros(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let x = self.solve(&e)?;
            inv.set_col(j, &x);
        }
        if inv.is_finite() {
            Some(inv)
        } else {
            None
        }
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.a[i][j] * v[j]).sum())
            .collect()
    }

    /// Commutator `self·other − other·self`.
    pub fn commutator(&self, other: &Mat) -> Mat {
        *self * *other - *other * *self
    }

    /// Delete row `i` and column `j`.
    pub fn minor(&self, i: usize, j: usize) -> f64 {
        let n = self.dim;
        let rows: Vec<Vec<f64>> = (0..n)
            .filter(|&r| r != i)
            .map(|r| (0..n).filter(|&c| c != j).map(|c| self.a[r][c]).collect())
            .collect();
        match rows.len() {
            1 => rows[0][0],
            _ => Mat::from_rows(&rows).map(|m| m.det()).unwrap_or(f64::NAN),
        }
    }

    /// Permute rows and columns simultaneously: result(i,j) = self(p[i], p[j]).
    pub fn permute(&self, p: &[usize]) -> Mat {
        Mat::from_fn(self.dim, |i, j| self.a[p[i]][p[j]])
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.a[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.a[i][j]
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(self, rhs: Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim);
        Mat::from_fn(self.dim, |i, j| self.a[i][j] + rhs.a[i][j])
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(self, rhs: Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim);
        Mat::from_fn(self.dim, |i, j| self.a[i][j] - rhs.a[i][j])
    }
}

impl Neg for Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i][k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m.a[i][j] += aik * rhs.a[k][j];
                }
            }
        }
        m
    }
}

impl Mul<Mat> for f64 {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        rhs.scale(self)
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat{}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                write!(f, "{:>24.16e}", self.a[i][j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Serialize for Mat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        Mat::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_agree() {
        let m = Mat::from_rows(&[
            [0.7, 0.1, 0.1, 0.1],
            [0.2, 0.5, 0.2, 0.1],
            [0.0, 0.3, 0.6, 0.1],
            [0.25, 0.25, 0.25, 0.25],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!((m * inv).max_abs_diff(&Mat::identity(4)) < 1e-13);
        assert!((m.det() * inv.det() - 1.0).abs() < 1e-12);
        // Laplace expansion along the first row as an independent check.
        let lap: f64 = (0..4)
            .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * m[(0, j)] * m.minor(0, j))
            .sum();
        assert!((lap - m.det()).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            Mat::from_rows(&[vec![1.0, 0.0], vec![0.0]]),
            Err(LinalgError::Shape { row: 1, .. })
        ));
        assert!(matches!(
            Mat::from_rows(&vec![vec![1.0; 5]; 5]),
            Err(LinalgError::RejectsDimension(5))
        ));
        assert!(matches!(
            Mat::from_rows(&[[f64::NAN, 0.0], [0.0, 1.0]]),
            Err(LinalgError::NonFinite { row: 0, col: 0 })
        ));
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = Mat::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert_eq!(m.det(), 0.0);
        assert!(m.inverse().is_none());
    }
}
