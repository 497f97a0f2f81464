//! One-sided Jacobi SVD for the small square matrices of this crate.

use crate::Mat;

/// Thin SVD `A = U Σ Vᵀ` with singular values sorted in decreasing order.
pub fn svd(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    let d = a.dim();
    let mut w = *a;
    let mut v = Mat::identity(d);

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..d {
                    alpha += w[(i, p)] * w[(i, p)];
                    beta += w[(i, q)] * w[(i, q)];
                    gamma += w[(i, p)] * w[(i, q)];
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..d {
                        let (xp, xq) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * xp - s * xq;
                        m[(i, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let norms: Vec<f64> = (0..d).map(|j| w.col(j).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = Mat::zeros(d);
    let mut vs = Mat::zeros(d);
    let mut sigma = Vec::with_capacity(d);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        vs.set_col(k, &v.col(j));
        if s > 0.0 {
            let col: Vec<f64> = w.col(j).iter().map(|x| x / s).collect();
            u.set_col(k, &col);
        }
    }
    (u, sigma, vs)
}

pub fn singular_values(a: &Mat) -> Vec<f64> {
    svd(a).1
}

/// Orthonormal basis of the numerical null space: right singular vectors
/// whose singular value falls below `rel_tol · σ_max`.
pub fn null_space(a: &Mat, rel_tol: f64) -> Vec<Vec<f64>> {
    let (_, sigma, v) = svd(a);
    let d = a.dim();
    let cut = rel_tol * sigma[0];
    (0..d).filter(|&k| sigma[0] == 0.0 || sigma[k] < cut).map(|k| v.col(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_and_orders() {
        let a = Mat::from_rows(&[
            [0.7, 0.1, 0.1, 0.1],
            [0.2, 0.5, 0.2, 0.1],
            [0.0, 0.3, 0.6, 0.1],
            [0.25, 0.25, 0.25, 0.25],
        ])
        .unwrap();
        let (u, s, v) = svd(&a);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = u * Mat::diag(&s) * v.transpose();
        assert!(rebuilt.max_abs_diff(&a) < 1e-14);
        assert!((v.transpose() * v).max_abs_diff(&Mat::identity(4)) < 1e-14);
        let prod: f64 = s.iter().product();
        assert!((prod - a.det().abs()).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_null_space() {
        // Rows 1 and 3 coincide.
        let a = Mat::from_rows(&[[0.5, 0.5, 0.0], [0.1, 0.6, 0.3], [0.5, 0.5, 0.0]]).unwrap();
        let ns = null_space(&a, 1e-9);
        assert_eq!(ns.len(), 1);
        let r = a.mul_vec(&ns[0]);
        assert!(r.iter().all(|x| x.abs() < 1e-14));
        assert_eq!(null_space(&Mat::zeros(3), 1e-9).len(), 3);
        assert!(null_space(&Mat::identity(2), 1e-9).is_empty());
    }
}
