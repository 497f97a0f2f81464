//! Principal square root and principal logarithm.

use crate::{eigenvalues, LinalgError, Mat, Tolerances};

/// Principal square root by the scaled product form of the Denman–Beavers
/// iteration.
pub fn sqrtm(a: &Mat) -> Result<Mat, LinalgError> {
    let d = a.dim();
    let id = Mat::identity(d);
    let mut m = *a;
    let mut x = *a;
    for it in 0..100 {
        let minv = m.inverse().ok_or(LinalgError::SpectrumOnCut)?;
        let err = (m - id).norm_1();
        // Determinantal scaling speeds up the early iterations.
        let g = if err > 1e-2 && it < 20 {
            m.det().abs().powf(-1.0 / (2.0 * d as f64))
        } else {
            1.0
        };
        if !g.is_finite() {
            return Err(LinalgError::SpectrumOnCut);
        }
        let g2 = g * g;
        let next_m = (id + (m.scale(g2) + minv.scale(1.0 / g2)).scale(0.5)).scale(0.5);
        x = (x * (id + minv.scale(1.0 / g2))).scale(0.5 * g);
        m = next_m;
        if (m - id).norm_1() <= 1e-15 * d as f64 {
            return Ok(x);
        }
        if !x.is_finite() {
            break;
        }
    }
    if (m - id).norm_1() <= 1e-12 {
        Ok(x)
    } else {
        Err(LinalgError::NotConverged("matrix square root"))
    }
}

/// Principal logarithm with default tolerances.
pub fn principal_log(m: &Mat) -> Result<Mat, LinalgError> {
    principal_log_with(m, &Tolerances::default())
}

/// Principal logarithm by inverse scaling and squaring: take square roots
/// until `‖X − I‖₁ ≤ 0.25`, then sum `2 atanh((X − I)(X + I)⁻¹)`.
pub fn principal_log_with(m: &Mat, tol: &Tolerances) -> Result<Mat, LinalgError> {
    let d = m.dim();
    let spec = eigenvalues(m, tol)?;
    for (z, _) in &spec.roots {
        if z.norm() <= tol.nonneg || (z.im == 0.0 && z.re <= tol.nonneg) {
            return Err(LinalgError::SpectrumOnCut);
        }
    }
    let id = Mat::identity(d);
    let mut x = *m;
    let mut k = 0;
    while (x - id).norm_1() > 0.25 {
        if k == 64 {
            return Err(LinalgError::NotConverged("inverse scaling and squaring"));
        }
        x = sqrtm(&x)?;
        k += 1;
    }
    let z = (x - id) * (x + id).inverse().ok_or(LinalgError::SpectrumOnCut)?;
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for j in 1..40 {
        term = term * z2;
        let add = term.scale(1.0 / (2 * j + 1) as f64);
        sum = sum + add;
        if add.max_abs() < 1e-18 {
            break;
        }
    }
    Ok(sum.scale(2.0 * 2f64.powi(k)))
}
