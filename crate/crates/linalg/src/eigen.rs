//! Eigenvalues from the characteristic polynomial, with clustering into a
//! discrete multiplicity pattern.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::poly::{normalized_discriminant, roots_monic};
use crate::svd::singular_values;
use crate::{is_markov, LinalgError, Mat, Tolerances};

/// Distinct eigenvalues with algebraic multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by decreasing real part, then decreasing imaginary part.
    pub roots: Vec<(C64, usize)>,
    /// True when at least one merge happened.
    pub clustered: bool,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.roots.iter().map(|r| r.1).sum()
    }

    pub fn radius(&self) -> f64 {
        self.roots.iter().map(|r| r.0.norm()).fold(0.0, f64::max)
    }

    /// Multiplicity of the root equal to `z` (exact comparison on the
    /// clustered values), 0 when absent.
    pub fn multiplicity(&self, z: C64) -> usize {
        self.roots.iter().find(|r| r.0 == z).map_or(0, |r| r.1)
    }

    /// Every root with multiplicity, flattened.
    pub fn flat(&self) -> Vec<C64> {
        self.roots.iter().flat_map(|(z, m)| std::iter::repeat_n(*z, *m)).collect()
    }
}

/// Coefficients `[c1, .., cd]` of `det(xI − M) = x^d + c1 x^(d−1) + .. + cd`
/// by the Faddeev–LeVerrier recursion.
pub fn char_poly(m: &Mat) -> Vec<f64> {
    let d = m.dim();
    let mut coeffs = Vec::with_capacity(d);
    let mut mk = Mat::zeros(d);
    let mut c_prev = 1.0;
    for k in 1..=d {
        mk = *m * mk + Mat::identity(d).scale(c_prev);
        let c = -(*m * mk).trace() / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    // Exact closed forms for the low-order coefficients improve accuracy.
    coeffs[0] = -m.trace();
    coeffs[d - 1] = if d.is_multiple_of(2) { m.det() } else { -m.det() };
    coeffs
}

/// Eigenvalues by Householder reduction to Hessenberg form followed by
/// Francis double-shift QR.
pub fn hessenberg_qr_eigenvalues(m: &Mat) -> Result<Vec<C64>, LinalgError> {
    let n = m.dim();
    let mut a = [[0.0f64; 4]; 4];
    for (i, j, v) in m.iter() {
        a[i][j] = v;
    }
    hessenberg(&mut a, n);
    hqr(&mut a, n)
}

fn hessenberg(a: &mut [[f64; 4]; 4], n: usize) {
    for k in 0..n.saturating_sub(2) {
        let mut v = [0.0; 4];
        let mut norm = 0.0;
        for i in k + 1..n {
            v[i] = a[i][k];
            norm += v[i] * v[i];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[k + 1] > 0.0 { -norm } else { norm };
        v[k + 1] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        // A ← H A H with H = I − 2 v vᵀ / vᵀv.
        for j in 0..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[i][j]).sum::<f64>() * 2.0 / vv;
            for i in k + 1..n {
                a[i][j] -= s * v[i];
            }
        }
        for row in a.iter_mut().take(n) {
            let s: f64 = (k + 1..n).map(|j| row[j] * v[j]).sum::<f64>() * 2.0 / vv;
            for j in k + 1..n {
                row[j] -= s * v[j];
            }
        }
        for i in k + 2..n {
            a[i][k] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
fn hqr(a: &mut [[f64; 4]; 4], n: usize) -> Result<Vec<C64>, LinalgError> {
    let mut wr = [0.0; 4];
    let mut wi = [0.0; 4];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return Err(LinalgError::NotConverged("Hessenberg QR"));
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            loop {
                let z = a[m][m];
                let rr = x - z;
                let s = y - z;
                p = (rr * s - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - s;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k != nu - 1 {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k != nu - 1 {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        let mut pp = x * row[k] + y * row[k + 1];
                        if k != nu - 1 {
                            pp += z * row[k + 2];
                            row[k + 2] -= pp * r;
                        }
                        row[k + 1] -= pp * q;
                        row[k] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok((0..n).map(|i| C64::new(wr[i], wi[i])).collect())
}

/// Force exact conjugate symmetry on the roots of a real polynomial.
fn symmetrize(roots: &mut [C64], scale: f64) {
    for z in roots.iter_mut() {
        if z.im.abs() <= 1e-14 * scale {
            z.im = 0.0;
        }
    }
    let upper: Vec<usize> = (0..roots.len()).filter(|&i| roots[i].im > 0.0).collect();
    let mut taken = vec![false; roots.len()];
    for i in upper {
        let partner = (0..roots.len())
            .filter(|&j| roots[j].im < 0.0 && !taken[j])
            .min_by(|&a, &b| (roots[a] - roots[i].conj()).norm().total_cmp(&(roots[b] - roots[i].conj()).norm()));
        if let Some(j) = partner {
            taken[j] = true;
            let re = 0.5 * (roots[i].re + roots[j].re);
            let im = 0.5 * (roots[i].im - roots[j].im);
            roots[i] = C64::new(re, im);
            roots[j] = C64::new(re, -im);
        }
    }
}

struct Cluster {
    members: Vec<C64>,
}

impl Cluster {
    fn mean(&self) -> C64 {
        self.members.iter().sum::<C64>() / self.members.len() as f64
    }
}

fn spread(points: &[C64]) -> f64 {
    let mut s: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            s = s.max((a - b).norm());
        }
    }
    s
}

/// Nullity of `(M − μI)^m` for real `μ` under the relative rank threshold.
fn nullity_shifted_power(m: &Mat, mu: f64, power: u32, rank_tol: f64) -> usize {
    let b = m.shift(-mu).powi(power);
    let sv = singular_values(&b);
    if sv[0] == 0.0 {
        return m.dim();
    }
    sv.iter().filter(|s| **s < rank_tol * sv[0]).count()
}

/// Eigenvalues of `M` as a clustered [`Spectrum`].
///
/// Roots closer than `spec_cluster · max(1, ρ)` merge into their mean.
/// A second pass merges wider groups of total multiplicity `m` whose spread
/// is within the `ε^(1/m)` perturbation of a defective eigenvalue, provided
/// `(M − μI)^m` really has nullity `m`. For Markov input the root nearest 1
/// is set to exactly 1.
pub fn eigenvalues(m: &Mat, tol: &Tolerances) -> Result<Spectrum, LinalgError> {
    let d = m.dim();
    if !(2..=4).contains(&d) {
        return Err(LinalgError::RejectsDimension(d));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite { row: 0, col: 0 });
    }
    let coeffs = char_poly(m);
    let mut roots = roots_monic(&coeffs);
    let rho = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let s = rho.max(1.0);
    if normalized_discriminant(&roots, s) < 1e-12 {
        roots = hessenberg_qr_eigenvalues(m)?;
    }
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NotConverged("eigenvalues"));
    }
    symmetrize(&mut roots, s);

    // Single-linkage clustering at the base radius.
    let radius = tol.spec_cluster * s;
    let mut clusters: Vec<Cluster> = roots.iter().map(|z| Cluster { members: vec![*z] }).collect();
    let mut clustered = false;
    'merge: loop {
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let close = clusters[i]
                    .members
                    .iter()
                    .any(|a| clusters[j].members.iter().any(|b| (a - b).norm() <= radius));
                if close {
                    let moved = clusters.remove(j).members;
                    clusters[i].members.extend(moved);
                    clustered = true;
                    continue 'merge;
                }
            }
        }
        break;
    }

    // Defect-aware merge over subsets of clusters, largest first.
    loop {
        let n = clusters.len();
        let mut best: Option<(usize, usize, f64)> = None; // (mask, mult, spread)
        for mask in 1u32..(1 << n) {
            if mask.count_ones() < 2 {
                continue;
            }
            let pts: Vec<C64> = (0..n)
                .filter(|k| mask & (1 << k) != 0)
                .flat_map(|k| clusters[k].members.clone())
                .collect();
            let mult = pts.len();
            let sp = spread(&pts);
            let allowed = s * tol.spec_cluster.max(100.0 * f64::EPSILON.powf(1.0 / mult as f64));
            if sp > allowed {
                continue;
            }
            let mean = pts.iter().sum::<C64>() / mult as f64;
            if mean.im.abs() > radius {
                continue;
            }
            if nullity_shifted_power(m, mean.re, mult as u32, tol.rank) != mult {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, bm, bs)) => mult > bm || (mult == bm && sp < bs),
            };
            if better {
                best = Some((mask as usize, mult, sp));
            }
        }
        let Some((mask, _, _)) = best else { break };
        let mut merged = Vec::new();
        for k in (0..n).rev() {
            if mask & (1 << k) != 0 {
                merged.extend(clusters.remove(k).members);
            }
        }
        clusters.push(Cluster { members: merged });
        clustered = true;
    }

    let mut out: Vec<(C64, usize)> = clusters
        .iter()
        .map(|c| {
            let mut z = c.mean();
            if c.members.len() > 1 && z.im.abs() <= radius {
                z.im = 0.0;
            }
            (z, c.members.len())
        })
        .collect();

    if is_markov(m, tol) {
        if let Some(k) = (0..out.len())
            .min_by(|&a, &b| (out[a].0 - 1.0).norm().total_cmp(&(out[b].0 - 1.0).norm()))
        {
            out[k].0 = C64::new(1.0, 0.0);
        }
    }

    out.sort_by(|a, b| b.0.re.total_cmp(&a.0.re).then(b.0.im.total_cmp(&a.0.im)));
    Ok(Spectrum { roots: out, clustered })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn char_poly_matches_trace_and_det() {
        let m = Mat::from_rows(&[[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.1, 0.1, 0.8]]).unwrap();
        let c = char_poly(&m);
        assert!((c[0] + m.trace()).abs() < 1e-15);
        assert!((c[2] + m.det()).abs() < 1e-15);
        // Cayley–Hamilton.
        let ch = m.powi(3) + (m * m).scale(c[0]) + m.scale(c[1]) + Mat::identity(3).scale(c[2]);
        assert!(ch.max_abs() < 1e-14);
    }

    #[test]
    fn identity_is_one_triple() {
        let s = eigenvalues(&Mat::identity(3), &tol()).unwrap();
        assert_eq!(s.roots, vec![(C64::new(1.0, 0.0), 3)]);
    }

    #[test]
    fn qr_matches_closed_form_on_simple_spectrum() {
        let m = Mat::from_rows(&[
            [0.5, 0.2, 0.2, 0.1],
            [0.1, 0.6, 0.1, 0.2],
            [0.3, 0.0, 0.4, 0.3],
            [0.05, 0.15, 0.1, 0.7],
        ])
        .unwrap();
        let mut a = roots_monic(&char_poly(&m));
        let mut b = hessenberg_qr_eigenvalues(&m).unwrap();
        let key = |z: &C64| (z.re * 1e6).round() as i64 * 1000 + (z.im * 1e3).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn jordan_block_collapses_to_double_root() {
        // Similar to diag(1) ⊕ J2(0.4); the split roots sit ~1e-8 apart.
        let j = Mat::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.4, 1.0], [0.0, 0.0, 0.4]]).unwrap();
        let t = Mat::from_rows(&[[1.0, 0.3, -0.2], [0.5, 1.0, 0.1], [0.2, -0.4, 1.0]]).unwrap();
        let m = t * j * t.inverse().unwrap();
        let s = eigenvalues(&m, &tol()).unwrap();
        assert_eq!(s.roots.len(), 2, "{s:?}");
        assert_eq!(s.roots[1].1, 2);
        assert!((s.roots[1].0.re - 0.4).abs() < 1e-7);
    }

    #[test]
    fn nearby_distinct_roots_stay_apart() {
        let m = Mat::diag(&[1.0, 0.5, 0.5 + 1e-5]);
        let s = eigenvalues(&m, &tol()).unwrap();
        assert_eq!(s.roots.len(), 3);
    }

    #[test]
    fn markov_root_snaps_to_one() {
        let m = Mat::from_rows(&[[0.9, 0.1], [0.3, 0.7]]).unwrap();
        let s = eigenvalues(&m, &tol()).unwrap();
        assert_eq!(s.roots[0].0, C64::new(1.0, 0.0));
        assert!((s.roots[1].0.re - 0.6).abs() < 1e-15);
    }
}
