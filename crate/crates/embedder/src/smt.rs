//! Real logarithms written as polynomials in `A = M − I`.
//!
//! Every formula picks the coefficients of `p(x) = αx + βx² (+ γx³)` so that
//! `p(μ) = log(1 + μ)` on each eigenvalue `1 + μ` of `M`, with derivative
//! conditions at repeated eigenvalues of a Jordan block. Then `p(A)` is a
//! logarithm of `M` by the spectral mapping theorem.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use embed_classifier::{CaseTag, Pattern};
use embed_linalg::{Tolerances, C64};

use crate::EmbedError;

fn check(x: f64, tol: &Tolerances) -> Result<(), EmbedError> {
    if x.abs() <= tol.spec_cluster || !x.is_finite() {
        Err(EmbedError::DegenerateDenominator)
    } else {
        Ok(())
    }
}

fn check_c(z: C64, tol: &Tolerances) -> Result<(), EmbedError> {
    if z.norm() <= tol.spec_cluster || !z.is_finite() {
        Err(EmbedError::DegenerateDenominator)
    } else {
        Ok(())
    }
}

fn real_log(lambda: f64) -> Result<f64, EmbedError> {
    if lambda <= 0.0 {
        return Err(EmbedError::NonpositiveEigenvalue);
    }
    Ok((lambda - 1.0).ln_1p())
}

/// Branch `k` of the complex logarithm: `Log z + 2πik`.
fn branch_log(z: C64, k: i64) -> C64 {
    C64::new(z.norm().ln(), z.arg() + 2.0 * PI * k as f64)
}

/// Single coefficient for a minimal polynomial of degree 2: `log λ / (λ − 1)`.
pub fn coeffs_deg2(lambda: f64, tol: &Tolerances) -> Result<Vec<f64>, EmbedError> {
    let l = real_log(lambda)?;
    let mu = lambda - 1.0;
    check(mu, tol)?;
    Ok(vec![l / mu])
}

/// Two distinct positive eigenvalues besides 1.
pub fn coeffs_d3_distinct(l1: f64, l2: f64, tol: &Tolerances) -> Result<[f64; 2], EmbedError> {
    let (g1, g2) = (real_log(l1)?, real_log(l2)?);
    let (mu, nu) = (l1 - 1.0, l2 - 1.0);
    check(mu, tol)?;
    check(nu, tol)?;
    check(mu - nu, tol)?;
    let den = mu * nu * (mu - nu);
    Ok([(mu * mu * g2 - nu * nu * g1) / den, (nu * g1 - mu * g2) / den])
}

/// A Jordan block `J₂(λ)` besides the eigenvalue 1.
pub fn coeffs_d3_confluent(lambda: f64, tol: &Tolerances) -> Result<[f64; 2], EmbedError> {
    let l = real_log(lambda)?;
    let mu = lambda - 1.0;
    check(mu, tol)?;
    Ok([2.0 * l / mu - 1.0 / lambda, 1.0 / (mu * lambda) - l / (mu * mu)])
}

/// A conjugate pair `λ, λ̄` besides the eigenvalue 1, on branch `k`.
pub fn coeffs_d3_complex(lambda: C64, k: i64, tol: &Tolerances) -> Result<[f64; 2], EmbedError> {
    let mu = lambda - 1.0;
    let mb = mu.conj();
    check_c(mu, tol)?;
    check(mu.im, tol)?;
    let z = branch_log(lambda, k);
    let den = mu.norm_sqr() * (mb - mu);
    let alpha = (mb * mb * z - mu * mu * z.conj()) / den;
    let beta = (-mb * z + mu * z.conj()) / den;
    Ok([alpha.re, beta.re])
}

/// Three distinct positive eigenvalues besides 1.
pub fn coeffs_d4_real(l: [f64; 3], tol: &Tolerances) -> Result<[f64; 3], EmbedError> {
    let mu = [l[0] - 1.0, l[1] - 1.0, l[2] - 1.0];
    let mut out = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let m = mu[i] * (mu[j] - mu[i]) * (mu[k] - mu[i]);
        check(mu[i], tol)?;
        check(mu[j] - mu[i], tol)?;
        let g = real_log(l[i])? / m;
        out[0] += mu[j] * mu[k] * g;
        out[1] -= (mu[j] + mu[k]) * g;
        out[2] += g;
    }
    Ok(out)
}

/// A positive real eigenvalue `λ` and a conjugate pair `ϑ, ϑ̄`, on branch `k`
/// of the pair.
pub fn coeffs_d4_complex(lambda: f64, theta: C64, k: i64, tol: &Tolerances) -> Result<[f64; 3], EmbedError> {
    let mu = C64::new(lambda - 1.0, 0.0);
    let nu = theta - 1.0;
    let nb = nu.conj();
    check(mu.re, tol)?;
    check_c(nu, tol)?;
    check(nu.im, tol)?;
    check_c(mu - nu, tol)?;
    let m1 = mu * (mu - nu) * (mu - nb);
    let m2 = nu * (nu - mu) * (nu - nb);
    let m3 = m2.conj();
    let l1 = C64::new(real_log(lambda)?, 0.0);
    let l2 = branch_log(theta, k);
    let l3 = l2.conj();
    let alpha = nu.norm_sqr() / m1 * l1 + mu * nb / m2 * l2 + mu * nu / m3 * l3;
    let beta = -(nu + nb) / m1 * l1 - (mu + nb) / m2 * l2 - (mu + nu) / m3 * l3;
    let gamma = l1 / m1 + l2 / m2 + l3 / m3;
    Ok([alpha.re, beta.re, gamma.re])
}

/// A Jordan block `J₃(λ)` besides the eigenvalue 1.
pub fn coeffs_d4_jordan3(lambda: f64, tol: &Tolerances) -> Result<[f64; 3], EmbedError> {
    let l = real_log(lambda)?;
    let mu = lambda - 1.0;
    check(mu, tol)?;
    let rhs = [l, 1.0 / lambda, -1.0 / (lambda * lambda)];
    let (m2, m3) = (mu * mu, mu * mu * mu);
    let rows = [
        [3.0 / mu, -2.0, mu / 2.0],
        [-3.0 / m2, 3.0 / mu, -1.0],
        [1.0 / m3, -1.0 / m2, 1.0 / (2.0 * mu)],
    ];
    Ok(rows.map(|r| r[0] * rhs[0] + r[1] * rhs[1] + r[2] * rhs[2]))
}

/// A simple eigenvalue `λ₁` and a Jordan block `J₂(λ₂)` besides 1.
pub fn coeffs_d4_mixed_jordan2(l1: f64, l2: f64, tol: &Tolerances) -> Result<[f64; 3], EmbedError> {
    let rhs = [real_log(l1)?, real_log(l2)?, 1.0 / l2];
    let (a, b) = (l1 - 1.0, l2 - 1.0);
    check(a, tol)?;
    check(b, tol)?;
    check(a - b, tol)?;
    let d = a - b;
    let d2 = d * d;
    let rows = [
        [b * b / (a * d2), a * (2.0 * a - 3.0 * b) / (b * d2), -a / d],
        [-2.0 * b / (a * d2), (3.0 * b * b - a * a) / (b * b * d2), (a + b) / (b * d)],
        [1.0 / (a * d2), (a - 2.0 * b) / (b * b * d2), -1.0 / (b * d)],
    ];
    Ok(rows.map(|r| r[0] * rhs[0] + r[1] * rhs[1] + r[2] * rhs[2]))
}

/// Polynomial coefficients of the branch-`k` real logarithm for the case
/// `tag`. An empty list is the zero logarithm of the identity.
///
/// Only cases with a non-real pair have a polynomial logarithm for `k ≠ 0`;
/// the others fail with `NoPolynomialForm`, as do the negative double
/// eigenvalue cases for every `k`.
pub fn smt_coeffs(tag: &CaseTag, k: i64, tol: &Tolerances) -> Result<Vec<f64>, EmbedError> {
    use Pattern::*;
    let real = &tag.eigen_data.real;
    let last = || real.last().copied().ok_or(EmbedError::DegenerateDenominator);
    let complex = || tag.eigen_data.complex.ok_or(EmbedError::DegenerateDenominator);
    let p = tag.pattern;
    let only_principal = || if k == 0 { Ok(()) } else { Err(EmbedError::NoPolynomialForm(p, k)) };
    match p {
        D2Identity | D3Identity | D4Identity => {
            only_principal()?;
            Ok(Vec::new())
        }
        D2Generic | D3Deg2OneOneL | D3Deg2OneLLPos | D4Deg2TripleOne | D4Deg2TripleL | D4Deg2DoublePos => {
            only_principal()?;
            coeffs_deg2(last()?, tol)
        }
        D3SimpleReal | D4Deg3TwoOnesDistinct | D4Deg3DoubleL2Pos => {
            only_principal()?;
            Ok(coeffs_d3_distinct(real[0], last()?, tol)?.to_vec())
        }
        D3Jordan2 | D4Deg3TwoOnesJordan | D4Deg3LJordanL => {
            only_principal()?;
            Ok(coeffs_d3_confluent(last()?, tol)?.to_vec())
        }
        D3ComplexPair | D4Deg3Complex => Ok(coeffs_d3_complex(complex()?, k, tol)?.to_vec()),
        D4SimpleReal => {
            only_principal()?;
            if real.len() != 3 {
                return Err(EmbedError::DegenerateDenominator);
            }
            Ok(coeffs_d4_real([real[0], real[1], real[2]], tol)?.to_vec())
        }
        D4SimpleComplex => Ok(coeffs_d4_complex(last()?, complex()?, k, tol)?.to_vec()),
        D4Jordan3 => {
            only_principal()?;
            Ok(coeffs_d4_jordan3(last()?, tol)?.to_vec())
        }
        D4MixedJordan2 => {
            only_principal()?;
            Ok(coeffs_d4_mixed_jordan2(real[0], last()?, tol)?.to_vec())
        }
        D3Deg2OneLLNeg | D4Deg2DoubleNeg | D4Deg3DoubleL2Neg => Err(EmbedError::NoPolynomialForm(p, k)),
    }
}

/// Relative slack on the wedge so that generators sitting exactly on its
/// edge (the cyclic extremes) are not lost to rounding.
pub(crate) const WEDGE_SLACK: f64 = 1e-9;

/// `cot(π/d)`: the largest ratio `|Im z| / |Re z|` of a generator eigenvalue `z`.
pub(crate) fn wedge(d: usize) -> f64 {
    1.0 / (PI / d as f64).tan()
}

/// Branches `k` for which `log|z| + i(arg z + 2πk)` can be an eigenvalue of
/// a `d`-state generator. Empty when no branch fits.
pub fn complex_branches(z: C64, d: usize) -> RangeInclusive<i64> {
    let w = z.norm().ln().abs() * wedge(d) * (1.0 + WEDGE_SLACK);
    let lo = ((-w - z.arg()) / (2.0 * PI)).ceil() as i64;
    let hi = ((w - z.arg()) / (2.0 * PI)).floor() as i64;
    lo..=hi
}

/// Upper bound on the number of logarithm branches that can give a
/// generator in the complex-pair cases, from the determinant alone.
pub fn branch_count_bound(det: f64, d: usize) -> i64 {
    let period = if d == 3 { 2.0 * PI * 3f64.sqrt() } else { 2.0 * PI };
    (1.0 - det.ln() / period).floor() as i64
}
