//! Closed-form roots of monic real polynomials of degree 1 to 4.
//!
//! Coefficients are given without the leading one: `[c1, .., cd]` stands for
//! `x^d + c1 x^(d-1) + .. + cd`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

/// Value and derivative of the monic polynomial at `z`.
pub fn eval_monic(coeffs: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(1.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of `x² + b x + c`, avoiding cancellation in the real case.
pub fn solve_quadratic(b: f64, c: f64) -> [C64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { s } else { -s });
        if q == 0.0 {
            return [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        }
        [C64::new(q, 0.0), C64::new(c / q, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [C64::new(re, im), C64::new(re, -im)]
    }
}

/// Roots of the complex quadratic `x² + b x + c`.
fn solve_quadratic_c(b: C64, c: C64) -> [C64; 2] {
    let s = (b * b - 4.0 * c).sqrt();
    // Pick the sign that avoids cancellation.
    let q = if (b.conj() * s).re >= 0.0 { -0.5 * (b + s) } else { -0.5 * (b - s) };
    if q.norm() == 0.0 {
        return [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    }
    [q, c / q]
}

/// Roots of `x³ + a x² + b x + c` via the depressed cubic: trigonometric
/// form for three real roots, Cardano otherwise.
pub fn solve_cubic(a: f64, b: f64, c: f64) -> [C64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let d = half_q * half_q + third_p * third_p * third_p;
    if d < 0.0 {
        // Three distinct real roots; p < 0 here.
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos() / 3.0;
        let t = [
            2.0 * r * phi.cos(),
            2.0 * r * (phi - 2.0 * PI / 3.0).cos(),
            2.0 * r * (phi + 2.0 * PI / 3.0).cos(),
        ];
        t.map(|ti| C64::new(ti - shift, 0.0))
    } else {
        let s = d.sqrt();
        let big = -half_q.signum() * (half_q.abs() + s).cbrt();
        let big = if half_q == 0.0 { (s).cbrt() } else { big };
        let small = if big != 0.0 { -third_p / big } else { 0.0 };
        let t1 = big + small;
        let re = -0.5 * t1;
        let im = 0.5 * 3f64.sqrt() * (big - small);
        [
            C64::new(t1 - shift, 0.0),
            C64::new(re - shift, im),
            C64::new(re - shift, -im),
        ]
    }
}

/// Roots of `x⁴ + a x³ + b x² + c x + d` by Ferrari's method with a
/// depressed-cubic resolvent.
pub fn solve_quartic(a: f64, b: f64, c: f64, d: f64) -> [C64; 4] {
    let shift = a / 4.0;
    let a2 = a * a;
    let p = b - 3.0 * a2 / 8.0;
    let q = c - a * b / 2.0 + a2 * a / 8.0;
    let r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
    let sh = C64::new(shift, 0.0);

    let scale = 1.0 + p.abs() + q.abs().sqrt() + r.abs().sqrt();
    if q.abs() <= 1e-14 * scale * scale.sqrt() {
        // Biquadratic: y⁴ + p y² + r.
        let [u1, u2] = solve_quadratic(p, r);
        let y = [u1.sqrt(), -u1.sqrt(), u2.sqrt(), -u2.sqrt()];
        return y.map(|yi| yi - sh);
    }

    // Resolvent m³ + p m² + (p²/4 − r) m − q²/8 = 0 has a positive root when q ≠ 0.
    let res = solve_cubic(p, p * p / 4.0 - r, -q * q / 8.0);
    let mut m = res
        .iter()
        .filter(|z| z.im.abs() <= 1e-12 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(m > 0.0) {
        m = res.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max).max(f64::MIN_POSITIVE);
    }
    // One Newton step on the resolvent tightens the root used below.
    let f = ((m + p) * m + (p * p / 4.0 - r)) * m - q * q / 8.0;
    let df = (3.0 * m + 2.0 * p) * m + (p * p / 4.0 - r);
    if df != 0.0 {
        let m2 = m - f / df;
        if m2 > 0.0 {
            m = m2;
        }
    }

    let s = (2.0 * m).sqrt();
    let k = q / (2.0 * s);
    let base = p / 2.0 + m;
    let [y1, y2] = solve_quadratic_c(C64::new(-s, 0.0), C64::new(base + k, 0.0));
    let [y3, y4] = solve_quadratic_c(C64::new(s, 0.0), C64::new(base - k, 0.0));
    [y1 - sh, y2 - sh, y3 - sh, y4 - sh]
}

/// Roots of a monic polynomial of degree 1..=4, refined by Newton steps on
/// the original coefficients.
pub fn roots_monic(coeffs: &[f64]) -> Vec<C64> {
    let mut roots: Vec<C64> = match coeffs.len() {
        1 => vec![C64::new(-coeffs[0], 0.0)],
        2 => solve_quadratic(coeffs[0], coeffs[1]).to_vec(),
        3 => solve_cubic(coeffs[0], coeffs[1], coeffs[2]).to_vec(),
        4 => solve_quartic(coeffs[0], coeffs[1], coeffs[2], coeffs[3]).to_vec(),
        n => panic!("degree {n} outside 1..=4"),
    };
    polish(coeffs, &mut roots);
    roots
}

/// Newton refinement that only accepts steps decreasing |p|.
pub fn polish(coeffs: &[f64], roots: &mut [C64]) {
    for z in roots.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = eval_monic(coeffs, *z);
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                break;
            }
            let cand = *z - p / dp;
            if eval_monic(coeffs, cand).0.norm() < p.norm() {
                *z = cand;
            } else {
                break;
            }
        }
    }
}

/// Discriminant `Π_{i<j} (r_i − r_j)²` normalised by `scale^(d(d−1))`.
pub fn normalized_discriminant(roots: &[C64], scale: f64) -> f64 {
    let mut prod = C64::new(1.0, 0.0);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let diff = (roots[i] - roots[j]) / scale;
            prod *= diff * diff;
        }
    }
    prod.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(roots: &[f64]) -> Vec<f64> {
        // Coefficients of Π (x − r), leading one dropped.
        let mut c = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i] += ci;
                next[i + 1] -= ci * r;
            }
            c = next;
        }
        c[1..].to_vec()
    }

    fn assert_roots(found: &[C64], expected: &[C64], tol: f64) {
        let mut used = vec![false; expected.len()];
        for f in found {
            let (k, dist) = expected
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, e)| (k, (f - e).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            assert!(dist < tol, "root {f} off by {dist}; expected {expected:?}");
            used[k] = true;
        }
    }

    #[test]
    fn quadratic_real_and_complex() {
        assert_roots(&roots_monic(&expand(&[0.25, -3.0])), &[0.25.into(), (-3.0).into()], 1e-15);
        // x² − 2x + 5 = (x − 1 − 2i)(x − 1 + 2i)
        assert_roots(&roots_monic(&[-2.0, 5.0]), &[C64::new(1.0, 2.0), C64::new(1.0, -2.0)], 1e-15);
    }

    #[test]
    fn cubic_three_real_and_one_real() {
        let r = [1.0, 0.3, -0.45];
        let expected: Vec<C64> = r.iter().map(|v| C64::new(*v, 0.0)).collect();
        assert_roots(&roots_monic(&expand(&r)), &expected, 1e-14);
        // (x − 1)(x² + 0.4 x + 0.29): roots 1, −0.2 ± 0.5i
        let c = [0.4 - 1.0, 0.29 - 0.4, -0.29];
        assert_roots(
            &roots_monic(&c),
            &[1.0.into(), C64::new(-0.2, 0.5), C64::new(-0.2, -0.5)],
            1e-14,
        );
    }

    #[test]
    fn quartic_mixed_spectra() {
        let r = [1.0, 0.8, 0.35, -0.1];
        let expected: Vec<C64> = r.iter().map(|v| C64::new(*v, 0.0)).collect();
        assert_roots(&roots_monic(&expand(&r)), &expected, 1e-13);

        // (x − 1)(x − 0.5)(x² − 0.6x + 0.25): pair 0.3 ± 0.4i
        let mut c = vec![1.0];
        for f in [vec![-1.0], vec![-0.5], vec![-0.6, 0.25]] {
            let mut next = vec![0.0; c.len() + f.len()];
            for (i, ci) in c.iter().enumerate() {
                next[i] += ci;
                for (j, fj) in f.iter().enumerate() {
                    next[i + j + 1] += ci * fj;
                }
            }
            c = next;
        }
        assert_roots(
            &roots_monic(&c[1..]),
            &[1.0.into(), 0.5.into(), C64::new(0.3, 0.4), C64::new(0.3, -0.4)],
            1e-13,
        );
    }

    #[test]
    fn biquadratic_branch() {
        // x⁴ − 5x² + 4 = (x²−1)(x²−4)
        let expected: Vec<C64> = [1.0, -1.0, 2.0, -2.0].iter().map(|v| C64::new(*v, 0.0)).collect();
        assert_roots(&roots_monic(&[0.0, -5.0, 0.0, 4.0]), &expected, 1e-14);
    }

    #[test]
    fn discriminant_vanishes_on_double_root() {
        let roots = roots_monic(&expand(&[1.0, 1.0, 0.2]));
        assert!(normalized_discriminant(&roots, 1.0) < 1e-12);
        let roots = roots_monic(&expand(&[1.0, 0.5, 0.2]));
        assert!(normalized_discriminant(&roots, 1.0) > 1e-3);
    }
}
