//! Brute-force branch scans against the branch bound and the uniqueness
//! certificates.

use std::f64::consts::PI;

use embed_classifier::{classify, Pattern};
use embed_core::{branch_count_bound, coeffs_d3_complex, decide, Uniqueness, Verdict};
use embed_linalg::{mat_exp, poly_in, scale, Mat, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random 3-state generator: either generic rates scaled up to norm 30, or
/// a rotation-dominated cycle with a little noise.
fn sample(rng: &mut ChaCha8Rng) -> Mat {
    let mut q = if rng.gen_bool(0.5) {
        Mat::from_fn(3, |i, j| if i == j { 0.0 } else { rng.gen::<f64>() * rng.gen_range(0.1..10.0) })
    } else {
        let (p, b) = (rng.gen_range(1.0..12.0), rng.gen_range(0.0..0.5));
        Mat::from_fn(3, |i, j| {
            let noise = rng.gen::<f64>() * 0.2;
            if j == (i + 1) % 3 {
                p + noise
            } else if i == (j + 1) % 3 {
                b + noise
            } else {
                0.0
            }
        })
    };
    for i in 0..3 {
        q[(i, i)] = -q.row_sum(i);
    }
    q
}

/// Branches `k` in `-kmax..=kmax` whose polynomial logarithm is a generator.
///
/// Any logarithm of a Markov matrix annihilates the ones vector, so the
/// diagonal is recomputed from the off-diagonal part; with large
/// coefficients the raw polynomial loses about 1e-8 in the row sums.
fn feasible_branches(m: &Mat, z: embed_linalg::C64, kmax: i64, tol: &Tolerances) -> Vec<i64> {
    let a = *m - Mat::identity(3);
    (-kmax..=kmax)
        .filter(|&k| {
            let Ok(c) = coeffs_d3_complex(z, k, tol) else { return false };
            let mut r = poly_in(&c, &a);
            for i in 0..3 {
                r[(i, i)] = 0.0;
                r[(i, i)] = -r.row_sum(i);
            }
            let bound = tol.residual * scale(m);
            r.iter().all(|(i, j, v)| i == j || v >= -bound) && (mat_exp(&r) - *m).norm_inf() <= bound
        })
        .collect()
}

/// Complex-pair exponentials of `sample` generators scaled by a factor
/// drawn from `shrink`, filtered by `keep`.
fn complex_instances(
    seed: u64,
    count: usize,
    shrink: std::ops::Range<f64>,
    keep: impl Fn(&Mat) -> bool,
) -> Vec<Mat> {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let s = if shrink.is_empty() { shrink.start } else { rng.gen_range(shrink.clone()) };
        let m = mat_exp(&sample(&mut rng).scale(s));
        if !keep(&m) {
            continue;
        }
        if matches!(classify(&m, &tol), Ok(t) if t.pattern == Pattern::D3ComplexPair) {
            out.push(m);
        }
    }
    out
}

#[test]
fn feasible_branches_stay_inside_the_bound() {
    let tol = Tolerances::default();
    let mut multi = 0;
    for m in complex_instances(41, 1000, 1.0..1.0, |_| true) {
        let z = classify(&m, &tol).unwrap().eigen_data.complex.unwrap();
        let n = branch_count_bound(m.det(), 3);
        let ks = feasible_branches(&m, z, n + 3, &tol);
        assert!(ks.iter().all(|k| k.abs() <= n), "k {ks:?} outside bound {n}");
        let r = decide(&m, &tol);
        let mut got: Vec<i64> = r.generators.iter().map(|g| g.branch).collect();
        got.sort();
        assert_eq!(got, ks, "decide disagrees with the scan on {m:?}");
        if ks.len() > 1 {
            multi += 1;
        }
    }
    // The corpus must exercise more than the principal branch.
    assert!(multi > 0);
}

#[test]
fn determinant_certificate_threshold() {
    assert!(((-PI).exp() - 0.043214).abs() < 5e-7);
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut seen = 0;
    while seen < 500 {
        let d = rng.gen_range(3..=4);
        let mut q = Mat::from_fn(d, |i, j| if i == j { 0.0 } else { rng.gen::<f64>() });
        for i in 0..d {
            q[(i, i)] = -q.row_sum(i);
        }
        let m = mat_exp(&q.scale(rng.gen_range(0.1..2.0)));
        if m.det() <= (-PI).exp() {
            continue;
        }
        seen += 1;
        let r = decide(&m, &tol);
        assert_eq!(r.verdict, Verdict::Embeddable);
        assert_eq!(r.uniqueness, Uniqueness::Unique);
    }
}

#[test]
fn diagonal_above_one_half_leaves_only_the_principal_branch() {
    let tol = Tolerances::default();
    let ms = complex_instances(44, 300, 0.01..0.12, |m| (0..3).all(|i| m[(i, i)] > 0.5));
    for m in ms {
        let z = classify(&m, &tol).unwrap().eigen_data.complex.unwrap();
        let n = branch_count_bound(m.det(), 3);
        let ks = feasible_branches(&m, z, n + 3, &tol);
        assert_eq!(ks, vec![0]);
        assert_eq!(decide(&m, &tol).uniqueness, Uniqueness::Unique);
    }
}
