//! Samplers, brute-force oracles and reporting for the acceptance suite.
//!
//! Every sampler takes a caller-seeded ChaCha8 stream so a failing line
//! can be reproduced from its seed alone.

use std::fmt;
use std::time::Duration;

use embed_core::coeffs_d3_complex;
use embed_linalg::{mat_exp, poly_in, scale, Mat, Tolerances, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One criterion's result.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {:<34} {} [{:.2}s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Set the diagonal so every row sums to zero.
pub fn with_zero_rows(mut q: Mat) -> Mat {
    for i in 0..q.dim() {
        q[(i, i)] = 0.0;
        q[(i, i)] = -q.row_sum(i);
    }
    q
}

/// Random generator: each off-diagonal rate is zero with probability 0.3
/// and otherwise uniform on [0, 1); the result is rescaled so ‖Q‖∞ is
/// uniform on (0, 5].
pub fn random_generator(rng: &mut ChaCha8Rng, d: usize) -> Mat {
    let q = with_zero_rows(Mat::from_fn(d, |i, j| if i == j || rng.gen::<f64>() < 0.3 { 0.0 } else { rng.gen() }));
    let n = q.norm_inf();
    if n == 0.0 {
        return q;
    }
    q.scale(rng.gen_range(f64::EPSILON..=5.0) / n)
}

/// Three-state generator likely to exponentiate to a complex pair: half
/// the draws are generic rates with norm up to about 30, half are a
/// dominant cycle with a little noise.
pub fn rotating_generator(rng: &mut ChaCha8Rng) -> Mat {
    let q = if rng.gen_bool(0.5) {
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
    with_zero_rows(q)
}

/// Branches `k ∈ [-kmax, kmax]` whose logarithm of the three-state matrix
/// `m` (complex eigenvalue `z`) is a generator reproducing `m`.
///
/// The diagonal is rebuilt from the off-diagonal part since any logarithm
/// of a Markov matrix has zero row sums.
pub fn feasible_d3_branches(m: &Mat, z: C64, kmax: i64, tol: &Tolerances) -> Vec<i64> {
    let a = *m - Mat::identity(3);
    let bound = tol.residual * scale(m);
    (-kmax..=kmax)
        .filter(|&k| {
            let Ok(c) = coeffs_d3_complex(z, k, tol) else { return false };
            let r = with_zero_rows(poly_in(&c, &a));
            r.iter().all(|(i, j, v)| i == j || v >= -bound) && (mat_exp(&r) - *m).norm_inf() <= bound
        })
        .collect()
}
