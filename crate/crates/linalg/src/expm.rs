//! Matrix exponential by scaling and squaring around a Taylor core.

use crate::Mat;

const TAYLOR_DEGREE: usize = 18;

/// `exp(A)`.
///
/// A Metzler matrix (non-negative off-diagonal) is shifted by its smallest
/// diagonal entry so that every Taylor term is entry-wise non-negative; this
/// keeps exponentials of generators Markov to roundoff. Other inputs are
/// shifted by `tr(A)/d`.
pub fn mat_exp(a: &Mat) -> Mat {
    let d = a.dim();
    let metzler = a.iter().all(|(i, j, v)| i == j || v >= 0.0);
    let mu = if metzler {
        (0..d).map(|i| a[(i, i)]).fold(f64::INFINITY, f64::min)
    } else {
        a.trace() / d as f64
    };
    let b = a.shift(-mu);

    let norm = b.norm_1();
    let mut s = 0;
    if norm > 0.25 {
        s = (norm / 0.25).log2().ceil() as i32;
    }
    let bs = b.scale(0.5f64.powi(s));

    // Horner form of Σ_{k ≤ N} B^k / k!.
    let id = Mat::identity(d);
    let mut e = id;
    for k in (1..=TAYLOR_DEGREE).rev() {
        e = id + (bs * e).scale(1.0 / k as f64);
    }
    for _ in 0..s {
        e = e * e;
    }
    e.scale(mu.exp())
}
