use embed_inhom::*;
use embed_linalg::{mat_exp, Mat};
use proptest::prelude::*;

/// Generator from raw off-diagonal rates in `[0, 2)`.
fn generator(d: usize) -> impl Strategy<Value = Mat> {
    proptest::collection::vec(0.0f64..2.0, d * d).prop_map(move |r| {
        let mut q = Mat::from_fn(d, |i, j| if i == j { 0.0 } else { r[i * d + j] });
        for i in 0..d {
            q[(i, i)] = -q.row_sum(i);
        }
        q
    })
}

fn schedule() -> impl Strategy<Value = Schedule> {
    (2usize..=4).prop_flat_map(|d| {
        proptest::collection::vec((generator(d), 0.05f64..1.0), 1..5).prop_map(|segs| {
            Schedule::new(segs.into_iter().map(|(q, duration)| Segment::Constant { q, duration }).collect()).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn determinant_follows_the_trace(s in schedule()) {
        let w = liouville_det(&s, s.span()).unwrap();
        prop_assert!((evolve(&s).det() - w).abs() <= 1e-8);
        prop_assert!(w > 0.0 && w <= 1.0);
    }

    #[test]
    fn series_stays_markov(s in schedule()) {
        let m = peano_baker(&s, s.span(), 200, 1e-12).unwrap();
        let d = m.dim();
        prop_assert!((0..d).all(|i| (m.row_sum(i) - 1.0).abs() <= 1e-8));
        prop_assert!(m.iter().all(|(_, _, v)| v >= -1e-8));
        prop_assert!(m.max_abs_diff(&evolve(&s)) <= 1e-8);
    }

    #[test]
    fn poisson_products_are_markov_with_product_determinant(
        fs in proptest::collection::vec((0usize..3, 1usize..3, 0.0f64..=1.0), 0..8)
    ) {
        let fs: Vec<PoissonFactor> = fs.into_iter().map(|(i, k, a)| PoissonFactor { i, j: (i + k) % 3, a }).collect();
        let m = bangbang_product(&fs, 3).unwrap();
        let det: f64 = fs.iter().map(|f| 1.0 - f.a).product();
        prop_assert!((m.det() - det).abs() <= 1e-12);
        prop_assert!((0..3).all(|i| (m.row_sum(i) - 1.0).abs() <= 1e-12));
        // A regular Poisson matrix is the exponential of a Poisson generator.
        if let Some(f) = fs.first().filter(|f| f.a < 1.0) {
            let mut q = Mat::zeros(3);
            let rate = -(1.0 - f.a).ln();
            q[(f.i, f.i)] = -rate;
            q[(f.i, f.j)] = rate;
            prop_assert!(mat_exp(&q).max_abs_diff(&poisson_matrix(f, 3).unwrap()) <= 1e-12);
        }
    }
}
