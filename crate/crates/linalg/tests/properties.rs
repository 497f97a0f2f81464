use embed_linalg::{
    eigenvalues, is_markov, jordan_structure, mat_exp, principal_log, Mat, Tolerances, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn generator(d: usize, rates: &[f64]) -> Mat {
    let mut q = Mat::from_fn(d, |i, j| if i == j { 0.0 } else { rates[i * d + j] });
    for i in 0..d {
        q[(i, i)] = -q.row_sum(i);
    }
    q
}

fn generator_strategy(max_rate: f64) -> impl Strategy<Value = Mat> {
    (2usize..=4).prop_flat_map(move |d| {
        prop::collection::vec(0.0..max_rate, d * d).prop_map(move |r| generator(d, &r))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn det_of_exp_is_exp_of_trace(q in generator_strategy(5.0)) {
        prop_assume!(q.norm_inf() <= 20.0);
        let e = mat_exp(&q);
        prop_assert!((e.det() - q.trace().exp()).abs() <= 1e-10);
    }

    #[test]
    fn det_of_exp_general_small(entries in prop::collection::vec(-0.6f64..0.6, 16), d in 2usize..=4) {
        let a = Mat::from_fn(d, |i, j| entries[i * 4 + j]);
        let lhs = mat_exp(&a).det();
        let rhs = a.trace().exp();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn log_inverts_exp_in_the_strip(q in generator_strategy(3.0)) {
        let tol = Tolerances::default();
        let spec = eigenvalues(&q, &tol).unwrap();
        prop_assume!(spec.roots.iter().all(|(z, _)| z.im.abs() < std::f64::consts::PI - 0.1 && z.re >= -20.0));
        let l = principal_log(&mat_exp(&q)).unwrap();
        prop_assert!(l.max_abs_diff(&q) <= 1e-8 * q.norm_inf().max(1.0), "err {:e}", l.max_abs_diff(&q));
    }

    #[test]
    fn markov_has_semisimple_unit_eigenvalue(q in generator_strategy(2.0)) {
        let tol = Tolerances::default();
        let m = mat_exp(&q);
        prop_assert!(is_markov(&m, &tol));
        if let Ok(js) = jordan_structure(&m, &tol) {
            let one = js.sizes_of(C64::new(1.0, 0.0));
            prop_assert!(one.is_some());
            prop_assert!(one.unwrap().iter().all(|s| *s == 1));
        }
    }
}

#[test]
fn exp_of_generators_is_markov() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 0..10_000 {
        let d = 2 + n % 3;
        let rates: Vec<f64> = (0..d * d).map(|_| rng.gen_range(0.0..4.0) * (rng.gen::<f64>() > 0.2) as u8 as f64).collect();
        let e = mat_exp(&generator(d, &rates));
        for (i, j, v) in e.iter() {
            assert!(v >= -1e-12, "entry ({i},{j}) = {v:e}");
        }
        for i in 0..d {
            assert!((e.row_sum(i) - 1.0).abs() <= 1e-12);
        }
    }
}
