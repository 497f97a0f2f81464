//! Flows of generator schedules against closed-form oracles.
//!
//! Random generators draw each off-diagonal rate as 0 with probability 0.3
//! and uniform on [0, 1) otherwise, then rescale so ‖Q‖∞ is uniform on
//! (0, 3]. Segment durations are uniform on [0.05, 1).

use embed_core::{decide, Reason, Verdict};
use embed_inhom::*;
use embed_linalg::{is_markov, mat_exp, Mat, Tolerances};
use embed_models::{embed_equal_input, recognize_equal_input};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_generator(rng: &mut impl Rng, d: usize) -> Mat {
    let mut q = Mat::from_fn(d, |i, j| if i == j || rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() });
    for i in 0..d {
        q[(i, i)] = -q.row_sum(i);
    }
    let n = q.norm_inf();
    if n == 0.0 {
        q
    } else {
        q.scale(rng.gen_range(0.0..3.0f64).max(1e-3) / n)
    }
}

fn random_schedule(rng: &mut impl Rng, d: usize, segments: usize) -> Schedule {
    let segs = (0..segments)
        .map(|_| Segment::Constant { q: random_generator(rng, d), duration: rng.gen_range(0.05..1.0) })
        .collect();
    Schedule::new(segs).unwrap()
}

#[test]
fn constant_and_piecewise_schedules_match_the_exponentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let d = rng.gen_range(2..=4);
        let q = random_generator(&mut rng, d);
        let t = rng.gen_range(0.1..1.5);
        let s = Schedule::constant(q, t).unwrap();
        let pbs = peano_baker(&s, t, 200, 1e-12).unwrap();
        assert!(pbs.max_abs_diff(&mat_exp(&q.scale(t))) < 1e-8);

        let two = random_schedule(&mut rng, d, 2);
        let span = two.span();
        let want = match two.segments() {
            [Segment::Constant { q: a, duration: x }, Segment::Constant { q: b, duration: y }] => {
                mat_exp(&a.scale(*x)) * mat_exp(&b.scale(*y))
            }
            _ => unreachable!(),
        };
        assert!(evolve(&two).max_abs_diff(&want) < 1e-12);
        assert!(peano_baker(&two, span, 200, 1e-12).unwrap().max_abs_diff(&want) < 1e-8);
    }
}

#[test]
fn commuting_family_matches_the_integrated_exponential() {
    // Q(t) = (1 + sin 3t)·Q₀ on a grid of step 1e-3 over [0, 1].
    let q0 = Mat::from_rows(&[[-1.0, 0.6, 0.4], [0.3, -0.3, 0.0], [0.5, 0.5, -1.0]]).unwrap();
    let h = 1e-3;
    let f = |t: f64| 1.0 + (3.0 * t).sin();
    let samples: Vec<Mat> = (0..=1000).map(|m| q0.scale(f(m as f64 * h))).collect();
    let s = Schedule::new(vec![Segment::Sampled { samples, h }]).unwrap();
    let integral = 1.0 + (1.0 - 3f64.cos()) / 3.0;
    let want = mat_exp(&q0.scale(integral));
    assert!(peano_baker(&s, 1.0, 200, 1e-12).unwrap().max_abs_diff(&want) < 1e-8);
    assert!(evolve(&s).max_abs_diff(&want) < 1e-8);
    let det = liouville_det(&s, 1.0).unwrap();
    assert!((det - want.det()).abs() < 1e-8);
    // Halfway through, on the grid.
    let half = mat_exp(&q0.scale(0.5 + (1.0 - 1.5f64.cos()) / 3.0));
    assert!(peano_baker(&s, 0.5, 200, 1e-12).unwrap().max_abs_diff(&half) < 1e-8);
}

#[test]
fn non_commuting_sampled_schedule_matches_a_fine_product() {
    // Linear interpolation between two non-commuting generators, checked
    // against the product of many short constant steps.
    let a = Mat::from_rows(&[[-1.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
    let b = Mat::from_rows(&[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, -1.0]]).unwrap();
    let h = 1e-3;
    let q = |t: f64| a.scale(1.0 - t) + b.scale(t);
    let s = Schedule::new(vec![Segment::Sampled { samples: (0..=1000).map(|m| q(m as f64 * h)).collect(), h }]).unwrap();
    let fine = 20_000;
    let dt = 1.0 / fine as f64;
    let want = (0..fine).fold(Mat::identity(3), |acc, k| acc * mat_exp(&q((k as f64 + 0.5) * dt).scale(dt)));
    let pbs = peano_baker(&s, 1.0, 200, 1e-12).unwrap();
    assert!(pbs.max_abs_diff(&want) < 1e-8, "{}", pbs.max_abs_diff(&want));
    assert!(evolve(&s).max_abs_diff(&want) < 1e-8);
}

#[test]
fn markov_preservation_and_zero_row_sum_ladder() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let d = rng.gen_range(2..=4);
        let segments = rng.gen_range(1..=4);
        let s = random_schedule(&mut rng, d, segments);
        let terms = peano_baker_terms(&s, s.span(), 200, 1e-12).unwrap();
        let mut partial = Mat::zeros(d);
        for (n, term) in terms.iter().enumerate() {
            partial = partial + *term;
            if n >= 1 {
                let ladder = partial - Mat::identity(d);
                assert!((0..d).all(|i| ladder.row_sum(i).abs() <= 1e-10));
            }
        }
        assert!((0..d).all(|i| (partial.row_sum(i) - 1.0).abs() <= 1e-8));
        assert!(partial.iter().all(|(_, _, v)| v >= -1e-8));
    }
}

#[test]
fn determinant_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let tol = Tolerances::default();
    for _ in 0..1000 {
        let d = rng.gen_range(2..=4);
        let segments = rng.gen_range(1..=5);
        let s = random_schedule(&mut rng, d, segments);
        let m = evolve(&s);
        let w = liouville_det(&s, s.span()).unwrap();
        assert!((m.det() - w).abs() <= 1e-8);
        assert!(w > 0.0 && w <= 1.0);
        assert!(is_markov(&m, &tol));
        assert!(g_necessary(&m, &tol));
    }
}

#[test]
fn equal_input_flows_stay_equal_input_and_embeddable() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let tol = Tolerances::default();
    for _ in 0..200 {
        let d = rng.gen_range(3..=4);
        let segs: Vec<Segment> = (0..4)
            .map(|_| {
                let c: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                let mut q = Mat::from_fn(d, |_, j| c[j]);
                for i in 0..d {
                    q[(i, i)] = 0.0;
                    q[(i, i)] = -q.row_sum(i);
                }
                Segment::Constant { q, duration: rng.gen_range(0.05..0.5) }
            })
            .collect();
        let s = Schedule::new(segs).unwrap();
        let mut last_c = 0.0;
        let mut t = 0.0;
        for seg in s.segments() {
            t += seg.duration();
            let m = peano_baker(&s, t, 200, 1e-13).unwrap();
            let p = recognize_equal_input(&m, &tol).expect("equal-input flow");
            // Starting from the identity, 1 − c decays like det does.
            assert!(p.c < 1.0 && p.c >= last_c - 1e-12);
            last_c = p.c;
            let r = embed_equal_input(&p, d, &tol).unwrap();
            assert_eq!(r.verdict, Verdict::Embeddable);
        }
    }
}

fn there_is_more(t: f64, s: f64) -> (Schedule, Mat) {
    let q1 = Mat::from_rows(&[[-1.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
    let q2 = Mat::from_rows(&[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 0.0, -1.0]]).unwrap();
    let (a, b) = (1.0 - (-t).exp(), 1.0 - (-s).exp());
    let want = Mat::from_rows(&[[1.0 - a, a, 0.0], [0.0, 1.0, 0.0], [b, 0.0, 1.0 - b]]).unwrap();
    let sched = Schedule::new(vec![Segment::Constant { q: q1, duration: t }, Segment::Constant { q: q2, duration: s }])
        .unwrap();
    (sched, want)
}

#[test]
fn gap_witness() {
    let tol = Tolerances::default();
    for (t, s) in [(1.0, 1.0), (0.3, 2.0), (1.5, 0.2)] {
        let (sched, want) = there_is_more(t, s);
        let m = evolve(&sched);
        assert!(m.max_abs_diff(&want) < 1e-14);
        let w = liouville_det(&sched, t + s).unwrap();
        assert!((w - m.det()).abs() < 1e-14);
        let r = decide(&m, &tol);
        assert_eq!((r.verdict, r.reason), (Verdict::NotEmbeddable, Some(Reason::TransitivityViolated)));
        let g = g_embed_d3(&m, &tol).unwrap();
        assert_eq!((g.verdict, g.route, g.factor_bound), (GVerdict::GEmbeddable, GRoute::ZeroOffDiagonal, Some(5)));
    }
}

#[test]
fn doubly_stochastic_product() {
    let q1 = Mat::from_rows(&[[-1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
    let q2 = Mat::from_rows(&[[-1.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, -1.0]]).unwrap();
    let (t, s): (f64, f64) = (0.4, 0.9);
    let a = 0.5 * (1.0 - (-2.0 * t).exp());
    let b = 0.5 * (1.0 - (-2.0 * s).exp());
    let want = Mat::from_rows(&[
        [(1.0 - a) * (1.0 - b), a, (1.0 - a) * b],
        [a * (1.0 - b), 1.0 - a, a * b],
        [b, 0.0, 1.0 - b],
    ])
    .unwrap();
    let sched =
        Schedule::new(vec![Segment::Constant { q: q1, duration: t }, Segment::Constant { q: q2, duration: s }]).unwrap();
    assert!(evolve(&sched).max_abs_diff(&want) < 1e-14);
    let tol = Tolerances::default();
    assert_eq!(decide(&want, &tol).verdict, Verdict::NotEmbeddable);
    let g = g_embed_d3(&want, &tol).unwrap();
    assert_eq!((g.verdict, g.factor_bound), (GVerdict::GEmbeddable, Some(5)));
}

#[test]
fn b_quantity_is_relabeling_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for _ in 0..500 {
        let m = Mat::from_fn(3, |_, _| rng.gen_range(0.05..1.0));
        let m = Mat::from_fn(3, |i, j| m[(i, j)] / m.row_sum(i));
        let b = b_quantity(&m).unwrap();
        for p in &perms {
            assert!((b_quantity(&m.permute(p)).unwrap() - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

#[test]
fn embeddable_with_large_determinant_passes_the_b_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let tol = Tolerances::default();
    let mut checked = 0;
    while checked < 500 {
        let q = random_generator(&mut rng, 3);
        let m = mat_exp(&q);
        if m.det() < 0.125 || m.iter().any(|(_, _, v)| v <= 1e-6) {
            continue;
        }
        checked += 1;
        assert!(b_quantity(&m).unwrap() >= m.det() * (1.0 - 1e-12));
        let g = g_embed_d3(&m, &tol).unwrap();
        assert_eq!((g.verdict, g.route), (GVerdict::GEmbeddable, GRoute::AboveB));
    }
}

#[test]
fn star_shape_from_the_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let tol = Tolerances::default();
    let j = star_point(3).unwrap();
    for _ in 0..200 {
        let p = mat_exp(&random_generator(&mut rng, 3));
        let c = rng.gen_range(0.0..1.0);
        let mc = Mat::identity(3).scale(1.0 - c) + j.scale(c);
        assert!((p * j).max_abs_diff(&j) < 1e-14);
        let m = p * mc;
        assert!(g_necessary(&m, &tol));
        assert_ne!(g_embed_d3(&m, &tol).unwrap().verdict, GVerdict::NotGEmbeddable);
    }
}
