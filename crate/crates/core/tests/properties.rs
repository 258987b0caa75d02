use ermstab::linalg::{axpy, distance, dot, norm, Matrix, Vector};
use ermstab::perturbations::{grid_gap, uniform_gap_between, GapMethod};
use ermstab::solution_sets::{minimal_value, SolutionShape};
use ermstab::solvers::{default_start, projected_gradient, GapCertificate};
use ermstab::suites::{gap_pair, random_psd, solver_instance};
use ermstab::{distance_to, sampling, solve_exact, ConstraintSet, ConvexProblem, QuadraticLoss, SolutionSet};
use proptest::prelude::*;

fn psd_problem(seed: u64, d: usize, rank: usize) -> (ConvexProblem<f64>, Vec<f64>) {
    let mut rng = sampling::rng(seed);
    let spec: Vec<f64> = (0..d)
        .map(|i| if i < rank { 0.5 + i as f64 } else { 0.0 })
        .collect();
    let a = random_psd::<f64>(&mut rng, &spec);
    let w = sampling::gaussian_vec::<f64>(&mut rng, d);
    let b = a.mul_vec(&w);
    (
        ConvexProblem::quadratic(QuadraticLoss::new(a, Vector(b), 0.25).unwrap()),
        w,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_sets_are_exactly_optimal(seed in 0u64..10_000, d in 1usize..7, rank_frac in 0.0f64..1.0) {
        let rank = ((d as f64) * rank_frac) as usize;
        let (p, w) = psd_problem(seed, d, rank);
        let s = solve_exact(&p).unwrap();
        prop_assert_eq!(s.flat_dimension(), d - rank);
        let m = s.minimal_value;
        // the generating point is optimal
        prop_assert!((p.evaluate(&w).unwrap() - m).abs() <= 1e-9 * m.abs().max(1.0));
        prop_assert!(distance_to(&s, &w).unwrap().value <= 1e-7 * norm(&w).max(1.0));
        if let SolutionShape::Affine { anchor, basis } = &s.shape {
            let mut rng = sampling::rng(seed ^ 1);
            let mut f = anchor.0.clone();
            for j in 0..basis.cols() {
                f = axpy(&f, sampling::uniform::<f64>(&mut rng, -10.0, 10.0), &basis.column(j));
            }
            prop_assert!((p.evaluate(&f).unwrap() - m).abs() <= 1e-8 * m.abs().max(1.0));
            prop_assert!(norm(&p.subgradient(&f).unwrap()) <= 1e-7);
        }
    }

    #[test]
    fn exact_gap_dominates_grid(seed in 0u64..10_000) {
        let (p, q, r) = gap_pair::<f64>(seed, 3).unwrap();
        let exact = uniform_gap_between(&p, &q, r, GapMethod::ExactTrustRegion).unwrap();
        let grid = grid_gap(&p, &q, r, 20_000).unwrap();
        prop_assert!(grid <= exact * (1.0 + 1e-12) + 1e-12);
        prop_assert!(grid >= 0.8 * exact - 1e-9);
    }

    #[test]
    fn certified_gaps_are_sound(seed in 0u64..10_000) {
        let p = solver_instance::<f64>(seed, 8).unwrap();
        let m = minimal_value(&p).unwrap();
        let run = projected_gradient(&p, &default_start(&p), 1e-8, 100_000).unwrap();
        prop_assert!(run.certificate != GapCertificate::Uncertified);
        prop_assert!(run.value - m <= run.certified_gap + 1e-12 * m.abs().max(1.0));
        prop_assert!(run.value >= m - 1e-10 * m.abs().max(1.0));
        prop_assert!(p.constraint().contains(&run.point));
    }

    #[test]
    fn distance_to_affine_is_a_projection(seed in 0u64..10_000, d in 2usize..6) {
        let (p, _) = psd_problem(seed, d, 1);
        let s = solve_exact(&p).unwrap();
        let mut rng = sampling::rng(seed);
        let f = sampling::gaussian_vec::<f64>(&mut rng, d);
        let SolutionShape::Affine { anchor, basis } = &s.shape else { unreachable!() };
        let diff: Vec<f64> = f.iter().zip(anchor.iter()).map(|(a, b)| a - b).collect();
        let mut proj = anchor.0.clone();
        for j in 0..basis.cols() {
            let v = basis.column(j);
            proj = axpy(&proj, dot(&diff, &v), &v);
        }
        let dist = distance_to(&s, &f).unwrap().value;
        prop_assert!((dist - distance(&f, &proj)).abs() <= 1e-10);
        prop_assert!(distance_to(&s, &proj).unwrap().value <= 1e-10);
    }
}

#[test]
fn ball_constrained_values_never_beat_the_unconstrained_infimum() {
    for seed in 0..40 {
        let (p, _) = psd_problem(seed, 4, 2);
        let m = minimal_value(&p).unwrap();
        for r in [0.1, 1.0, 10.0] {
            let ball = p.clone().with_constraint(ConstraintSet::ball(4, r)).unwrap();
            let mr = minimal_value(&ball).unwrap();
            assert!(mr >= m - 1e-12);
        }
    }
}

#[test]
fn single_precision_core() {
    let x = Matrix::<f32>::from_rows(&[vec![1.0, 0.0]]).unwrap();
    let p: ermstab::F32Problem = ConvexProblem::quadratic(QuadraticLoss::least_squares(&x, &[1.0]).unwrap());
    let s: ermstab::F32Solutions = solve_exact(&p).unwrap();
    assert_eq!(s.flat_dimension(), 1);
    assert!(s.minimal_value.abs() < 1e-6);
    let d = distance_to(&s, &[3.0f32, 4.0]).unwrap().value;
    assert!((d - 2.0).abs() < 1e-5);
}

#[test]
fn solution_sets_round_trip_with_non_finite_values() {
    let s = SolutionSet::sampled(vec![vec![1.0, -2.5]], f64::INFINITY, -0.5);
    let json = serde_json::to_string(&s).unwrap();
    assert!(json.contains("\"inf\"") || json.contains("Infinity"), "{json}");
    let back: SolutionSet<f64> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s);
}
