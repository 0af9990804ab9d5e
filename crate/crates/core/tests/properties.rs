use num_complex::Complex64;
use povm_ascent::ensemble::random_positive_operators;
use povm_ascent::linalg::{
    inv_sqrt, inv_sqrt_eigen, inv_sqrt_fixpoint, max_abs_diff, partial_trace, tensor, CMatrix,
};
use povm_ascent::scenarios::{adhoc_ensemble, tomographic_sextet};
use povm_ascent::{
    gradient_operators, iterate_round, joint_probabilities, lagrange_operator, merge_equivalent,
    mutual_information, optimize, random_povm, stationarity_residual, Ensemble, GradientFunctional,
    HermMatrix, IterationConfig, KStrategy, LogBase, Povm,
};
use proptest::prelude::*;

fn ai() -> GradientFunctional {
    GradientFunctional::AccessibleInformation
}

fn info(e: &Ensemble, m: &Povm) -> f64 {
    mutual_information(&joint_probabilities(e, m).unwrap(), LogBase::Nat)
}

/// Ensemble of `j` random states in dimension `dim` with equal priors.
fn random_ensemble(dim: usize, j: usize, seed: u64) -> Ensemble {
    let states = random_positive_operators(dim, j, seed)
        .into_iter()
        .map(|s| s.scale(1.0 / (j as f64 * s.trace())))
        .collect();
    Ensemble::new(states).unwrap()
}

fn random_matrix(n: usize, seed: u64) -> CMatrix {
    let a = random_positive_operators(n, 2, seed);
    a[0].matrix() + a[1].matrix() * Complex64::new(0.3, -0.7)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn information_is_non_negative(seed in any::<u64>(), dim in 2usize..5, j in 2usize..5, k in 1usize..7) {
        let e = random_ensemble(dim, j, seed);
        let m = random_povm(dim, k, seed.wrapping_add(1)).unwrap();
        prop_assert!(info(&e, &m) >= -1e-14);
    }

    #[test]
    fn bits_are_scaled_nats(seed in any::<u64>(), k in 2usize..6) {
        let e = adhoc_ensemble();
        let d = joint_probabilities(&e, &random_povm(3, k, seed).unwrap()).unwrap();
        let nats = mutual_information(&d, LogBase::Nat);
        let bits = mutual_information(&d, LogBase::Bit);
        prop_assert!((bits - nats / std::f64::consts::LN_2).abs() <= 1e-15 * (1.0 + bits));
    }

    #[test]
    fn convexity_in_the_povm(seed in any::<u64>(), k in 2usize..6, lambda in 0.0f64..1.0) {
        let e = random_ensemble(3, 3, seed ^ 0xabc);
        let a = random_povm(3, k, seed).unwrap();
        let b = random_povm(3, k, seed.wrapping_mul(3)).unwrap();
        let mixed: Vec<HermMatrix> = a
            .members()
            .iter()
            .zip(b.members())
            .map(|(x, y)| x.scale(lambda).add(&y.scale(1.0 - lambda)))
            .collect();
        let im = info(&e, &Povm::new(mixed).unwrap());
        prop_assert!(im <= lambda * info(&e, &a) + (1.0 - lambda) * info(&e, &b) + 1e-10);
    }

    #[test]
    fn rounds_keep_a_povm(seed in any::<u64>(), k in 2usize..7, alpha in 0.01f64..3.0) {
        let e = random_ensemble(3, 3, seed);
        let mut m = random_povm(3, k, seed.rotate_left(7)).unwrap();
        for _ in 0..25 {
            m = iterate_round(&m, &e, &ai(), alpha).unwrap();
            prop_assert!(m.completeness_deviation() <= 1e-10);
            prop_assert!(m.min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn inverse_square_root_paths_agree(seed in any::<u64>(), n in 1usize..7, shift in 0.05f64..1.0) {
        let a = &random_positive_operators(n, 1, seed)[0];
        // spectrum inside (shift, 2]
        let top = a.eigenvalues().last().copied().unwrap().max(1e-12);
        let s = a.scale((2.0 - shift) / top).add(&HermMatrix::identity(n).scale(shift));
        let b = inv_sqrt_eigen(&s).unwrap();
        if let Ok(f) = inv_sqrt_fixpoint(&s, 1e-14, 100) {
            prop_assert!(max_abs_diff(f.matrix(), b.matrix()) <= 1e-11 * (1.0 / shift.sqrt()));
        }
        let c = inv_sqrt(&s).unwrap();
        let check = c.matrix() * s.matrix() * c.matrix();
        prop_assert!(max_abs_diff(&check, &CMatrix::identity(n, n)) <= 1e-10);
    }

    #[test]
    fn partial_trace_is_linear_and_trace_preserving(seed in any::<u64>(), w in -2.0f64..2.0) {
        let dims = [2usize, 3, 2];
        let x = random_matrix(12, seed);
        let y = random_matrix(12, seed ^ 1);
        for keep in [vec![0], vec![1], vec![0, 2], vec![2, 1]] {
            let combined = partial_trace(&(&x + y.scale(w)), &dims, &keep).unwrap();
            let separate = partial_trace(&x, &dims, &keep).unwrap() + partial_trace(&y, &dims, &keep).unwrap().scale(w);
            prop_assert!(max_abs_diff(&combined, &separate) <= 1e-12);
            prop_assert!((combined.trace() - (&x + y.scale(w)).trace()).norm() <= 1e-12);
        }
        let a = random_matrix(2, seed ^ 2);
        let b = random_matrix(3, seed ^ 3);
        let reduced = partial_trace(&tensor(&a, &b), &[2, 3], &[0]).unwrap();
        prop_assert!(max_abs_diff(&reduced, &(&a * b.trace())) <= 1e-12);
    }

    #[test]
    fn splitting_and_merging_keeps_information(seed in any::<u64>(), k in 2usize..5, t in 0.05f64..0.95) {
        let e = random_ensemble(3, 2, seed ^ 0xfeed);
        let m = random_povm(3, k, seed).unwrap();
        let mut members = m.members().to_vec();
        let first = members.remove(0);
        members.push(first.scale(t));
        members.push(first.scale(1.0 - t));
        let split = Povm::new(members).unwrap();
        prop_assert!((info(&e, &split) - info(&e, &m)).abs() <= 1e-12);
        let merged = merge_equivalent(&split, &joint_probabilities(&e, &split).unwrap(), 1e-8).unwrap();
        prop_assert_eq!(merged.len(), k);
        prop_assert!((info(&e, &merged) - info(&e, &m)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn accepted_rounds_never_lose_information(seed in any::<u64>(), k in 2usize..6) {
        let e = adhoc_ensemble();
        let cfg = IterationConfig { k_strategy: KStrategy::Fixed(k), seed, ..IterationConfig::default() };
        let r = optimize(&e, &ai(), &cfg, None).unwrap();
        let accepted: Vec<f64> = r.trace.iter().filter(|t| t.accepted).map(|t| t.info).collect();
        prop_assert!(accepted.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(r.converged);
        let rs = gradient_operators(&e, &r.povm, &ai()).unwrap();
        prop_assert!((lagrange_operator(&rs, &r.povm).trace() - r.info_value).abs() <= 1e-9);
        prop_assert!(stationarity_residual(&r.povm, &rs) <= 1e-8);
    }
}

#[test]
fn same_seed_gives_identical_runs() {
    let e = tomographic_sextet(0.3).unwrap();
    for strategy in [KStrategy::Fixed(6), KStrategy::Grow] {
        let cfg = IterationConfig {
            k_strategy: strategy,
            seed: 5,
            restarts: 3,
            ..IterationConfig::default()
        };
        let a = optimize(&e, &ai(), &cfg, None).unwrap();
        let b = optimize(&e, &ai(), &cfg, None).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.povm, b.povm);
        assert_eq!(a.info_value.to_bits(), b.info_value.to_bits());
        assert_eq!(a.seed, b.seed);
    }
}

#[test]
fn merging_the_optimum_changes_nothing() {
    let e = adhoc_ensemble();
    let cfg = IterationConfig {
        k_strategy: KStrategy::Fixed(3),
        seed: 7,
        ..IterationConfig::default()
    };
    let r = optimize(&e, &ai(), &cfg, None).unwrap();
    let merged =
        merge_equivalent(&r.povm, &joint_probabilities(&e, &r.povm).unwrap(), 1e-8).unwrap();
    assert_eq!(merged, r.povm);
}
