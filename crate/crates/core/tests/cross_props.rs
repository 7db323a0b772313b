use num_complex::Complex64;
use proptest::prelude::*;

use tensor_fourier::cross::{matrix_cross, tt_cross, CrossConfig};
use tensor_fourier::error::Error;
use tensor_fourier::tensor_train::{rand_sample_diff, TensorTrain};
use tensor_fourier::OracleError;

fn generic_ranks(shape: &[usize], d_max: usize) -> Vec<usize> {
    (1..shape.len())
        .map(|b| {
            let pre: usize = shape[..b].iter().product();
            let suf: usize = shape[b..].iter().product();
            d_max.min(pre).min(suf)
        })
        .collect()
}

fn max_dense_error(tt: &TensorTrain, truth: &TensorTrain) -> f64 {
    let (a, b) = (tt.to_dense().unwrap(), truth.to_dense().unwrap());
    let scale = b.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rank_one_functions_are_recovered(
        vecs in prop::collection::vec(prop::collection::vec((0.2f64..2.0, -1.0f64..1.0), 2..7), 1..6),
        seed in any::<u64>(),
    ) {
        let f = |idx: &[usize]| -> Complex64 {
            idx.iter().enumerate().map(|(k, &i)| Complex64::new(vecs[k][i].0, vecs[k][i].1)).product()
        };
        let shape: Vec<usize> = vecs.iter().map(Vec::len).collect();
        let out = tt_cross(&f, &shape, &CrossConfig::with_bond_dim(1).seed(seed)).unwrap();
        prop_assert!(out.report.converged);
        prop_assert!(out.report.final_diff <= 1e-10);
        let dense = out.tt.to_dense().unwrap();
        let mut idx = vec![0; shape.len()];
        for lin in 0..dense.data().len() {
            let mut rest = lin;
            for k in (0..shape.len()).rev() {
                idx[k] = rest % shape[k];
                rest /= shape[k];
            }
            prop_assert!((dense.data()[lin] - f(&idx)).norm() <= 1e-10 * f(&idx).norm().max(1.0));
        }
    }

    #[test]
    fn random_trains_are_rebuilt_at_true_rank(
        shape in prop::collection::vec(2usize..6, 2..5),
        d_max in 1usize..4,
        seed in 0u64..1000,
    ) {
        let bonds = generic_ranks(&shape, d_max);
        let truth = TensorTrain::random(&shape, &bonds, seed).unwrap();
        let oracle = |idx: &[usize]| truth.evaluate(idx).unwrap();
        let out = tt_cross(&oracle, &shape, &CrossConfig::with_bond_dim(d_max).seed(seed)).unwrap();
        prop_assert_eq!(out.tt.bonds(), bonds);
        prop_assert!(max_dense_error(&out.tt, &truth) <= 1e-8);
    }

    #[test]
    fn left_sets_are_nested(shape in prop::collection::vec(2usize..6, 2..5), seed in any::<u64>()) {
        let f = |idx: &[usize]| Complex64::new(1.0 / (1.0 + idx.iter().sum::<usize>() as f64), 0.0);
        let out = tt_cross(&f, &shape, &CrossConfig::with_bond_dim(2).seed(seed)).unwrap();
        let sets = &out.index_sets;
        for b in 1..shape.len() {
            for p in &sets.left[b + 1] {
                prop_assert!(sets.left[b].contains(&p[..b].to_vec()));
            }
            for s in &sets.right[b] {
                prop_assert!(sets.right[b + 1].contains(&s[1..].to_vec()));
            }
        }
        for p in out.index_sets.interpolation_points(&shape) {
            prop_assert_eq!(p.len(), shape.len());
        }
    }

    #[test]
    fn call_count_follows_fiber_sizes(shape in prop::collection::vec(2usize..8, 1..6), d in 1usize..5) {
        let f = |idx: &[usize]| Complex64::new((idx.iter().map(|&i| i as f64 * 0.37).sum::<f64>()).cos(), 0.1);
        let cfg = CrossConfig::with_bond_dim(d).max_sweeps(1);
        let out = tt_cross(&f, &shape, &cfg).unwrap();
        let b = out.tt.bonds();
        let full: Vec<usize> = std::iter::once(1).chain(b).chain(std::iter::once(1)).collect();
        let want: u64 = shape.iter().enumerate().map(|(k, &n)| (full[k] * n * full[k + 1]) as u64).sum();
        prop_assert_eq!(out.report.oracle_calls, want);
        prop_assert_eq!(out.report.check_calls, cfg.n_conv_samples as u64);
    }
}

#[test]
fn same_seed_gives_identical_train() {
    let f = |idx: &[usize]| Complex64::new(((idx[0] * 3 + idx[1] * 5 + idx[2]) as f64).sin(), 0.2);
    let cfg = CrossConfig::with_bond_dim(3).seed(17);
    let a = tt_cross(&f, &[7, 6, 5], &cfg).unwrap();
    let b = tt_cross(&f, &[7, 6, 5], &cfg).unwrap();
    assert_eq!(a.tt, b.tt);
    assert_eq!(a.report, b.report);
}

#[test]
fn oracle_errors_carry_the_index() {
    let f = tensor_fourier::tensor_train::Fallible(|idx: &[usize]| {
        if idx == [1, 1] {
            Err(OracleError("boom".into()))
        } else {
            Ok(Complex64::new(1.0, 0.0))
        }
    });
    match tt_cross(&f, &[3, 3], &CrossConfig::with_bond_dim(3)) {
        Err(Error::Oracle { index, message }) => {
            assert_eq!(index, vec![1, 1]);
            assert_eq!(message, "boom");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn non_convergence_is_reported_not_raised() {
    let f = |idx: &[usize]| {
        let x: f64 = idx.iter().map(|&i| i as f64).sum();
        Complex64::new((x * x * 0.7).sin() + 2.0, 0.0)
    };
    let mut cfg = CrossConfig::with_bond_dim(1).max_sweeps(2);
    cfg.eps_tol = 1e-14;
    let out = tt_cross(&f, &[9, 9, 9], &cfg).unwrap();
    assert!(!out.report.converged);
    assert_eq!(out.report.sweeps_used, 2);
    assert_eq!(out.report.diff_history.len(), 2);
}

#[test]
fn matrix_cross_recovers_low_rank() {
    let u = |i: usize, k: usize| Complex64::new(((i + 1) * (k + 2)) as f64 % 7.0 - 3.0, (i * k) as f64 % 3.0);
    let f = |i: usize, j: usize| (0..3).map(|k| u(i, k) * u(j + 5, k).conj()).sum::<Complex64>();
    let mc = matrix_cross(f, 20, 15, 3, 4).unwrap();
    let approx = mc.reconstruct(f, 20, 15).unwrap();
    let mut worst = 0.0f64;
    for i in 0..20 {
        for j in 0..15 {
            worst = worst.max((approx[(i, j)] - f(i, j)).norm());
        }
    }
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn smooth_function_is_well_approximated() {
    let f = |idx: &[usize]| {
        let x: f64 = idx.iter().enumerate().map(|(k, &i)| i as f64 / (10.0 + k as f64)).sum();
        Complex64::new((-x).exp(), (0.5 * x).sin())
    };
    let out = tt_cross(&f, &[12; 5], &CrossConfig::with_bond_dim(6).seed(2)).unwrap();
    assert!(out.report.converged);
    assert!(rand_sample_diff(&out.tt, &f, 20_000, 99).unwrap() <= 1e-6);
}
