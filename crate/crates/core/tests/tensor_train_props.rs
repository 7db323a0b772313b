use num_complex::Complex64;
use proptest::prelude::*;

use tensor_fourier::tensor_train::{Core, TensorTrain};

fn dims() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, u64)> {
    (1usize..=4)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(1usize..=6, d),
                prop::collection::vec(1usize..=5, d - 1),
                any::<u64>(),
            )
        })
}

fn brute_inner(a: &TensorTrain, b: &TensorTrain) -> Complex64 {
    let (da, db) = (a.to_dense().unwrap(), b.to_dense().unwrap());
    da.data().iter().zip(db.data()).map(|(x, y)| x.conj() * y).sum()
}

// Evaluates the train by explicit products of core slices, without the library's contraction.
fn brute_eval(tt: &TensorTrain, idx: &[usize]) -> Complex64 {
    let mut row = vec![Complex64::new(1.0, 0.0)];
    for (core, &i) in tt.cores().iter().zip(idx) {
        let mut next = vec![Complex64::new(0.0, 0.0); core.right_bond()];
        for (a, &ra) in row.iter().enumerate() {
            for (b, slot) in next.iter_mut().enumerate() {
                *slot += ra * core.get(a, i, b);
            }
        }
        row = next;
    }
    row[0]
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn inner_matches_dense_sum((shape, bonds, seed) in dims()) {
        let a = TensorTrain::random(&shape, &bonds, seed).unwrap();
        let b = TensorTrain::random(&shape, &bonds, seed ^ 0xabcdef).unwrap();
        prop_assert!(close(a.inner(&b).unwrap(), brute_inner(&a, &b), 1e-10));
    }

    #[test]
    fn inner_is_conjugate_symmetric((shape, bonds, seed) in dims()) {
        let a = TensorTrain::random(&shape, &bonds, seed).unwrap();
        let b = TensorTrain::random(&shape, &bonds, seed.wrapping_add(1)).unwrap();
        prop_assert!(close(a.inner(&b).unwrap(), b.inner(&a).unwrap().conj(), 1e-10));
    }

    #[test]
    fn norm_is_real_and_matches_dense((shape, bonds, seed) in dims()) {
        let a = TensorTrain::random(&shape, &bonds, seed).unwrap();
        let n = a.norm_sqr();
        let dense: f64 = a.to_dense().unwrap().data().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!(n >= 0.0);
        prop_assert!((n - dense).abs() <= 1e-10 * dense.max(1.0));
        prop_assert!(a.inner(&a).unwrap().im.abs() <= 1e-10 * dense.max(1.0));
    }

    #[test]
    fn evaluate_matches_core_products((shape, bonds, seed) in dims(), pick in any::<u64>()) {
        let a = TensorTrain::random(&shape, &bonds, seed).unwrap();
        let idx: Vec<usize> = shape.iter().enumerate()
            .map(|(k, &n)| ((pick >> (8 * k)) as usize) % n)
            .collect();
        let dense = a.to_dense().unwrap();
        let want = brute_eval(&a, &idx);
        prop_assert!(close(a.evaluate(&idx).unwrap(), want, 1e-12));
        prop_assert!(close(dense.get(&idx).unwrap(), want, 1e-12));
    }

    #[test]
    fn inner_is_linear_in_ket((shape, bonds, seed) in dims(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let a = TensorTrain::random(&shape, &bonds, seed).unwrap();
        let mut b = TensorTrain::random(&shape, &bonds, seed.wrapping_mul(3)).unwrap();
        let before = a.inner(&b).unwrap();
        let c = Complex64::new(re, im);
        b.core_mut(0).scale(c);
        prop_assert!(close(a.inner(&b).unwrap(), c * before, 1e-10));
    }

    #[test]
    fn json_roundtrip_is_exact((shape, bonds, seed) in dims()) {
        let a = TensorTrain::random(&shape, &bonds, seed).unwrap();
        let back = TensorTrain::from_json(&a.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn rank_one_inner_factorises() {
    let u = vec![
        vec![Complex64::new(1.0, 2.0), Complex64::new(0.5, -1.0)],
        vec![Complex64::new(-1.0, 0.0), Complex64::new(2.0, 1.0), Complex64::new(0.0, 3.0)],
    ];
    let w = vec![
        vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)],
        vec![Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.5), Complex64::new(1.0, 0.0)],
    ];
    let a = TensorTrain::rank_one(&u).unwrap();
    let b = TensorTrain::rank_one(&w).unwrap();
    let want: Complex64 = u
        .iter()
        .zip(&w)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum::<Complex64>())
        .product();
    assert!(close(a.inner(&b).unwrap(), want, 1e-14));
}

#[test]
fn save_and_load_through_file() {
    let a = TensorTrain::random(&[3, 4, 2], &[2, 2], 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tt.json");
    a.save(&path).unwrap();
    assert_eq!(TensorTrain::load(&path).unwrap(), a);
}

#[test]
fn mismatched_cores_are_rejected() {
    let c0 = Core::new(1, 2, 3, vec![Complex64::new(1.0, 0.0); 6]).unwrap();
    let c1 = Core::new(2, 2, 1, vec![Complex64::new(1.0, 0.0); 4]).unwrap();
    assert!(TensorTrain::new(vec![c0, c1]).is_err());
}

#[test]
fn inner_rejects_shape_mismatch() {
    let a = TensorTrain::random(&[3, 4], &[2], 1).unwrap();
    let b = TensorTrain::random(&[3, 5], &[2], 1).unwrap();
    assert!(a.inner(&b).is_err());
}
