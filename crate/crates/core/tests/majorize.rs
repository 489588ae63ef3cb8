use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_core::majorize::*;

fn m(rows: &[&[f64]]) -> SymMatrix {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Partial sums of the decreasing rearrangements, written out directly.
fn weakly_below(x: &[f64], y: &[f64], tol: f64) -> bool {
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    ys.sort_by(|a, b| b.total_cmp(a));
    let (mut sx, mut sy) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        sx += a;
        sy += b;
        if sx > sy + tol {
            return false;
        }
    }
    true
}

#[test]
fn hadamard_products() {
    let a = m(&[&[1.0, 2.0], &[2.0, 5.0]]);
    assert_eq!(hadamard(&a, &m(&[&[3.0, 1.0], &[1.0, 2.0]])).unwrap(), m(&[&[3.0, 2.0], &[2.0, 10.0]]));
    assert_eq!(hadamard(&a, &SymMatrix::identity(2).unwrap()).unwrap(), m(&[&[1.0, 0.0], &[0.0, 5.0]]));
    assert_eq!(hadamard(&a, &SymMatrix::from_fn(2, |_, _| 1.0).unwrap()).unwrap(), a);
}

#[test]
fn weak_majorization_examples() {
    assert!(weak_majorization(&[1.0, 1.0], &[0.0, 3.0]));
    assert!(!weak_majorization(&[2.0, 2.0], &[3.0, 0.0]));
    assert!(weak_majorization(&[0.3, 0.1, 0.2], &[0.3, 0.1, 0.2]));
}

#[test]
fn schur_examples() {
    let d = m(&[&[3.0, 0.0], &[0.0, -1.0]]);
    let r = schur_diag_majorization(&d).unwrap();
    assert!(r.holds && r.trace_gap < 1e-14);
    let swap = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let r = schur_diag_majorization(&swap).unwrap();
    assert!(r.holds);
    assert!((r.eigenvalues.iter().sum::<f64>()).abs() < 1e-14);
}

#[test]
fn schur_on_random_symmetric_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=8);
        let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let a = SymMatrix::from_fn(n, |i, j| vals[i.max(j) * n + i.min(j)]).unwrap();
        let rep = schur_diag_majorization(&a).unwrap();
        assert!(rep.holds);
        let dense = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        let eig: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        assert!(weakly_below(&a.diagonal(), &eig, 1e-10));
    }
}

#[test]
fn lemma_examples() {
    let id = SymMatrix::identity(3).unwrap();
    let diag = SymMatrix::from_fn(3, |i, j| if i == j { 1.0 + i as f64 } else { 0.0 }).unwrap();
    for f in IncreasingConvexFn::catalog() {
        let r = lemma22_check(&diag, &id, &f).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-12 * r.rhs.abs().max(1.0));
    }
    let a = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let r = lemma22_check(&a, &SymMatrix::identity(2).unwrap(), &IncreasingConvexFn::identity()).unwrap();
    assert!((r.lhs - 4.0).abs() < 1e-12 && (r.rhs - 4.0).abs() < 1e-12);
    assert!(lemma22_check(&m(&[&[1.0, 2.0], &[2.0, 1.0]]), &a, &IncreasingConvexFn::identity()).is_err());
}

#[test]
fn function_catalog_validation() {
    for f in IncreasingConvexFn::catalog() {
        assert_eq!(IncreasingConvexFn::parse(&f.name()).unwrap(), f);
    }
    let concave = ConvexKind::Tabulated {
        knots: vec![0.0, 1.0, 2.0],
        values: vec![0.0, 1.0, 1.5],
    };
    assert!(IncreasingConvexFn::new(concave, 2.0).is_err());
    let decreasing = ConvexKind::Tabulated {
        knots: vec![0.0, 1.0],
        values: vec![1.0, 0.0],
    };
    assert!(IncreasingConvexFn::new(decreasing, 1.0).is_err());
    let ok = ConvexKind::Tabulated {
        knots: vec![0.0, 1.0, 2.0],
        values: vec![0.0, 0.5, 2.0],
    };
    let f = IncreasingConvexFn::new(ok, 4.0).unwrap();
    assert!((f.eval(3.0) - 3.5).abs() < 1e-14);
    assert!(IncreasingConvexFn::new(ConvexKind::Affine { a: -1.0, b: 0.0 }, 1.0).is_err());
    assert!(IncreasingConvexFn::parse("log").is_err());
}

fn spd(n: usize, entries: &[f64], shift: f64) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| {
        let dot: f64 = (0..n).map(|k| entries[i * n + k] * entries[j * n + k]).sum();
        dot + if i == j { shift } else { 0.0 }
    })
    .unwrap()
}

proptest! {
    #[test]
    fn weak_majorization_is_reflexive(x in prop::collection::vec(-10.0..10.0f64, 1..9)) {
        prop_assert!(weak_majorization(&x, &x));
    }

    #[test]
    fn weak_majorization_is_transitive(
        x in prop::collection::vec(-10.0..10.0f64, 4),
        d1 in prop::collection::vec(0.0..3.0f64, 4),
        d2 in prop::collection::vec(0.0..3.0f64, 4),
    ) {
        // Adding nonnegative amounts only raises the partial sums.
        let y: Vec<f64> = x.iter().zip(&d1).map(|(a, b)| a + b).collect();
        let z: Vec<f64> = y.iter().zip(&d2).map(|(a, b)| a + b).collect();
        prop_assert!(weak_majorization(&x, &y));
        prop_assert!(weak_majorization(&y, &z));
        prop_assert!(weak_majorization(&x, &z));
        prop_assert_eq!(weak_majorization(&x, &z), weakly_below(&x, &z, 1e-12));
    }

    #[test]
    fn lemma_holds_on_random_pairs(
        n in 2usize..=8,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = spd(n, &g, 0.05);
        let b = spd(n, &h, 0.05);
        for f in IncreasingConvexFn::catalog() {
            let r = lemma22_check(&a, &b, &f).unwrap();
            prop_assert!(r.holds, "{} lhs {} rhs {}", f.name(), r.lhs, r.rhs);
        }
    }
}
