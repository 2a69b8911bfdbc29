mod common;

use common::*;
use proptest::prelude::*;
use qnop::linalg::{
    angle_to_subspace, kernel_basis, project_onto_span, singular_values, solve_general, solve_symmetric,
    weighted_inner, DEFAULT_KERNEL_TOL,
};
use qnop::{DenseMatrix, InnerProductWeight};

#[test]
fn weighted_inner_examples() {
    let w = InnerProductWeight::spd(DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]])).unwrap();
    assert_eq!(weighted_inner(&[1.0, 1.0], &[1.0, -1.0], &w).unwrap(), 0.0);
    let d = InnerProductWeight::spd(DenseMatrix::from_diagonal(&[3.0, 5.0])).unwrap();
    assert_eq!(weighted_inner(&[1.0, 0.0], &[1.0, 0.0], &d).unwrap(), 3.0);
    assert_eq!(weighted_inner(&[1.0, 0.0], &[0.0, 1.0], &InnerProductWeight::Identity).unwrap(), 0.0);
    assert!(weighted_inner(&[1.0], &[1.0, 0.0], &InnerProductWeight::Identity).is_err());
}

#[test]
fn indefinite_weight_is_rejected() {
    assert!(InnerProductWeight::spd(DenseMatrix::from_diagonal(&[1.0, -1.0])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symmetric_solve_residual(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let b = symmetric(n, &mut r).add(&DenseMatrix::scaled_identity(n, 0.05));
        let rhs = vector(n, &mut r);
        if let Ok(x) = solve_symmetric(&b, &rhs) {
            let res = qnop::linalg::norm2(&qnop::linalg::sub(&b.matvec(&x), &rhs));
            prop_assert!(res <= 1e-10 * (b.frobenius_norm() * qnop::linalg::norm2(&x) + qnop::linalg::norm2(&rhs)));
        }
    }

    #[test]
    fn general_solve_residual(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let b = matrix(n, &mut r);
        let rhs = vector(n, &mut r);
        if let Ok(x) = solve_general(&b, &rhs) {
            let res = qnop::linalg::norm2(&qnop::linalg::sub(&b.matvec(&x), &rhs));
            prop_assert!(res <= 1e-10 * (b.frobenius_norm() * qnop::linalg::norm2(&x) + qnop::linalg::norm2(&rhs)));
        }
    }

    #[test]
    fn kernel_basis_is_orthonormal_and_annihilated(seed in any::<u64>(), n in 2usize..9, rank in 0usize..8) {
        let mut r = rng(seed);
        let rank = rank.min(n);
        let u = matrix(n, &mut r);
        let mut e = DenseMatrix::zeros(n, n);
        for k in 0..rank {
            let v = vector(n, &mut r);
            e = e.add(&DenseMatrix::outer(&u.column(k), &v));
        }
        let k = kernel_basis(&e, DEFAULT_KERNEL_TOL);
        let smax = singular_values(&e).iter().fold(0.0_f64, |m, &s| m.max(s));
        if smax > 0.0 {
            prop_assert_eq!(k.ncols(), n - rank);
        }
        let gram = k.transpose().matmul(&k);
        prop_assert!(gram.sub(&DenseMatrix::identity(k.ncols())).frobenius_norm() < 1e-10);
        prop_assert!(e.matmul(&k).frobenius_norm() <= 1e-8 * e.frobenius_norm().max(1.0));
    }

    #[test]
    fn weighted_projection_residual_is_orthogonal(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let w = InnerProductWeight::Matrix(spd(n, &mut r));
        let cols: Vec<Vec<f64>> = (0..n - 1).map(|_| vector(n, &mut r)).collect();
        let basis = DenseMatrix::from_columns(n, &cols);
        let s = vector(n, &mut r);
        let p = project_onto_span(&s, &basis, &w).unwrap();
        let res = qnop::linalg::sub(&s, &p);
        for c in &cols {
            prop_assert!(w.inner(&res, c).abs() <= 1e-9 * w.norm(&res).max(1e-12) * w.norm(c) + 1e-12);
        }
        let angle = angle_to_subspace(&p, &basis, &w).unwrap();
        prop_assert!(angle.abs() < 1e-4);
    }
}
