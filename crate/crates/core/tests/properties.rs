use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use trianalytic::exterior::{
    is_su2_invariant, kahler_form, lambda_op, pp_part, su2_invariant_project, ConstantForm,
    FourierForm,
};
use trianalytic::quat::{complex_structure_operator, qmul, ImaginaryUnit, Quaternion};
use trianalytic::wirtinger::xi_ratio;

fn quaternion() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-2.0..2.0f64).prop_map(Quaternion::from_array)
}

fn unit() -> impl Strategy<Value = Quaternion> {
    quaternion()
        .prop_filter("away from zero", |q| q.norm() > 0.1)
        .prop_map(|q| q.normalized())
}

fn structure() -> impl Strategy<Value = ImaginaryUnit> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("away from zero", |v| {
            v.iter().map(|c| c * c).sum::<f64>() > 0.01
        })
        .prop_map(|[a, b, c]| ImaginaryUnit::normalized(a, b, c).unwrap())
}

/// Binomial(8, k) real coefficients.
fn form(degree: usize) -> impl Strategy<Value = ConstantForm> {
    let len = (0..degree).fold(1usize, |acc, i| acc * (8 - i) / (i + 1));
    prop::collection::vec(-1.0..1.0f64, len)
        .prop_map(move |c| ConstantForm::from_real_coefficients(8, degree, &c).unwrap())
}

fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
    (a - b).norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quaternion_norm_is_multiplicative(p in quaternion(), q in quaternion()) {
        prop_assert!((qmul(p, q).norm() - p.norm() * q.norm()).abs() <= 1e-12);
    }

    #[test]
    fn quaternion_product_is_associative(p in quaternion(), q in quaternion(), r in quaternion()) {
        prop_assert!(close(qmul(qmul(p, q), r), qmul(p, qmul(q, r)), 1e-12));
    }

    #[test]
    fn conjugation_reverses_products(p in quaternion(), q in quaternion()) {
        prop_assert!(close(qmul(p, q).conj(), qmul(q.conj(), p.conj()), 1e-12));
    }

    #[test]
    fn structures_square_to_minus_one(l in structure()) {
        let m = complex_structure_operator(l, 2).into_matrix();
        prop_assert!((&m * &m + DMatrix::identity(8, 8)).norm() <= 1e-12);
        prop_assert!((&m + m.transpose()).norm() <= 1e-12);
    }

    /// A 2-form is SU(2)-invariant iff it is of type (1,1) for `I` and `J`.
    #[test]
    fn invariance_matches_hodge_type(base in form(2), noise in form(2), t in prop_oneof![Just(0.0), 0.05..1.0f64]) {
        let inv = su2_invariant_project(&base).unwrap();
        let off = &noise - &su2_invariant_project(&noise).unwrap();
        let alpha = &inv + &(&off * t);
        let typed = [ImaginaryUnit::I, ImaginaryUnit::J]
            .iter()
            .all(|&l| pp_part(&alpha, l).unwrap().distance(&alpha) <= 1e-9);
        prop_assert_eq!(is_su2_invariant(&alpha, 1e-9).unwrap(), typed);
        prop_assert_eq!(typed, t == 0.0 || off.norm() < 1e-9);
    }

    #[test]
    fn invariant_forms_are_primitive(base in form(2), l in structure()) {
        let inv = su2_invariant_project(&base).unwrap();
        prop_assert!(lambda_op(&inv, l).unwrap().norm() <= 1e-10);
        prop_assert!(pp_part(&inv, l).unwrap().distance(&inv) <= 1e-10);
    }

    /// `⟨ω ∧ α, β⟩ = ⟨α, Λβ⟩`.
    #[test]
    fn lambda_is_adjoint_to_wedge(alpha in form(2), beta in form(4), l in structure()) {
        let lhs = kahler_form(l, 2).wedge(&alpha).inner(&beta).re;
        let rhs = alpha.inner(&lambda_op(&beta, l).unwrap()).re;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    /// The pulled-back Laplacian matches a finite-difference Laplacian of
    /// the pulled-back field.
    #[test]
    fn laplacian_commutes_with_su2(
        base in form(2),
        freq in prop::array::uniform8(-1i64..=1),
        u in unit(),
        x in prop::array::uniform8(0.0..1.0f64),
    ) {
        let f = FourierForm::new(base, &freq).unwrap();
        let pulled = f.su2_pullback(u).unwrap();
        let commuted = f.laplacian().su2_pullback(u).unwrap();
        prop_assert!(pulled.laplacian().distance(&commuted) <= 1e-9 * (1.0 + commuted.base().norm()));

        let x = DVector::from_row_slice(&x);
        let h = 1e-4;
        let mut fd = ConstantForm::zero(8, 2);
        for a in 0..8 {
            let mut e = DVector::zeros(8);
            e[a] = h;
            let second = &(&pulled.at(&(&x + &e)) + &pulled.at(&(&x - &e))) - &(&pulled.at(&x) * 2.0);
            fd = &fd - &(&second * (1.0 / (h * h)));
        }
        let exact = commuted.at(&x);
        prop_assert!(fd.distance(&exact) <= 1e-4 * (1.0 + exact.norm()));
    }

    #[test]
    fn wirtinger_bound_holds(cols in prop::collection::vec(-1.0..1.0f64, 32), m in 1usize..=2, l in structure()) {
        let w = DMatrix::from_column_slice(8, 2 * m, &cols[..16 * m]);
        prop_assume!(w.rank(1e-6) == 2 * m);
        prop_assert!(xi_ratio(&w, l).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn complex_planes_attain_equality(v in prop::collection::vec(-1.0..1.0f64, 16), l in structure()) {
        let op = complex_structure_operator(l, 2).into_matrix();
        let a = DVector::from_column_slice(&v[..8]);
        let b = DVector::from_column_slice(&v[8..]);
        let w = DMatrix::from_columns(&[a.clone(), &op * &a, b.clone(), &op * &b]);
        prop_assume!(w.rank(1e-6) == 4);
        prop_assert!((xi_ratio(&w, l).unwrap() - 1.0).abs() <= 1e-9);
    }
}
