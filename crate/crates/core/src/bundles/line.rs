//! Line bundles with constant curvature on flat tori.

use crate::ambient::HKTorus;
use crate::error::{Error, Result};
use crate::exterior::{is_su2_invariant, lambda_op, ConstantForm};
use crate::quat::ImaginaryUnit;
use crate::wirtinger::degree;

/// A line bundle represented by its constant curvature form `F`.
#[derive(Clone, Debug)]
pub struct ConstantCurvatureLineBundle {
    curvature: ConstantForm,
}

impl ConstantCurvatureLineBundle {
    pub fn new(curvature: ConstantForm) -> Result<Self> {
        if curvature.degree() != 2 {
            return Err(Error::Invalid(format!(
                "curvature must be a 2-form, got degree {}",
                curvature.degree()
            )));
        }
        if !curvature.is_real(1e-14) {
            return Err(Error::Invalid(
                "curvature representative must be real".into(),
            ));
        }
        Ok(ConstantCurvatureLineBundle { curvature })
    }

    pub fn curvature(&self) -> &ConstantForm {
        &self.curvature
    }
}

/// Whether `F` is `SU(2)`-invariant, i.e. of type (1,1) for every `L`.
pub fn is_hyperholomorphic(f: &ConstantForm, tol: f64) -> Result<bool> {
    is_su2_invariant(f, tol)
}

/// `|Λ_L F|`.
pub fn yang_mills_defect(f: &ConstantForm, l: ImaginaryUnit) -> Result<f64> {
    Ok(lambda_op(f, l)?.norm())
}

/// `(deg_L F, deg_L F / rank)`.
pub fn degree_slope(
    f: &ConstantForm,
    l: ImaginaryUnit,
    rank: usize,
    torus: &HKTorus,
) -> Result<(f64, f64)> {
    if rank == 0 {
        return Err(Error::Invalid("rank must be at least 1".into()));
    }
    let d = degree(f, l, torus)?;
    Ok((d, d / rank as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::kahler_form;
    use crate::sphere_sampling::sample_structures;

    fn anti_self_dual() -> ConstantForm {
        &ConstantForm::basis(4, &[0, 1]).unwrap() - &ConstantForm::basis(4, &[2, 3]).unwrap()
    }

    #[test]
    fn hyperholomorphic_examples() {
        assert!(!is_hyperholomorphic(&kahler_form(ImaginaryUnit::I, 1), 1e-8).unwrap());
        assert!(is_hyperholomorphic(&anti_self_dual(), 1e-10).unwrap());
        assert!(is_hyperholomorphic(&ConstantForm::zero(4, 2), 1e-10).unwrap());
    }

    #[test]
    fn anti_self_dual_form_is_one_one_for_every_structure() {
        let f = anti_self_dual();
        for l in sample_structures(20) {
            let pp = crate::exterior::pp_part(&f, l).unwrap();
            assert!(pp.distance(&f) < 1e-12);
        }
    }

    #[test]
    fn yang_mills_examples() {
        for n in 1..=2 {
            let d = yang_mills_defect(&kahler_form(ImaginaryUnit::I, n), ImaginaryUnit::I).unwrap();
            assert!((d - 2.0 * n as f64).abs() < 1e-12);
        }
        assert!(
            yang_mills_defect(&kahler_form(ImaginaryUnit::J, 1), ImaginaryUnit::I).unwrap() < 1e-14
        );
        for l in sample_structures(20) {
            assert!(yang_mills_defect(&anti_self_dual(), l).unwrap() < 1e-12);
        }
    }

    #[test]
    fn degree_and_slope() {
        let t = HKTorus::unit(1);
        let (d, s) =
            degree_slope(&kahler_form(ImaginaryUnit::I, 1), ImaginaryUnit::I, 2, &t).unwrap();
        assert!((d - 2.0).abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
        for l in sample_structures(20) {
            assert!(degree_slope(&anti_self_dual(), l, 1, &t).unwrap().0.abs() < 1e-12);
        }
        assert_eq!(
            degree_slope(&ConstantForm::zero(4, 2), ImaginaryUnit::J, 1, &t).unwrap(),
            (0.0, 0.0)
        );
        assert!(degree_slope(&ConstantForm::zero(4, 2), ImaginaryUnit::J, 0, &t).is_err());
    }

    #[test]
    fn bundle_rejects_bad_curvature() {
        assert!(
            ConstantCurvatureLineBundle::new(ConstantForm::one_form(&[1.0, 0.0, 0.0, 0.0]))
                .is_err()
        );
        assert!(ConstantCurvatureLineBundle::new(anti_self_dual()).is_ok());
    }
}
