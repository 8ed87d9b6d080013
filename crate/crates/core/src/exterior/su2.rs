//! The `SU(2)` of unit quaternions acting on forms by left multiplication.
//!
//! Its Lie algebra is spanned by the induced complex structures `I, J, K`
//! themselves, so a form is invariant exactly when the three derivations
//! `D_I, D_J, D_K` annihilate it.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{masks, ConstantForm};
use crate::error::{Error, Result};
use crate::linalg::null_space;
use crate::quat::{left_multiplication, Quaternion};

const KERNEL_TOL: f64 = 1e-8;

fn quaternionic_n(dim: usize) -> Result<usize> {
    if !dim.is_multiple_of(4) {
        return Err(Error::Invalid(format!(
            "dimension {dim} is not a multiple of 4"
        )));
    }
    Ok(dim / 4)
}

/// Matrices of `I, J, K` acting on `ℍⁿ`.
pub fn su2_generators(n: usize) -> [DMatrix<f64>; 3] {
    [Quaternion::I, Quaternion::J, Quaternion::K].map(|q| left_multiplication(q, n).into_matrix())
}

/// `α ∘ (u·)`: the pullback by left multiplication with the unit `u`.
pub fn su2_pullback(u: Quaternion, alpha: &ConstantForm) -> Result<ConstantForm> {
    if !u.is_unit() {
        return Err(Error::NonUnitQuaternion(u.norm()));
    }
    let n = quaternionic_n(alpha.dim())?;
    Ok(alpha.pullback(left_multiplication(u, n).matrix()))
}

/// Orthonormal basis (columns, in mask order) of the invariant real forms of
/// the given degree on `ℝ^dim`.
pub fn su2_invariant_basis(dim: usize, degree: usize) -> Result<Arc<DMatrix<f64>>> {
    type Cache = RwLock<HashMap<(usize, usize), Arc<DMatrix<f64>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(b) = cache
        .read()
        .expect("basis cache poisoned")
        .get(&(dim, degree))
    {
        return Ok(b.clone());
    }
    let n = quaternionic_n(dim)?;
    let size = masks(dim, degree).len();
    let gens = su2_generators(n);
    let mut stacked = DMatrix::zeros(3 * size, size);
    for col in 0..size {
        let mut e = vec![0.0; size];
        e[col] = 1.0;
        let basis_form = ConstantForm::from_real_coefficients(dim, degree, &e)?;
        for (g, x) in gens.iter().enumerate() {
            let d = basis_form.derivation(x);
            for (row, c) in d.coefficients().iter().enumerate() {
                stacked[(g * size + row, col)] = c.re;
            }
        }
    }
    let (basis, _) = null_space(&stacked, KERNEL_TOL);
    let basis = Arc::new(basis);
    cache
        .write()
        .expect("basis cache poisoned")
        .insert((dim, degree), basis.clone());
    Ok(basis)
}

/// Orthogonal projection onto the invariant forms.
pub fn su2_invariant_project(alpha: &ConstantForm) -> Result<ConstantForm> {
    let z = su2_invariant_basis(alpha.dim(), alpha.degree())?;
    let re = DVector::from_iterator(alpha.len(), alpha.coefficients().iter().map(|c| c.re));
    let im = DVector::from_iterator(alpha.len(), alpha.coefficients().iter().map(|c| c.im));
    let pr = z.as_ref() * (z.transpose() * re);
    let pi = z.as_ref() * (z.transpose() * im);
    let coeffs = pr
        .iter()
        .zip(pi.iter())
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    ConstantForm::from_coefficients(alpha.dim(), alpha.degree(), coeffs)
}

/// `‖α − Pα‖ ≤ tol·‖α‖`.
pub fn is_su2_invariant(alpha: &ConstantForm, tol: f64) -> Result<bool> {
    let p = su2_invariant_project(alpha)?;
    Ok(alpha.distance(&p) <= tol * alpha.norm())
}
