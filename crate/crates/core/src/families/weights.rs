//! The representation-theoretic step behind flatness: `SU(2)` acting on
//! `V = ℍ` by left multiplication has weight 1, and `Hom(Λ²V, V)` has no
//! invariant vectors since it only contains odd weights.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::null_space;
use crate::quat::{left_multiplication, Quaternion};

/// Induced action `X(e_a∧e_b) = Xe_a∧e_b + e_a∧Xe_b` on `Λ²ℝᵈ`, in the
/// basis `e_a∧e_b`, `a < b`.
pub fn lambda2_action(x: &DMatrix<f64>) -> DMatrix<f64> {
    let d = x.nrows();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| ((a + 1)..d).map(move |b| (a, b)))
        .collect();
    let index = |a: usize, b: usize| -> (usize, f64) {
        if a < b {
            (pairs.iter().position(|&p| p == (a, b)).expect("pair"), 1.0)
        } else {
            (pairs.iter().position(|&p| p == (b, a)).expect("pair"), -1.0)
        }
    };
    let mut out = DMatrix::zeros(pairs.len(), pairs.len());
    for (col, &(a, b)) in pairs.iter().enumerate() {
        for c in 0..d {
            // X e_a = Σ_c x[c, a] e_c
            for (other, coef, first) in [(b, x[(c, a)], true), (a, x[(c, b)], false)] {
                if coef == 0.0 || c == other {
                    continue;
                }
                let (row, sign) = if first {
                    index(c, other)
                } else {
                    index(other, c)
                };
                out[(row, col)] += sign * coef;
            }
        }
    }
    out
}

/// Orthonormal basis of `{φ ∈ Hom(A, B) : X_B φ = φ X_A}` for paired
/// generators, with the singular values of the stacked constraint.
/// Maps are vectorized column-major.
pub fn invariant_homomorphisms(
    source: &[DMatrix<f64>],
    target: &[DMatrix<f64>],
    tol: f64,
) -> (DMatrix<f64>, Vec<f64>) {
    let (a, b) = (source[0].nrows(), target[0].nrows());
    let blocks: Vec<DMatrix<f64>> = source
        .iter()
        .zip(target)
        .map(|(xa, xb)| {
            DMatrix::identity(a, a).kronecker(xb)
                - xa.transpose().kronecker(&DMatrix::identity(b, b))
        })
        .collect();
    let mut stacked = DMatrix::zeros(blocks.len() * a * b, a * b);
    for (i, blk) in blocks.iter().enumerate() {
        stacked
            .view_mut((i * a * b, 0), (a * b, a * b))
            .copy_from(blk);
    }
    let (basis, sv) = null_space(&stacked, tol);
    let mut sv: Vec<f64> = sv.iter().cloned().collect();
    sv.sort_by(f64::total_cmp);
    (basis, sv)
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightReport {
    pub hom_dim: usize,
    pub invariant_dim: usize,
    pub min_singular_value: f64,
    pub singular_values: Vec<f64>,
    /// Invariant dimensions of `Hom(V, V)` and `Hom(Λ²V, ℝ)`, which are
    /// nonzero and show that the test can find invariants.
    pub control_dims: [usize; 2],
}

/// Rank computation showing `Hom(Λ²V, V)^{SU(2)} = 0` for the weight-1
/// representation `V = ℍ`.
pub fn weight_argument_check(tol: f64) -> Result<WeightReport> {
    let gens: Vec<DMatrix<f64>> = [Quaternion::I, Quaternion::J, Quaternion::K]
        .iter()
        .map(|&q| left_multiplication(q, 1).into_matrix())
        .collect();
    let wedge: Vec<DMatrix<f64>> = gens.iter().map(lambda2_action).collect();
    let (basis, sv) = invariant_homomorphisms(&wedge, &gens, tol);
    let zero: Vec<DMatrix<f64>> = vec![DMatrix::zeros(1, 1); 3];
    let endo = invariant_homomorphisms(&gens, &gens, tol).0.ncols();
    let forms = invariant_homomorphisms(&wedge, &zero, tol).0.ncols();
    Ok(WeightReport {
        hom_dim: wedge[0].nrows() * gens[0].nrows(),
        invariant_dim: basis.ncols(),
        min_singular_value: sv.first().cloned().unwrap_or(f64::INFINITY),
        singular_values: sv,
        control_dims: [endo, forms],
    })
}
