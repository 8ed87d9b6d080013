//! Affine subtori `offset + span(W)` of a flat torus.

use nalgebra::{DMatrix, DVector};

use super::lattice::saturated_sublattice;
use super::HKTorus;
use crate::error::{Error, Result};
use crate::linalg::{invariance_residual, orthogonal_complement, orthonormal_columns};
use crate::quat::{left_multiplication, Quaternion};

#[derive(Clone, Debug)]
pub struct AffineSubtorus {
    torus: HKTorus,
    spanning: DMatrix<f64>,
    offset: DVector<f64>,
    frame: DMatrix<f64>,
    sublattice: DMatrix<f64>,
}

impl AffineSubtorus {
    /// Rejects rank-deficient `w` and subspaces whose closure is not a
    /// subtorus.
    pub fn new(torus: &HKTorus, w: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let dim = torus.dim();
        if w.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: w.nrows(),
            });
        }
        if offset.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: offset.len(),
            });
        }
        let frame = orthonormal_columns(&w)?;
        let coords = torus
            .lattice()
            .clone()
            .try_inverse()
            .expect("lattice basis is invertible")
            * &w;
        let ints = saturated_sublattice(&coords)?;
        let mut sublattice = torus.lattice() * ints.map(|x| x as f64);
        // orient the sublattice basis like the spanning vectors
        if sublattice.ncols() > 0 && (frame.transpose() * &sublattice).determinant() < 0.0 {
            let c = -sublattice.column(0).into_owned();
            sublattice.set_column(0, &c);
        }
        Ok(AffineSubtorus {
            torus: torus.clone(),
            spanning: w,
            offset,
            frame,
            sublattice,
        })
    }

    /// The whole torus as a subtorus of itself.
    pub fn full(torus: &HKTorus) -> Self {
        let dim = torus.dim();
        AffineSubtorus::new(torus, DMatrix::identity(dim, dim), DVector::zeros(dim))
            .expect("the full space is rational")
    }

    pub fn torus(&self) -> &HKTorus {
        &self.torus
    }

    pub fn dim(&self) -> usize {
        self.spanning.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.torus.dim()
    }

    pub fn spanning(&self) -> &DMatrix<f64> {
        &self.spanning
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    /// Orthonormal frame of the tangent space, oriented like the spanning
    /// vectors.
    pub fn tangent_frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Basis (columns) of `Λ ∩ span(W)`, oriented like `W`.
    pub fn sublattice_basis(&self) -> &DMatrix<f64> {
        &self.sublattice
    }

    /// Covolume of `Λ ∩ span(W)`.
    pub fn riemannian_volume(&self) -> f64 {
        if self.dim() == 0 {
            return 1.0;
        }
        (self.sublattice.transpose() * &self.sublattice)
            .determinant()
            .max(0.0)
            .sqrt()
    }

    /// Orthonormal frames of `TX` and `NX`, with `[TX | NX]` positively
    /// oriented.
    pub fn tangent_splitting(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let t = self.frame.clone();
        let mut n = orthogonal_complement(&t);
        if n.ncols() > 0 {
            let mut full = DMatrix::zeros(self.ambient_dim(), self.ambient_dim());
            full.view_mut((0, 0), t.shape()).copy_from(&t);
            full.view_mut((0, t.ncols()), n.shape()).copy_from(&n);
            if full.determinant() < 0.0 {
                let c = -n.column(0).into_owned();
                n.set_column(0, &c);
            }
        }
        (t, n)
    }

    /// The point with parameters `u` in sublattice coordinates.
    pub fn point(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.offset + &self.sublattice * u
    }

    pub fn translated(&self, v: &DVector<f64>) -> AffineSubtorus {
        AffineSubtorus {
            offset: &self.offset + v,
            ..self.clone()
        }
    }

    /// Image under `x ↦ a x + b`.
    pub fn mapped(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<AffineSubtorus> {
        AffineSubtorus::new(&self.torus, a * &self.spanning, a * &self.offset + b)
    }

    pub fn is_quaternionic(&self) -> bool {
        is_quaternionic_subspace(&self.spanning)
    }
}

/// Whether left multiplication by `i`, `j` and `k` maps `span(W)` into itself.
pub fn is_quaternionic_subspace(w: &DMatrix<f64>) -> bool {
    if !w.nrows().is_multiple_of(4) {
        return false;
    }
    let q = match column_space(w) {
        Some(q) => q,
        None => return true,
    };
    let n = w.nrows() / 4;
    [Quaternion::I, Quaternion::J, Quaternion::K]
        .iter()
        .all(|&u| invariance_residual(&q, left_multiplication(u, n).matrix()) <= 1e-10)
}

/// Orthonormal basis of the column space by SVD; `None` for the zero space.
pub(crate) fn column_space(w: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let svd = w.clone().svd(true, false);
    let u = svd.u.expect("requested left singular vectors");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * max.max(1e-300) && max > 0.0)
        .map(|i| u.column(i).into_owned())
        .collect();
    (!cols.is_empty()).then(|| DMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::right_multiplication;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cols(dim: usize, vs: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_columns(
            &vs.iter()
                .map(|v| DVector::from_column_slice(v))
                .collect::<Vec<_>>(),
        )
        .resize_vertically(dim, 0.0)
    }

    #[test]
    fn volumes_of_simple_subtori() {
        let t1 = HKTorus::unit(1);
        let x = AffineSubtorus::new(
            &t1,
            cols(4, &[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]),
            DVector::zeros(4),
        )
        .unwrap();
        assert!((x.riemannian_volume() - 1.0).abs() < 1e-12);
        let s = 1.0 / 2f64.sqrt();
        let y = AffineSubtorus::new(
            &t1,
            cols(4, &[&[s, s, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]]),
            DVector::zeros(4),
        )
        .unwrap();
        assert!((y.riemannian_volume() - 2f64.sqrt()).abs() < 1e-12);
        assert!((AffineSubtorus::full(&HKTorus::unit(2)).riemannian_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn irrational_subspace_is_rejected() {
        let t1 = HKTorus::unit(1);
        let w = cols(4, &[&[1.0, 2f64.sqrt(), 0.0, 0.0]]);
        assert!(matches!(
            AffineSubtorus::new(&t1, w, DVector::zeros(4)),
            Err(Error::NonRational(_))
        ));
    }

    #[test]
    fn splitting_of_the_first_factor() {
        let t = HKTorus::unit(2);
        let w = DMatrix::identity(8, 4);
        let x = AffineSubtorus::new(&t, w, DVector::zeros(8)).unwrap();
        let (tx, nx) = x.tangent_splitting();
        assert_eq!(nx.ncols(), 4);
        assert!(nx.rows(0, 4).amax() < 1e-14);
        let proj = &tx * tx.transpose() + &nx * nx.transpose();
        assert!((proj - DMatrix::identity(8, 8)).amax() < 1e-14);
    }

    #[test]
    fn splitting_frames_are_orthonormal_for_random_spans() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = HKTorus::unit(2);
        for d in 1..8 {
            let w = DMatrix::from_fn(8, d, |_, _| rng.random_range(-2i32..=2) as f64);
            let Ok(x) = AffineSubtorus::new(&t, w, DVector::zeros(8)) else {
                continue;
            };
            let (tx, nx) = x.tangent_splitting();
            let mut full = DMatrix::zeros(8, 8);
            full.view_mut((0, 0), tx.shape()).copy_from(&tx);
            full.view_mut((0, d), nx.shape()).copy_from(&nx);
            assert!((full.transpose() * &full - DMatrix::identity(8, 8)).amax() < 1e-12);
            assert!(full.determinant() > 0.0);
        }
    }

    #[test]
    fn quaternionic_subspace_oracle() {
        assert!(is_quaternionic_subspace(&DMatrix::identity(8, 4)));
        assert!(!is_quaternionic_subspace(&DMatrix::identity(4, 2)));
        // graph of v ↦ v·q
        let q = Quaternion::new(0.3, -1.0, 0.5, 2.0);
        let r = right_multiplication(q, 1).into_matrix();
        let mut g = DMatrix::zeros(8, 4);
        g.view_mut((0, 0), (4, 4))
            .copy_from(&DMatrix::identity(4, 4));
        g.view_mut((4, 0), (4, 4)).copy_from(&r);
        assert!(is_quaternionic_subspace(&g));
    }

    #[test]
    fn quaternionic_subspaces_have_dimension_divisible_by_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let d = rng.random_range(1..=8);
            let w = DMatrix::from_fn(8, d, |_, _| rng.random_range(-1i32..=1) as f64);
            if is_quaternionic_subspace(&w) {
                let r = crate::linalg::rank(&w, 1e-10);
                assert_eq!(r % 4, 0, "rank {r}");
            }
        }
    }
}
