use nalgebra::{DMatrix, DVector};

use super::DeformationFamily;
use crate::ambient::{Ambient, HKTorus};
use crate::error::{Error, Result};

/// Linear subspaces `X_s = exp(sΞ) X₀` of `ℍ²` for `X₀ = ℍ ⊕ 0` and
/// `Ξ(v, w) = (−Mᵀw, Mv)` with `M` orthogonal, so
/// `X_s = {(cos s·v, sin s·Mv)}`.
///
/// With `M = 1` every fiber is a quaternionic line; with `M` not
/// quaternionic-linear the transport fails to commute with some `L`.
#[derive(Clone, Debug)]
pub struct LinearFlowFamily {
    m: DMatrix<f64>,
    ambient: Ambient,
}

impl LinearFlowFamily {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.shape() != (4, 4) {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: m.nrows(),
            });
        }
        let defect = (m.transpose() * &m - DMatrix::identity(4, 4)).norm();
        if defect > 1e-12 {
            return Err(Error::Invalid(format!(
                "twist is not orthogonal ({defect:e})"
            )));
        }
        Ok(LinearFlowFamily {
            m,
            ambient: Ambient::Torus(HKTorus::unit(2)),
        })
    }

    /// `M = 1`: rotation of `ℍ ⊕ 0` towards `0 ⊕ ℍ`.
    pub fn quaternionic() -> Self {
        LinearFlowFamily::new(DMatrix::identity(4, 4)).expect("identity is orthogonal")
    }

    /// `M = diag(1, 1, −1, −1)`, which commutes with `i` but not with `j`, `k`.
    pub fn twisted() -> Self {
        LinearFlowFamily::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0, 1.0, -1.0, -1.0,
        ])))
        .expect("diagonal sign matrix is orthogonal")
    }

    pub fn twist(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `exp(sΞ)` restricted to `X₀`, an `8 × 4` isometric embedding.
    pub fn frame(&self, s: f64) -> DMatrix<f64> {
        let mut f = DMatrix::zeros(8, 4);
        f.view_mut((0, 0), (4, 4))
            .copy_from(&(DMatrix::identity(4, 4) * s.cos()));
        f.view_mut((4, 0), (4, 4)).copy_from(&(&self.m * s.sin()));
        f
    }

    fn generator(&self) -> DMatrix<f64> {
        let mut xi = DMatrix::zeros(8, 8);
        xi.view_mut((0, 4), (4, 4))
            .copy_from(&(-self.m.transpose()));
        xi.view_mut((4, 0), (4, 4)).copy_from(&self.m);
        xi
    }
}

impl DeformationFamily for LinearFlowFamily {
    fn name(&self) -> String {
        "linear-flow(H+0)".into()
    }

    fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    fn base_dim(&self) -> usize {
        1
    }

    fn fiber_dim(&self) -> usize {
        4
    }

    fn basepoint(&self) -> DVector<f64> {
        DVector::zeros(1)
    }

    fn fiber_extent(&self) -> f64 {
        0.25
    }

    fn embed(&self, s: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.frame(s[0]) * u
    }

    fn fiber_tangent(&self, s: &DVector<f64>, _x: &DVector<f64>) -> DMatrix<f64> {
        self.frame(s[0])
    }

    fn variation(&self, _s: &DVector<f64>, t: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        self.generator() * x * t[0]
    }

    fn fiber_defect(&self, s: &DVector<f64>, x: &DVector<f64>) -> f64 {
        let f = self.frame(s[0]);
        (x - &f * (f.transpose() * x)).norm()
    }
}
