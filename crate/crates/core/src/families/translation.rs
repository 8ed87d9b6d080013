use nalgebra::{DMatrix, DVector};

use super::DeformationFamily;
use crate::ambient::{AffineSubtorus, Ambient};
use crate::error::{Error, Result};

/// `φ(s, x) = x + B s` for an affine subtorus `X₀` and `B : ℝᵏ → N X₀`.
#[derive(Clone, Debug)]
pub struct TranslationFamily {
    fiber: AffineSubtorus,
    b: DMatrix<f64>,
    ambient: Ambient,
}

impl TranslationFamily {
    pub fn new(fiber: AffineSubtorus, b: DMatrix<f64>) -> Result<Self> {
        if b.nrows() != fiber.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: fiber.ambient_dim(),
                got: b.nrows(),
            });
        }
        let leak = (fiber.tangent_frame().transpose() * &b).norm();
        if leak > 1e-12 * (1.0 + b.norm()) {
            return Err(Error::Invalid(format!(
                "translation directions are not normal to the fiber ({leak:e})"
            )));
        }
        let ambient = Ambient::Torus(fiber.torus().clone());
        Ok(TranslationFamily { fiber, b, ambient })
    }

    /// All of `N X₀`, with an orthonormal basis of the normal space as `B`.
    pub fn full_normal(fiber: AffineSubtorus) -> Result<Self> {
        let (_, n) = fiber.tangent_splitting();
        TranslationFamily::new(fiber, n)
    }

    pub fn fiber(&self) -> &AffineSubtorus {
        &self.fiber
    }

    pub fn directions(&self) -> &DMatrix<f64> {
        &self.b
    }
}

impl DeformationFamily for TranslationFamily {
    fn name(&self) -> String {
        format!(
            "translation(dim {} in {})",
            self.fiber.dim(),
            self.fiber.ambient_dim()
        )
    }

    fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    fn base_dim(&self) -> usize {
        self.b.ncols()
    }

    fn fiber_dim(&self) -> usize {
        self.fiber.dim()
    }

    fn basepoint(&self) -> DVector<f64> {
        DVector::zeros(self.b.ncols())
    }

    fn fiber_extent(&self) -> f64 {
        1.0
    }

    fn embed(&self, s: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.fiber.offset() + &self.b * s + self.fiber.tangent_frame() * u
    }

    fn fiber_tangent(&self, _s: &DVector<f64>, _x: &DVector<f64>) -> DMatrix<f64> {
        self.fiber.tangent_frame().clone()
    }

    fn variation(&self, _s: &DVector<f64>, t: &DVector<f64>, _x: &DVector<f64>) -> DVector<f64> {
        &self.b * t
    }

    fn fiber_defect(&self, s: &DVector<f64>, x: &DVector<f64>) -> f64 {
        let y = x - self.fiber.offset() - &self.b * s;
        let t = self.fiber.tangent_frame();
        (&y - t * (t.transpose() * &y)).norm()
    }
}
