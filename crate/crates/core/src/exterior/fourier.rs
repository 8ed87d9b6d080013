//! Single-frequency forms `β·e^{2π√−1⟨λ,x⟩}` on the flat torus.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::ConstantForm;
use crate::error::{Error, Result};
use crate::quat::{left_multiplication, Quaternion};

#[derive(Clone, Debug)]
pub struct FourierForm {
    base: ConstantForm,
    frequency: DVector<f64>,
}

impl FourierForm {
    /// A form with integer frequency on the standard lattice.
    pub fn new(base: ConstantForm, frequency: &[i64]) -> Result<Self> {
        let f = DVector::from_iterator(frequency.len(), frequency.iter().map(|&k| k as f64));
        FourierForm::with_frequency(base, f)
    }

    /// Any real frequency; pullbacks by non-lattice maps land here.
    pub fn with_frequency(base: ConstantForm, frequency: DVector<f64>) -> Result<Self> {
        if frequency.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: frequency.len(),
            });
        }
        Ok(FourierForm { base, frequency })
    }

    pub fn base(&self) -> &ConstantForm {
        &self.base
    }

    pub fn frequency(&self) -> &DVector<f64> {
        &self.frequency
    }

    /// `(2π|λ|)²`.
    pub fn laplace_eigenvalue(&self) -> f64 {
        (2.0 * PI * self.frequency.norm()).powi(2)
    }

    /// The flat Hodge Laplacian acts coefficientwise as `−Σ ∂²`, which on a
    /// single frequency is multiplication by `(2π|λ|)²`.
    pub fn laplacian(&self) -> FourierForm {
        FourierForm {
            base: self.base.scale_real(self.laplace_eigenvalue()),
            frequency: self.frequency.clone(),
        }
    }

    /// The constant-coefficient form obtained by freezing the phase at `x`.
    pub fn at(&self, x: &DVector<f64>) -> ConstantForm {
        let phase = Complex64::from_polar(1.0, 2.0 * PI * self.frequency.dot(x));
        self.base.scale(phase)
    }

    /// Pullback by left multiplication with the unit `u`: the base is pulled
    /// back and the frequency becomes `Aᵀλ`.
    pub fn su2_pullback(&self, u: Quaternion) -> Result<FourierForm> {
        let base = super::su2_pullback(u, &self.base)?;
        let a = left_multiplication(u, self.base.dim() / 4).into_matrix();
        Ok(FourierForm {
            base,
            frequency: a.transpose() * &self.frequency,
        })
    }

    pub fn distance(&self, other: &FourierForm) -> f64 {
        self.base.distance(&other.base) + (&self.frequency - &other.frequency).norm()
    }
}
