//! Hyperkähler-variety data on smooth loci of trianalytic subtori: a metric
//! form `s_x` and, for each triple `(I, J, K)`, a holomorphic symplectic form
//! `Ω`, subject to `r_x(a, b) = −Re Ω(a, J b) = s_x(a, b)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::AffineSubtorus;
use crate::error::{Error, Result};
use crate::exterior::{holomorphic_symplectic, ConstantForm};
use crate::quat::{complex_structure_operator, StructureTriple};

/// `Ω = ω'_J + √−1 ω'_K` with `ω'_L(v, w) = g(v, L w)`, the normalization for
/// which `−Re Ω(a, J b) = g(a, b)`.
pub fn model_symplectic(triple: &StructureTriple, n: usize) -> Result<ConstantForm> {
    Ok(-&holomorphic_symplectic(triple, n)?)
}

/// Constant structure data on a linear chart `x = F u` of a subtorus, with
/// `F` an orthonormal `4n × d` frame.
#[derive(Clone, Debug)]
pub struct HKStructureData {
    n: usize,
    frame: DMatrix<f64>,
    metric: DMatrix<f64>,
    omega_scale: f64,
    points: Vec<DVector<f64>>,
}

impl HKStructureData {
    /// Flat data on all of `ℍⁿ`.
    pub fn torus(n: usize) -> Self {
        HKStructureData {
            n,
            frame: DMatrix::identity(4 * n, 4 * n),
            metric: DMatrix::identity(4 * n, 4 * n),
            omega_scale: 1.0,
            points: vec![DVector::zeros(4 * n)],
        }
    }

    /// The restriction of the flat data to `X`.
    pub fn restricted(x: &AffineSubtorus) -> Result<Self> {
        if !x.is_quaternionic() {
            return Err(Error::Invalid(
                "restriction needs a quaternionic subtorus".into(),
            ));
        }
        let frame = x.tangent_frame().clone();
        let d = frame.ncols();
        Ok(HKStructureData {
            n: x.torus().n(),
            metric: frame.transpose() * &frame,
            frame,
            omega_scale: 1.0,
            points: vec![DVector::zeros(d)],
        })
    }

    /// Replaces the metric form; it must be symmetric positive definite.
    pub fn with_metric(mut self, metric: DMatrix<f64>) -> Result<Self> {
        let d = self.frame.ncols();
        if metric.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: metric.nrows(),
            });
        }
        if (&metric - metric.transpose()).norm() > 1e-12 || metric.clone().cholesky().is_none() {
            return Err(Error::Invalid(
                "metric form is not symmetric positive definite".into(),
            ));
        }
        self.metric = metric;
        Ok(self)
    }

    /// Multiplies every `Ω` by `c`.
    pub fn with_omega_scale(mut self, c: f64) -> Self {
        self.omega_scale = c;
        self
    }

    /// Sample points in chart coordinates. The data are constant, so points
    /// only matter for the sampling contract.
    pub fn with_points(mut self, points: Vec<DVector<f64>>) -> Self {
        self.points = points;
        self
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// `Ω` for the triple, pulled back to the chart.
    pub fn omega(&self, triple: &StructureTriple) -> Result<ConstantForm> {
        Ok(model_symplectic(triple, self.n)?
            .pullback(&self.frame)
            .scale(Complex64::new(self.omega_scale, 0.0)))
    }

    /// `r(a, b) = −Re Ω(a, J b)` as a matrix in chart coordinates.
    pub fn r_form(&self, triple: &StructureTriple) -> Result<DMatrix<f64>> {
        let omega = self.omega(triple)?.to_bilinear()?.map(|z| z.re);
        let j = complex_structure_operator(triple.j, self.n).into_matrix();
        let jx = self.frame.transpose() * j * &self.frame;
        Ok(-(omega * jx))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub triples: usize,
    pub samples: usize,
    pub defect: f64,
    pub holds: bool,
}

/// `max ‖r_x − s_x‖` over sample points and triples.
pub fn hk_axiom_check(
    data: &HKStructureData,
    triples: &[StructureTriple],
    tol: f64,
) -> Result<AxiomReport> {
    if data.metric.clone().cholesky().is_none() {
        return Err(Error::Invalid(
            "metric form is not positive definite".into(),
        ));
    }
    let per_triple = triples
        .par_iter()
        .map(|t| {
            let checked = StructureTriple::new(t.i, t.j, t.k)?;
            Ok((data.r_form(&checked)? - &data.metric).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    // constant data: every sample point sees the same defect
    let defect = if data.points.is_empty() {
        0.0
    } else {
        per_triple.into_iter().fold(0.0, f64::max)
    };
    Ok(AxiomReport {
        triples: triples.len(),
        samples: data.points.len(),
        defect,
        holds: defect <= tol,
    })
}

/// Real dimension of a trianalytic subtorus is divisible by 4.
pub fn tangent_dim_mod4_check(x: &AffineSubtorus) -> bool {
    x.dim().is_multiple_of(4)
}
