//! Sections of a trivial bundle over a quaternionic subtorus and their
//! `∂̄` derivatives for each complex structure.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ambient::AffineSubtorus;
use crate::error::{Error, Result};
use crate::quat::{complex_structure_operator, ImaginaryUnit};

pub type SectionMap = Arc<dyn Fn(&DVector<f64>) -> DVector<Complex64> + Send + Sync>;

/// A section `ν : X → ℂʳ`, evaluated in ambient coordinates.
#[derive(Clone)]
pub struct SectionField {
    subtorus: AffineSubtorus,
    section: SectionMap,
    grid: usize,
    step: f64,
}

impl std::fmt::Debug for SectionField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SectionField")
            .field("dim", &self.subtorus.dim())
            .field("grid", &self.grid)
            .field("step", &self.step)
            .finish()
    }
}

impl SectionField {
    pub fn new(
        subtorus: AffineSubtorus,
        section: SectionMap,
        grid: usize,
        step: f64,
    ) -> Result<Self> {
        if !subtorus.is_quaternionic() {
            return Err(Error::Invalid(
                "sections are checked over quaternionic subtori only".into(),
            ));
        }
        if grid == 0 || !(step > 0.0) {
            return Err(Error::Invalid(
                "grid must be nonempty and step positive".into(),
            ));
        }
        Ok(SectionField {
            subtorus,
            section,
            grid,
            step,
        })
    }

    pub fn subtorus(&self) -> &AffineSubtorus {
        &self.subtorus
    }

    /// Grid points of the subtorus in ambient coordinates.
    pub fn nodes(&self) -> Vec<DVector<f64>> {
        let d = self.subtorus.dim();
        let g = self.grid;
        (0..g.pow(d as u32))
            .map(|mut code| {
                let u = DVector::from_fn(d, |_, _| {
                    let i = code % g;
                    code /= g;
                    (i as f64 + 0.5) / g as f64
                });
                self.subtorus.point(&u)
            })
            .collect()
    }

    /// `dν(t)` along each column `t` of the orthonormal tangent frame.
    fn derivatives(&self, x: &DVector<f64>) -> Vec<DVector<Complex64>> {
        let frame = self.subtorus.tangent_frame();
        let h = self.step;
        let central = |t: &DVector<f64>, h: f64| {
            ((self.section)(&(x + t * h)) - (self.section)(&(x - t * h)))
                / Complex64::new(2.0 * h, 0.0)
        };
        frame
            .column_iter()
            .map(|col| {
                let t = col.into_owned();
                let d1 = central(&t, h);
                let d2 = central(&t, h / 2.0);
                (d2 * Complex64::new(4.0, 0.0) - d1) / Complex64::new(3.0, 0.0)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TriholomorphicReport {
    pub dbar_l: f64,
    pub dbar_minus_l: f64,
    pub d_nu: f64,
    /// Both `∂̄_L ν` and `∂̄_{−L} ν` vanish.
    pub predicted_parallel: bool,
    pub parallel: bool,
    pub consistent: bool,
}

fn dbar_norm(d: &[DVector<Complex64>], lx: &DMatrix<f64>, sign: f64) -> f64 {
    let i = Complex64::new(0.0, sign);
    (0..d.len())
        .map(|a| {
            // dν(L t_a) = Σ_b (L_X)[b, a] dν(t_b)
            let mut dl = DVector::zeros(d[a].len());
            for (b, db) in d.iter().enumerate() {
                dl += db * Complex64::new(lx[(b, a)], 0.0);
            }
            ((&d[a] + dl * i) * Complex64::new(0.5, 0.0)).norm_squared()
        })
        .sum::<f64>()
        .sqrt()
}

/// Compares `‖∂̄_L ν‖`, `‖∂̄_{−L} ν‖` and `‖dν‖` on the grid: a section
/// holomorphic for both `L` and `−L` must be parallel.
pub fn triholomorphic_section_parallel(
    field: &SectionField,
    l: ImaginaryUnit,
    tol: f64,
) -> Result<TriholomorphicReport> {
    let t = field.subtorus.tangent_frame();
    let lmat = complex_structure_operator(l, field.subtorus.torus().n()).into_matrix();
    let lx = t.transpose() * lmat * t;
    let per_node: Vec<(f64, f64, f64)> = field
        .nodes()
        .par_iter()
        .map(|x| {
            let d = field.derivatives(x);
            let full = d.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
            (dbar_norm(&d, &lx, 1.0), dbar_norm(&d, &lx, -1.0), full)
        })
        .collect();
    let max = |f: fn(&(f64, f64, f64)) -> f64| per_node.iter().map(f).fold(0.0, f64::max);
    let dbar_l = max(|v| v.0);
    let dbar_minus_l = max(|v| v.1);
    let d_nu = max(|v| v.2);
    let predicted_parallel = dbar_l <= tol && dbar_minus_l <= tol;
    let parallel = d_nu <= tol;
    Ok(TriholomorphicReport {
        dbar_l,
        dbar_minus_l,
        d_nu,
        predicted_parallel,
        parallel,
        consistent: predicted_parallel == parallel,
    })
}
