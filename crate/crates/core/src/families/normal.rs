use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{fiber_grid, DeformationFamily};
use crate::ambient::Ambient;
use crate::error::{Error, Result};
use crate::linalg::orthogonal_complement;
use crate::quat::{complex_structure_operator, ImaginaryUnit};

/// Extra vector field added to a normal section, as a function of fiber
/// coordinates. Used for negative controls.
pub type SectionBump = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

const FD_STEP: f64 = 1e-3;

/// Richardson-extrapolated central difference of `f` at 0.
fn richardson(f: impl Fn(f64) -> DVector<f64>, h: f64) -> DVector<f64> {
    let d1 = (f(h) - f(-h)) / (2.0 * h);
    let d2 = (f(h / 2.0) - f(-h / 2.0)) / h;
    (d2 * 4.0 - d1) / 3.0
}

/// The section `η = pr_N (∂φ/∂s · t)` of the normal bundle of `X_s`,
/// sampled on a grid of fiber coordinates.
#[derive(Clone)]
pub struct NormalSection {
    family: Arc<dyn DeformationFamily>,
    s: DVector<f64>,
    t: DVector<f64>,
    nodes: Vec<DVector<f64>>,
    points: Vec<DVector<f64>>,
    vectors: Vec<DVector<f64>>,
    bump: Option<SectionBump>,
}

impl std::fmt::Debug for NormalSection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormalSection")
            .field("family", &self.family.name())
            .field("s", &self.s.as_slice())
            .field("t", &self.t.as_slice())
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl NormalSection {
    pub fn family(&self) -> &Arc<dyn DeformationFamily> {
        &self.family
    }

    pub fn parameter(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn direction(&self) -> &DVector<f64> {
        &self.t
    }

    /// Fiber coordinates of the nodes.
    pub fn nodes(&self) -> &[DVector<f64>] {
        &self.nodes
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    /// Adds `bump` (projected to the normal bundle) to the section.
    pub fn with_bump(mut self, bump: SectionBump) -> Self {
        self.bump = Some(bump);
        self.vectors = self.nodes.iter().map(|u| self.value(u)).collect();
        self
    }

    /// `η` at fiber coordinates `u`.
    pub fn value(&self, u: &DVector<f64>) -> DVector<f64> {
        let f = &self.family;
        let x = f.embed(&self.s, u);
        let raw = richardson(|e| f.embed(&(&self.s + &self.t * e), u), FD_STEP);
        let mut eta = f.normal_part(&self.s, &x, &raw);
        if let Some(b) = &self.bump {
            eta += f.normal_part(&self.s, &x, &b(u));
        }
        eta
    }

    /// `dη(∂/∂u_α)` at fiber coordinates `u`.
    pub fn derivative(&self, u: &DVector<f64>, alpha: usize) -> DVector<f64> {
        richardson(
            |e| {
                let mut v = u.clone();
                v[alpha] += e;
                self.value(&v)
            },
            FD_STEP,
        )
    }

    /// Largest tangential component of the stored vectors.
    pub fn tangent_leak(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.vectors)
            .map(|(x, v)| (self.family.fiber_tangent(&self.s, x).transpose() * v).norm())
            .fold(0.0, f64::max)
    }
}

/// The normal section induced by moving `s` along `t`, on a `grid^d` grid.
pub fn normal_field(
    family: &Arc<dyn DeformationFamily>,
    s: &DVector<f64>,
    t: &DVector<f64>,
    grid: usize,
) -> Result<NormalSection> {
    if t.len() != family.base_dim() || s.len() != family.base_dim() {
        return Err(Error::DimensionMismatch {
            expected: family.base_dim(),
            got: t.len().min(s.len()),
        });
    }
    let nodes = fiber_grid(family.as_ref(), grid);
    let points: Vec<DVector<f64>> = nodes.iter().map(|u| family.embed(s, u)).collect();
    for u in &nodes {
        let d = family.fiber_dim();
        let cols: Vec<DVector<f64>> = (0..d)
            .map(|a| {
                richardson(
                    |e| {
                        let mut v = u.clone();
                        v[a] += e;
                        family.embed(s, &v)
                    },
                    FD_STEP,
                )
            })
            .collect();
        let jac = DMatrix::from_columns(&cols);
        let sv = jac.svd(false, false).singular_values;
        if sv.iter().cloned().fold(f64::INFINITY, f64::min) < 1e-6 {
            return Err(Error::RankDeficient {
                rank: sv.iter().filter(|&&x| x >= 1e-6).count(),
                expected: d,
            });
        }
    }
    let mut section = NormalSection {
        family: family.clone(),
        s: s.clone(),
        t: t.clone(),
        nodes,
        points,
        vectors: Vec::new(),
        bump: None,
    };
    section.vectors = section.nodes.iter().map(|u| section.value(u)).collect();
    Ok(section)
}

fn torus_n(eta: &NormalSection) -> Result<usize> {
    match eta.family.ambient() {
        Ambient::Torus(t) => Ok(t.n()),
        Ambient::Sphere(_) => Err(Error::Unsupported(
            "holomorphy needs the hyperkähler torus".into(),
        )),
    }
}

/// `max ‖∂̄_L η‖` over the grid, with `∂̄_L η(v) = ½(dη(v) + L dη(Lv))`.
pub fn normal_field_dbar_defect(eta: &NormalSection, l: ImaginaryUnit) -> Result<f64> {
    let lmat = complex_structure_operator(l, torus_n(eta)?).into_matrix();
    let d = eta.family.fiber_dim();
    let defects: Vec<f64> = eta
        .nodes
        .par_iter()
        .zip(&eta.points)
        .map(|(u, x)| {
            let t = eta.family.fiber_tangent(&eta.s, x);
            let lx = t.transpose() * &lmat * &t;
            let ds: Vec<DVector<f64>> = (0..d).map(|a| eta.derivative(u, a)).collect();
            (0..d)
                .map(|a| {
                    let mut dl = DVector::zeros(ds[a].len());
                    for (b, db) in ds.iter().enumerate() {
                        dl += db * lx[(b, a)];
                    }
                    ((&ds[a] + &lmat * dl) * 0.5).norm_squared()
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Whether `η` is `L`-holomorphic on the grid up to `tol`.
pub fn normal_field_holomorphy_check(
    eta: &NormalSection,
    l: ImaginaryUnit,
    tol: f64,
) -> Result<bool> {
    Ok(normal_field_dbar_defect(eta, l)? <= tol)
}

/// `max ‖∇^N η‖` along the fiber: the normal part of the derivative.
pub fn covariant_derivative_norm(eta: &NormalSection) -> f64 {
    let d = eta.family.fiber_dim();
    eta.nodes
        .par_iter()
        .zip(&eta.points)
        .map(|(u, x)| {
            (0..d)
                .map(|a| {
                    eta.family
                        .normal_part(&eta.s, x, &eta.derivative(u, a))
                        .norm_squared()
                })
                .sum::<f64>()
                .sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

pub fn verify_parallel(eta: &NormalSection, tol: f64) -> bool {
    covariant_derivative_norm(eta) <= tol
}

#[derive(Clone, Debug, Serialize)]
pub struct KillingReport {
    pub defect: f64,
    pub points: usize,
    pub holds: bool,
}

/// Largest `|⟨∇_a V, b⟩ + ⟨∇_b V, a⟩|` over orthonormal tangent pairs at the
/// given points.
pub fn verify_killing(
    ambient: &Ambient,
    field: &(dyn Fn(&DVector<f64>) -> DVector<f64> + Sync),
    points: &[DVector<f64>],
    tol: f64,
) -> KillingReport {
    let defect = points
        .par_iter()
        .map(|x| {
            let basis = match ambient {
                Ambient::Torus(_) => DMatrix::identity(x.len(), x.len()),
                Ambient::Sphere(_) => {
                    let unit = x / x.norm();
                    orthogonal_complement(&DMatrix::from_column_slice(x.len(), 1, unit.as_slice()))
                }
            };
            let k = basis.ncols();
            let jac: Vec<DVector<f64>> = (0..k)
                .map(|a| {
                    let e = basis.column(a).into_owned();
                    richardson(|h| field(&(x + &e * h)), FD_STEP)
                })
                .collect();
            let mut worst: f64 = 0.0;
            for a in 0..k {
                for b in a..k {
                    let m = jac[a].dot(&basis.column(b)) + jac[b].dot(&basis.column(a));
                    worst = worst.max(m.abs());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    KillingReport {
        defect,
        points: points.len(),
        holds: defect <= tol,
    }
}

/// Killing test for the family's own extension of `η`.
pub fn family_killing(
    family: &dyn DeformationFamily,
    s: &DVector<f64>,
    t: &DVector<f64>,
    points: &[DVector<f64>],
    tol: f64,
) -> KillingReport {
    verify_killing(
        family.ambient(),
        &|x: &DVector<f64>| family.variation(s, t, x),
        points,
        tol,
    )
}

/// `‖p(s(η)) − η‖ + ‖s(η)^T‖` for the horizontal lift `s` of each base
/// direction and the normal projection `p`.
pub fn connection_axiom_check(
    family: &dyn DeformationFamily,
    s: &DVector<f64>,
    points: &[DVector<f64>],
) -> f64 {
    let k = family.base_dim();
    points
        .par_iter()
        .map(|x| {
            (0..k)
                .map(|i| {
                    let t = DVector::from_fn(k, |r, _| if r == i { 1.0 } else { 0.0 });
                    let eta = family.normal_part(s, x, &family.variation(s, &t, x));
                    let lifted = family.lift(s, &t, x);
                    let vertical = (family.fiber_tangent(s, x).transpose() * &lifted).norm();
                    (family.normal_part(s, x, &lifted) - eta).norm() + vertical
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
