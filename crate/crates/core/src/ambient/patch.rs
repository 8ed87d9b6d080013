//! Parametrized patches `φ: box ⊂ ℝᵈ → ambient`, sampled on a grid.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{AffineSubtorus, Ambient, RoundSphere};
use crate::error::{Error, Result};

pub type PatchMap = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Clone)]
pub struct ParametrizedPatch {
    ambient: Ambient,
    lower: DVector<f64>,
    upper: DVector<f64>,
    map: PatchMap,
    step: f64,
    grid: usize,
}

impl fmt::Debug for ParametrizedPatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametrizedPatch")
            .field("lower", &self.lower.as_slice())
            .field("upper", &self.upper.as_slice())
            .field("step", &self.step)
            .field("grid", &self.grid)
            .finish()
    }
}

impl ParametrizedPatch {
    pub fn new(
        ambient: Ambient,
        lower: DVector<f64>,
        upper: DVector<f64>,
        map: PatchMap,
        step: f64,
        grid: usize,
    ) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(a, b)| !(a < b)) {
            return Err(Error::Invalid("parameter box is empty".into()));
        }
        if !(step > 0.0) {
            return Err(Error::Invalid(format!(
                "finite-difference step must be positive, got {step}"
            )));
        }
        Ok(ParametrizedPatch {
            ambient,
            lower,
            upper,
            map,
            step,
            grid,
        })
    }

    /// An affine subtorus over one fundamental cell of its sublattice.
    ///
    /// The map is affine, so second differences are pure roundoff; a large
    /// step keeps that roundoff far below the usual tolerances.
    pub fn from_subtorus(x: &AffineSubtorus, grid: usize) -> Self {
        let d = x.dim();
        let sub = x.sublattice_basis().clone();
        let offset = x.offset().clone();
        ParametrizedPatch {
            ambient: Ambient::Torus(x.torus().clone()),
            lower: DVector::zeros(d),
            upper: DVector::from_element(d, 1.0),
            map: Arc::new(move |u| &offset + &sub * u),
            step: 1e-2,
            grid,
        }
    }

    /// The equator of the round 2-sphere, parametrized by angle.
    pub fn great_circle(radius: f64, grid: usize) -> Result<Self> {
        ParametrizedPatch::latitude_circle(radius, 0.0, grid)
    }

    /// The circle at the given latitude on the round 2-sphere.
    pub fn latitude_circle(radius: f64, latitude: f64, grid: usize) -> Result<Self> {
        let sphere = RoundSphere::new(2, radius)?;
        let (c, s) = (latitude.cos(), latitude.sin());
        ParametrizedPatch::new(
            Ambient::Sphere(sphere),
            DVector::from_element(1, 0.0),
            DVector::from_element(1, 2.0 * PI),
            Arc::new(move |u| {
                DVector::from_vec(vec![
                    radius * c * u[0].cos(),
                    radius * c * u[0].sin(),
                    radius * s,
                ])
            }),
            DEFAULT_STEP,
            grid,
        )
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid;
        self
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn eval(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.map)(u)
    }

    /// Grid nodes including the faces of the box, lexicographic order.
    pub fn nodes(&self) -> Vec<DVector<f64>> {
        let d = self.dim();
        let g = self.grid.max(1);
        let total = g.pow(d as u32);
        (0..total)
            .map(|mut code| {
                DVector::from_fn(d, |a, _| {
                    let i = code % g;
                    code /= g;
                    let frac = if g == 1 {
                        0.5
                    } else {
                        i as f64 / (g - 1) as f64
                    };
                    self.lower[a] + frac * (self.upper[a] - self.lower[a])
                })
            })
            .collect()
    }

    fn shifted(&self, u: &DVector<f64>, a: usize, da: f64, b: usize, db: f64) -> DVector<f64> {
        let mut v = u.clone();
        v[a] += da;
        v[b] += db;
        self.eval(&v)
    }

    fn first_difference(&self, u: &DVector<f64>, a: usize, h: f64) -> DVector<f64> {
        (self.shifted(u, a, h, a, 0.0) - self.shifted(u, a, -h, a, 0.0)) / (2.0 * h)
    }

    fn second_difference(&self, u: &DVector<f64>, a: usize, b: usize, h: f64) -> DVector<f64> {
        if a == b {
            (self.shifted(u, a, h, a, 0.0) - self.eval(u) * 2.0 + self.shifted(u, a, -h, a, 0.0))
                / (h * h)
        } else {
            (self.shifted(u, a, h, b, h)
                - self.shifted(u, a, h, b, -h)
                - self.shifted(u, a, -h, b, h)
                + self.shifted(u, a, -h, b, -h))
                / (4.0 * h * h)
        }
    }

    /// Jacobian by Richardson-extrapolated central differences.
    pub fn jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let h = self.step;
        let cols: Vec<DVector<f64>> = (0..self.dim())
            .map(|a| {
                (self.first_difference(u, a, h / 2.0) * 4.0 - self.first_difference(u, a, h)) / 3.0
            })
            .collect();
        DMatrix::from_columns(&cols)
    }

    /// The second fundamental form at `u` in an orthonormal tangent frame:
    /// entry `[α][β]` is the normal part of `∇_{t_α} t_β`.
    pub fn second_fundamental_form(&self, u: &DVector<f64>) -> Result<Vec<Vec<DVector<f64>>>> {
        let d = self.dim();
        let x = self.eval(u);
        let jac = self.jacobian(u);
        let qr = jac.clone().qr();
        let r = qr.r();
        let scale = r.diagonal().amax();
        let rank = r
            .diagonal()
            .iter()
            .filter(|v| v.abs() > 1e-10 * scale.max(1e-300))
            .count();
        if rank < d {
            return Err(Error::RankDeficient { rank, expected: d });
        }
        let q = qr.q();
        let c = r.try_inverse().expect("full-rank triangular factor");
        let h = self.step;
        let mut hess = vec![vec![DVector::zeros(x.len()); d]; d];
        for a in 0..d {
            for b in a..d {
                let v = (self.second_difference(u, a, b, h / 2.0) * 4.0
                    - self.second_difference(u, a, b, h))
                    / 3.0;
                let v = self.ambient.tangent_part(&x, &v);
                let normal = &v - &q * (q.transpose() * &v);
                hess[a][b] = normal.clone();
                hess[b][a] = normal;
            }
        }
        let mut out = vec![vec![DVector::zeros(x.len()); d]; d];
        for al in 0..d {
            for be in 0..d {
                let mut acc = DVector::zeros(x.len());
                for a in 0..d {
                    for b in 0..d {
                        let w = c[(a, al)] * c[(b, be)];
                        if w != 0.0 {
                            acc += &hess[a][b] * w;
                        }
                    }
                }
                out[al][be] = acc;
            }
        }
        Ok(out)
    }

    /// Frobenius norm of the second fundamental form at `u`.
    pub fn second_fundamental_norm(&self, u: &DVector<f64>) -> Result<f64> {
        let ii = self.second_fundamental_form(u)?;
        Ok(ii
            .iter()
            .flatten()
            .map(|v| v.norm_squared())
            .sum::<f64>()
            .sqrt())
    }

    /// Largest second-fundamental-form norm over the grid.
    pub fn max_second_fundamental_form(&self) -> Result<f64> {
        if self.grid < 3 {
            return Err(Error::Invalid(format!(
                "grid resolution {} is below 3",
                self.grid
            )));
        }
        let norms: Vec<f64> = self
            .nodes()
            .par_iter()
            .map(|u| self.second_fundamental_norm(u))
            .collect::<Result<_>>()?;
        Ok(norms.into_iter().fold(0.0, f64::max))
    }

    pub fn is_completely_geodesic(&self, tol: f64) -> Result<bool> {
        Ok(self.max_second_fundamental_form()? <= tol)
    }
}
