use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ode_solvers::{Dopri5, OutputType, System};
use rayon::prelude::*;
use serde::Serialize;

use super::DeformationFamily;
use crate::ambient::Ambient;
use crate::error::{Error, Result};
use crate::quat::{complex_structure_operator, ImaginaryUnit};

type OdeVector = ode_solvers::DVector<f64>;

/// Piecewise-linear path in the parameter box.
#[derive(Clone, Debug, Serialize)]
pub struct Path {
    vertices: Vec<Vec<f64>>,
}

impl Path {
    pub fn new(vertices: Vec<DVector<f64>>) -> Result<Self> {
        let first = vertices
            .first()
            .ok_or_else(|| Error::Invalid("path needs at least one vertex".into()))?;
        let k = first.len();
        if let Some(v) = vertices.iter().find(|v| v.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: v.len(),
            });
        }
        Ok(Path {
            vertices: vertices.iter().map(|v| v.as_slice().to_vec()).collect(),
        })
    }

    pub fn straight(a: &DVector<f64>, b: &DVector<f64>) -> Result<Self> {
        Path::new(vec![a.clone(), b.clone()])
    }

    /// The loop `s → s+ha → s+ha+hb → s+hb → s`.
    pub fn parallelogram(
        s: &DVector<f64>,
        a: &DVector<f64>,
        b: &DVector<f64>,
        h: f64,
    ) -> Result<Self> {
        Path::new(vec![
            s.clone(),
            s + a * h,
            s + a * h + b * h,
            s + b * h,
            s.clone(),
        ])
    }

    pub fn vertices(&self) -> Vec<DVector<f64>> {
        self.vertices
            .iter()
            .map(|v| DVector::from_column_slice(v))
            .collect()
    }

    pub fn start(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.vertices[0])
    }

    pub fn end(&self) -> DVector<f64> {
        DVector::from_column_slice(self.vertices.last().expect("nonempty path"))
    }

    pub fn base_dim(&self) -> usize {
        self.vertices[0].len()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct IntegratorStats {
    pub evaluations: u64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    /// Largest distance of a trajectory from its fiber at segment ends.
    pub max_drift: f64,
}

impl IntegratorStats {
    fn merge(self, other: IntegratorStats) -> IntegratorStats {
        IntegratorStats {
            evaluations: self.evaluations + other.evaluations,
            accepted_steps: self.accepted_steps + other.accepted_steps,
            rejected_steps: self.rejected_steps + other.rejected_steps,
            max_drift: self.max_drift.max(other.max_drift),
        }
    }
}

/// `ξ' = lift(s(τ), Δs, x₀ + ξ)` along one straight segment, `τ ∈ [0, 1]`.
/// Integrating the displacement keeps roundoff relative to its size.
struct LiftSystem<'a> {
    family: &'a dyn DeformationFamily,
    s0: DVector<f64>,
    ds: DVector<f64>,
    base: &'a DVector<f64>,
}

impl System<f64, OdeVector> for LiftSystem<'_> {
    fn system(&self, tau: f64, y: &OdeVector, dy: &mut OdeVector) {
        let x = self.base + DVector::from_column_slice(y.as_slice());
        let s = &self.s0 + &self.ds * tau;
        let v = self.family.lift(&s, &self.ds, &x);
        dy.as_mut_slice().copy_from_slice(v.as_slice());
    }
}

fn transport_point(
    family: &dyn DeformationFamily,
    path: &Path,
    x: &DVector<f64>,
    settings: IntegratorSettings,
) -> Result<(DVector<f64>, IntegratorStats)> {
    let vertices = path.vertices();
    let mut xi = OdeVector::zeros(x.len());
    let mut stats = IntegratorStats::default();
    for w in vertices.windows(2) {
        let ds = &w[1] - &w[0];
        if ds.norm() == 0.0 {
            continue;
        }
        let sys = LiftSystem {
            family,
            s0: w[0].clone(),
            ds,
            base: x,
        };
        let mut solver = Dopri5::new(sys, 0.0, 1.0, 1.0, xi.clone(), settings.rtol, settings.atol);
        solver.set_output(OutputType::Sparse);
        let run = solver.integrate().map_err(|e| match e {
            ode_solvers::dop_shared::IntegrationError::StepSizeUnderflow { x } => {
                Error::StepUnderflow { tau: x }
            }
            other => Error::Integrator(other.to_string()),
        })?;
        xi = solver.y_out().last().cloned().unwrap_or(xi);
        let end = x + DVector::from_column_slice(xi.as_slice());
        stats = stats.merge(IntegratorStats {
            evaluations: run.num_eval as u64,
            accepted_steps: run.accepted_steps as u64,
            rejected_steps: run.rejected_steps as u64,
            max_drift: family.fiber_defect(&w[1], &end),
        });
    }
    Ok((x + DVector::from_column_slice(xi.as_slice()), stats))
}

/// The map `Ψ : X_{γ(0)} → X_{γ(1)}` on a set of sample points.
#[derive(Clone)]
pub struct TransportMap {
    family: Arc<dyn DeformationFamily>,
    path: Path,
    settings: IntegratorSettings,
    post: Option<DMatrix<f64>>,
    pub sources: Vec<DVector<f64>>,
    pub images: Vec<DVector<f64>>,
    pub stats: IntegratorStats,
}

impl std::fmt::Debug for TransportMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransportMap")
            .field("family", &self.family.name())
            .field("path", &self.path)
            .field("samples", &self.sources.len())
            .field("stats", &self.stats)
            .finish()
    }
}

impl TransportMap {
    pub fn family(&self) -> &Arc<dyn DeformationFamily> {
        &self.family
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Transports an arbitrary point of the source fiber.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (y, _) = transport_point(self.family.as_ref(), &self.path, x, self.settings)?;
        Ok(match &self.post {
            Some(a) => a * y,
            None => y,
        })
    }

    /// `A ∘ Ψ` for a linear map `A` of the ambient.
    pub fn composed_with(&self, a: &DMatrix<f64>) -> TransportMap {
        TransportMap {
            post: Some(match &self.post {
                Some(p) => a * p,
                None => a.clone(),
            }),
            images: self.images.iter().map(|y| a * y).collect(),
            ..self.clone()
        }
    }

    /// `dΨ` at `x` on the orthonormal fiber frame, by Richardson-extrapolated
    /// central differences of transported points.
    pub fn differential(&self, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>> {
        let s0 = self.path.start();
        let frame = self.family.fiber_tangent(&s0, x);
        let cols = frame
            .column_iter()
            .map(|t| {
                let diff = |e: f64| -> Result<DVector<f64>> {
                    Ok((self.apply(&(x + t * e))? - self.apply(&(x - t * e))?) / (2.0 * e))
                };
                let d1 = diff(h)?;
                let d2 = diff(h / 2.0)?;
                Ok((d2 * 4.0 - d1) / 3.0)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_columns(&cols))
    }
}

/// Integrates the horizontal lift of `path` from each sample of `X_{γ(0)}`.
pub fn integrate(
    family: &Arc<dyn DeformationFamily>,
    path: &Path,
    samples: &[DVector<f64>],
    settings: IntegratorSettings,
) -> Result<TransportMap> {
    if path.base_dim() != family.base_dim() {
        return Err(Error::DimensionMismatch {
            expected: family.base_dim(),
            got: path.base_dim(),
        });
    }
    let results = samples
        .par_iter()
        .map(|x| transport_point(family.as_ref(), path, x, settings))
        .collect::<Result<Vec<_>>>()?;
    let stats = results
        .iter()
        .fold(IntegratorStats::default(), |acc, (_, s)| acc.merge(*s));
    Ok(TransportMap {
        family: family.clone(),
        path: path.clone(),
        settings,
        post: None,
        sources: samples.to_vec(),
        images: results.into_iter().map(|(y, _)| y).collect(),
        stats,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryReport {
    pub pairs: usize,
    pub defect: f64,
    pub holds: bool,
}

/// `max |d(x, y) − d(Ψx, Ψy)|` over the given index pairs.
pub fn verify_isometry(t: &TransportMap, pairs: &[(usize, usize)], tol: f64) -> IsometryReport {
    let ambient = t.family.ambient();
    let defect = pairs
        .par_iter()
        .map(|&(i, j)| {
            let before = ambient.distance(&t.sources[i], &t.sources[j]);
            let after = ambient.distance(&t.images[i], &t.images[j]);
            (before - after).abs()
        })
        .reduce(|| 0.0, f64::max);
    IsometryReport {
        pairs: pairs.len(),
        defect,
        holds: defect <= tol,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HolomorphyReport {
    #[serde(rename = "L")]
    pub l: [f64; 3],
    pub defect: f64,
    /// How far `L` moves the source tangent space out of itself.
    pub tangent_leak: f64,
    pub holds: bool,
}

/// `max ‖dΨ∘L − L∘dΨ‖` over the samples, for each structure.
pub fn verify_holomorphy_many(
    t: &TransportMap,
    ls: &[ImaginaryUnit],
    tol: f64,
) -> Result<Vec<HolomorphyReport>> {
    let n = match t.family.ambient() {
        Ambient::Torus(torus) => torus.n(),
        Ambient::Sphere(_) => {
            return Err(Error::Unsupported(
                "holomorphy needs the hyperkähler torus".into(),
            ))
        }
    };
    let s0 = t.path.start();
    let diffs = t
        .sources
        .par_iter()
        .map(|x| Ok((t.family.fiber_tangent(&s0, x), t.differential(x, 1e-2)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ls
        .iter()
        .map(|&l| {
            let lmat = complex_structure_operator(l, n).into_matrix();
            let mut defect: f64 = 0.0;
            let mut leak: f64 = 0.0;
            for (frame, j) in &diffs {
                let lt = &lmat * frame;
                let lx = frame.transpose() * &lt;
                leak = leak.max((&lt - frame * &lx).norm());
                defect = defect.max((j * &lx - &lmat * j).norm());
            }
            HolomorphyReport {
                l: l.components(),
                defect,
                tangent_leak: leak,
                holds: defect <= tol && leak <= tol,
            }
        })
        .collect())
}

pub fn verify_holomorphy(t: &TransportMap, l: ImaginaryUnit, tol: f64) -> Result<HolomorphyReport> {
    Ok(verify_holomorphy_many(t, &[l], tol)?.remove(0))
}

#[derive(Clone, Debug)]
pub struct CurvatureProbe {
    pub h: f64,
    pub sources: Vec<DVector<f64>>,
    pub images: Vec<DVector<f64>>,
    /// `|Ψx − x| / h²` per sample.
    pub densities: Vec<f64>,
    pub max_density: f64,
}

/// Transports samples of `X_s` around the parallelogram spanned by `h·a`
/// and `h·b` and returns the displacement per unit area.
pub fn family_curvature(
    family: &Arc<dyn DeformationFamily>,
    s: &DVector<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    h: f64,
    samples: &[DVector<f64>],
    settings: IntegratorSettings,
) -> Result<CurvatureProbe> {
    let path = Path::parallelogram(s, a, b, h)?;
    let t = integrate(family, &path, samples, settings)?;
    let densities: Vec<f64> = t
        .sources
        .iter()
        .zip(&t.images)
        .map(|(x, y)| (y - x).norm() / (h * h))
        .collect();
    let max_density = densities.iter().cloned().fold(0.0, f64::max);
    Ok(CurvatureProbe {
        h,
        sources: t.sources,
        images: t.images,
        densities,
        max_density,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureRow {
    pub h: f64,
    pub defect: f64,
    /// Closed-form value, for families with a known nonzero holonomy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
}

/// `family_curvature` at `h, h/2, …`.
#[allow(clippy::too_many_arguments)]
pub fn flatness_study(
    family: &Arc<dyn DeformationFamily>,
    s: &DVector<f64>,
    a: &DVector<f64>,
    b: &DVector<f64>,
    h: f64,
    halvings: usize,
    samples: &[DVector<f64>],
    settings: IntegratorSettings,
) -> Result<Vec<CurvatureRow>> {
    (0..=halvings)
        .map(|i| {
            let hh = h / 2f64.powi(i as i32);
            let probe = family_curvature(family, s, a, b, hh, samples, settings)?;
            Ok(CurvatureRow {
                h: hh,
                defect: probe.max_density,
                expected: None,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PathIndependenceReport {
    pub discrepancy: f64,
    pub holds: bool,
}

/// Largest distance between the transports along two paths with common
/// endpoints.
pub fn path_independence_check(
    family: &Arc<dyn DeformationFamily>,
    first: &Path,
    second: &Path,
    samples: &[DVector<f64>],
    settings: IntegratorSettings,
    tol: f64,
) -> Result<PathIndependenceReport> {
    let gap = (first.start() - second.start()).norm() + (first.end() - second.end()).norm();
    if gap > 1e-14 {
        return Err(Error::Invalid(format!(
            "paths do not share endpoints (gap {gap:e})"
        )));
    }
    let a = integrate(family, first, samples, settings)?;
    let b = integrate(family, second, samples, settings)?;
    let ambient = family.ambient();
    let discrepancy = a
        .images
        .iter()
        .zip(&b.images)
        .map(|(x, y)| ambient.distance(x, y))
        .fold(0.0, f64::max);
    Ok(PathIndependenceReport {
        discrepancy,
        holds: discrepancy <= tol,
    })
}

/// JSON summary of a family run.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub path: Path,
    pub n_samples: usize,
    pub isometry_defect: f64,
    pub holomorphy_defect: Vec<HolomorphyReport>,
    pub curvature_defect: Vec<CurvatureRow>,
    pub stats: IntegratorStats,
}
