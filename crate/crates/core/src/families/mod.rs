//! Families of completely geodesic submanifolds with the natural connection
//! given by orthogonal projection onto the normal bundle of each fiber.

mod great_circle;
mod linear_flow;
mod normal;
mod translation;
mod transport;
mod weights;

pub use great_circle::GreatCircleFamily;
pub use linear_flow::LinearFlowFamily;
pub use normal::{
    connection_axiom_check, covariant_derivative_norm, family_killing, normal_field,
    normal_field_dbar_defect, normal_field_holomorphy_check, verify_killing, verify_parallel,
    KillingReport, NormalSection, SectionBump,
};
pub use translation::TranslationFamily;
pub use transport::{
    family_curvature, flatness_study, integrate, path_independence_check, verify_holomorphy,
    verify_holomorphy_many, verify_isometry, CurvatureProbe, CurvatureRow, FamilyReport,
    HolomorphyReport, IntegratorSettings, IntegratorStats, IsometryReport, Path,
    PathIndependenceReport, TransportMap,
};
pub use weights::{invariant_homomorphisms, lambda2_action, weight_argument_check, WeightReport};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambient::{Ambient, ParametrizedPatch};
use crate::error::Result;

/// A family `X_s = φ(s, X₀)` of completely geodesic submanifolds over a box
/// of parameters `s ∈ ℝᵏ`.
///
/// Fibers are parametrized by coordinates `u ∈ ℝᵈ` in which `φ(s, ·)` is an
/// isometric immersion, so coordinate directions are orthonormal.
pub trait DeformationFamily: Send + Sync {
    fn name(&self) -> String;
    fn ambient(&self) -> &Ambient;
    fn base_dim(&self) -> usize;
    fn fiber_dim(&self) -> usize;
    fn basepoint(&self) -> DVector<f64>;
    /// Side of the cube of fiber coordinates used for sampling.
    fn fiber_extent(&self) -> f64;
    fn embed(&self, s: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;
    /// Orthonormal frame of `T_x X_s`.
    fn fiber_tangent(&self, s: &DVector<f64>, x: &DVector<f64>) -> DMatrix<f64>;
    /// Velocity at `x ∈ X_s` of an ambient motion carrying `X_s` to
    /// `X_{s+εt}` to first order.
    fn variation(&self, s: &DVector<f64>, t: &DVector<f64>, x: &DVector<f64>) -> DVector<f64>;
    /// Distance of `x` from `X_s`, without reduction modulo the lattice.
    fn fiber_defect(&self, s: &DVector<f64>, x: &DVector<f64>) -> f64;

    /// Component of `v` in `N_x X_s` (tangent to the ambient, normal to the fiber).
    fn normal_part(&self, s: &DVector<f64>, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let v = self.ambient().tangent_part(x, v);
        let t = self.fiber_tangent(s, x);
        let tv = t.transpose() * &v;
        v - t * tv
    }

    /// The horizontal lift of the base direction `t` at `x ∈ X_s`.
    fn lift(&self, s: &DVector<f64>, t: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        self.normal_part(s, x, &self.variation(s, t, x))
    }
}

/// `count` points of `X_s`, with fiber coordinates uniform in the sampling cube.
pub fn fiber_samples(
    family: &dyn DeformationFamily,
    s: &DVector<f64>,
    count: usize,
    seed: u64,
) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = family.fiber_dim();
    let extent = family.fiber_extent();
    (0..count)
        .map(|_| {
            let u = DVector::from_fn(d, |_, _| rng.random::<f64>() * extent);
            family.embed(s, &u)
        })
        .collect()
}

/// Grid of fiber coordinates `(i/g)·extent` in each direction.
pub fn fiber_grid(family: &dyn DeformationFamily, grid: usize) -> Vec<DVector<f64>> {
    let d = family.fiber_dim();
    let extent = family.fiber_extent();
    (0..grid.pow(d as u32))
        .map(|mut code| {
            DVector::from_fn(d, |_, _| {
                let i = code % grid;
                code /= grid;
                extent * i as f64 / grid as f64
            })
        })
        .collect()
}

/// The fiber `X_s` as a parametrized patch, for the completely-geodesic test.
pub fn fiber_patch(
    family: Arc<dyn DeformationFamily>,
    s: &DVector<f64>,
    grid: usize,
) -> Result<ParametrizedPatch> {
    let d = family.fiber_dim();
    let extent = family.fiber_extent();
    let ambient = family.ambient().clone();
    let s = s.clone();
    ParametrizedPatch::new(
        ambient,
        DVector::zeros(d),
        DVector::from_element(d, extent),
        Arc::new(move |u: &DVector<f64>| family.embed(&s, u)),
        1e-2,
        grid,
    )
}

/// Largest second fundamental form over the fibers at the given parameters.
pub fn fibers_geodesic_defect(
    family: &Arc<dyn DeformationFamily>,
    params: &[DVector<f64>],
    grid: usize,
) -> Result<f64> {
    params.iter().try_fold(0.0f64, |acc, s| {
        Ok(acc.max(fiber_patch(family.clone(), s, grid)?.max_second_fundamental_form()?))
    })
}
