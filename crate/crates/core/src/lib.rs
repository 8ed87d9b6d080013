//! Numerical laboratory for hyperkähler linear algebra on flat tori.
//!
//! The crate models the flat hyperkähler torus `ℍⁿ/Λ` together with the
//! 2-sphere of induced complex structures, and checks the calibration,
//! curvature and deformation statements that are exactly computable in
//! that setting:
//!
//! * [`quat`]: quaternions, complex-structure operators, the SU(2) actions.
//! * [`exterior`]: constant-coefficient forms, Kähler forms, Hodge types,
//!   the SU(2)-invariant projection and the operator `Λ`.
//! * [`ambient`]: flat tori, the round sphere control, subtori and patches.
//! * [`wirtinger`]: calibration ratios, volumes, trianalyticity verdicts,
//!   degrees and dual classes.
//! * [`bundles`]: line-bundle curvature tests and subbundle second
//!   fundamental forms.
//! * [`families`]: deformation families, their natural connection,
//!   transport maps and holonomy.
//! * [`hk_variety`]: the metric/symplectic compatibility axiom.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose, and the
// numeric kernels index several arrays with one loop variable.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ambient;
pub mod bundles;
pub mod cli;
pub mod error;
pub mod exterior;
pub mod families;
pub mod hk_variety;
pub mod linalg;
pub mod quat;
pub mod selftest;
pub mod sphere_sampling;
pub mod wirtinger;

pub use error::{Error, Result};
