//! Bundle curvature at desk scale: constant-curvature line bundles,
//! subbundles of trivial bundles with their second fundamental forms, and
//! sections over quaternionic subtori.

mod line;
mod section;
pub mod subbundle;

pub use line::{degree_slope, is_hyperholomorphic, yang_mills_defect, ConstantCurvatureLineBundle};
pub use section::{
    triholomorphic_section_parallel, SectionField, SectionMap, TriholomorphicReport,
};
pub use subbundle::{
    gauss_codazzi_check, gauss_codazzi_convergence, second_fundamental_form, splitting_check,
    ConvergenceStudy, CurvatureField, FrameMap, GaussCodazziReport, NodeResidual, SplittingReport,
    SubbundleField,
};
