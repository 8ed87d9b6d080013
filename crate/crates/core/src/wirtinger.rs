//! Calibration ratios, symplectic and Riemannian volumes, trianalyticity
//! verdicts, degrees and dual classes.
//!
//! For a `2m`-plane `W` the ratio `Ξ_L(W) = |(ω_L|_W)^m| / (m!·Vol_W)` lies in
//! `[0, 1]` and equals 1 exactly when `W` is `L`-complex. It is computed as
//! `|Pf(QᵀΩ_L Q)|` for an orthonormal basis `Q` of `W`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::{AffineSubtorus, Ambient, HKTorus, ParametrizedPatch};
use crate::error::{Error, Result};
use crate::exterior::{is_su2_invariant, kahler_form, ConstantForm};
use crate::linalg::{gauss_legendre, invariance_residual, orthonormal_columns};
use crate::quat::{complex_structure_operator, ImaginaryUnit};
use crate::sphere_sampling::sample_structures;

/// Default relative tolerance for verdicts on exact (affine) inputs.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Tolerance of the exact linear complexity test `L·W = W`.
pub const LINEAR_TOL: f64 = 1e-9;

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// `|Pf(A)|` of a real antisymmetric matrix, as `√|det A|`.
fn abs_pfaffian(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    a.determinant().abs().sqrt()
}

/// Matrix of `ω_L`: entry `(a, b)` is `ω_L(e_a, e_b)`.
fn kahler_matrix(l: ImaginaryUnit, n: usize) -> DMatrix<f64> {
    complex_structure_operator(l, n).into_matrix().transpose()
}

fn check_plane(w: &DMatrix<f64>) -> Result<(usize, DMatrix<f64>)> {
    if !w.nrows().is_multiple_of(4) {
        return Err(Error::Invalid(format!(
            "ambient dimension {} is not a multiple of 4",
            w.nrows()
        )));
    }
    if w.ncols() % 2 == 1 {
        return Err(Error::OddDimension(w.ncols()));
    }
    Ok((w.nrows() / 4, orthonormal_columns(w)?))
}

/// The `m!`-normalized ratio, in `[0, 1]`.
pub fn xi_ratio(w: &DMatrix<f64>, l: ImaginaryUnit) -> Result<f64> {
    let (n, q) = check_plane(w)?;
    Ok(abs_pfaffian(&(q.transpose() * kahler_matrix(l, n) * &q)))
}

/// The unnormalized ratio `|(ω_L|_W)^m / Vol_W| = m!·Ξ`.
pub fn xi_ratio_raw(w: &DMatrix<f64>, l: ImaginaryUnit) -> Result<f64> {
    Ok(factorial(w.ncols() / 2) * xi_ratio(w, l)?)
}

/// `‖(1 − QQᵀ) L Q‖` for an orthonormal basis `Q` of `W`; zero iff `L·W = W`.
pub fn complexity_residual(w: &DMatrix<f64>, l: ImaginaryUnit) -> Result<f64> {
    let (n, q) = check_plane(w)?;
    Ok(invariance_residual(
        &q,
        complex_structure_operator(l, n).matrix(),
    ))
}

/// A submanifold whose volumes can be measured.
#[derive(Clone, Copy, Debug)]
pub enum Subvariety<'a> {
    Subtorus(&'a AffineSubtorus),
    Patch(&'a ParametrizedPatch),
}

impl<'a> From<&'a AffineSubtorus> for Subvariety<'a> {
    fn from(x: &'a AffineSubtorus) -> Self {
        Subvariety::Subtorus(x)
    }
}

impl<'a> From<&'a ParametrizedPatch> for Subvariety<'a> {
    fn from(p: &'a ParametrizedPatch) -> Self {
        Subvariety::Patch(p)
    }
}

impl Subvariety<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Subvariety::Subtorus(x) => x.dim(),
            Subvariety::Patch(p) => p.dim(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Subvariety::Subtorus(x) => x.ambient_dim(),
            Subvariety::Patch(p) => p.ambient().embedding_dim(),
        }
    }
}

/// A volume with an error estimate (zero for closed-form values).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub error: f64,
}

impl VolumeEstimate {
    fn exact(value: f64) -> Self {
        VolumeEstimate { value, error: 0.0 }
    }
}

/// Default Gauss–Legendre order per axis for patches; the error estimate
/// compares it against twice the order.
pub const QUADRATURE_ORDER: usize = 8;

fn patch_torus_n(p: &ParametrizedPatch) -> Result<usize> {
    match p.ambient() {
        Ambient::Torus(t) => Ok(t.n()),
        Ambient::Sphere(_) => Err(Error::Unsupported(
            "volumes against Kähler forms need the torus ambient".into(),
        )),
    }
}

fn tensor_quadrature(
    p: &ParametrizedPatch,
    order: usize,
    density: &(dyn Fn(&DMatrix<f64>) -> f64 + Sync),
) -> f64 {
    let d = p.dim();
    let (x, w) = gauss_legendre(order);
    let total = order.pow(d as u32);
    let half: Vec<f64> = (0..d)
        .map(|a| 0.5 * (p.upper()[a] - p.lower()[a]))
        .collect();
    let mid: Vec<f64> = (0..d)
        .map(|a| 0.5 * (p.upper()[a] + p.lower()[a]))
        .collect();
    let jac_scale: f64 = half.iter().product();
    (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut weight = jac_scale;
            let u = DVector::from_fn(d, |a, _| {
                let i = code % order;
                code /= order;
                weight *= w[i];
                mid[a] + half[a] * x[i]
            });
            weight * density(&p.jacobian(&u))
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum()
}

fn patch_volume(
    p: &ParametrizedPatch,
    density: &(dyn Fn(&DMatrix<f64>) -> f64 + Sync),
) -> Result<VolumeEstimate> {
    let coarse = tensor_quadrature(p, QUADRATURE_ORDER, density);
    let fine = tensor_quadrature(p, 2 * QUADRATURE_ORDER, density);
    let error = (fine - coarse).abs();
    if !fine.is_finite() || !error.is_finite() || error > 1e-2 * fine.abs().max(1e-12) {
        return Err(Error::Quadrature(error));
    }
    Ok(VolumeEstimate { value: fine, error })
}

/// `vol(X)`: the sublattice covolume for subtori, quadrature for patches.
pub fn riemannian_volume(x: Subvariety<'_>) -> Result<VolumeEstimate> {
    match x {
        Subvariety::Subtorus(t) => Ok(VolumeEstimate::exact(t.riemannian_volume())),
        Subvariety::Patch(p) => {
            patch_volume(p, &|j| (j.transpose() * j).determinant().max(0.0).sqrt())
        }
    }
}

/// `(1/m!) |∫_X ω_L^m|`.
pub fn symplectic_volume(x: Subvariety<'_>, l: ImaginaryUnit) -> Result<VolumeEstimate> {
    if x.dim() % 2 == 1 {
        return Err(Error::OddDimension(x.dim()));
    }
    match x {
        Subvariety::Subtorus(t) => {
            let s = t.sublattice_basis();
            let m = kahler_matrix(l, t.torus().n());
            Ok(VolumeEstimate::exact(abs_pfaffian(
                &(s.transpose() * m * s),
            )))
        }
        Subvariety::Patch(p) => {
            let m = kahler_matrix(l, patch_torus_n(p)?);
            patch_volume(p, &|j| abs_pfaffian(&(j.transpose() * &m * j)))
        }
    }
}

/// Largest pointwise `1 − Ξ` over the subvariety (constant for subtori).
pub fn xi_defect(x: Subvariety<'_>, l: ImaginaryUnit) -> Result<f64> {
    match x {
        Subvariety::Subtorus(t) => Ok(1.0 - xi_ratio(t.spanning(), l)?),
        Subvariety::Patch(p) => {
            patch_torus_n(p)?;
            let defects: Vec<f64> = p
                .nodes()
                .par_iter()
                .map(|u| xi_ratio(&p.jacobian(u), l).map(|r| 1.0 - r))
                .collect::<Result<_>>()?;
            Ok(defects.into_iter().fold(0.0, f64::max))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureResult {
    #[serde(rename = "L")]
    pub l: [f64; 3],
    pub sympl: f64,
    pub riem: f64,
    pub defect: f64,
    #[serde(skip)]
    pub complex: bool,
}

fn structure_result(x: Subvariety<'_>, l: ImaginaryUnit, tol: f64) -> Result<StructureResult> {
    let s = symplectic_volume(x, l)?;
    let r = riemannian_volume(x)?;
    let defect = xi_defect(x, l)?;
    let eff_tol = tol.max(10.0 * (s.error + r.error) / r.value.max(1e-300));
    Ok(StructureResult {
        l: l.components(),
        sympl: s.value,
        riem: r.value,
        defect,
        complex: s.value >= r.value * (1.0 - eff_tol),
    })
}

/// Whether symplectic and Riemannian volume agree for `L`.
pub fn is_complex_analytic(x: Subvariety<'_>, l: ImaginaryUnit, tol: f64) -> Result<bool> {
    Ok(structure_result(x, l, tol)?.complex)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Trianalytic,
    ComplexOnlyFor { structures: Vec<[f64; 3]> },
    NotComplex,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Trianalytic => "trianalytic",
            Verdict::ComplexOnlyFor { .. } => "complex-only-for",
            Verdict::NotComplex => "not-complex",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub sub: usize,
    pub ambient: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrianalyticVerdict {
    pub name: String,
    pub dims: Dims,
    pub per_structure: Vec<StructureResult>,
    pub verdict: Verdict,
}

impl TrianalyticVerdict {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_trianalytic(&self) -> bool {
        self.verdict == Verdict::Trianalytic
    }
}

/// Classifies `x` over `sphere_samples` structures (`i, j, k` always among
/// them). For subtori the volume verdicts are cross-checked against the
/// exact linear tests, and any disagreement is an error.
pub fn is_trianalytic(
    x: Subvariety<'_>,
    tol: f64,
    sphere_samples: usize,
) -> Result<TrianalyticVerdict> {
    if sphere_samples < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 sphere samples, got {sphere_samples}"
        )));
    }
    let structures = sample_structures(sphere_samples);
    let per_structure: Vec<StructureResult> = if x.dim() % 2 == 1 {
        // odd-dimensional: complex for nothing
        let r = riemannian_volume(x)?.value;
        structures
            .iter()
            .map(|l| StructureResult {
                l: l.components(),
                sympl: 0.0,
                riem: r,
                defect: 1.0,
                complex: false,
            })
            .collect()
    } else {
        structures
            .par_iter()
            .map(|&l| structure_result(x, l, tol))
            .collect::<Result<_>>()?
    };
    let complex: Vec<[f64; 3]> = per_structure
        .iter()
        .filter(|r| r.complex)
        .map(|r| r.l)
        .collect();
    let verdict = if complex.len() == per_structure.len() {
        Verdict::Trianalytic
    } else if complex.is_empty() {
        Verdict::NotComplex
    } else {
        Verdict::ComplexOnlyFor {
            structures: complex,
        }
    };
    if let Subvariety::Subtorus(t) = x {
        for (l, r) in structures.iter().zip(&per_structure) {
            let linear = t.dim() % 2 == 0 && complexity_residual(t.spanning(), *l)? <= LINEAR_TOL;
            if linear != r.complex {
                return Err(Error::OracleDisagreement(format!(
                    "volume test says complex={} for L={:?}, linear test says {linear}",
                    r.complex, r.l
                )));
            }
        }
        if (verdict == Verdict::Trianalytic) != t.is_quaternionic() {
            return Err(Error::OracleDisagreement(
                "volume verdict and quaternionic-subspace test disagree".into(),
            ));
        }
    }
    Ok(TrianalyticVerdict {
        name: String::new(),
        dims: Dims {
            sub: x.dim(),
            ambient: x.ambient_dim(),
        },
        per_structure,
        verdict,
    })
}

/// `deg_L(α) = ∫_M ω_L^{2n−p} ∧ α` for a form of degree `2p`.
pub fn degree(alpha: &ConstantForm, l: ImaginaryUnit, torus: &HKTorus) -> Result<f64> {
    let k = alpha.degree();
    if k % 2 == 1 {
        return Err(Error::OddDegree(k));
    }
    if alpha.dim() != torus.dim() {
        return Err(Error::DimensionMismatch {
            expected: torus.dim(),
            got: alpha.dim(),
        });
    }
    let n = torus.n();
    let top = kahler_form(l, n)
        .power(2 * n - k / 2)
        .wedge(alpha)
        .top_coefficient();
    Ok(top.re * torus.volume())
}

/// Largest pairwise difference of degrees over the given structures.
pub fn degree_spread(
    alpha: &ConstantForm,
    structures: &[ImaginaryUnit],
    torus: &HKTorus,
) -> Result<f64> {
    let degs: Vec<f64> = structures
        .iter()
        .map(|&l| degree(alpha, l, torus))
        .collect::<Result<_>>()?;
    let max = degs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = degs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if degs.is_empty() { 0.0 } else { max - min })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degrees: Vec<f64>,
    pub spread: f64,
    /// Nonzero degree only in form degrees divisible by 4.
    pub dimension_ok: bool,
}

/// Degrees of an invariant form over `samples` structures.
pub fn degree_su2_invariance_check(
    alpha: &ConstantForm,
    samples: usize,
    tol: f64,
    torus: &HKTorus,
) -> Result<DegreeReport> {
    let p = crate::exterior::su2_invariant_project(alpha)?;
    if !is_su2_invariant(alpha, 1e-8)? {
        return Err(Error::NotInvariant(alpha.distance(&p)));
    }
    let structures = sample_structures(samples.max(3));
    let degrees: Vec<f64> = structures
        .iter()
        .map(|&l| degree(alpha, l, torus))
        .collect::<Result<_>>()?;
    let spread = degree_spread(alpha, &structures, torus)?;
    if spread > tol {
        return Err(Error::DegreeSpread { spread, tol });
    }
    let nonzero = degrees.iter().any(|d| d.abs() > tol);
    Ok(DegreeReport {
        degrees,
        spread,
        dimension_ok: !nonzero || alpha.degree().is_multiple_of(4),
    })
}

/// Constant representative of the Poincaré dual class of `X`:
/// `∫_M ⟨X⟩ ∧ β = ∫_X β` for constant `β`.
pub fn dual_class(x: &AffineSubtorus) -> ConstantForm {
    let (t, mut nf) = x.tangent_splitting();
    let dim = x.ambient_dim();
    let d = t.ncols();
    // orient so that ν ∧ τ is the positive volume form
    if nf.ncols() > 0 && (d * (dim - d)) % 2 == 1 {
        let c = -nf.column(0).into_owned();
        nf.set_column(0, &c);
    }
    let scale = x.riemannian_volume() / x.torus().volume();
    let mut form = ConstantForm::scalar(dim, scale);
    for c in 0..nf.ncols() {
        form = form.wedge(&ConstantForm::one_form(nf.column(c).as_slice()));
    }
    form
}

fn check_lattice_isometry(torus: &HKTorus, a: &DMatrix<f64>) -> Result<()> {
    let dim = torus.dim();
    if a.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: a.nrows(),
        });
    }
    let orth = (a.transpose() * a - DMatrix::identity(dim, dim)).amax();
    if orth > 1e-10 {
        return Err(Error::NotLatticePreserving(format!(
            "linear part is not orthogonal (defect {orth:e})"
        )));
    }
    let b = torus.lattice();
    let m = b
        .clone()
        .try_inverse()
        .expect("lattice basis is invertible")
        * a
        * b;
    let off = m.iter().map(|x| (x - x.round()).abs()).fold(0.0, f64::max);
    if off > 1e-9 {
        return Err(Error::NotLatticePreserving(format!(
            "lattice coordinates of the image are not integers (off by {off:e})"
        )));
    }
    if (m.determinant().abs() - 1.0).abs() > 1e-9 {
        return Err(Error::NotLatticePreserving(
            "map is not invertible on the lattice".into(),
        ));
    }
    Ok(())
}

/// Classifies the image of a trianalytic `X` under `x ↦ a x + b`, after
/// checking that the map is a lattice-preserving isometry and keeps the
/// fundamental class.
pub fn isometry_image_check(
    x: &AffineSubtorus,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: f64,
    sphere_samples: usize,
) -> Result<TrianalyticVerdict> {
    check_lattice_isometry(x.torus(), a)?;
    let image = x.mapped(a, b)?;
    let change = dual_class(&image).distance(&dual_class(x));
    if change > 1e-9 {
        return Err(Error::FundamentalClassChanged(change));
    }
    is_trianalytic(Subvariety::Subtorus(&image), tol, sphere_samples)
}
