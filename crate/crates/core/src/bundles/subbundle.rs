//! Subbundles `E₁ ⊂ E₂ = ℂʳ` of a trivial flat bundle over a torus, given by
//! an orthonormal frame field, with their second fundamental forms and the
//! curvatures of the induced connections on `E₁` and `E₃ = E₁^⊥`.
//!
//! Conventions. `β = P^⊥ dF` is the full second fundamental form and
//! `A(X) = ½(β(X) + √−1 β(LX))` its (0,1) part. For matrix-valued 1-forms
//! `(α∧γ)(X,Y) = α(X)γ(Y) − α(Y)γ(X)`. With these, the induced curvatures are
//! `Θ₁ = β†∧β` (in the frame `F`) and `Θ₃ = β∧β†` (in a frame of `E₃`).

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::polar_unitary;
use crate::quat::{complex_structure_operator, ImaginaryUnit};

pub type FrameMap = Arc<dyn Fn(&DVector<f64>) -> DMatrix<Complex64> + Send + Sync>;

type CMat = DMatrix<Complex64>;

/// Largest principal angle tolerated between frames at neighbouring points.
pub const MAX_PRINCIPAL_ANGLE: f64 = 0.5;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Ordered pairs `a < b` of `0..dim`, the index set of a 2-form.
pub fn pairs(dim: usize) -> Vec<(usize, usize)> {
    (0..dim)
        .flat_map(|a| ((a + 1)..dim).map(move |b| (a, b)))
        .collect()
}

/// Matrix-valued forms of degree 1 or 2 sampled at grid nodes.
///
/// `values[node][slot]` is indexed by direction for degree 1 and by the
/// position in [`pairs`] for degree 2.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub degree: usize,
    pub base_dim: usize,
    pub nodes: Vec<DVector<f64>>,
    pub values: Vec<Vec<CMat>>,
}

impl CurvatureField {
    /// Largest Frobenius norm (over slots) at any node.
    pub fn max_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from skew-Hermitian values (degree 2).
    pub fn skew_hermitian_defect(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|m| (m + m.adjoint()).norm())
            .fold(0.0, f64::max)
    }
}

/// `(α∧γ)(e_a, e_b)` for matrix 1-forms given by their direction slots.
fn wedge_slot(alpha: &[CMat], gamma: &[CMat], a: usize, b: usize) -> CMat {
    &alpha[a] * &gamma[b] - &alpha[b] * &gamma[a]
}

/// `Λ_L Θ = Σ_{a<b} ω_L(e_a, e_b) Θ(e_a, e_b)`.
pub fn lambda_matrix(theta: &[CMat], lmat: &DMatrix<f64>) -> CMat {
    let dim = lmat.nrows();
    let mut out = CMat::zeros(theta[0].nrows(), theta[0].ncols());
    for (slot, (a, b)) in pairs(dim).into_iter().enumerate() {
        let w = lmat[(b, a)];
        if w != 0.0 {
            out += &theta[slot] * c(w);
        }
    }
    out
}

/// Orthonormal frame of the orthogonal complement of the columns of `f`,
/// by pivoted Gram–Schmidt on the columns of `1 − FF†`.
pub fn complement_frame(f: &CMat) -> CMat {
    let r = f.nrows();
    let k = f.ncols();
    let proj = CMat::identity(r, r) - f * f.adjoint();
    let mut cols: Vec<DVector<Complex64>> = Vec::with_capacity(r - k);
    for _ in k..r {
        let residual = |i: usize| {
            let mut v = proj.column(i).into_owned();
            // two passes keep the result orthogonal to roundoff
            for _ in 0..2 {
                for q in &cols {
                    v -= q * q.dotc(&v);
                }
                for q in f.column_iter() {
                    v -= q * q.dotc(&v);
                }
            }
            v
        };
        let best = (0..r)
            .map(residual)
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("nonempty frame");
        cols.push(best.normalize());
    }
    if cols.is_empty() {
        CMat::zeros(r, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

/// Unitary transport `polar(G(y)†G(x))` after checking principal angles.
fn transport(fy: &CMat, fx: &CMat) -> Result<CMat> {
    let m = fy.adjoint() * fx;
    let sv = m.clone().svd(false, false).singular_values;
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < MAX_PRINCIPAL_ANGLE.cos() {
        return Err(Error::FrameDiscontinuity(min.clamp(-1.0, 1.0).acos()));
    }
    Ok(polar_unitary(&m))
}

/// Curvature of the connection induced on the span of `frame`, from the
/// holonomy around a square of side `h` centred at `x` in the `(a, b)` plane,
/// expressed in the frame at `x`.
fn holonomy_curvature(
    frame: &(dyn Fn(&DVector<f64>) -> CMat + Sync),
    x: &DVector<f64>,
    a: usize,
    b: usize,
    h: f64,
) -> Result<CMat> {
    let corner = |sa: f64, sb: f64| {
        let mut p = x.clone();
        p[a] += sa * h / 2.0;
        p[b] += sb * h / 2.0;
        p
    };
    let ps = [
        corner(-1.0, -1.0),
        corner(1.0, -1.0),
        corner(1.0, 1.0),
        corner(-1.0, 1.0),
    ];
    let fs: Vec<CMat> = ps.iter().map(frame).collect();
    let mut u = CMat::identity(fs[0].ncols(), fs[0].ncols());
    for i in 0..4 {
        let next = (i + 1) % 4;
        u = transport(&fs[next], &fs[i])? * u;
    }
    let theta_p = (&u - u.adjoint()) * c(-0.5 / (h * h));
    let fx = frame(x);
    let v = transport(&fx, &fs[0])?;
    Ok(&v * theta_p * v.adjoint())
}

#[derive(Clone)]
pub struct SubbundleField {
    n: usize,
    rank: usize,
    sub_rank: usize,
    frame: FrameMap,
    nodes: Vec<DVector<f64>>,
    step: f64,
}

impl std::fmt::Debug for SubbundleField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubbundleField")
            .field("n", &self.n)
            .field("rank", &self.rank)
            .field("sub_rank", &self.sub_rank)
            .field("nodes", &self.nodes.len())
            .field("step", &self.step)
            .finish()
    }
}

/// Nodes `x₀ + (i/g)·span` for `i` in `0..g` along each of `dim` axes.
pub fn box_nodes(origin: &DVector<f64>, span: f64, per_axis: usize) -> Vec<DVector<f64>> {
    let dim = origin.len();
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut code| {
            DVector::from_fn(dim, |a, _| {
                let i = code % per_axis;
                code /= per_axis;
                origin[a] + span * i as f64 / per_axis as f64
            })
        })
        .collect()
}

impl SubbundleField {
    /// `frame` maps base points of `ℝ^{4n}` to `r × k` matrices with
    /// orthonormal columns.
    pub fn new(n: usize, frame: FrameMap, nodes: Vec<DVector<f64>>, step: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Invalid(
                "subbundle field needs at least one node".into(),
            ));
        }
        if !(step > 0.0) {
            return Err(Error::Invalid(format!("step must be positive, got {step}")));
        }
        let f0 = frame(&nodes[0]);
        let (rank, sub_rank) = f0.shape();
        for x in &nodes {
            if x.len() != 4 * n {
                return Err(Error::DimensionMismatch {
                    expected: 4 * n,
                    got: x.len(),
                });
            }
            let f = frame(x);
            if f.shape() != (rank, sub_rank) {
                return Err(Error::Invalid("frame shape varies between nodes".into()));
            }
            let defect = (f.adjoint() * &f - CMat::identity(sub_rank, sub_rank)).norm();
            if defect > 1e-10 {
                return Err(Error::Invalid(format!(
                    "frame columns are not orthonormal (defect {defect:e})"
                )));
            }
        }
        Ok(SubbundleField {
            n,
            rank,
            sub_rank,
            frame,
            nodes,
            step,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base_dim(&self) -> usize {
        4 * self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sub_rank(&self) -> usize {
        self.sub_rank
    }

    pub fn nodes(&self) -> &[DVector<f64>] {
        &self.nodes
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn frame_at(&self, x: &DVector<f64>) -> CMat {
        (self.frame)(x)
    }

    fn shifted(x: &DVector<f64>, a: usize, t: f64) -> DVector<f64> {
        let mut y = x.clone();
        y[a] += t;
        y
    }

    /// Frame at `y` rotated within its span to best match the frame at `x`.
    fn aligned(&self, fx: &CMat, y: &DVector<f64>) -> Result<CMat> {
        let fy = self.frame_at(y);
        let u = transport(fx, &fy)?;
        Ok(fy * u)
    }

    fn derivative(&self, x: &DVector<f64>, fx: &CMat, a: usize, h: f64) -> Result<CMat> {
        let p = self.aligned(fx, &Self::shifted(x, a, h))?;
        let m = self.aligned(fx, &Self::shifted(x, a, -h))?;
        Ok((p - m) * c(0.5 / h))
    }

    /// `β(e_a) = P^⊥ ∂_a F` for each base direction, by Richardson-extrapolated
    /// central differences of gauge-aligned frames.
    pub fn beta_at(&self, x: &DVector<f64>) -> Result<Vec<CMat>> {
        let fx = self.frame_at(x);
        let perp = CMat::identity(self.rank, self.rank) - &fx * fx.adjoint();
        let h = self.step;
        (0..self.base_dim())
            .map(|a| {
                let d1 = self.derivative(x, &fx, a, h)?;
                let d2 = self.derivative(x, &fx, a, h / 2.0)?;
                Ok(&perp * ((d2 * c(4.0) - d1) * c(1.0 / 3.0)))
            })
            .collect()
    }

    /// The (0,1) part `A(e_a) = ½(β(e_a) + √−1 β(L e_a))`.
    pub fn a_at(&self, x: &DVector<f64>, l: ImaginaryUnit) -> Result<Vec<CMat>> {
        let beta = self.beta_at(x)?;
        Ok(zero_one_part(
            &beta,
            &complex_structure_operator(l, self.n).into_matrix(),
        ))
    }

    /// Curvature of the connection induced on `E₁`, in the frame at `x`.
    pub fn theta1_at(&self, x: &DVector<f64>, h: f64) -> Result<Vec<CMat>> {
        let frame = |p: &DVector<f64>| self.frame_at(p);
        pairs(self.base_dim())
            .into_iter()
            .map(|(a, b)| holonomy_curvature(&frame, x, a, b, h))
            .collect()
    }

    /// Curvature of the connection induced on `E₃`, in the frame
    /// `complement_frame(F(x))`.
    pub fn theta3_at(&self, x: &DVector<f64>, h: f64) -> Result<Vec<CMat>> {
        let frame = |p: &DVector<f64>| complement_frame(&self.frame_at(p));
        pairs(self.base_dim())
            .into_iter()
            .map(|(a, b)| holonomy_curvature(&frame, x, a, b, h))
            .collect()
    }
}

fn zero_one_part(beta: &[CMat], lmat: &DMatrix<f64>) -> Vec<CMat> {
    let dim = beta.len();
    (0..dim)
        .map(|a| {
            // β(L e_a) = Σ_b L[b, a] β(e_b)
            let mut bl = CMat::zeros(beta[a].nrows(), beta[a].ncols());
            for b in 0..dim {
                let w = lmat[(b, a)];
                if w != 0.0 {
                    bl += &beta[b] * c(w);
                }
            }
            (&beta[a] + bl * Complex64::new(0.0, 1.0)) * c(0.5)
        })
        .collect()
}

fn slots_norm(v: &[CMat]) -> f64 {
    v.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

/// The (0,1) part of the second fundamental form over all nodes.
pub fn second_fundamental_form(s: &SubbundleField, l: ImaginaryUnit) -> Result<CurvatureField> {
    let values = s
        .nodes
        .par_iter()
        .map(|x| s.a_at(x, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurvatureField {
        degree: 1,
        base_dim: s.base_dim(),
        nodes: s.nodes.clone(),
        values,
    })
}

/// Per-node residuals of the two Gauss identities and related quantities.
#[derive(Clone, Debug, Serialize)]
pub struct NodeResidual {
    pub node: usize,
    pub r1: f64,
    pub r3: f64,
    pub a_norm: f64,
    pub beta_norm: f64,
    pub lambda1: f64,
    pub lambda3: f64,
    /// `Re(√−1 tr Λ_L(A†∧A))`, equal to `‖A‖²`.
    pub positivity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussCodazziReport {
    pub h: f64,
    pub r1: f64,
    pub r3: f64,
    pub nodes: Vec<NodeResidual>,
}

impl GaussCodazziReport {
    pub fn max_residual(&self) -> f64 {
        self.r1.max(self.r3)
    }

    pub fn min_positivity(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.positivity)
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with one row per node.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for n in &self.nodes {
            w.serialize(n).map_err(|e| Error::Invalid(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn node_residual(
    s: &SubbundleField,
    idx: usize,
    x: &DVector<f64>,
    lmat: &DMatrix<f64>,
    h: f64,
) -> Result<NodeResidual> {
    let dim = s.base_dim();
    let beta = s.beta_at(x)?;
    let beta_dag: Vec<CMat> = beta.iter().map(|m| m.adjoint()).collect();
    let a = zero_one_part(&beta, lmat);
    let a_dag: Vec<CMat> = a.iter().map(|m| m.adjoint()).collect();
    let g = complement_frame(&s.frame_at(x));
    let theta1 = s.theta1_at(x, h)?;
    let theta3 = s.theta3_at(x, h)?;
    let mut r1: f64 = 0.0;
    let mut r3: f64 = 0.0;
    let mut ada = Vec::new();
    for (slot, (p, q)) in pairs(dim).into_iter().enumerate() {
        let g1 = wedge_slot(&beta_dag, &beta, p, q);
        let g3 = g.adjoint() * wedge_slot(&beta, &beta_dag, p, q) * &g;
        r1 = r1.max((&theta1[slot] - g1).norm());
        r3 = r3.max((&theta3[slot] - g3).norm());
        ada.push(wedge_slot(&a_dag, &a, p, q));
    }
    let positivity = (lambda_matrix(&ada, lmat).trace() * Complex64::new(0.0, 1.0)).re;
    Ok(NodeResidual {
        node: idx,
        r1,
        r3,
        a_norm: slots_norm(&a),
        beta_norm: slots_norm(&beta),
        lambda1: lambda_matrix(&theta1, lmat).norm(),
        lambda3: lambda_matrix(&theta3, lmat).norm(),
        positivity,
    })
}

/// Residuals `‖Θ₁ − β†∧β‖` and `‖Θ₃ − β∧β†‖` with the curvatures measured by
/// holonomy around squares of side `h`.
pub fn gauss_codazzi_check(
    s: &SubbundleField,
    l: ImaginaryUnit,
    h: f64,
) -> Result<GaussCodazziReport> {
    if !(h > 0.0) {
        return Err(Error::Invalid(format!(
            "loop size must be positive, got {h}"
        )));
    }
    let lmat = complex_structure_operator(l, s.n).into_matrix();
    let nodes = s
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, x)| node_residual(s, i, x, &lmat, h))
        .collect::<Result<Vec<_>>>()?;
    let r1 = nodes.iter().map(|n| n.r1).fold(0.0, f64::max);
    let r3 = nodes.iter().map(|n| n.r3).fold(0.0, f64::max);
    Ok(GaussCodazziReport { h, r1, r3, nodes })
}

/// Least-squares slope of `log r` against `log h`.
pub fn fitted_order(hs: &[f64], residuals: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub hs: Vec<f64>,
    pub residuals: Vec<f64>,
    pub order: f64,
}

/// Gauss-identity residuals at `h, h/2, …` (`halvings + 1` values).
pub fn gauss_codazzi_convergence(
    s: &SubbundleField,
    l: ImaginaryUnit,
    h: f64,
    halvings: usize,
) -> Result<ConvergenceStudy> {
    let hs: Vec<f64> = (0..=halvings).map(|i| h / 2f64.powi(i as i32)).collect();
    let residuals = hs
        .iter()
        .map(|&hh| gauss_codazzi_check(s, l, hh).map(|r| r.max_residual()))
        .collect::<Result<Vec<_>>>()?;
    let order = fitted_order(&hs, &residuals);
    Ok(ConvergenceStudy {
        hs,
        residuals,
        order,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittingReport {
    pub lambda1: f64,
    pub lambda3: f64,
    pub a_norm: f64,
    pub beta_norm: f64,
    /// `E₁` is `L`-holomorphic (`A = 0`).
    pub holomorphic: bool,
    /// The induced connection has `Λ Θ₁ = 0` or `Λ Θ₃ = 0`.
    pub lambda_vanishes: bool,
    /// Holomorphic and `Λ`-flat force `β = 0`; false only on a violation.
    pub holds: bool,
}

/// Checks that a holomorphic subbundle with `ΛΘ₁ = 0` (or `ΛΘ₃ = 0`) is
/// parallel, reporting every quantity the implication depends on.
pub fn splitting_check(s: &SubbundleField, l: ImaginaryUnit, tol: f64) -> Result<SplittingReport> {
    let report = gauss_codazzi_check(s, l, s.step.max(1e-3))?;
    let max = |f: fn(&NodeResidual) -> f64| report.nodes.iter().map(f).fold(0.0, f64::max);
    let lambda1 = max(|n| n.lambda1);
    let lambda3 = max(|n| n.lambda3);
    let a_norm = max(|n| n.a_norm);
    let beta_norm = max(|n| n.beta_norm);
    let holomorphic = a_norm <= tol;
    let lambda_vanishes = lambda1 <= tol || lambda3 <= tol;
    Ok(SplittingReport {
        lambda1,
        lambda3,
        a_norm,
        beta_norm,
        holomorphic,
        lambda_vanishes,
        holds: !(holomorphic && lambda_vanishes) || beta_norm <= tol,
    })
}

/// A few standard frame fields over `ℝ⁴` used by tests and the CLI.
pub mod examples {
    use super::*;

    /// `span{e₁}` in `ℂʳ`.
    pub fn constant(rank: usize, sub_rank: usize) -> FrameMap {
        Arc::new(move |_| CMat::identity(rank, sub_rank))
    }

    /// `span{(cos θ, sin θ)}` with `θ = rate·x₀`.
    pub fn rotating_line(rate: f64) -> FrameMap {
        Arc::new(move |x| {
            let t = rate * x[0];
            CMat::from_column_slice(2, 1, &[c(t.cos()), c(t.sin())])
        })
    }

    /// `span{(cos θ, e^{√−1 φ} sin θ)}` with `θ = a·x₀ + θ₀`, `φ = b·x₁`.
    pub fn twisted_line(a: f64, theta0: f64, b: f64) -> FrameMap {
        Arc::new(move |x| {
            let t = a * x[0] + theta0;
            let p = b * x[1];
            CMat::from_column_slice(2, 1, &[c(t.cos()), Complex64::from_polar(t.sin(), p)])
        })
    }

    /// Normalized `span{(1, f(z))}` for `f(z) = z²`, `z = x₀ + √−1 x₁`, which
    /// is holomorphic for `I`.
    pub fn holomorphic_graph() -> FrameMap {
        Arc::new(|x| {
            let z = Complex64::new(x[0], x[1]);
            let f = z * z;
            let norm = (1.0 + f.norm_sqr()).sqrt();
            CMat::from_column_slice(2, 1, &[c(1.0 / norm), f / norm])
        })
    }
}
