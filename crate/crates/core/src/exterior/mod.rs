//! Constant-coefficient exterior forms on `ℝ^d`.
//!
//! A form of degree `p` is stored densely over the strictly increasing
//! multi-indices of length `p`, encoded as bitmasks and ordered by numeric
//! value. Coefficients are complex so that the holomorphic symplectic form
//! and Hodge components live in the same type; real forms have zero
//! imaginary parts. The coordinate wedges `dx_I` are orthonormal for the
//! inner product.

mod fourier;
mod hodge;
mod su2;

pub use fourier::FourierForm;
pub use hodge::{
    hodge_components, holomorphic_symplectic, kahler_form, lambda_op, pp_part, HodgeComponent,
};
pub use su2::{
    is_su2_invariant, su2_generators, su2_invariant_basis, su2_invariant_project, su2_pullback,
};

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::det_in_place;

/// Largest supported ambient dimension (masks are `u32`, kept well inside).
pub const MAX_DIM: usize = 20;

type MaskTable = Arc<Vec<u32>>;

/// Sorted bitmasks of popcount `degree` in `dim` bits.
pub(crate) fn masks(dim: usize, degree: usize) -> MaskTable {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), MaskTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache
        .read()
        .expect("mask cache poisoned")
        .get(&(dim, degree))
    {
        return t.clone();
    }
    let table = Arc::new(enumerate_masks(dim, degree));
    cache
        .write()
        .expect("mask cache poisoned")
        .insert((dim, degree), table.clone());
    table
}

fn enumerate_masks(dim: usize, degree: usize) -> Vec<u32> {
    if degree > dim {
        return Vec::new();
    }
    if degree == 0 {
        return vec![0];
    }
    // Gosper's hack walks same-popcount masks in increasing order.
    let mut out = Vec::new();
    let mut m: u64 = (1u64 << degree) - 1;
    let limit = 1u64 << dim;
    while m < limit {
        out.push(m as u32);
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// `(-1)^{#(i∈a, j∈b, i>j)}`, the sign of `dx_a ∧ dx_b` against `dx_{a∪b}`.
fn wedge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        let above = if j >= 31 { 0 } else { a >> (j + 1) };
        inversions += above.count_ones();
        rest &= rest - 1;
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl ConstantForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        let len = masks(dim, degree).len();
        ConstantForm {
            dim,
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        let mut f = ConstantForm::zero(dim, 0);
        f.coeffs[0] = Complex64::new(c, 0.0);
        f
    }

    /// `dx_{i_1} ∧ … ∧ dx_{i_p}` for indices in any order; repeated indices
    /// give zero.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut f = ConstantForm::zero(dim, indices.len());
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::Invalid(format!(
                "index {bad} out of range for dimension {dim}"
            )));
        }
        let mut sorted = indices.to_vec();
        let mut sign = 1.0;
        // bubble sort, counting swaps
        for i in 0..sorted.len() {
            for j in 0..sorted.len() - 1 - i {
                if sorted[j] > sorted[j + 1] {
                    sorted.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Ok(f);
        }
        let mask = sorted.iter().fold(0u32, |m, &i| m | (1 << i));
        let pos = f.position(mask).expect("mask of matching degree");
        f.coeffs[pos] = Complex64::new(sign, 0.0);
        Ok(f)
    }

    /// The 1-form `Σ cᵢ dxᵢ`.
    pub fn one_form(coeffs: &[f64]) -> Self {
        let dim = coeffs.len();
        let mut f = ConstantForm::zero(dim, 1);
        for (i, &c) in coeffs.iter().enumerate() {
            f.coeffs[i] = Complex64::new(c, 0.0);
        }
        f
    }

    /// The 2-form with `α(e_a, e_b) = m[(a, b)]`; only the part above the
    /// diagonal is read.
    pub fn from_bilinear(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut f = ConstantForm::zero(dim, 2);
        for (pos, &mask) in masks(dim, 2).iter().enumerate() {
            let idx = mask_indices(mask);
            f.coeffs[pos] = Complex64::new(m[(idx[0], idx[1])], 0.0);
        }
        f
    }

    /// `dx_0 ∧ … ∧ dx_{d−1}`.
    pub fn volume(dim: usize) -> Self {
        let idx: Vec<usize> = (0..dim).collect();
        ConstantForm::basis(dim, &idx).expect("in-range indices")
    }

    /// Builds a form from coefficients in mask order.
    pub fn from_coefficients(dim: usize, degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let len = masks(dim, degree).len();
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: coeffs.len(),
            });
        }
        Ok(ConstantForm {
            dim,
            degree,
            coeffs,
        })
    }

    pub fn from_real_coefficients(dim: usize, degree: usize, coeffs: &[f64]) -> Result<Self> {
        ConstantForm::from_coefficients(
            dim,
            degree,
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Iterates `(sorted indices, coefficient)` over nonzero coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        let table = masks(self.dim, self.degree);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() != 0.0)
            .map(move |(p, c)| (mask_indices(table[p]), *c))
            .collect::<Vec<_>>()
            .into_iter()
    }

    fn position(&self, mask: u32) -> Option<usize> {
        masks(self.dim, self.degree).binary_search(&mask).ok()
    }

    /// Coefficient of `dx_I` for a sorted index list.
    pub fn coefficient(&self, indices: &[usize]) -> Complex64 {
        let mask = indices.iter().fold(0u32, |m, &i| m | (1 << i));
        if mask.count_ones() as usize != self.degree || indices.len() != self.degree {
            return Complex64::new(0.0, 0.0);
        }
        self.position(mask)
            .map(|p| self.coeffs[p])
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// The single coefficient of a top-degree form.
    pub fn top_coefficient(&self) -> Complex64 {
        if self.degree == self.dim {
            self.coeffs[0]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn check_same_space(&self, other: &ConstantForm) {
        assert_eq!(self.dim, other.dim, "forms live on different spaces");
        assert_eq!(self.degree, other.degree, "forms have different degrees");
    }

    pub fn scale(&self, s: Complex64) -> ConstantForm {
        ConstantForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> ConstantForm {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn conj(&self) -> ConstantForm {
        ConstantForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn real_part(&self) -> ConstantForm {
        ConstantForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex64::new(c.re, 0.0))
                .collect(),
        }
    }

    pub fn imag_part(&self) -> ConstantForm {
        ConstantForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex64::new(c.im, 0.0))
                .collect(),
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.im.abs() <= tol)
    }

    /// Hermitian inner product `Σ conj(a_I) b_I`.
    pub fn inner(&self, other: &ConstantForm) -> Complex64 {
        self.check_same_space(other);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn wedge(&self, other: &ConstantForm) -> ConstantForm {
        assert_eq!(self.dim, other.dim, "forms live on different spaces");
        let mut out = ConstantForm::zero(self.dim, self.degree + other.degree);
        if out.coeffs.is_empty() {
            return out;
        }
        let ta = masks(self.dim, self.degree);
        let tb = masks(other.dim, other.degree);
        let tout = masks(out.dim, out.degree);
        for (pa, &ma) in ta.iter().enumerate() {
            let ca = self.coeffs[pa];
            if ca.norm_sqr() == 0.0 {
                continue;
            }
            for (pb, &mb) in tb.iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                let cb = other.coeffs[pb];
                if cb.norm_sqr() == 0.0 {
                    continue;
                }
                let pos = tout
                    .binary_search(&(ma | mb))
                    .expect("union has output degree");
                out.coeffs[pos] += ca * cb * wedge_sign(ma, mb);
            }
        }
        out
    }

    /// `α ∧ … ∧ α` (`k` factors); `k = 0` gives the constant 1.
    pub fn power(&self, k: usize) -> ConstantForm {
        let mut acc = ConstantForm::scalar(self.dim, 1.0);
        for _ in 0..k {
            acc = acc.wedge(self);
        }
        acc
    }

    /// Pullback along the linear map `a: ℝ^m → ℝ^dim` (an `dim × m` matrix):
    /// `(a*α)(v₁,…,v_p) = α(a v₁, …, a v_p)`.
    pub fn pullback(&self, a: &DMatrix<f64>) -> ConstantForm {
        assert_eq!(a.nrows(), self.dim, "pullback matrix has wrong row count");
        let m = a.ncols();
        let p = self.degree;
        let mut out = ConstantForm::zero(m, p);
        if p == 0 {
            out.coeffs[0] = self.coeffs[0];
            return out;
        }
        let src = masks(self.dim, p);
        let dst = masks(m, p);
        let mut buf = vec![0.0; p * p];
        for (pj, &mj) in dst.iter().enumerate() {
            let cols = mask_indices(mj);
            let mut acc = Complex64::new(0.0, 0.0);
            for (pi, &mi) in src.iter().enumerate() {
                let c = self.coeffs[pi];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let rows = mask_indices(mi);
                for (r, &row) in rows.iter().enumerate() {
                    for (cc, &col) in cols.iter().enumerate() {
                        buf[r * p + cc] = a[(row, col)];
                    }
                }
                let d = det_in_place(&mut buf, p);
                if d != 0.0 {
                    acc += c * d;
                }
            }
            out.coeffs[pj] = acc;
        }
        out
    }

    /// `α(v₁, …, v_p)`.
    pub fn evaluate(&self, vectors: &[DVector<f64>]) -> Result<Complex64> {
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch {
                expected: self.degree,
                got: vectors.len(),
            });
        }
        if self.degree == 0 {
            return Ok(self.coeffs[0]);
        }
        let v = DMatrix::from_columns(vectors);
        Ok(self.pullback(&v).coeffs[0])
    }

    /// The derivation induced by the linear vector field `x`:
    /// `d/dt (exp(t x))^* α` at `t = 0`.
    pub fn derivation(&self, x: &DMatrix<f64>) -> ConstantForm {
        assert_eq!(x.shape(), (self.dim, self.dim));
        let table = masks(self.dim, self.degree);
        let mut out = ConstantForm::zero(self.dim, self.degree);
        for (pos, &mask) in table.iter().enumerate() {
            let c = self.coeffs[pos];
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for i in mask_indices(mask) {
                let rest = mask & !(1 << i);
                for j in 0..self.dim {
                    let xij = x[(i, j)];
                    if xij == 0.0 || rest & (1 << j) != 0 {
                        continue;
                    }
                    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                    let between =
                        rest & (((1u64 << hi) - 1) as u32) & !(((1u64 << (lo + 1)) - 1) as u32);
                    let sign = if between.count_ones().is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    };
                    let target = table
                        .binary_search(&(rest | (1 << j)))
                        .expect("same degree");
                    out.coeffs[target] += c * (xij * sign);
                }
            }
        }
        out
    }

    /// Interior product `ι_{e_a}`.
    pub fn interior(&self, a: usize) -> ConstantForm {
        assert!(a < self.dim);
        if self.degree == 0 {
            return ConstantForm::zero(self.dim, 0);
        }
        let mut out = ConstantForm::zero(self.dim, self.degree - 1);
        let src = masks(self.dim, self.degree);
        let dst = masks(self.dim, self.degree - 1);
        for (pos, &mask) in src.iter().enumerate() {
            if mask & (1 << a) == 0 {
                continue;
            }
            let below = (mask & ((1u32 << a) - 1)).count_ones();
            let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
            let target = dst
                .binary_search(&(mask & !(1 << a)))
                .expect("degree minus one");
            out.coeffs[target] += self.coeffs[pos] * sign;
        }
        out
    }

    /// The matrix `m[(a, b)] = α(e_a, e_b)` of a 2-form.
    pub fn to_bilinear(&self) -> Result<DMatrix<Complex64>> {
        if self.degree != 2 {
            return Err(Error::Invalid(format!(
                "expected a 2-form, got degree {}",
                self.degree
            )));
        }
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::new(0.0, 0.0));
        for (pos, &mask) in masks(self.dim, 2).iter().enumerate() {
            let idx = mask_indices(mask);
            m[(idx[0], idx[1])] = self.coeffs[pos];
            m[(idx[1], idx[0])] = -self.coeffs[pos];
        }
        Ok(m)
    }

    pub fn distance(&self, other: &ConstantForm) -> f64 {
        (self - other).norm()
    }
}

impl Add for &ConstantForm {
    type Output = ConstantForm;
    fn add(self, rhs: &ConstantForm) -> ConstantForm {
        self.check_same_space(rhs);
        ConstantForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Add for ConstantForm {
    type Output = ConstantForm;
    fn add(self, rhs: ConstantForm) -> ConstantForm {
        &self + &rhs
    }
}

impl Sub for &ConstantForm {
    type Output = ConstantForm;
    fn sub(self, rhs: &ConstantForm) -> ConstantForm {
        self.check_same_space(rhs);
        ConstantForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Sub for ConstantForm {
    type Output = ConstantForm;
    fn sub(self, rhs: ConstantForm) -> ConstantForm {
        &self - &rhs
    }
}

impl Neg for &ConstantForm {
    type Output = ConstantForm;
    fn neg(self) -> ConstantForm {
        self.scale_real(-1.0)
    }
}

impl Mul<f64> for &ConstantForm {
    type Output = ConstantForm;
    fn mul(self, rhs: f64) -> ConstantForm {
        self.scale_real(rhs)
    }
}
