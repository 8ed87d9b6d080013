//! Small dense linear-algebra helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Orthonormalizes the columns of `w` by twice-iterated modified Gram–Schmidt.
///
/// The triangular factor has a positive diagonal, so the returned frame spans
/// the same oriented subspace as `w`. Fails if the columns are dependent at
/// relative tolerance `1e-10`.
pub fn orthonormal_columns(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = w.shape();
    let mut q = DMatrix::<f64>::zeros(rows, cols);
    for j in 0..cols {
        let original = w.column(j).into_owned();
        let scale = original.norm();
        let mut v = original.clone();
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let c = qi.dot(&v);
                v.axpy(-c, &qi.into_owned(), 1.0);
            }
        }
        let norm = v.norm();
        if scale == 0.0 || norm <= 1e-10 * scale {
            return Err(Error::RankDeficient {
                rank: j,
                expected: cols,
            });
        }
        q.set_column(j, &(v / norm));
    }
    Ok(q)
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal frame `q`, built by pivoted Gram–Schmidt on the standard basis.
pub fn orthogonal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = q.shape();
    let mut basis: Vec<DVector<f64>> = (0..d).map(|j| q.column(j).into_owned()).collect();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(n - d);
    while out.len() < n - d {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for i in 0..n {
            let mut v = DVector::<f64>::zeros(n);
            v[i] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&v);
                    v.axpy(-c, b, 1.0);
                }
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn + 1e-14) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("complement search over a nonempty basis");
        let v = v / norm;
        basis.push(v.clone());
        out.push(v);
    }
    if out.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

/// `‖(I − QQᵀ) M Q‖_F`: how far `M` moves the span of `q` out of itself.
pub fn invariance_residual(q: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    let mq = m * q;
    let back = q * (q.transpose() * &mq);
    (mq - back).norm()
}

/// Numerical rank with singular values compared against `rel_tol · σ_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Orthonormal basis (columns) of the null space of `m`, using singular values
/// below `abs_tol`. Wide matrices are padded with zero rows first.
pub fn null_space(m: &DMatrix<f64>, abs_tol: f64) -> (DMatrix<f64>, DVector<f64>) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DMatrix::<f64>::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sv = svd.singular_values;
    let cols: Vec<DVector<f64>> = (0..sv.len())
        .filter(|&i| sv[i] <= abs_tol)
        .map(|i| v_t.row(i).transpose())
        .collect();
    let basis = if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    (basis, sv)
}

/// Unitary factor of the polar decomposition, the solution of the unitary
/// Procrustes problem `min ‖M − U‖`.
///
/// Uses the Newton iteration `X ← ½(X + X^{−†})`, which is accurate to
/// roundoff for the well-conditioned matrices met in frame alignment; a
/// singular iterate falls back to the SVD.
pub fn polar_unitary(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut x = m.clone();
    for _ in 0..100 {
        let Some(inv) = x.clone().try_inverse() else {
            let svd = m.clone().svd(true, true);
            return svd.u.expect("requested left singular vectors")
                * svd.v_t.expect("requested right singular vectors");
        };
        let next = (&x + inv.adjoint()) * Complex64::new(0.5, 0.0);
        let change = (&next - &x).norm();
        x = next;
        if change <= 1e-15 * x.norm().max(1.0) {
            break;
        }
    }
    x
}

/// Determinant of a small square matrix stored row-major in `a` (size k×k),
/// by Gaussian elimination with partial pivoting. Destroys `a`.
pub fn det_in_place(a: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        let mut best = a[col * k + col].abs();
        for r in (col + 1)..k {
            let v = a[r * k + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..k {
                a.swap(col * k + c, piv * k + c);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for r in (col + 1)..k {
            let f = a[r * k + col] / p;
            if f != 0.0 {
                for c in col..k {
                    a[r * k + c] -= f * a[col * k + c];
                }
            }
        }
    }
    det
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
