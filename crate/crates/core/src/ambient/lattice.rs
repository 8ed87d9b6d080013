//! Integer-lattice helpers: rational subspaces, saturated sublattices and
//! closest lattice vectors.

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;

use crate::error::{Error, Result};

const MAX_DENOMINATOR: i64 = 1000;
const RATIONAL_TOL: f64 = 1e-10;

/// Best rational approximation with denominator at most [`MAX_DENOMINATOR`]
/// by continued fractions, accepted only within [`RATIONAL_TOL`].
fn rationalize(x: f64) -> Option<(i64, i64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > MAX_DENOMINATOR {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (x - p1 as f64 / q1 as f64).abs() <= RATIONAL_TOL {
            return Some((p1, q1));
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    ((x - p1 as f64 / q1 as f64).abs() <= RATIONAL_TOL && q1 > 0).then_some((p1, q1))
}

/// Reduced row echelon form of a `d × n` matrix of full row rank, with the
/// pivot columns.
fn rref(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.amax().max(1.0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= 1e-9 * scale {
            continue;
        }
        a.swap_rows(r, best);
        let p = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= f * a[(r, j)];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Echelon basis of the lattice generated by integer vectors of length `d`.
/// Assumes the generators have full rank `d`.
fn echelon_basis(gens: &[Vec<i128>], d: usize) -> Vec<Vec<i128>> {
    let mut basis: Vec<Option<Vec<i128>>> = vec![None; d];
    for g in gens {
        let mut v = g.clone();
        for p in 0..d {
            if v[p] == 0 {
                continue;
            }
            match basis[p].take() {
                None => {
                    if v[p] < 0 {
                        v.iter_mut().for_each(|x| *x = -*x);
                    }
                    basis[p] = Some(v);
                    break;
                }
                Some(b) => {
                    let eg = b[p].extended_gcd(&v[p]);
                    let (g, s, t) = (eg.gcd, eg.x, eg.y);
                    let (bp, vp) = (b[p] / g, v[p] / g);
                    let nb: Vec<i128> = b.iter().zip(&v).map(|(x, y)| s * x + t * y).collect();
                    let nv: Vec<i128> = b.iter().zip(&v).map(|(x, y)| vp * x - bp * y).collect();
                    basis[p] = Some(nb);
                    v = nv;
                }
            }
        }
    }
    basis.into_iter().flatten().collect()
}

/// Integer basis (columns, lattice coordinates) of `ℤⁿ ∩ span(v)` for the
/// column span of `v` in lattice coordinates.
pub(crate) fn saturated_sublattice(v: &DMatrix<f64>) -> Result<DMatrix<i64>> {
    let (n, d) = v.shape();
    if d == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let (c, pivots) = rref(&v.transpose());
    if pivots.len() != d {
        return Err(Error::RankDeficient {
            rank: pivots.len(),
            expected: d,
        });
    }
    // Rational echelon rows; `den` is a common denominator.
    let mut num = vec![vec![0i64; n]; d];
    let mut den = 1i64;
    let mut fracs = vec![vec![(0i64, 1i64); n]; d];
    for i in 0..d {
        for j in 0..n {
            let (p, q) = rationalize(c[(i, j)]).ok_or_else(|| {
                Error::NonRational(format!(
                    "echelon entry {:.12} has no small rational form",
                    c[(i, j)]
                ))
            })?;
            fracs[i][j] = (p, q);
            den = den.lcm(&q);
        }
    }
    for i in 0..d {
        for j in 0..n {
            let (p, q) = fracs[i][j];
            num[i][j] = p * (den / q);
        }
    }
    // The rational rows must span the same space as the input.
    let cr = DMatrix::from_fn(d, n, |i, j| num[i][j] as f64 / den as f64);
    let q = crate::linalg::orthonormal_columns(v)?;
    let resid = (&cr.transpose() - &q * (q.transpose() * cr.transpose())).amax();
    if resid > 1e-9 {
        return Err(Error::NonRational(format!(
            "rational echelon form misses the span by {resid:e}"
        )));
    }
    // x = Σ aᵢ rowᵢ is integral iff a ∈ ℤᵈ and a·colⱼ ∈ ℤ for each column;
    // those a form the dual of ℤᵈ + Σ ℤ colⱼ.
    let mut gens: Vec<Vec<i128>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|k| if k == i { den as i128 } else { 0 })
                .collect()
        })
        .collect();
    for j in 0..n {
        if !pivots.contains(&j) {
            gens.push((0..d).map(|i| num[i][j] as i128).collect());
        }
    }
    let h = echelon_basis(&gens, d);
    if h.len() != d {
        return Err(Error::RankDeficient {
            rank: h.len(),
            expected: d,
        });
    }
    let hm = DMatrix::from_fn(d, d, |i, k| h[k][i] as f64);
    let dual = hm
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Invalid("singular coefficient lattice".into()))?
        * den as f64;
    let sat = cr.transpose() * dual;
    let mut out = DMatrix::<i64>::zeros(n, d);
    for i in 0..n {
        for k in 0..d {
            let x = sat[(i, k)];
            let r = x.round();
            if (x - r).abs() > 1e-6 {
                return Err(Error::Invalid(format!(
                    "sublattice vector entry {x} is not integral"
                )));
            }
            out[(i, k)] = r as i64;
        }
    }
    Ok(out)
}

/// Minimal `|d − B k|` over integer `k`, by depth-first enumeration on the
/// triangular factor of `B` seeded with the rounded solution.
pub(crate) fn closest_vector_distance(
    basis: &DMatrix<f64>,
    r: &DMatrix<f64>,
    d: &DVector<f64>,
) -> f64 {
    let n = basis.ncols();
    let c = basis
        .clone()
        .lu()
        .solve(d)
        .expect("lattice basis is invertible");
    let frac = c.map(|x| x - x.round());
    let babai = (basis * &frac).norm();
    let mut best = babai * babai * (1.0 + 1e-12) + 1e-300;
    // y = frac − k', enumerate integer offsets k' around zero.
    let mut y = vec![0.0; n];
    fn recurse(
        level: usize,
        r: &DMatrix<f64>,
        frac: &DVector<f64>,
        y: &mut [f64],
        acc: f64,
        best: &mut f64,
    ) {
        let n = frac.len();
        let mut shift = 0.0;
        for j in (level + 1)..n {
            shift += r[(level, j)] * y[j];
        }
        let rii = r[(level, level)];
        // contribution (rii·(frac_i − k) + shift)²
        let center = frac[level] + shift / rii;
        let base = center.round();
        let mut offset = 0i64;
        loop {
            let mut any = false;
            for k in if offset == 0 {
                vec![base]
            } else {
                vec![base + offset as f64, base - offset as f64]
            } {
                let t = rii * (center - k);
                let cost = acc + t * t;
                if cost < *best {
                    any = true;
                    y[level] = frac[level] - k;
                    if level == 0 {
                        *best = cost;
                    } else {
                        recurse(level - 1, r, frac, y, cost, best);
                    }
                }
            }
            if !any && offset > 0 {
                break;
            }
            offset += 1;
            if offset > 64 {
                break;
            }
        }
    }
    if n > 0 {
        recurse(n - 1, r, &frac, &mut y, 0.0, &mut best);
    }
    best.sqrt().min(babai)
}
