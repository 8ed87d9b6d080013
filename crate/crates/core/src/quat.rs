//! Quaternions, induced complex structures and the SU(2) actions on `ℍⁿ`.
//!
//! `ℍⁿ` is identified with `ℝ^{4n}` block by block, each block holding the
//! coordinates of `w + x·i + y·j + z·k` in the basis `1, i, j, k`.
//! Complex structures act by left multiplication, so the operators of `i`
//! and `j` compose to the operator of `k`. The structure sphere is rotated by
//! two-sided conjugation `v ↦ u·v·ū`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the unit-norm preconditions.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOL
    }

    /// Rotation of the structure sphere: `self · q · conj(self)`.
    pub fn conjugate_action(self, q: Quaternion) -> Quaternion {
        self * q * self.conj()
    }

    /// `exp` of a pure imaginary quaternion `t·q`, `|q| = 1`: `cos t + q sin t`.
    pub fn exp_imaginary(q: ImaginaryUnit, t: f64) -> Quaternion {
        let v = q.as_quaternion();
        Quaternion::new(t.cos(), v.x * t.sin(), v.y * t.sin(), v.z * t.sin())
    }
}

/// Hamilton product.
pub fn qmul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        qmul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i + {}j + {}k", self.w, self.x, self.y, self.z)
    }
}

/// A point `aI + bJ + cK` of the sphere of induced complex structures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryUnit(Quaternion);

impl ImaginaryUnit {
    pub const I: ImaginaryUnit = ImaginaryUnit(Quaternion::I);
    pub const J: ImaginaryUnit = ImaginaryUnit(Quaternion::J);
    pub const K: ImaginaryUnit = ImaginaryUnit(Quaternion::K);

    /// Checked constructor: `a² + b² + c² = 1` within `1e-12`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let n2 = a * a + b * b + c * c;
        if !n2.is_finite() || (n2 - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotImaginaryUnit(format!("|(a,b,c)|² = {n2}")));
        }
        Ok(ImaginaryUnit(Quaternion::new(0.0, a, b, c)))
    }

    /// Normalizing constructor for arbitrary nonzero `(a, b, c)`.
    pub fn normalized(a: f64, b: f64, c: f64) -> Result<Self> {
        let n = (a * a + b * b + c * c).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotImaginaryUnit("zero vector".into()));
        }
        Ok(ImaginaryUnit(Quaternion::new(0.0, a / n, b / n, c / n)))
    }

    pub fn from_quaternion(q: Quaternion) -> Result<Self> {
        if q.w.abs() > UNIT_TOL {
            return Err(Error::NotImaginaryUnit(format!("real part {}", q.w)));
        }
        ImaginaryUnit::new(q.x, q.y, q.z)
    }

    pub fn as_quaternion(self) -> Quaternion {
        self.0
    }

    pub fn components(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn distance(self, other: ImaginaryUnit) -> f64 {
        (self.0 - other.0).norm()
    }
}

impl Neg for ImaginaryUnit {
    type Output = ImaginaryUnit;

    fn neg(self) -> ImaginaryUnit {
        ImaginaryUnit(-self.0)
    }
}

impl fmt::Display for ImaginaryUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.components();
        write!(f, "({a:.6}, {b:.6}, {c:.6})")
    }
}

/// A dense real operator on `ℝ^{4n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    n: usize,
    matrix: DMatrix<f64>,
}

impl LinearOperator {
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.shape() != (4 * n, 4 * n) {
            return Err(Error::DimensionMismatch {
                expected: 4 * n,
                got: matrix.nrows(),
            });
        }
        Ok(LinearOperator { n, matrix })
    }

    pub fn identity(n: usize) -> Self {
        LinearOperator {
            n,
            matrix: DMatrix::identity(4 * n, 4 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LinearOperator) -> LinearOperator {
        LinearOperator {
            n: self.n,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    pub fn transpose(&self) -> LinearOperator {
        LinearOperator {
            n: self.n,
            matrix: self.matrix.transpose(),
        }
    }

    /// `‖AᵀA − Id‖_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim();
        (self.matrix.transpose() * &self.matrix - DMatrix::<f64>::identity(d, d)).norm()
    }

    pub fn distance(&self, other: &LinearOperator) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

/// Matrix of `v ↦ f(v)` applied blockwise on `ℍⁿ`, for a real-linear map
/// `f` of `ℍ`.
fn blockwise(n: usize, f: impl Fn(Quaternion) -> Quaternion) -> DMatrix<f64> {
    let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let mut block = [[0.0; 4]; 4];
    for (col, e) in basis.iter().enumerate() {
        let img = f(*e).to_array();
        for row in 0..4 {
            block[row][col] = img[row];
        }
    }
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for b in 0..n {
        for r in 0..4 {
            for c in 0..4 {
                m[(4 * b + r, 4 * b + c)] = block[r][c];
            }
        }
    }
    m
}

/// Left multiplication by an arbitrary quaternion, blockwise on `ℍⁿ`.
pub fn left_multiplication(q: Quaternion, n: usize) -> LinearOperator {
    LinearOperator {
        n,
        matrix: blockwise(n, |v| q * v),
    }
}

/// Right multiplication by an arbitrary quaternion, blockwise on `ℍⁿ`.
pub fn right_multiplication(q: Quaternion, n: usize) -> LinearOperator {
    LinearOperator {
        n,
        matrix: blockwise(n, |v| v * q),
    }
}

/// The operator of an induced complex structure: left multiplication by `L`.
pub fn complex_structure_operator(l: ImaginaryUnit, n: usize) -> LinearOperator {
    left_multiplication(l.as_quaternion(), n)
}

fn check_unit(u: Quaternion) -> Result<()> {
    if u.is_unit() {
        Ok(())
    } else {
        Err(Error::NonUnitQuaternion(u.norm()))
    }
}

/// `v ↦ u·v·ū` blockwise. Rejects non-unit `u`.
pub fn su2_tangent_action(u: Quaternion, n: usize) -> Result<LinearOperator> {
    check_unit(u)?;
    Ok(LinearOperator {
        n,
        matrix: blockwise(n, |v| u * v * u.conj()),
    })
}

/// The rotated structure `u·L·ū`.
pub fn rotate_structure(u: Quaternion, l: ImaginaryUnit) -> Result<ImaginaryUnit> {
    check_unit(u)?;
    let r = u.conjugate_action(l.as_quaternion());
    ImaginaryUnit::normalized(r.x, r.y, r.z)
}

/// An ordered triple of induced complex structures with `I·J = K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureTriple {
    pub i: ImaginaryUnit,
    pub j: ImaginaryUnit,
    pub k: ImaginaryUnit,
}

impl StructureTriple {
    pub const STANDARD: StructureTriple = StructureTriple {
        i: ImaginaryUnit::I,
        j: ImaginaryUnit::J,
        k: ImaginaryUnit::K,
    };

    /// Validates `I·J = K` as quaternions (equivalently `I∘J = K` as
    /// operators) at tolerance `1e-10`.
    pub fn new(i: ImaginaryUnit, j: ImaginaryUnit, k: ImaginaryUnit) -> Result<Self> {
        let defect = (i.as_quaternion() * j.as_quaternion() - k.as_quaternion()).norm();
        if defect > 1e-10 {
            return Err(Error::NotATriple(defect));
        }
        Ok(StructureTriple { i, j, k })
    }

    /// The standard triple rotated by `u`.
    pub fn rotated(u: Quaternion) -> Result<Self> {
        Ok(StructureTriple {
            i: rotate_structure(u, ImaginaryUnit::I)?,
            j: rotate_structure(u, ImaginaryUnit::J)?,
            k: rotate_structure(u, ImaginaryUnit::K)?,
        })
    }
}

/// Uniform random unit quaternion from four Gaussian coordinates.
pub fn random_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> Quaternion {
    loop {
        let q = Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 1e-6 {
            return q.normalized();
        }
    }
}

/// Uniform random induced complex structure.
pub fn random_structure<R: rand::Rng + ?Sized>(rng: &mut R) -> ImaginaryUnit {
    loop {
        let (a, b, c): (f64, f64, f64) = (
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if a * a + b * b + c * c > 1e-12 {
            if let Ok(l) = ImaginaryUnit::normalized(a, b, c) {
                return l;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(p: Quaternion, q: Quaternion, tol: f64) -> bool {
        (p - q).norm() <= tol
    }

    /// Multiplication table used as an independent oracle for the Hamilton product.
    fn table_product(p: Quaternion, q: Quaternion) -> Quaternion {
        // table[a][b] = (sign, index) of e_a * e_b, basis (1, i, j, k).
        let table: [[(f64, usize); 4]; 4] = [
            [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
            [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
            [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
            [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
        ];
        let (a, b) = (p.to_array(), q.to_array());
        let mut out = [0.0; 4];
        for r in 0..4 {
            for c in 0..4 {
                let (s, idx) = table[r][c];
                out[idx] += s * a[r] * b[c];
            }
        }
        Quaternion::from_array(out)
    }

    #[test]
    fn defining_relations() {
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::K, Quaternion::I);
        assert_eq!(Quaternion::K * Quaternion::I, Quaternion::J);
        assert_eq!(Quaternion::I * Quaternion::I, -Quaternion::ONE);
    }

    #[test]
    fn unit_times_conjugate_is_one() {
        let p = Quaternion::new(S, 0.0, 0.0, S);
        let q = Quaternion::new(S, 0.0, 0.0, -S);
        assert!(close(p * q, Quaternion::ONE, 1e-15));
    }

    #[test]
    fn square_of_half_sum() {
        let h = Quaternion::new(0.5, 0.5, 0.5, 0.5);
        let expected = table_product(h, h);
        assert!(close(expected, Quaternion::new(-0.5, 0.5, 0.5, 0.5), 1e-15));
        assert!(close(h * h, expected, 1e-15));
    }

    #[test]
    fn hamilton_product_matches_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = random_unit(&mut rng).scale(1.7);
            let q = random_unit(&mut rng).scale(0.3);
            assert!(close(p * q, table_product(p, q), 1e-14));
            assert!(((p * q).norm() - p.norm() * q.norm()).abs() < 1e-14);
            assert!(close((p * q).conj(), q.conj() * p.conj(), 1e-14));
        }
    }

    #[test]
    fn left_multiplication_table_for_i() {
        let op = complex_structure_operator(ImaginaryUnit::I, 1);
        let m = op.matrix();
        // 1 ↦ i, i ↦ −1, j ↦ k, k ↦ −j
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, -1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, -1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        );
        assert_eq!(m, &expected);
    }

    #[test]
    fn i_then_j_composes_to_k() {
        for n in 1..=3 {
            let i = complex_structure_operator(ImaginaryUnit::I, n);
            let j = complex_structure_operator(ImaginaryUnit::J, n);
            let k = complex_structure_operator(ImaginaryUnit::K, n);
            assert!(i.compose(&j).distance(&k) < 1e-15);
            assert!(j.compose(&i).distance(&k.transpose()) < 1e-15);
        }
    }

    #[test]
    fn diagonal_structure_squares_to_minus_identity() {
        let l = ImaginaryUnit::new(S, S, 0.0).unwrap();
        let op = complex_structure_operator(l, 1);
        let sq = op.compose(&op);
        assert!((sq.matrix() + DMatrix::<f64>::identity(4, 4)).norm() < 1e-15);
        assert!(op.orthogonality_defect() < 1e-15);
        assert!((op.matrix().transpose() + op.matrix()).norm() < 1e-15);
    }

    #[test]
    fn tangent_action_examples() {
        let id = su2_tangent_action(Quaternion::ONE, 2).unwrap();
        assert_eq!(id, LinearOperator::identity(2));

        let u = Quaternion::new(S, 0.0, 0.0, S);
        // Oracle: (1+k) i (1−k) / 2 = j.
        let oracle = table_product(
            table_product(Quaternion::new(1.0, 0.0, 0.0, 1.0), Quaternion::I),
            Quaternion::new(1.0, 0.0, 0.0, -1.0),
        )
        .scale(0.5);
        assert!(close(oracle, Quaternion::J, 1e-15));
        let a = su2_tangent_action(u, 1).unwrap();
        let img = a.apply(&DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]));
        assert!((img - DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0])).norm() < 1e-15);

        let a = su2_tangent_action(Quaternion::I, 1).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0]));
        assert!((a.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn non_unit_quaternions_are_rejected() {
        let u = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        assert!(matches!(
            su2_tangent_action(u, 1),
            Err(Error::NonUnitQuaternion(_))
        ));
        assert!(rotate_structure(u, ImaginaryUnit::I).is_err());
    }

    #[test]
    fn rotate_structure_examples() {
        assert_eq!(
            rotate_structure(Quaternion::ONE, ImaginaryUnit::J).unwrap(),
            ImaginaryUnit::J
        );
        let u = Quaternion::new(S, 0.0, 0.0, S);
        let r = rotate_structure(u, ImaginaryUnit::I).unwrap();
        assert!(r.distance(ImaginaryUnit::J) < 1e-15);
    }

    #[test]
    fn imaginary_unit_constructor_checks_norm() {
        assert!(ImaginaryUnit::new(1.0, 1e-3, 0.0).is_err());
        assert!(ImaginaryUnit::new(0.6, 0.8, 0.0).is_ok());
        assert!(ImaginaryUnit::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn triple_validation() {
        assert!(StructureTriple::new(ImaginaryUnit::I, ImaginaryUnit::J, ImaginaryUnit::K).is_ok());
        assert!(matches!(
            StructureTriple::new(ImaginaryUnit::J, ImaginaryUnit::I, ImaginaryUnit::K),
            Err(Error::NotATriple(_))
        ));
    }
}
