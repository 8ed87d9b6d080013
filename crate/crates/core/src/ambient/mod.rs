//! Ambient spaces with closed-form geodesics: the flat hyperkähler torus
//! `ℍⁿ/Λ` and the round sphere used as a curved control.

mod catalog;
mod lattice;
mod patch;
mod subtorus;

pub use catalog::{Catalog, CatalogEntry};
pub use patch::ParametrizedPatch;
pub use subtorus::{is_quaternionic_subspace, AffineSubtorus};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `ℍⁿ/Λ` with the Euclidean metric; the lattice basis is stored as columns.
#[derive(Clone, Debug)]
pub struct HKTorus {
    n: usize,
    lattice: DMatrix<f64>,
    r_factor: DMatrix<f64>,
    orthogonal: bool,
}

impl HKTorus {
    /// The standard lattice `ℤ^{4n}`.
    pub fn unit(n: usize) -> Self {
        HKTorus::with_lattice(n, DMatrix::identity(4 * n, 4 * n))
            .expect("identity is a lattice basis")
    }

    pub fn with_lattice(n: usize, lattice: DMatrix<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid(
                "quaternionic dimension must be positive".into(),
            ));
        }
        if lattice.shape() != (4 * n, 4 * n) {
            return Err(Error::DimensionMismatch {
                expected: 4 * n,
                got: lattice.nrows(),
            });
        }
        if lattice.determinant().abs() < 1e-12 {
            return Err(Error::Invalid("lattice basis is singular".into()));
        }
        let gram = lattice.transpose() * &lattice;
        let orthogonal = (0..4 * n).all(|i| {
            (0..4 * n)
                .all(|j| i == j || gram[(i, j)].abs() <= 1e-14 * gram[(i, i)].max(gram[(j, j)]))
        });
        let r_factor = lattice.clone().qr().r();
        Ok(HKTorus {
            n,
            lattice,
            r_factor,
            orthogonal,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn lattice(&self) -> &DMatrix<f64> {
        &self.lattice
    }

    /// Covolume of the lattice.
    pub fn volume(&self) -> f64 {
        self.lattice.determinant().abs()
    }

    /// Coordinates of `x` in the lattice basis.
    pub fn lattice_coordinates(&self, x: &DVector<f64>) -> DVector<f64> {
        self.lattice
            .clone()
            .lu()
            .solve(x)
            .expect("lattice basis is invertible")
    }

    /// Representative of `x` in the fundamental cell `B·[0,1)^{4n}`.
    pub fn reduce(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self.lattice_coordinates(x).map(|t| t - t.floor());
        &self.lattice * c
    }

    /// Flat distance: the shortest representative of `y − x` modulo the lattice.
    pub fn distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let d = y - x;
        if self.orthogonal {
            // independent coordinates along orthogonal basis vectors
            let c = self.lattice_coordinates(&d).map(|t| t - t.round());
            return (&self.lattice * c).norm();
        }
        lattice::closest_vector_distance(&self.lattice, &self.r_factor, &d)
    }
}

/// The round sphere of dimension `m` and given radius, embedded in `ℝ^{m+1}`.
#[derive(Clone, Debug)]
pub struct RoundSphere {
    m: usize,
    radius: f64,
}

impl RoundSphere {
    pub fn new(m: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Invalid(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(RoundSphere { m, radius })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Arc length, via the chord to stay accurate for nearby points.
    pub fn distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let r = self.radius;
        let a = x * (r / x.norm());
        let b = y * (r / y.norm());
        let chord = (a - b).norm() / (2.0 * r);
        2.0 * r * chord.min(1.0).asin()
    }

    /// Nearest point on the sphere.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        x * (self.radius / x.norm())
    }
}

#[derive(Clone, Debug)]
pub enum Ambient {
    Torus(HKTorus),
    Sphere(RoundSphere),
}

impl Ambient {
    /// Dimension of the Euclidean space carrying the points.
    pub fn embedding_dim(&self) -> usize {
        match self {
            Ambient::Torus(t) => t.dim(),
            Ambient::Sphere(s) => s.m() + 1,
        }
    }

    pub fn distance(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match self {
            Ambient::Torus(t) => t.distance(x, y),
            Ambient::Sphere(s) => s.distance(x, y),
        }
    }

    /// Removes from `v` the directions not tangent to the ambient at `x`.
    pub fn tangent_part(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Ambient::Torus(_) => v.clone(),
            Ambient::Sphere(_) => {
                let u = x / x.norm();
                v - &u * u.dot(v)
            }
        }
    }

    /// Distance of `x` from the ambient (0 on the torus).
    pub fn membership_defect(&self, x: &DVector<f64>) -> f64 {
        match self {
            Ambient::Torus(_) => 0.0,
            Ambient::Sphere(s) => (x.norm() - s.radius()).abs(),
        }
    }
}

/// Geodesic distance in the ambient.
pub fn geodesic_distance(ambient: &Ambient, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    ambient.distance(x, y)
}
