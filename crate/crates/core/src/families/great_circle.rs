use nalgebra::{DMatrix, DVector, Vector3};

use super::DeformationFamily;
use crate::ambient::{Ambient, RoundSphere};
use crate::error::Result;

/// Great circles of the unit sphere `S² ⊂ ℝ³`, indexed by the spherical
/// coordinates `s = (θ, φ)` of their pole `p(s)`.
///
/// The natural connection moves `x ∈ X_s` by `ẋ = −(ṗ·x) p`, which is
/// Levi-Civita transport of `x` as a tangent vector at `p`; the holonomy
/// around a loop rotates each circle by the enclosed solid angle.
#[derive(Clone, Debug)]
pub struct GreatCircleFamily {
    ambient: Ambient,
    basepoint: DVector<f64>,
}

fn v3(x: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

fn dv(x: Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

impl GreatCircleFamily {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        Ok(GreatCircleFamily {
            ambient: Ambient::Sphere(RoundSphere::new(2, 1.0)?),
            basepoint: DVector::from_vec(vec![theta, phi]),
        })
    }

    pub fn pole(s: &DVector<f64>) -> Vector3<f64> {
        let (t, p) = (s[0], s[1]);
        Vector3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
    }

    /// `∂p/∂s · t`.
    pub fn pole_velocity(s: &DVector<f64>, t: &DVector<f64>) -> Vector3<f64> {
        let (th, ph) = (s[0], s[1]);
        let d_theta = Vector3::new(th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin());
        let d_phi = Vector3::new(-th.sin() * ph.sin(), th.sin() * ph.cos(), 0.0);
        d_theta * t[0] + d_phi * t[1]
    }

    /// Solid angle enclosed by the pole along the coordinate loop
    /// `s → s + h e_θ → s + h e_θ + h e_φ → s + h e_φ → s`.
    pub fn loop_solid_angle(s: &DVector<f64>, h: f64) -> f64 {
        h * (s[0].cos() - (s[0] + h).cos())
    }

    /// Signed rotation angle from `x` to `y` within the circle with pole `p(s)`.
    pub fn rotation_angle(s: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let p = Self::pole(s);
        let (x, y) = (v3(x), v3(y));
        p.dot(&x.cross(&y)).atan2(x.dot(&y))
    }

    /// The closed-form normal section: `−(ṗ·x) p` at `x ∈ X_s`.
    pub fn rotational_normal(s: &DVector<f64>, t: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        let p = Self::pole(s);
        dv(p * -Self::pole_velocity(s, t).dot(&v3(x)))
    }
}

impl DeformationFamily for GreatCircleFamily {
    fn name(&self) -> String {
        "great-circles(S2)".into()
    }

    fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    fn base_dim(&self) -> usize {
        2
    }

    fn fiber_dim(&self) -> usize {
        1
    }

    fn basepoint(&self) -> DVector<f64> {
        self.basepoint.clone()
    }

    fn fiber_extent(&self) -> f64 {
        std::f64::consts::TAU
    }

    fn embed(&self, s: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let (th, ph) = (s[0], s[1]);
        let e1 = Vector3::new(th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin());
        let e2 = Vector3::new(-ph.sin(), ph.cos(), 0.0);
        dv(e1 * u[0].cos() + e2 * u[0].sin())
    }

    fn fiber_tangent(&self, s: &DVector<f64>, x: &DVector<f64>) -> DMatrix<f64> {
        let t = Self::pole(s).cross(&v3(x)).normalize();
        DMatrix::from_column_slice(3, 1, t.as_slice())
    }

    fn variation(&self, s: &DVector<f64>, t: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        // infinitesimal rotation carrying p to p + ε ṗ
        let omega = Self::pole(s).cross(&Self::pole_velocity(s, t));
        dv(omega.cross(&v3(x)))
    }

    fn fiber_defect(&self, s: &DVector<f64>, x: &DVector<f64>) -> f64 {
        Self::pole(s).dot(&v3(x)).abs() + (x.norm() - 1.0).abs()
    }
}
