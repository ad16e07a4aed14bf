//! Small fixed-size vector and tensor types used throughout.
//!
//! Everything is 2-dimensional; 1D meshes simply keep the second
//! component at zero, which lets the discretisation formulas stay
//! dimension-agnostic.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Rotate by -90 degrees: maps an edge tangent to one of its normals.
    pub fn perp(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    /// z-component of the cross product, treating both as 3D vectors.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A symmetric 2x2 tensor, used for diffusion coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymTensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymTensor2 {
    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymTensor2 { xx, xy, yy }
    }

    pub fn identity() -> Self {
        SymTensor2::new(1.0, 0.0, 1.0)
    }

    pub fn diagonal(a: f64, b: f64) -> Self {
        SymTensor2::new(a, 0.0, b)
    }

    /// Isotropic tensor `s * I`.
    pub fn isotropic(s: f64) -> Self {
        SymTensor2::diagonal(s, s)
    }

    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Quadratic form `u . (T v)`.
    pub fn bilinear(self, u: Vec2, v: Vec2) -> f64 {
        u.dot(self.apply(v))
    }

    /// Adds `s` to both eigenvalues (equivalently, adds `s * I`).
    pub fn add_scalar(self, s: f64) -> Self {
        SymTensor2::new(self.xx + s, self.xy, self.yy + s)
    }

    /// Eigenvalues in ascending order (closed form for 2x2 symmetric,
    /// written to avoid cancellation in the discriminant).
    pub fn eigenvalues(self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let disc = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (mean - disc, mean + disc)
    }

    pub fn is_positive_definite(self) -> bool {
        let (lo, _) = self.eigenvalues();
        lo > 0.0
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, o: SymTensor2) -> SymTensor2 {
        SymTensor2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, s: f64) -> SymTensor2 {
        SymTensor2::new(self.xx * s, self.xy * s, self.yy * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec2_basics() {
        let a = Vec2::new(1.0, 2.0);
        let b = Vec2::new(3.0, -1.0);
        assert_eq!(a.dot(b), 1.0);
        assert_eq!(a.cross(b), -7.0);
        assert_eq!((a + b).x, 4.0);
        assert_eq!(Vec2::new(3.0, 4.0).norm(), 5.0);
    }

    #[test]
    fn tensor_eigenvalues_closed_form() {
        let t = SymTensor2::new(2.0, 1.0, 2.0);
        let (lo, hi) = t.eigenvalues();
        assert!((lo - 1.0).abs() < 1e-14);
        assert!((hi - 3.0).abs() < 1e-14);
        assert!(t.is_positive_definite());
    }

    #[test]
    fn tensor_scalar_shift_moves_spectrum() {
        let t = SymTensor2::new(1.5e-4, 1e-6, 1e-8);
        let (lo, hi) = t.eigenvalues();
        let (lo2, hi2) = t.add_scalar(0.25).eigenvalues();
        assert!((lo2 - lo - 0.25).abs() < 1e-14);
        assert!((hi2 - hi - 0.25).abs() < 1e-14);
    }
}
