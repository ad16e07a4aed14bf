//! The hybrid unknown space: one value per cell plus one value per face,
//! its discrete gradients, reconstruction and norms, and the fixed
//! quadrature rules used for cell averages.

use crate::algebra::Vec2;
use crate::mesh::{CellSide, GeometryCache, PolyMesh};
use crate::{Error, Result};

/// One value per cell and one per face.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridField {
    pub cell: Vec<f64>,
    pub face: Vec<f64>,
}

impl HybridField {
    pub fn zeros(mesh: &PolyMesh) -> Self {
        HybridField {
            cell: vec![0.0; mesh.n_cells()],
            face: vec![0.0; mesh.n_faces()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.cell.iter().chain(&self.face).all(|v| v.is_finite())
    }

    /// Checks lengths against a mesh.
    pub fn check_sized(&self, mesh: &PolyMesh) -> Result<()> {
        if self.cell.len() != mesh.n_cells() || self.face.len() != mesh.n_faces() {
            return Err(Error::InvalidInput(format!(
                "field sized {}+{} does not match mesh {}+{}",
                self.cell.len(),
                self.face.len(),
                mesh.n_cells(),
                mesh.n_faces()
            )));
        }
        Ok(())
    }
}

/// Point-samples a scalar field at cell centroids and face midpoints.
pub fn interpolate(mesh: &PolyMesh, geom: &GeometryCache, u: impl Fn(Vec2) -> f64) -> HybridField {
    let cell = (0..mesh.n_cells())
        .map(|k| u(geom.cell(k).centroid))
        .collect();
    let face = (0..mesh.n_faces())
        .map(|f| u(geom.face(f).midpoint))
        .collect();
    HybridField { cell, face }
}

/// The cellwise Green-formula gradient
/// `(1/|K|) sum_sigma |sigma| (q_sigma - q_K) n_{K,sigma}`,
/// exact on interpolants of affine fields.
pub fn consistent_gradient(mesh: &PolyMesh, geom: &GeometryCache, q: &HybridField) -> Vec<Vec2> {
    (0..mesh.n_cells())
        .map(|k| consistent_gradient_cell(geom, q, k))
        .collect()
}

pub fn consistent_gradient_cell(geom: &GeometryCache, q: &HybridField, k: usize) -> Vec2 {
    let inv = 1.0 / geom.cell(k).measure;
    let mut g = Vec2::ZERO;
    for side in geom.sides(k) {
        g += side.normal * (side.measure * (q.face[side.face] - q.cell[k]) * inv);
    }
    g
}

/// The per-hull stabilisation
/// `(sqrt(d)/d_{K,sigma}) [q_sigma - q_K - grad . (x_sigma - x_K)] n_{K,sigma}`;
/// vanishes on interpolants of affine fields. One vector per cell side,
/// in the same order as `geom.sides(k)`.
pub fn stabilisation(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    q: &HybridField,
    consistent: &[Vec2],
) -> Vec<Vec<Vec2>> {
    let sqrt_d = (mesh.dim() as f64).sqrt();
    (0..mesh.n_cells())
        .map(|k| {
            geom.sides(k)
                .iter()
                .map(|side| {
                    stabilisation_side(sqrt_d, side, q.cell[k], q.face[side.face], consistent[k])
                })
                .collect()
        })
        .collect()
}

pub fn stabilisation_side(
    sqrt_d: f64,
    side: &CellSide,
    q_cell: f64,
    q_face: f64,
    grad: Vec2,
) -> Vec2 {
    let jump = q_face - q_cell - grad.dot(side.offset);
    side.normal * (sqrt_d / side.distance * jump)
}

/// Piecewise-constant reconstruction: value `q_K` on cell `K`.
pub fn reconstruct(q: &HybridField) -> &[f64] {
    &q.cell
}

/// Discrete L2 norm `(sum |K| q_K^2)^(1/2)`.
pub fn norm_l2(geom: &GeometryCache, q: &HybridField) -> f64 {
    q.cell
        .iter()
        .enumerate()
        .map(|(k, v)| geom.cell(k).measure * v * v)
        .sum::<f64>()
        .sqrt()
}

/// Discrete H1-like norm `(sum_K sum_sigma (|sigma|/d_{K,sigma}) (q_K - q_sigma)^2)^(1/2)`.
pub fn norm_h1_like(mesh: &PolyMesh, geom: &GeometryCache, q: &HybridField) -> f64 {
    let mut acc = 0.0;
    for k in 0..mesh.n_cells() {
        for side in geom.sides(k) {
            let jump = q.cell[k] - q.face[side.face];
            acc += side.measure / side.distance * jump * jump;
        }
    }
    acc.sqrt()
}

// ---------------------------------------------------------------------
// Quadrature: degree-2 rules on the hulls D_{K,sigma} (2D) and two-point
// Gauss on cells (1D). Degree 2 keeps quadrature error at O(h^3), below
// any error the studies measure.
// ---------------------------------------------------------------------

/// Average of `f` over cell `k`.
pub fn cell_average(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    k: usize,
    f: impl Fn(Vec2) -> f64,
) -> f64 {
    cell_integral(mesh, geom, k, f) / geom.cell(k).measure
}

/// Integral of `f` over cell `k`.
pub fn cell_integral(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    k: usize,
    f: impl Fn(Vec2) -> f64,
) -> f64 {
    if mesh.dim() == 1 {
        let c = geom.cell(k).centroid;
        let len = geom.cell(k).measure;
        let off = 0.5 * len / 3.0f64.sqrt();
        0.5 * len * (f(Vec2::new(c.x - off, 0.0)) + f(Vec2::new(c.x + off, 0.0)))
    } else {
        let centroid = geom.cell(k).centroid;
        let mut acc = 0.0;
        for side in geom.sides(k) {
            let face = mesh.face(side.face);
            let p1 = mesh.vertex(face.vertices.0);
            let p2 = mesh.vertex(face.vertices.1.expect("2D face"));
            // 3-point edge-midpoint rule, exact to degree 2
            let m01 = (centroid + p1) * 0.5;
            let m12 = (p1 + p2) * 0.5;
            let m20 = (p2 + centroid) * 0.5;
            acc += side.hull_measure / 3.0 * (f(m01) + f(m12) + f(m20));
        }
        acc
    }
}

/// Componentwise average of a vector field over cell `k`.
pub fn cell_average_vec(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    k: usize,
    f: impl Fn(Vec2) -> Vec2,
) -> Vec2 {
    let fx = cell_average(mesh, geom, k, |p| f(p).x);
    let fy = cell_average(mesh, geom, k, |p| f(p).y);
    Vec2::new(fx, fy)
}

/// Face quadrature rule for boundary data and normal velocities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FaceQuadrature {
    /// Value at the face midpoint.
    #[default]
    Midpoint,
    /// Two-point Gauss along the face (exact to degree 3).
    Gauss2,
}

/// Average of `f` over face `fi` by the selected rule.
pub fn face_average(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    fi: usize,
    rule: FaceQuadrature,
    f: impl Fn(Vec2) -> f64,
) -> f64 {
    let fg = geom.face(fi);
    if mesh.dim() == 1 {
        return f(fg.midpoint);
    }
    match rule {
        FaceQuadrature::Midpoint => f(fg.midpoint),
        FaceQuadrature::Gauss2 => {
            let face = mesh.face(fi);
            let p1 = mesh.vertex(face.vertices.0);
            let p2 = mesh.vertex(face.vertices.1.expect("2D face"));
            let half = (p2 - p1) * 0.5;
            let g = 1.0 / 3.0f64.sqrt();
            0.5 * (f(fg.midpoint - half * g) + f(fg.midpoint + half * g))
        }
    }
}
