//! Geometric quantities consumed by the discretisation.

use super::PolyMesh;
use crate::algebra::Vec2;
use crate::{Error, Result};

/// Per-(cell, face) geometry, oriented outward from the cell.
#[derive(Clone, Copy, Debug)]
pub struct CellSide {
    /// Global face index.
    pub face: usize,
    /// Face measure (edge length in 2D, 1 in 1D).
    pub measure: f64,
    /// Unit normal pointing out of the cell.
    pub normal: Vec2,
    /// Face midpoint minus cell centroid.
    pub offset: Vec2,
    /// Orthogonal distance from the centroid to the face plane.
    pub distance: f64,
    /// Measure of the hull of the face and the centroid, computed from
    /// the vertex coordinates (not from the `|sigma| d / d` identity).
    pub hull_measure: f64,
    pub is_boundary: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    pub measure: f64,
    pub centroid: Vec2,
    pub diameter: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct FaceGeometry {
    pub measure: f64,
    pub midpoint: Vec2,
    /// Unit normal oriented out of the owner cell.
    pub normal: Vec2,
    pub owner_distance: f64,
    /// Distance from the neighbor centroid; 0 on boundary faces.
    pub neighbor_distance: f64,
}

/// All geometric quantities of a mesh, immutable after construction.
#[derive(Clone, Debug)]
pub struct GeometryCache {
    pub h: f64,
    cells: Vec<CellGeometry>,
    faces: Vec<FaceGeometry>,
    sides: Vec<Vec<CellSide>>,
}

impl GeometryCache {
    pub fn cell(&self, k: usize) -> &CellGeometry {
        &self.cells[k]
    }

    pub fn face(&self, f: usize) -> &FaceGeometry {
        &self.faces[f]
    }

    /// Sides of cell `k` in the cell's face order.
    pub fn sides(&self, k: usize) -> &[CellSide] {
        &self.sides[k]
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Distance from the centroid of `cell` to face `f`.
    pub fn distance_from(&self, mesh: &PolyMesh, f: usize, cell: usize) -> f64 {
        if mesh.face(f).owner == cell {
            self.faces[f].owner_distance
        } else {
            self.faces[f].neighbor_distance
        }
    }
}

/// Computes measures, centroids, normals, distances and hull measures.
///
/// Cell centroids are centers of gravity (shoelace-based in 2D). Fails if
/// a cell or face degenerates, or if a centroid is not strictly inside
/// the star region of its faces (`d_{K,sigma} <= 0`).
pub fn compute_geometry(mesh: &PolyMesh) -> Result<GeometryCache> {
    let dim = mesh.dim();
    let mut cells = Vec::with_capacity(mesh.n_cells());
    for k in 0..mesh.n_cells() {
        let loop_ = mesh.cell(k);
        let (measure, centroid, diameter) = if dim == 1 {
            let a = mesh.vertex(loop_[0]);
            let b = mesh.vertex(loop_[1]);
            let len = b.x - a.x;
            (len, Vec2::new(0.5 * (a.x + b.x), 0.0), len.abs())
        } else {
            let mut area = 0.0;
            let mut c = Vec2::ZERO;
            for i in 0..loop_.len() {
                let p = mesh.vertex(loop_[i]);
                let q = mesh.vertex(loop_[(i + 1) % loop_.len()]);
                let w = p.cross(q);
                area += w;
                c += (p + q) * w;
            }
            area *= 0.5;
            if area > 0.0 {
                c = c * (1.0 / (6.0 * area));
            }
            let mut diam: f64 = 0.0;
            for i in 0..loop_.len() {
                for j in (i + 1)..loop_.len() {
                    diam = diam.max((mesh.vertex(loop_[i]) - mesh.vertex(loop_[j])).norm());
                }
            }
            (area, c, diam)
        };
        if !(measure > 0.0) {
            return Err(Error::Mesh {
                message: format!("zero or negative cell measure {measure:.3e}"),
                cell: Some(k),
            });
        }
        cells.push(CellGeometry {
            measure,
            centroid,
            diameter,
        });
    }
    let h = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);

    let mut faces = Vec::with_capacity(mesh.n_faces());
    for face in mesh.faces() {
        let (measure, midpoint, normal) = if dim == 1 {
            let p = mesh.vertex(face.vertices.0);
            let sign = if p.x >= cells[face.owner].centroid.x {
                1.0
            } else {
                -1.0
            };
            (1.0, p, Vec2::new(sign, 0.0))
        } else {
            let p = mesh.vertex(face.vertices.0);
            let q = mesh.vertex(face.vertices.1.expect("2D face has two vertices"));
            let t = q - p;
            let len = t.norm();
            if !(len > 0.0) {
                return Err(Error::Mesh {
                    message: "zero-length face".into(),
                    cell: Some(face.owner),
                });
            }
            let mid = (p + q) * 0.5;
            let mut n = t.perp() * (1.0 / len);
            if n.dot(mid - cells[face.owner].centroid) < 0.0 {
                n = -n;
            }
            (len, mid, n)
        };
        let owner_distance = normal.dot(midpoint - cells[face.owner].centroid);
        let neighbor_distance = face
            .neighbor
            .map(|l| (-normal).dot(midpoint - cells[l].centroid))
            .unwrap_or(0.0);
        if owner_distance <= 0.0 {
            return Err(Error::Mesh {
                message: format!("centroid not inside star region (d = {owner_distance:.3e})"),
                cell: Some(face.owner),
            });
        }
        if let Some(l) = face.neighbor {
            if neighbor_distance <= 0.0 {
                return Err(Error::Mesh {
                    message: format!(
                        "centroid not inside star region (d = {neighbor_distance:.3e})"
                    ),
                    cell: Some(l),
                });
            }
        }
        faces.push(FaceGeometry {
            measure,
            midpoint,
            normal,
            owner_distance,
            neighbor_distance,
        });
    }

    let mut sides = Vec::with_capacity(mesh.n_cells());
    for k in 0..mesh.n_cells() {
        let mut cell_sides = Vec::with_capacity(mesh.cell_face_ids(k).len());
        for &fi in mesh.cell_face_ids(k) {
            let face = mesh.face(fi);
            let fg = &faces[fi];
            let outward = if face.owner == k { 1.0 } else { -1.0 };
            let normal = fg.normal * outward;
            let distance = if face.owner == k {
                fg.owner_distance
            } else {
                fg.neighbor_distance
            };
            let hull_measure = if dim == 1 {
                (fg.midpoint.x - cells[k].centroid.x).abs()
            } else {
                let p = mesh.vertex(face.vertices.0);
                let q = mesh.vertex(face.vertices.1.unwrap());
                let c = cells[k].centroid;
                0.5 * (p - c).cross(q - c).abs()
            };
            cell_sides.push(CellSide {
                face: fi,
                measure: fg.measure,
                normal,
                offset: fg.midpoint - cells[k].centroid,
                distance,
                hull_measure,
                is_boundary: face.is_boundary(),
            });
        }
        sides.push(cell_sides);
    }

    Ok(GeometryCache {
        h,
        cells,
        faces,
        sides,
    })
}

/// Mesh regularity measures: distance ratios across interior faces,
/// diameter-over-distance on boundary faces, and the face count per cell.
#[derive(Clone, Copy, Debug)]
pub struct RegularityReport {
    pub max_distance_ratio: f64,
    pub max_boundary_diameter_ratio: f64,
    pub max_faces_per_cell: usize,
    pub combined: f64,
}

pub fn regularity(mesh: &PolyMesh, geom: &GeometryCache) -> RegularityReport {
    let mut ratio: f64 = 1.0;
    let mut bnd: f64 = 1.0;
    for (fi, face) in mesh.faces().iter().enumerate() {
        let fg = geom.face(fi);
        match face.neighbor {
            Some(_) => {
                let r = fg.owner_distance / fg.neighbor_distance;
                ratio = ratio.max(r).max(1.0 / r);
            }
            None => {
                bnd = bnd.max(geom.cell(face.owner).diameter / fg.owner_distance);
            }
        }
    }
    let max_faces = (0..mesh.n_cells())
        .map(|k| geom.sides(k).len())
        .max()
        .unwrap_or(0);
    RegularityReport {
        max_distance_ratio: ratio,
        max_boundary_diameter_ratio: bnd,
        max_faces_per_cell: max_faces,
        combined: ratio.max(bnd).max(max_faces as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::rng::SplitMix64;
    use crate::mesh::{build_cartesian, build_interval, Rect};

    #[test]
    fn unit_square_cell_geometry() {
        let mesh = build_cartesian(1, 1, Rect::unit()).unwrap();
        let geom = compute_geometry(&mesh).unwrap();
        assert!((geom.cell(0).measure - 1.0).abs() < 1e-15);
        for side in geom.sides(0) {
            assert!((side.measure - 1.0).abs() < 1e-15);
            assert!((side.distance - 0.5).abs() < 1e-15);
            // |D| = |sigma| d / d = 1 * 0.5 / 2
            assert!((side.hull_measure - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_identities_hold() {
        for mesh in [
            build_cartesian(5, 4, Rect::unit()).unwrap(),
            build_interval(7, (0.0, 2.0)).unwrap(),
        ] {
            let geom = compute_geometry(&mesh).unwrap();
            let d = mesh.dim() as f64;
            for k in 0..mesh.n_cells() {
                let mut sum_sd = 0.0;
                let mut sum_n = Vec2::ZERO;
                let mut perimeter = 0.0;
                for side in geom.sides(k) {
                    let rel = (side.hull_measure - side.measure * side.distance / d).abs()
                        / side.hull_measure;
                    assert!(rel < 1e-13, "|D| identity violated: {rel:.3e}");
                    sum_sd += side.measure * side.distance;
                    sum_n += side.normal * side.measure;
                    perimeter += side.measure;
                }
                let cell = geom.cell(k);
                assert!((sum_sd - d * cell.measure).abs() / (d * cell.measure) < 1e-13);
                assert!(sum_n.norm() / perimeter < 1e-13);
            }
        }
    }

    #[test]
    fn normals_antisymmetric_across_interior_faces() {
        let mesh = build_cartesian(3, 3, Rect::unit()).unwrap();
        let geom = compute_geometry(&mesh).unwrap();
        for (fi, face) in mesh.faces().iter().enumerate() {
            if let Some(l) = face.neighbor {
                let k = face.owner;
                let nk = geom.sides(k).iter().find(|s| s.face == fi).unwrap().normal;
                let nl = geom.sides(l).iter().find(|s| s.face == fi).unwrap().normal;
                assert!((nk + nl).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn monte_carlo_area_oracle_random_pentagon() {
        // A convex pentagon; its area is checked against rejection sampling.
        let verts = vec![
            Vec2::new(0.1, 0.0),
            Vec2::new(1.0, 0.2),
            Vec2::new(0.9, 0.9),
            Vec2::new(0.4, 1.1),
            Vec2::new(-0.1, 0.5),
        ];
        let mesh = PolyMesh::from_cells(2, verts.clone(), vec![vec![0, 1, 2, 3, 4]]).unwrap();
        let geom = compute_geometry(&mesh).unwrap();

        let inside = |p: Vec2| -> bool {
            (0..5).all(|i| {
                let a = verts[i];
                let b = verts[(i + 1) % 5];
                (b - a).cross(p - a) >= 0.0
            })
        };
        let mut rng = SplitMix64::new(123);
        let (x0, x1, y0, y1) = (-0.1, 1.0, 0.0, 1.1);
        let samples = 8_000_000;
        let mut hits = 0u64;
        for _ in 0..samples {
            let p = Vec2::new(
                x0 + (x1 - x0) * rng.next_f64(),
                y0 + (y1 - y0) * rng.next_f64(),
            );
            if inside(p) {
                hits += 1;
            }
        }
        let mc_area = (x1 - x0) * (y1 - y0) * hits as f64 / samples as f64;
        assert!(
            (geom.cell(0).measure - mc_area).abs() / mc_area < 1e-3,
            "shoelace {} vs monte-carlo {}",
            geom.cell(0).measure,
            mc_area
        );
    }

    #[test]
    fn regularity_of_uniform_cartesian() {
        let mesh = build_cartesian(4, 4, Rect::unit()).unwrap();
        let geom = compute_geometry(&mesh).unwrap();
        let rep = regularity(&mesh, &geom);
        assert!((rep.max_distance_ratio - 1.0).abs() < 1e-13);
        // diam / d = sqrt(2) h / (h/2) = 2 sqrt(2)
        assert!((rep.max_boundary_diameter_ratio - 2.0 * 2.0f64.sqrt()).abs() < 1e-13);
        assert_eq!(rep.max_faces_per_cell, 4);
        assert!((rep.combined - 4.0).abs() < 1e-13);
    }

    #[test]
    fn regularity_of_interval_is_unit_ratio() {
        let mesh = build_interval(8, (0.0, 1.0)).unwrap();
        let geom = compute_geometry(&mesh).unwrap();
        let rep = regularity(&mesh, &geom);
        assert!((rep.max_distance_ratio - 1.0).abs() < 1e-13);
    }
}
