//! Interval (1D) and polygonal (2D) meshes.
//!
//! A mesh stores vertices, cells as counter-clockwise vertex loops, and
//! faces with owner/neighbor connectivity. In 1D a "face" is a single
//! vertex and cells are intervals `[v_left, v_right]`.

mod generators;
mod geometry;
mod io;
mod rng;

pub use generators::{
    build_cartesian, build_interval, build_kershaw, build_triangular, perturb_mesh,
    perturb_mesh_aligned, snap_to_lines, Rect, KERSHAW_DEFAULT_DISTORTION,
};
pub use geometry::{compute_geometry, regularity, CellSide, GeometryCache, RegularityReport};
pub use io::{read_mesh, read_mesh_from, write_mesh, write_mesh_to};
pub use rng::SplitMix64;

use crate::algebra::Vec2;
use crate::{Error, Result};

/// One mesh face: an edge in 2D, a point in 1D.
#[derive(Clone, Debug)]
pub struct Face {
    /// Vertex indices; `second` is `None` in 1D.
    pub vertices: (usize, Option<usize>),
    /// Cell the face orientation points out of.
    pub owner: usize,
    /// The cell on the other side; `None` on the boundary.
    pub neighbor: Option<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }

    /// The cell opposite `cell` across this face, if any.
    pub fn other(&self, cell: usize) -> Option<usize> {
        if self.owner == cell {
            self.neighbor
        } else {
            Some(self.owner)
        }
    }
}

#[derive(Clone, Debug)]
pub struct PolyMesh {
    dim: usize,
    vertices: Vec<Vec2>,
    cells: Vec<Vec<usize>>,
    faces: Vec<Face>,
    cell_faces: Vec<Vec<usize>>,
}

impl PolyMesh {
    /// Builds a mesh from vertices and cell loops, deriving faces and
    /// connectivity. Cell loops must be counter-clockwise in 2D.
    pub fn from_cells(dim: usize, vertices: Vec<Vec2>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidInput(format!("unsupported dimension {dim}")));
        }
        let faces = derive_faces(dim, &vertices, &cells)?;
        let mut cell_faces = vec![Vec::new(); cells.len()];
        for (fi, face) in faces.iter().enumerate() {
            cell_faces[face.owner].push(fi);
            if let Some(n) = face.neighbor {
                cell_faces[n].push(fi);
            }
        }
        let mesh = PolyMesh {
            dim,
            vertices,
            cells,
            faces,
            cell_faces,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.is_boundary()).count()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Vec2 {
        self.vertices[v]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> &[usize] {
        &self.cells[k]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    /// Faces of cell `k`, in loop order.
    pub fn cell_face_ids(&self, k: usize) -> &[usize] {
        &self.cell_faces[k]
    }

    /// True when every vertex of the face lies on the domain boundary.
    pub fn vertex_on_boundary(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for face in &self.faces {
            if face.is_boundary() {
                on[face.vertices.0] = true;
                if let Some(v1) = face.vertices.1 {
                    on[v1] = true;
                }
            }
        }
        on
    }

    /// Signed area (2D) or length (1D) of cell `k`.
    pub fn cell_measure(&self, k: usize) -> f64 {
        let loop_ = &self.cells[k];
        if self.dim == 1 {
            self.vertices[loop_[1]].x - self.vertices[loop_[0]].x
        } else {
            let mut a = 0.0;
            for i in 0..loop_.len() {
                let p = self.vertices[loop_[i]];
                let q = self.vertices[loop_[(i + 1) % loop_.len()]];
                a += p.cross(q);
            }
            0.5 * a
        }
    }

    /// Checks structural invariants: positive measures, face incidence
    /// counts, and the Euler relation for simply connected 2D meshes.
    pub fn validate(&self) -> Result<()> {
        for (k, _) in self.cells.iter().enumerate() {
            let measure = self.cell_measure(k);
            if !(measure > 0.0) {
                return Err(Error::Mesh {
                    message: format!("non-positive cell measure {measure:.3e}"),
                    cell: Some(k),
                });
            }
        }
        if self.dim == 2 {
            let nv = self.vertices.len() as i64;
            let ne = self.faces.len() as i64;
            let nk = self.cells.len() as i64;
            if nv - ne + nk != 1 {
                return Err(Error::Mesh {
                    message: format!("Euler relation violated: {nv} - {ne} + {nk} != 1"),
                    cell: None,
                });
            }
        }
        Ok(())
    }
}

fn derive_faces(dim: usize, vertices: &[Vec2], cells: &[Vec<usize>]) -> Result<Vec<Face>> {
    use std::collections::HashMap;
    let mut faces: Vec<Face> = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (k, loop_) in cells.iter().enumerate() {
        if dim == 1 {
            if loop_.len() != 2 {
                return Err(Error::Mesh {
                    message: "1D cells must reference two vertices".into(),
                    cell: Some(k),
                });
            }
            for &v in loop_ {
                let key = (v, v);
                match seen.get(&key) {
                    Some(&fi) => {
                        if faces[fi].neighbor.is_some() {
                            return Err(Error::Mesh {
                                message: format!("face {fi} shared by more than two cells"),
                                cell: Some(k),
                            });
                        }
                        faces[fi].neighbor = Some(k);
                    }
                    None => {
                        seen.insert(key, faces.len());
                        faces.push(Face {
                            vertices: (v, None),
                            owner: k,
                            neighbor: None,
                        });
                    }
                }
            }
        } else {
            if loop_.len() < 3 {
                return Err(Error::Mesh {
                    message: "2D cells need at least three vertices".into(),
                    cell: Some(k),
                });
            }
            for i in 0..loop_.len() {
                let v0 = loop_[i];
                let v1 = loop_[(i + 1) % loop_.len()];
                if v0 == v1 || v0 >= vertices.len() || v1 >= vertices.len() {
                    return Err(Error::Mesh {
                        message: format!("invalid edge ({v0}, {v1})"),
                        cell: Some(k),
                    });
                }
                let key = (v0.min(v1), v0.max(v1));
                match seen.get(&key) {
                    Some(&fi) => {
                        if faces[fi].neighbor.is_some() {
                            return Err(Error::Mesh {
                                message: format!("face {fi} shared by more than two cells"),
                                cell: Some(k),
                            });
                        }
                        faces[fi].neighbor = Some(k);
                    }
                    None => {
                        seen.insert(key, faces.len());
                        faces.push(Face {
                            vertices: (v0, Some(v1)),
                            owner: k,
                            neighbor: None,
                        });
                    }
                }
            }
        }
    }
    Ok(faces)
}
