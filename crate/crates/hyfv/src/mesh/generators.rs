//! Mesh generators: Cartesian, triangular, interval and Kershaw meshes,
//! plus the random perturbation used for "moved" mesh families.

use super::rng::SplitMix64;
use super::PolyMesh;
use crate::algebra::Vec2;
use crate::{Error, Result};

/// Axis-aligned rectangle domain.
#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn unit() -> Self {
        Rect {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        }
    }

    fn check(&self) -> Result<()> {
        if self.x1 > self.x0 && self.y1 > self.y0 {
            Ok(())
        } else {
            Err(Error::InvalidInput("degenerate domain rectangle".into()))
        }
    }
}

/// Default Kershaw distortion amplitude, calibrated so that the coarsest
/// 6x6 mesh on the unit square has h close to 3.287e-01.
pub const KERSHAW_DEFAULT_DISTORTION: f64 = 0.116646;

fn grid_vertices(nx: usize, ny: usize, rect: Rect) -> Vec<Vec2> {
    let mut verts = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            verts.push(Vec2::new(
                rect.x0 + (rect.x1 - rect.x0) * i as f64 / nx as f64,
                rect.y0 + (rect.y1 - rect.y0) * j as f64 / ny as f64,
            ));
        }
    }
    verts
}

/// Uniform quadrilateral mesh with `nx * ny` cells.
pub fn build_cartesian(nx: usize, ny: usize, rect: Rect) -> Result<PolyMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("cell counts must be positive".into()));
    }
    rect.check()?;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let verts = grid_vertices(nx, ny, rect);
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![
                vid(i, j),
                vid(i + 1, j),
                vid(i + 1, j + 1),
                vid(i, j + 1),
            ]);
        }
    }
    PolyMesh::from_cells(2, verts, cells)
}

/// Conforming triangulation: each grid square is split by one diagonal,
/// with the diagonal orientation alternating checkerboard-style.
pub fn build_triangular(nx: usize, ny: usize, rect: Rect) -> Result<PolyMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("cell counts must be positive".into()));
    }
    rect.check()?;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let verts = grid_vertices(nx, ny, rect);
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.push(vec![a, b, c]);
                cells.push(vec![a, c, d]);
            } else {
                cells.push(vec![a, b, d]);
                cells.push(vec![b, c, d]);
            }
        }
    }
    PolyMesh::from_cells(2, verts, cells)
}

/// Uniform 1D mesh with `n` cells on the interval `(a, b)`.
pub fn build_interval(n: usize, interval: (f64, f64)) -> Result<PolyMesh> {
    let (a, b) = interval;
    if n == 0 {
        return Err(Error::InvalidInput("cell count must be positive".into()));
    }
    if !(b > a) {
        return Err(Error::InvalidInput("degenerate interval".into()));
    }
    let verts: Vec<Vec2> = (0..=n)
        .map(|i| Vec2::new(a + (b - a) * i as f64 / n as f64, 0.0))
        .collect();
    let cells: Vec<Vec<usize>> = (0..n).map(|i| vec![i, i + 1]).collect();
    PolyMesh::from_cells(1, verts, cells)
}

/// Piecewise-linear zigzag: 0 at 0, +1 at 1/3, -1 at 2/3, 0 at 1.
fn zigzag(x: f64) -> f64 {
    if x <= 1.0 / 3.0 {
        3.0 * x
    } else if x <= 2.0 / 3.0 {
        1.0 - 6.0 * (x - 1.0 / 3.0)
    } else {
        -1.0 + 3.0 * (x - 2.0 / 3.0)
    }
}

fn tent(y: f64) -> f64 {
    1.0 - (2.0 * y - 1.0).abs()
}

/// Logically rectangular Kershaw-type mesh on the unit square: vertical
/// grid lines stay straight while horizontal lines are sheared into the
/// characteristic layered Z pattern. `nx` must be divisible by 3 and `ny`
/// even so cell edges align with the pattern kinks. `distortion = 0`
/// reproduces `build_cartesian`.
pub fn build_kershaw(nx: usize, ny: usize, distortion: f64) -> Result<PolyMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("cell counts must be positive".into()));
    }
    if nx % 3 != 0 || ny % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "Kershaw layering needs nx divisible by 3 and ny even, got {nx}x{ny}"
        )));
    }
    if !(0.0..0.5).contains(&distortion) {
        return Err(Error::InvalidInput(
            "distortion must lie in [0, 0.5)".into(),
        ));
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut verts = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = i as f64 / nx as f64;
            let y = j as f64 / ny as f64;
            verts.push(Vec2::new(x, y + distortion * zigzag(x) * tent(y)));
        }
    }
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![
                vid(i, j),
                vid(i + 1, j),
                vid(i + 1, j + 1),
                vid(i, j + 1),
            ]);
        }
    }
    PolyMesh::from_cells(2, verts, cells)
}

/// Snaps the vertex column nearest to each `x_lines` entry (and row
/// nearest to each `y_lines` entry) exactly onto the line, so that
/// coefficient discontinuities along those lines coincide with faces.
pub fn snap_to_lines(mesh: &PolyMesh, x_lines: &[f64], y_lines: &[f64]) -> Result<PolyMesh> {
    let mut verts = mesh.vertices().to_vec();
    for &x in x_lines {
        let tol = nearest_coordinate(&verts, |v| v.x, x)?;
        for v in verts.iter_mut() {
            if (v.x - tol).abs() < 1e-12 {
                v.x = x;
            }
        }
    }
    for &y in y_lines {
        let tol = nearest_coordinate(&verts, |v| v.y, y)?;
        for v in verts.iter_mut() {
            if (v.y - tol).abs() < 1e-12 {
                v.y = y;
            }
        }
    }
    PolyMesh::from_cells(mesh.dim(), verts, mesh.cells().to_vec())
}

fn nearest_coordinate(verts: &[Vec2], get: impl Fn(&Vec2) -> f64, target: f64) -> Result<f64> {
    verts
        .iter()
        .map(&get)
        .min_by(|a, b| {
            (a - target)
                .abs()
                .partial_cmp(&(b - target).abs())
                .expect("finite coordinates")
        })
        .ok_or_else(|| Error::InvalidInput("empty mesh".into()))
}

/// Randomly displaces internal vertices by `factor * beta * h` per
/// coordinate with `beta` uniform in `[-0.5, 0.5)` and `h` the mesh size
/// of the input. Boundary vertices never move. Draws that would invert an
/// incident cell are re-sampled up to 16 times, then clamped toward zero.
/// Deterministic for a fixed `seed`.
pub fn perturb_mesh(mesh: &PolyMesh, factor: f64, seed: u64) -> Result<PolyMesh> {
    perturb_mesh_aligned(mesh, factor, seed, &[], &[])
}

/// Like [`perturb_mesh`], but vertices lying on one of the given lines
/// only move along that line, keeping snapped interfaces intact.
pub fn perturb_mesh_aligned(
    mesh: &PolyMesh,
    factor: f64,
    seed: u64,
    x_lines: &[f64],
    y_lines: &[f64],
) -> Result<PolyMesh> {
    if factor < 0.0 {
        return Err(Error::InvalidInput(
            "perturbation factor must be non-negative".into(),
        ));
    }
    mesh.validate()?;
    if factor == 0.0 {
        return Ok(mesh.clone());
    }
    let geom = super::geometry::compute_geometry(mesh)?;
    let h = geom.h;
    let on_boundary = mesh.vertex_on_boundary();

    // vertex -> incident cells, for local validity checks
    let mut incident = vec![Vec::new(); mesh.n_vertices()];
    for (k, loop_) in mesh.cells().iter().enumerate() {
        for &v in loop_ {
            incident[v].push(k);
        }
    }

    let mut verts = mesh.vertices().to_vec();
    let mut rng = SplitMix64::new(seed);
    let one_d = mesh.dim() == 1;

    let cells_valid = |verts: &[Vec2], cells: &[usize]| -> bool {
        cells.iter().all(|&k| cell_star_shaped(mesh, verts, k))
    };

    for v in 0..mesh.n_vertices() {
        if on_boundary[v] {
            continue;
        }
        let freeze_x = x_lines.iter().any(|&x| (verts[v].x - x).abs() < 1e-12);
        let freeze_y = y_lines.iter().any(|&y| (verts[v].y - y).abs() < 1e-12);
        let original = verts[v];
        let mut placed = false;
        let mut last_delta = Vec2::ZERO;
        for _ in 0..16 {
            let bx = if freeze_x { 0.0 } else { rng.next_centered() };
            let by = if freeze_y || one_d {
                0.0
            } else {
                rng.next_centered()
            };
            let delta = Vec2::new(factor * bx * h, factor * by * h);
            verts[v] = original + delta;
            if cells_valid(&verts, &incident[v]) {
                placed = true;
                break;
            }
            last_delta = delta;
        }
        if !placed {
            // clamp the last draw toward zero; the original position is
            // always valid so this terminates
            let mut delta = last_delta;
            loop {
                delta = delta * 0.5;
                verts[v] = original + delta;
                if cells_valid(&verts, &incident[v]) {
                    break;
                }
                if delta.norm() < 1e-300 {
                    verts[v] = original;
                    break;
                }
            }
        }
    }
    PolyMesh::from_cells(mesh.dim(), verts, mesh.cells().to_vec())
}

/// Positive measure and centroid strictly inside the star region.
fn cell_star_shaped(mesh: &PolyMesh, verts: &[Vec2], k: usize) -> bool {
    let loop_ = mesh.cell(k);
    if mesh.dim() == 1 {
        return verts[loop_[1]].x > verts[loop_[0]].x;
    }
    let n = loop_.len();
    let mut area = 0.0;
    let mut c = Vec2::ZERO;
    for i in 0..n {
        let p = verts[loop_[i]];
        let q = verts[loop_[(i + 1) % n]];
        let w = p.cross(q);
        area += w;
        c += (p + q) * w;
    }
    area *= 0.5;
    if !(area > 0.0) {
        return false;
    }
    c = c * (1.0 / (6.0 * area));
    for i in 0..n {
        let p = verts[loop_[i]];
        let q = verts[loop_[(i + 1) % n]];
        // centroid strictly on the interior side of every edge
        if (q - p).cross(c - p) <= 0.0 {
            return false;
        }
    }
    true
}
