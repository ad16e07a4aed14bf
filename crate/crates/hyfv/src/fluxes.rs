//! Local flux operators.
//!
//! For each cell the diffusive and advective fluxes are linear in the
//! local unknown vector `[c_K, c_s1, ..., c_sm]` (cell value followed by
//! the cell's face values). A [`LocalOperator`] holds the matrix mapping
//! that vector to the scaled fluxes `|sigma_i| F_{K,sigma_i}`.

use crate::algebra::{SymTensor2, Vec2};
use crate::mesh::{GeometryCache, PolyMesh};
use crate::space::{face_average, FaceQuadrature};
use crate::{Error, Result};

/// Signed normal velocities per face, stored once in owner orientation so
/// that `V_{K,sigma} + V_{K',sigma} = 0` holds exactly.
#[derive(Clone, Debug)]
pub struct FaceVelocity {
    normal: Vec<f64>,
}

impl FaceVelocity {
    /// Integrates `v . n` over each face with the given rule
    /// (midpoint by default).
    pub fn new(
        mesh: &PolyMesh,
        geom: &GeometryCache,
        velocity: impl Fn(Vec2) -> Vec2,
        rule: FaceQuadrature,
    ) -> Self {
        let normal = (0..mesh.n_faces())
            .map(|fi| {
                let n = geom.face(fi).normal;
                face_average(mesh, geom, fi, rule, |p| velocity(p).dot(n))
            })
            .collect();
        FaceVelocity { normal }
    }

    /// Signed normal velocity seen from `cell` across face `fi`.
    pub fn from_cell(&self, mesh: &PolyMesh, fi: usize, cell: usize) -> f64 {
        if mesh.face(fi).owner == cell {
            self.normal[fi]
        } else {
            -self.normal[fi]
        }
    }

    /// `(V+, V-) = (max(V,0), max(-V,0))` seen from `cell`.
    pub fn split_from_cell(&self, mesh: &PolyMesh, fi: usize, cell: usize) -> (f64, f64) {
        let v = self.from_cell(mesh, fi, cell);
        (v.max(0.0), (-v).max(0.0))
    }

    pub fn owner_value(&self, fi: usize) -> f64 {
        self.normal[fi]
    }
}

/// Selects the discrete gradient used in the second-order correction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CorrectionGradient {
    /// The cellwise consistent gradient. This is the variant that keeps
    /// the scheme stable in advection-dominated regimes.
    #[default]
    Consistent,
    /// The stabilised gradient restricted to the hull of the face.
    Stabilised,
}

/// Dense local map from `[c_K, c_s1, .., c_sm]` to `(|sigma_i| F_i)_i`.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    /// `rows[i][j]`: coefficient of local unknown `j` in `|sigma_i| F_i`.
    pub rows: Vec<Vec<f64>>,
}

impl LocalOperator {
    pub fn zeros(m: usize) -> Self {
        LocalOperator {
            rows: vec![vec![0.0; m + 1]; m],
        }
    }

    pub fn n_sides(&self) -> usize {
        self.rows.len()
    }

    /// Applies the operator to local values `[c_K, c_s1, ..]`.
    pub fn apply(&self, local: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(local).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&mut self, other: &LocalOperator) {
        for (r, o) in self.rows.iter_mut().zip(&other.rows) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += *b;
            }
        }
    }
}

/// Builds the diffusive block from the stabilised-gradient bilinear form:
/// for all local `c`, `v`,
/// `sum_i |sigma_i| F_i (v_K - v_i) = sum_i |D_i| (L (g + S_i))(c) . (g + S_i)(v)`.
/// The block annihilates constants and is symmetric positive semidefinite
/// on differences.
pub fn diffusion_local_operator(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    k: usize,
    lambda: SymTensor2,
) -> Result<LocalOperator> {
    if !lambda.is_positive_definite() {
        return Err(Error::InvalidInput(format!(
            "diffusion tensor not positive definite on cell {k}"
        )));
    }
    let sides = geom.sides(k);
    let m = sides.len();
    let d = mesh.dim() as f64;
    let sqrt_d = d.sqrt();
    let inv_measure = 1.0 / geom.cell(k).measure;

    // hull gradient of the j-th difference basis vector:
    // P_i e_j = B e_j + (sqrt(d)/d_i) n_i (delta_ij - B e_j . r_i)
    // where B e_j = (|sigma_j| / |K|) n_j.
    let b_cols: Vec<Vec2> = sides
        .iter()
        .map(|s| s.normal * (s.measure * inv_measure))
        .collect();
    let mut m_matrix = vec![vec![0.0; m]; m];
    for (i, side) in sides.iter().enumerate() {
        let coef = sqrt_d / side.distance;
        // hull-restricted gradients of each difference basis vector
        let p_cols: Vec<Vec2> = (0..m)
            .map(|j| {
                let delta = if i == j { 1.0 } else { 0.0 };
                b_cols[j] + side.normal * (coef * (delta - b_cols[j].dot(side.offset)))
            })
            .collect();
        for a in 0..m {
            let la = lambda.apply(p_cols[a]);
            for b in 0..m {
                m_matrix[a][b] += side.hull_measure * la.dot(p_cols[b]);
            }
        }
    }

    // |sigma_i| F_i = sum_j M_ij (c_K - c_sj)
    let mut op = LocalOperator::zeros(m);
    for i in 0..m {
        let row_sum: f64 = m_matrix[i].iter().sum();
        op.rows[i][0] = row_sum;
        for j in 0..m {
            op.rows[i][1 + j] = -m_matrix[i][j];
        }
    }
    Ok(op)
}

/// First-order hybridised upwind fluxes `F = c_K V+ - c_sigma V-`.
pub fn advective_upwind_hybrid(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    k: usize,
    fv: &FaceVelocity,
) -> LocalOperator {
    let sides = geom.sides(k);
    let mut op = LocalOperator::zeros(sides.len());
    for (i, side) in sides.iter().enumerate() {
        let (vp, vm) = fv.split_from_cell(mesh, side.face, k);
        op.rows[i][0] = side.measure * vp;
        op.rows[i][1 + i] -= side.measure * vm;
    }
    op
}

/// Second-order hybridised fluxes: the upwind flux plus the correction
/// `grad c . (x_sigma - x_K)` on the outflow side, scaled by `phi`
/// (1 for the plain scheme). Fully local: only `c_K` and the cell's own
/// face values appear.
pub fn advective_second_order_hybrid(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    k: usize,
    fv: &FaceVelocity,
    gradient: CorrectionGradient,
    phi: f64,
) -> LocalOperator {
    let sides = geom.sides(k);
    let mut op = advective_upwind_hybrid(mesh, geom, k, fv);
    if phi == 0.0 {
        // bitwise identical to the first-order operator
        return op;
    }
    let d = mesh.dim() as f64;
    let inv_measure = 1.0 / geom.cell(k).measure;
    for (i, side) in sides.iter().enumerate() {
        let (vp, _) = fv.split_from_cell(mesh, side.face, k);
        if vp == 0.0 {
            continue;
        }
        let scale = phi * side.measure * vp;
        // consistent part: grad_bar c . r_i expands over all face values
        let cons_weight = match gradient {
            CorrectionGradient::Consistent => 1.0,
            CorrectionGradient::Stabilised => 1.0 - d.sqrt(),
        };
        for (j, other) in sides.iter().enumerate() {
            let w = cons_weight * other.measure * inv_measure * other.normal.dot(side.offset);
            op.rows[i][1 + j] += scale * w;
            op.rows[i][0] -= scale * w;
        }
        if gradient == CorrectionGradient::Stabilised {
            // S_{K,sigma} . r_i collapses to sqrt(d) (c_si - c_K)
            let w = d.sqrt();
            op.rows[i][1 + i] += scale * w;
            op.rows[i][0] -= scale * w;
        }
    }
    op
}

/// Barth-Jespersen limiter over the local data `{c_K} U {c_sigma}`:
/// the largest `phi` in `[0, 1]` for which every reconstruction
/// `c_K + phi * corr_i` stays within the local min/max.
/// Returns 1 when the gradient vanishes.
pub fn limiter_phi(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    k: usize,
    gradient: CorrectionGradient,
    local: &[f64],
) -> f64 {
    let sides = geom.sides(k);
    let m = sides.len();
    debug_assert_eq!(local.len(), m + 1);
    let c_k = local[0];
    let mut lo = c_k;
    let mut hi = c_k;
    for &v in &local[1..] {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let d = mesh.dim() as f64;
    let inv_measure = 1.0 / geom.cell(k).measure;
    let grad_bar = {
        let mut g = Vec2::ZERO;
        for (j, side) in sides.iter().enumerate() {
            g += side.normal * (side.measure * inv_measure * (local[1 + j] - c_k));
        }
        g
    };
    let mut phi: f64 = 1.0;
    for (i, side) in sides.iter().enumerate() {
        let mut corr = grad_bar.dot(side.offset);
        if gradient == CorrectionGradient::Stabilised {
            corr = (1.0 - d.sqrt()) * corr + d.sqrt() * (local[1 + i] - c_k);
        }
        if corr > 0.0 {
            phi = phi.min((hi - c_k) / corr);
        } else if corr < 0.0 {
            phi = phi.min((lo - c_k) / corr);
        }
    }
    phi.clamp(0.0, 1.0)
}

/// Modified diffusion tensor for vanishing artificial diffusion: shifts
/// every eigenvalue by `|V_K| h^1.5` while keeping the eigenvectors.
pub fn vanishing_diffusion(lambda: SymTensor2, cell_speed: f64, h: f64) -> Result<SymTensor2> {
    if !lambda.xy.is_finite() || !lambda.xx.is_finite() || !lambda.yy.is_finite() {
        return Err(Error::InvalidInput("non-finite diffusion tensor".into()));
    }
    Ok(lambda.add_scalar(cell_speed * h.powf(1.5)))
}

/// Unknowns referenced by cell-centered fluxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcUnknown {
    Cell(usize),
    BoundaryFace(usize),
}

/// Linear coefficients of the upwind-valued cell gradient of cell `k`
/// (one value per face taken from the upwind side; Dirichlet faces
/// contribute their boundary unknown). Used by the cell-centered scheme.
pub fn upwind_cell_gradient(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    fv: &FaceVelocity,
    k: usize,
) -> Vec<(CcUnknown, Vec2)> {
    let inv_measure = 1.0 / geom.cell(k).measure;
    let mut terms: Vec<(CcUnknown, Vec2)> = Vec::new();
    let mut push = |u: CcUnknown, w: Vec2| {
        if let Some(entry) = terms.iter_mut().find(|(t, _)| *t == u) {
            entry.1 += w;
        } else {
            terms.push((u, w));
        }
    };
    for side in geom.sides(k) {
        let v = fv.from_cell(mesh, side.face, k);
        if v > 0.0 {
            // upwind value is c_K itself; the difference vanishes
            continue;
        }
        let w = side.normal * (side.measure * inv_measure);
        let upwind = match mesh.face(side.face).other(k) {
            Some(other) => CcUnknown::Cell(other),
            None => CcUnknown::BoundaryFace(side.face),
        };
        push(upwind, w);
        push(CcUnknown::Cell(k), -w);
    }
    terms
}

/// Evaluates the cell-centered advective fluxes `|sigma| F^A` at every
/// face (oriented out of the owner) from cell values and boundary-face
/// values.
pub fn cell_centered_fluxes(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    fv: &FaceVelocity,
    cell_values: &[f64],
    boundary_values: &[f64],
    second_order: bool,
) -> Vec<f64> {
    (0..mesh.n_faces())
        .map(|fi| {
            cell_centered_flux_coefficients(mesh, geom, fv, fi, second_order)
                .iter()
                .map(|&(u, w)| {
                    w * match u {
                        CcUnknown::Cell(c) => cell_values[c],
                        CcUnknown::BoundaryFace(f) => boundary_values[f],
                    }
                })
                .sum()
        })
        .collect()
}

/// Coefficients of the advective flux `|sigma| F^A_{K,sigma}` for the
/// cell-centered scheme at face `fi`, oriented out of the owner.
/// Second-order corrections use [`upwind_cell_gradient`]; the inflow side
/// of a boundary face transports the boundary unknown itself.
pub fn cell_centered_flux_coefficients(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    fv: &FaceVelocity,
    fi: usize,
    second_order: bool,
) -> Vec<(CcUnknown, f64)> {
    let face = mesh.face(fi);
    let owner = face.owner;
    let fg = geom.face(fi);
    let v = fv.owner_value(fi);
    let (vp, vm) = (v.max(0.0), (-v).max(0.0));
    let measure = fg.measure;

    let mut coeffs: Vec<(CcUnknown, f64)> = Vec::new();
    let mut push = |u: CcUnknown, w: f64| {
        if let Some(entry) = coeffs.iter_mut().find(|(t, _)| *t == u) {
            entry.1 += w;
        } else {
            coeffs.push((u, w));
        }
    };

    if vp > 0.0 {
        push(CcUnknown::Cell(owner), measure * vp);
        if second_order {
            let r = fg.midpoint - geom.cell(owner).centroid;
            for (u, w) in upwind_cell_gradient(mesh, geom, fv, owner) {
                push(u, measure * vp * w.dot(r));
            }
        }
    }
    if vm > 0.0 {
        match face.neighbor {
            Some(e) => {
                push(CcUnknown::Cell(e), -measure * vm);
                if second_order {
                    let r = fg.midpoint - geom.cell(e).centroid;
                    for (u, w) in upwind_cell_gradient(mesh, geom, fv, e) {
                        push(u, -measure * vm * w.dot(r));
                    }
                }
            }
            None => push(CcUnknown::BoundaryFace(fi), -measure * vm),
        }
    }
    coeffs
}
