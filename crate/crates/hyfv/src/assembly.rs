//! Global system assembly, static condensation and steady solves.
//!
//! The hybrid system has one balance row per cell, one conservation row
//! per interior face and one Dirichlet row per boundary face. Static
//! condensation eliminates the cell unknowns through the balance rows,
//! leaving a face-only system; back-substitution restores them exactly.

use crate::algebra::Vec2;
use crate::fluxes::{
    advective_second_order_hybrid, advective_upwind_hybrid, cell_centered_flux_coefficients,
    diffusion_local_operator, limiter_phi, vanishing_diffusion, CcUnknown, CorrectionGradient,
    FaceVelocity, LocalOperator,
};
use crate::linalg::{solve as linear_solve, CsrMatrix, SolverKind};
use crate::mesh::{GeometryCache, PolyMesh};
use crate::problems::ProblemSpec;
use crate::space::{cell_average, face_average, FaceQuadrature, HybridField};
use crate::{Error, Result};
use std::io::Write;
use std::time::Instant;

/// Discretisation selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Hybridised first-order upwind fluxes.
    Upwind1,
    /// Hybridised fully local second-order fluxes.
    Hybrid2,
    /// Second-order fluxes with the Barth-Jespersen limiter, solved by
    /// Picard iteration.
    Hybrid2Limited,
    /// Cell-centered second-order upwind scheme (comparison baseline).
    CellCentered2,
}

impl Scheme {
    pub fn parse(name: &str) -> Result<Scheme> {
        match name {
            "upwind1" => Ok(Scheme::Upwind1),
            "hybrid2" => Ok(Scheme::Hybrid2),
            "hybrid2-limited" => Ok(Scheme::Hybrid2Limited),
            "cellcentered2" => Ok(Scheme::CellCentered2),
            _ => Err(Error::InvalidInput(format!("unknown scheme `{name}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Upwind1 => "upwind1",
            Scheme::Hybrid2 => "hybrid2",
            Scheme::Hybrid2Limited => "hybrid2-limited",
            Scheme::CellCentered2 => "cellcentered2",
        }
    }
}

/// Knobs that modify the assembled operators.
#[derive(Clone, Debug)]
pub struct AssemblyOptions {
    /// Gradient used in the second-order correction term.
    pub gradient: CorrectionGradient,
    /// Replace the diffusion tensor by its vanishing-diffusion
    /// modification (spectrum shifted by `|V_K| h^1.5`).
    pub vanishing_diffusion: bool,
    /// Quadrature for face velocities and Dirichlet averages.
    pub face_quadrature: FaceQuadrature,
    /// Per-cell limiter values for the limited scheme's linearisation;
    /// `None` means unlimited (`phi = 1`).
    pub phi: Option<Vec<f64>>,
    /// Debug switch: force `phi = 0` everywhere, reducing the limited
    /// scheme to the first-order upwind scheme.
    pub force_phi_zero: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            gradient: CorrectionGradient::Consistent,
            vanishing_diffusion: false,
            face_quadrature: FaceQuadrature::Midpoint,
            phi: None,
            force_phi_zero: false,
        }
    }
}

/// How rows map onto equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowRole {
    /// Flux balance of a cell.
    Balance(usize),
    /// Flux conservation across an interior face.
    Conservation(usize),
    /// Dirichlet condition on a boundary face.
    Boundary(usize),
}

/// Unknown ordering of an assembled system.
#[derive(Clone, Debug)]
pub enum Layout {
    /// Cells first, then all faces.
    Hybrid { n_cells: usize, n_faces: usize },
    /// Cells first, then boundary faces only.
    CellCentered {
        n_cells: usize,
        boundary_faces: Vec<usize>,
    },
}

impl Layout {
    pub fn n_unknowns(&self) -> usize {
        match self {
            Layout::Hybrid { n_cells, n_faces } => n_cells + n_faces,
            Layout::CellCentered {
                n_cells,
                boundary_faces,
            } => n_cells + boundary_faces.len(),
        }
    }
}

/// An assembled linear system with row-role tags.
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub roles: Vec<RowRole>,
    pub layout: Layout,
}

impl SparseSystem {
    pub fn n_unknowns(&self) -> usize {
        self.matrix.n_rows
    }

    /// Matrix Market coordinate-format dump for debugging.
    pub fn write_matrix_market(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(
            out,
            "{} {} {}",
            self.matrix.n_rows,
            self.matrix.n_cols,
            self.matrix.n_nonzeros()
        )?;
        for r in 0..self.matrix.n_rows {
            let (cols, vals) = self.matrix.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Builds the local operator (diffusive + advective) of one cell.
fn local_operator(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    problem: &ProblemSpec,
    fv: &FaceVelocity,
    scheme: Scheme,
    options: &AssemblyOptions,
    k: usize,
) -> Result<LocalOperator> {
    let centroid = geom.cell(k).centroid;
    let mut lambda = (problem.diffusion)(centroid);
    if options.vanishing_diffusion {
        let speed = (problem.velocity)(centroid).norm();
        lambda = vanishing_diffusion(lambda, speed, geom.h)?;
    }
    let mut op = diffusion_local_operator(mesh, geom, k, lambda)?;
    let advective = match scheme {
        Scheme::Upwind1 => advective_upwind_hybrid(mesh, geom, k, fv),
        Scheme::Hybrid2 => advective_second_order_hybrid(mesh, geom, k, fv, options.gradient, 1.0),
        Scheme::Hybrid2Limited => {
            let phi = if options.force_phi_zero {
                0.0
            } else {
                options.phi.as_ref().map(|p| p[k]).unwrap_or(1.0)
            };
            advective_second_order_hybrid(mesh, geom, k, fv, options.gradient, phi)
        }
        Scheme::CellCentered2 => {
            return Err(Error::InvalidInput(
                "cell-centered fluxes are not cell-local; use assemble_cell_centered".into(),
            ))
        }
    };
    op.add(&advective);
    Ok(op)
}

/// Assembles the hybrid system for `upwind1`, `hybrid2` or the limited
/// scheme linearised at `options.phi`.
pub fn assemble_hybrid(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    problem: &ProblemSpec,
    scheme: Scheme,
    options: &AssemblyOptions,
) -> Result<SparseSystem> {
    if scheme == Scheme::CellCentered2 {
        return Err(Error::InvalidInput(
            "assemble_hybrid does not support the cell-centered scheme".into(),
        ));
    }
    if problem.dim != mesh.dim() {
        return Err(Error::InvalidInput(format!(
            "problem dimension {} does not match mesh dimension {}",
            problem.dim,
            mesh.dim()
        )));
    }
    let nk = mesh.n_cells();
    let ne = mesh.n_faces();
    let n = nk + ne;
    let fv = FaceVelocity::new(
        mesh,
        geom,
        |p| (problem.velocity)(p),
        options.face_quadrature,
    );

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs = vec![0.0; n];
    let mut roles = Vec::with_capacity(n);
    for k in 0..nk {
        roles.push(RowRole::Balance(k));
    }
    for (fi, face) in mesh.faces().iter().enumerate() {
        roles.push(if face.is_boundary() {
            RowRole::Boundary(fi)
        } else {
            RowRole::Conservation(fi)
        });
    }

    for k in 0..nk {
        let op = local_operator(mesh, geom, problem, &fv, scheme, options, k)?;
        let sides = geom.sides(k);
        let columns: Vec<usize> = std::iter::once(k)
            .chain(sides.iter().map(|s| nk + s.face))
            .collect();
        for (i, side) in sides.iter().enumerate() {
            // balance row of the cell
            for (j, &col) in columns.iter().enumerate() {
                let v = op.rows[i][j];
                if v != 0.0 {
                    triplets.push((k, col, v));
                }
            }
            // conservation row of the face (interior only)
            if !side.is_boundary {
                let row = nk + side.face;
                for (j, &col) in columns.iter().enumerate() {
                    let v = op.rows[i][j];
                    if v != 0.0 {
                        triplets.push((row, col, v));
                    }
                }
            }
        }
        rhs[k] = geom.cell(k).measure * cell_average(mesh, geom, k, |p| (problem.source)(p));
    }

    for (fi, face) in mesh.faces().iter().enumerate() {
        if face.is_boundary() {
            let row = nk + fi;
            triplets.push((row, row, 1.0));
            rhs[row] = face_average(mesh, geom, fi, options.face_quadrature, |p| {
                (problem.dirichlet)(p)
            });
        }
    }

    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(n, n, &triplets),
        rhs,
        roles,
        layout: Layout::Hybrid {
            n_cells: nk,
            n_faces: ne,
        },
    })
}

/// Back-substitution record: `c_K = rhs_coef - sum_i coef_i * c_{face_i}`.
#[derive(Clone, Debug)]
pub struct BackSubstitution {
    pub rhs_coef: f64,
    pub face_terms: Vec<(usize, f64)>,
}

/// Face-only system obtained by eliminating cell unknowns.
pub struct CondensedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub back_sub: Vec<BackSubstitution>,
    pub n_cells: usize,
    pub n_faces: usize,
}

/// Eliminates every cell unknown through its balance row. Fails with the
/// cell index if a balance row has no usable pivot on its own cell.
pub fn condense(system: &SparseSystem) -> Result<CondensedSystem> {
    let (nk, ne) = match system.layout {
        Layout::Hybrid { n_cells, n_faces } => (n_cells, n_faces),
        Layout::CellCentered { .. } => {
            return Err(Error::InvalidInput(
                "static condensation applies to the hybrid layout only".into(),
            ))
        }
    };
    let a = &system.matrix;

    // balance rows: c_K = (b_K - sum_f a_{Kf} c_f) / a_{KK}
    let mut back_sub = Vec::with_capacity(nk);
    for k in 0..nk {
        let (cols, vals) = a.row(k);
        let mut pivot = 0.0;
        let mut face_terms = Vec::with_capacity(cols.len().saturating_sub(1));
        for (&c, &v) in cols.iter().zip(vals) {
            if c == k {
                pivot = v;
            } else if c >= nk {
                face_terms.push((c - nk, v));
            } else if v != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "balance row {k} couples to another cell unknown {c}"
                )));
            }
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { cell: k });
        }
        let inv = 1.0 / pivot;
        back_sub.push(BackSubstitution {
            rhs_coef: system.rhs[k] * inv,
            face_terms: face_terms.into_iter().map(|(f, v)| (f, v * inv)).collect(),
        });
    }

    // substitute into the face rows
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs = vec![0.0; ne];
    for fi in 0..ne {
        let row = nk + fi;
        let (cols, vals) = a.row(row);
        rhs[fi] = system.rhs[row];
        for (&c, &v) in cols.iter().zip(vals) {
            if c >= nk {
                triplets.push((fi, c - nk, v));
            } else {
                let bs = &back_sub[c];
                rhs[fi] -= v * bs.rhs_coef;
                for &(f, coef) in &bs.face_terms {
                    triplets.push((fi, f, -v * coef));
                }
            }
        }
    }

    Ok(CondensedSystem {
        matrix: CsrMatrix::from_triplets(ne, ne, &triplets),
        rhs,
        back_sub,
        n_cells: nk,
        n_faces: ne,
    })
}

/// Diagnostics of one linear (or Picard) solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveReport {
    pub n_unknowns: usize,
    pub condensed_unknowns: Option<usize>,
    /// Relative residual of the system that was actually solved.
    pub residual: f64,
    pub picard_iterations: Option<usize>,
    pub seconds: f64,
}

fn field_from_vector(layout: &Layout, mesh: &PolyMesh, x: &[f64]) -> HybridField {
    match layout {
        Layout::Hybrid { n_cells, n_faces } => HybridField {
            cell: x[..*n_cells].to_vec(),
            face: x[*n_cells..*n_cells + *n_faces].to_vec(),
        },
        Layout::CellCentered {
            n_cells,
            boundary_faces,
        } => {
            let cell: Vec<f64> = x[..*n_cells].to_vec();
            let mut face = vec![0.0; mesh.n_faces()];
            for (i, &fi) in boundary_faces.iter().enumerate() {
                face[fi] = x[n_cells + i];
            }
            // interior faces carry the adjacent-cell average, for output only
            for (fi, f) in mesh.faces().iter().enumerate() {
                if let Some(l) = f.neighbor {
                    face[fi] = 0.5 * (cell[f.owner] + cell[l]);
                }
            }
            HybridField { cell, face }
        }
    }
}

/// Solves the full (uncondensed) system.
pub fn solve_full(
    mesh: &PolyMesh,
    system: &SparseSystem,
    kind: SolverKind,
) -> Result<(HybridField, SolveReport)> {
    let start = Instant::now();
    let x = linear_solve(&system.matrix, &system.rhs, kind)?;
    let rhs_norm = system
        .rhs
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let residual = system.matrix.residual_norm(&x, &system.rhs) / rhs_norm;
    let field = field_from_vector(&system.layout, mesh, &x);
    Ok((
        field,
        SolveReport {
            n_unknowns: system.n_unknowns(),
            condensed_unknowns: None,
            residual,
            picard_iterations: None,
            seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Solves the condensed face system and expands the cell unknowns.
pub fn solve_condensed(
    condensed: &CondensedSystem,
    kind: SolverKind,
) -> Result<(HybridField, SolveReport)> {
    let start = Instant::now();
    let faces = linear_solve(&condensed.matrix, &condensed.rhs, kind)?;
    let rhs_norm = condensed
        .rhs
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let residual = condensed.matrix.residual_norm(&faces, &condensed.rhs) / rhs_norm;
    let mut cell = Vec::with_capacity(condensed.n_cells);
    for bs in &condensed.back_sub {
        let mut v = bs.rhs_coef;
        for &(f, coef) in &bs.face_terms {
            v -= coef * faces[f];
        }
        cell.push(v);
    }
    Ok((
        HybridField { cell, face: faces },
        SolveReport {
            n_unknowns: condensed.n_cells + condensed.n_faces,
            condensed_unknowns: Some(condensed.n_faces),
            residual,
            picard_iterations: None,
            seconds: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Assembles the cell-centered comparison system: cell unknowns plus one
/// unknown per boundary face (Dirichlet rows). Advective fluxes use the
/// upwind-valued cell gradient; the diffusive fluxes are two-point.
pub fn assemble_cell_centered(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    problem: &ProblemSpec,
    options: &AssemblyOptions,
) -> Result<SparseSystem> {
    let nk = mesh.n_cells();
    let boundary_faces: Vec<usize> = (0..mesh.n_faces())
        .filter(|&fi| mesh.face(fi).is_boundary())
        .collect();
    let mut boundary_index = vec![usize::MAX; mesh.n_faces()];
    for (i, &fi) in boundary_faces.iter().enumerate() {
        boundary_index[fi] = nk + i;
    }
    let n = nk + boundary_faces.len();
    let fv = FaceVelocity::new(
        mesh,
        geom,
        |p| (problem.velocity)(p),
        options.face_quadrature,
    );

    let lambda_normal = |k: usize, normal: Vec2| -> Result<f64> {
        let centroid = geom.cell(k).centroid;
        let mut lam = (problem.diffusion)(centroid);
        if options.vanishing_diffusion {
            lam = vanishing_diffusion(lam, (problem.velocity)(centroid).norm(), geom.h)?;
        }
        Ok(lam.bilinear(normal, normal))
    };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs = vec![0.0; n];
    let mut roles: Vec<RowRole> = (0..nk).map(RowRole::Balance).collect();
    roles.extend(boundary_faces.iter().map(|&fi| RowRole::Boundary(fi)));

    let unknown_col = |u: CcUnknown| -> usize {
        match u {
            CcUnknown::Cell(c) => c,
            CcUnknown::BoundaryFace(f) => boundary_index[f],
        }
    };

    for (fi, face) in mesh.faces().iter().enumerate() {
        let fg = geom.face(fi);
        let owner = face.owner;
        let advective = cell_centered_flux_coefficients(mesh, geom, &fv, fi, true);
        match face.neighbor {
            Some(neigh) => {
                let lk = lambda_normal(owner, fg.normal)?;
                let ll = lambda_normal(neigh, fg.normal)?;
                let trans = fg.measure / (fg.owner_distance / lk + fg.neighbor_distance / ll);
                for (row, sign) in [(owner, 1.0), (neigh, -1.0)] {
                    triplets.push((row, owner, sign * trans));
                    triplets.push((row, neigh, -sign * trans));
                    for &(u, w) in &advective {
                        triplets.push((row, unknown_col(u), sign * w));
                    }
                }
            }
            None => {
                let lk = lambda_normal(owner, fg.normal)?;
                let trans = fg.measure * lk / fg.owner_distance;
                let bcol = boundary_index[fi];
                triplets.push((owner, owner, trans));
                triplets.push((owner, bcol, -trans));
                for &(u, w) in &advective {
                    triplets.push((owner, unknown_col(u), w));
                }
                triplets.push((bcol, bcol, 1.0));
                rhs[bcol] = face_average(mesh, geom, fi, options.face_quadrature, |p| {
                    (problem.dirichlet)(p)
                });
            }
        }
    }
    for k in 0..nk {
        rhs[k] = geom.cell(k).measure * cell_average(mesh, geom, k, |p| (problem.source)(p));
    }

    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(n, n, &triplets),
        rhs,
        roles,
        layout: Layout::CellCentered {
            n_cells: nk,
            boundary_faces,
        },
    })
}

/// Options for the outer (steady) solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub solver: SolverKind,
    /// Solve the condensed face system instead of the full one.
    pub condensation: bool,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Under-relaxation factor in `(0, 1]` for the Picard loop.
    pub relaxation: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: SolverKind::Direct,
            condensation: true,
            picard_tol: 1e-10,
            picard_max_iter: 100,
            relaxation: 1.0,
        }
    }
}

/// Assembles and solves the steady problem with the selected scheme.
pub fn solve_steady(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    problem: &ProblemSpec,
    scheme: Scheme,
    assembly: &AssemblyOptions,
    solve: &SolveOptions,
) -> Result<(HybridField, SolveReport)> {
    match scheme {
        Scheme::Upwind1 | Scheme::Hybrid2 => {
            let system = assemble_hybrid(mesh, geom, problem, scheme, assembly)?;
            solve_hybrid_system(mesh, &system, solve)
        }
        Scheme::Hybrid2Limited => {
            solve_limited(mesh, geom, problem, assembly, solve).map(|r| (r.0, r.1))
        }
        Scheme::CellCentered2 => {
            let system = assemble_cell_centered(mesh, geom, problem, assembly)?;
            solve_full(mesh, &system, solve.solver)
        }
    }
}

fn solve_hybrid_system(
    mesh: &PolyMesh,
    system: &SparseSystem,
    solve: &SolveOptions,
) -> Result<(HybridField, SolveReport)> {
    if solve.condensation {
        let condensed = condense(system)?;
        solve_condensed(&condensed, solve.solver)
    } else {
        solve_full(mesh, system, solve.solver)
    }
}

/// Picard iteration for the flux-limited scheme: assemble with the
/// limiter frozen at the previous iterate, solve, update the limiter,
/// and repeat until the largest unknown update drops below tolerance.
/// Returns the solution, the report and the final limiter values.
pub fn solve_limited(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    problem: &ProblemSpec,
    assembly: &AssemblyOptions,
    solve: &SolveOptions,
) -> Result<(HybridField, SolveReport, Vec<f64>)> {
    let start = Instant::now();
    if !(solve.relaxation > 0.0 && solve.relaxation <= 1.0) {
        return Err(Error::InvalidInput("relaxation must lie in (0, 1]".into()));
    }
    let mut options = assembly.clone();
    let mut phi = vec![1.0; mesh.n_cells()];
    let mut previous: Option<HybridField> = None;
    let mut last_delta = f64::INFINITY;

    for iteration in 0..solve.picard_max_iter {
        options.phi = if options.force_phi_zero {
            None
        } else {
            Some(phi.clone())
        };
        let system = assemble_hybrid(mesh, geom, problem, Scheme::Hybrid2Limited, &options)?;
        let (field, report) = solve_hybrid_system(mesh, &system, solve)?;
        let field = match (&previous, solve.relaxation) {
            (Some(prev), w) if w < 1.0 => HybridField {
                cell: field
                    .cell
                    .iter()
                    .zip(&prev.cell)
                    .map(|(new, old)| w * new + (1.0 - w) * old)
                    .collect(),
                face: field
                    .face
                    .iter()
                    .zip(&prev.face)
                    .map(|(new, old)| w * new + (1.0 - w) * old)
                    .collect(),
            },
            _ => field,
        };

        let delta = match &previous {
            Some(prev) => field
                .cell
                .iter()
                .zip(&prev.cell)
                .chain(field.face.iter().zip(&prev.face))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max),
            None => f64::INFINITY,
        };
        last_delta = delta;

        let converged = delta <= solve.picard_tol || options.force_phi_zero;
        previous = Some(field);
        if converged {
            let report = SolveReport {
                picard_iterations: Some(iteration + 1),
                seconds: start.elapsed().as_secs_f64(),
                ..report
            };
            return Ok((previous.unwrap(), report, phi));
        }

        // refresh the limiter at the new iterate
        let field_ref = previous.as_ref().unwrap();
        for k in 0..mesh.n_cells() {
            let sides = geom.sides(k);
            let mut local = Vec::with_capacity(sides.len() + 1);
            local.push(field_ref.cell[k]);
            local.extend(sides.iter().map(|s| field_ref.face[s.face]));
            phi[k] = limiter_phi(mesh, geom, k, options.gradient, &local);
        }
    }
    Err(Error::PicardNonConvergence {
        delta: last_delta,
        iterations: solve.picard_max_iter,
    })
}

/// Maximum flux-balance and flux-conservation residuals of a hybrid
/// solution, evaluated by re-applying the local flux operators.
pub fn flux_residuals(
    mesh: &PolyMesh,
    geom: &GeometryCache,
    problem: &ProblemSpec,
    scheme: Scheme,
    options: &AssemblyOptions,
    solution: &HybridField,
) -> Result<(f64, f64)> {
    let fv = FaceVelocity::new(
        mesh,
        geom,
        |p| (problem.velocity)(p),
        options.face_quadrature,
    );
    let mut balance: f64 = 0.0;
    let mut face_flux_sum = vec![0.0; mesh.n_faces()];
    for k in 0..mesh.n_cells() {
        let op = local_operator(mesh, geom, problem, &fv, scheme, options, k)?;
        let sides = geom.sides(k);
        let mut local = Vec::with_capacity(sides.len() + 1);
        local.push(solution.cell[k]);
        local.extend(sides.iter().map(|s| solution.face[s.face]));
        let fluxes = op.apply(&local);
        let total: f64 = fluxes.iter().sum();
        let f_k = cell_average(mesh, geom, k, |p| (problem.source)(p));
        balance = balance.max((total - geom.cell(k).measure * f_k).abs());
        for (side, flux) in sides.iter().zip(&fluxes) {
            face_flux_sum[side.face] += flux;
        }
    }
    let mut conservation: f64 = 0.0;
    for (fi, face) in mesh.faces().iter().enumerate() {
        if !face.is_boundary() {
            conservation = conservation.max(face_flux_sum[fi].abs());
        }
    }
    Ok((balance, conservation))
}
