//! Refinement-ladder studies and their CSV output.

use crate::config::{MeshFamily, ProblemId, StudyConfig};
use hyfv::assembly::{solve_steady, AssemblyOptions, Scheme, SolveOptions, SolveReport};
use hyfv::fluxes::FaceVelocity;
use hyfv::linalg::SolverKind;
use hyfv::mesh::{
    build_cartesian, build_interval, build_kershaw, build_triangular, compute_geometry,
    perturb_mesh, read_mesh, GeometryCache, PolyMesh, Rect, KERSHAW_DEFAULT_DISTORTION,
};
use hyfv::problems::{
    error_metrics, observed_order, overshoot, problem_boundary_layer_2d, problem_eps_1d,
    problem_hetero_rotation, problem_smooth_2d, ErrorGradient, ProblemSpec,
};
use hyfv::space::HybridField;
use hyfv::{Error, Result};

pub fn build_problem(config: &StudyConfig) -> Result<ProblemSpec> {
    match config.problem {
        ProblemId::Smooth => Ok(problem_smooth_2d()),
        ProblemId::BoundaryLayer => problem_boundary_layer_2d(config.nu),
        ProblemId::Hetero => Ok(problem_hetero_rotation()),
        ProblemId::Eps1d => problem_eps_1d(config.eps),
    }
}

/// Cell count along one direction for `family` at refinement `level`.
pub fn family_resolution(family: MeshFamily, level: usize) -> Result<usize> {
    if level == 0 {
        return Err(Error::InvalidInput("levels start at 1".into()));
    }
    Ok(match family {
        MeshFamily::M1 | MeshFamily::M2 | MeshFamily::M4 => 2usize << level,
        MeshFamily::M3 => 1usize << level,
        MeshFamily::M5 => 6 * level,
        MeshFamily::File => {
            return Err(Error::InvalidInput(
                "file meshes have no refinement ladder".into(),
            ))
        }
    })
}

/// Builds the mesh of `family` at `level`. The hetero problem snaps the
/// nearest grid lines onto the coefficient interfaces before perturbing.
pub fn build_level_mesh(config: &StudyConfig, level: usize) -> Result<PolyMesh> {
    if config.problem == ProblemId::Eps1d {
        let n = 100 * (1usize << (level - 1));
        return build_interval(n, (0.0, 1.0));
    }
    if config.mesh_family == MeshFamily::File {
        let path = config
            .mesh_file
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("mesh_family = file needs mesh_file".into()))?;
        return read_mesh(path);
    }
    // the hetero problem needs meshes aligned with the interfaces at 2/3,
    // so its ladder walks multiples of 24 cells per direction
    let n = if config.problem == ProblemId::Hetero {
        24 * level
    } else {
        family_resolution(config.mesh_family, level)?
    };
    let align: &[f64] = if config.problem == ProblemId::Hetero {
        &[2.0 / 3.0]
    } else {
        &[]
    };
    let mesh = match config.mesh_family {
        MeshFamily::M1 => build_cartesian(n, n, Rect::unit())?,
        MeshFamily::M2 => build_triangular(n, n, Rect::unit())?,
        MeshFamily::M3 => {
            let base = build_cartesian(n, n, Rect::unit())?;
            aligned_perturb(&base, config.seed, align)?
        }
        MeshFamily::M4 => {
            let base = build_triangular(n, n, Rect::unit())?;
            aligned_perturb(&base, config.seed, align)?
        }
        MeshFamily::M5 => build_kershaw(n, n, KERSHAW_DEFAULT_DISTORTION)?,
        MeshFamily::File => unreachable!(),
    };
    if config.problem == ProblemId::Hetero && config.mesh_family == MeshFamily::M1 && n % 3 != 0 {
        eprintln!("warning: {n}x{n} mesh does not align with the coefficient interfaces at 2/3");
    }
    Ok(mesh)
}

fn aligned_perturb(base: &PolyMesh, seed: u64, lines: &[f64]) -> Result<PolyMesh> {
    if lines.is_empty() {
        perturb_mesh(base, 0.4, seed)
    } else {
        let snapped = hyfv::mesh::snap_to_lines(base, lines, lines)?;
        hyfv::mesh::perturb_mesh_aligned(&snapped, 0.4, seed, lines, lines)
    }
}

/// One row of a study.
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub n_cells: usize,
    pub n_faces: usize,
    pub dofs: usize,
    pub e_c: Option<f64>,
    pub e_g: Option<f64>,
    pub overshoot: f64,
    pub residual: f64,
    pub seconds: f64,
}

pub struct LevelOutput {
    pub row: LevelRow,
    pub mesh: PolyMesh,
    pub geom: GeometryCache,
    pub field: HybridField,
    pub report: SolveReport,
}

pub fn solver_kind(config: &StudyConfig) -> SolverKind {
    if config.iterative {
        SolverKind::Iterative {
            tol: config.tol,
            max_iter: 10_000,
        }
    } else {
        SolverKind::Direct
    }
}

pub fn assembly_options(config: &StudyConfig) -> AssemblyOptions {
    AssemblyOptions {
        gradient: config.gradient,
        vanishing_diffusion: config.vanishing_diffusion,
        face_quadrature: config.quadrature,
        ..Default::default()
    }
}

/// Solves one refinement level and evaluates the diagnostics.
pub fn run_level(config: &StudyConfig, problem: &ProblemSpec, level: usize) -> Result<LevelOutput> {
    let mesh = build_level_mesh(config, level)?;
    let geom = compute_geometry(&mesh)?;
    let options = assembly_options(config);
    let solve = SolveOptions {
        solver: solver_kind(config),
        ..Default::default()
    };
    let (field, report) = solve_steady(&mesh, &geom, problem, config.scheme, &options, &solve)?;

    let gradient = match config.scheme {
        Scheme::CellCentered2 => ErrorGradient::CellCenteredUpwind,
        _ => match config.gradient {
            hyfv::fluxes::CorrectionGradient::Stabilised => ErrorGradient::HybridStabilised,
            _ => ErrorGradient::HybridConsistent,
        },
    };
    let fv = FaceVelocity::new(&mesh, &geom, |p| (problem.velocity)(p), config.quadrature);
    let metrics = error_metrics(&mesh, &geom, &field, problem, gradient, Some(&fv))?;
    let bounds = overshoot(&field, 0.0, 1.0);
    let dofs = match config.scheme {
        Scheme::CellCentered2 => mesh.n_cells() + mesh.n_boundary_faces(),
        _ => mesh.n_cells() + mesh.n_faces(),
    };
    Ok(LevelOutput {
        row: LevelRow {
            level,
            h: geom.h,
            n_cells: mesh.n_cells(),
            n_faces: mesh.n_faces(),
            dofs,
            e_c: metrics.e_c,
            e_g: metrics.e_g,
            overshoot: bounds.overshoot,
            residual: report.residual,
            seconds: report.seconds,
        },
        mesh,
        geom,
        field,
        report,
    })
}

pub const CSV_HEADER: &str =
    "level,h,n_cells,n_faces,dofs,E_c,E_g,order_c,order_g,overshoot,residual,seconds";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

/// Renders study rows as CSV, computing pairwise orders between levels.
pub fn rows_to_csv(rows: &[LevelRow]) -> String {
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let order_from = |values: Vec<Option<f64>>| -> Vec<Option<f64>> {
        if values.len() < 2 || values.iter().any(|v| v.is_none()) {
            return vec![None; values.len()];
        }
        let errors: Vec<f64> = values.iter().map(|v| v.unwrap()).collect();
        match observed_order(&errors, &hs) {
            Ok(orders) => std::iter::once(None).chain(orders).collect(),
            Err(_) => vec![None; values.len()],
        }
    };
    let order_c = order_from(rows.iter().map(|r| r.e_c).collect());
    let order_g = order_from(rows.iter().map(|r| r.e_g).collect());

    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{},{:.6e},{},{},{},{},{},{},{},{:.6e},{:.6e},{:.3}\n",
            r.level,
            r.h,
            r.n_cells,
            r.n_faces,
            r.dofs,
            fmt_opt(r.e_c),
            fmt_opt(r.e_g),
            fmt_opt(order_c[i]),
            fmt_opt(order_g[i]),
            r.overshoot,
            r.residual,
            r.seconds,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_ladders() {
        assert_eq!(family_resolution(MeshFamily::M1, 1).unwrap(), 4);
        assert_eq!(family_resolution(MeshFamily::M1, 6).unwrap(), 128);
        assert_eq!(family_resolution(MeshFamily::M3, 1).unwrap(), 2);
        assert_eq!(family_resolution(MeshFamily::M5, 4).unwrap(), 24);
        assert!(family_resolution(MeshFamily::File, 1).is_err());
    }

    #[test]
    fn csv_schema_and_orders() {
        let rows = vec![
            LevelRow {
                level: 1,
                h: 0.1,
                n_cells: 16,
                n_faces: 40,
                dofs: 56,
                e_c: Some(1e-2),
                e_g: Some(1e-3),
                overshoot: 0.0,
                residual: 1e-14,
                seconds: 0.5,
            },
            LevelRow {
                level: 2,
                h: 0.05,
                n_cells: 64,
                n_faces: 144,
                dofs: 208,
                e_c: Some(2.5e-3),
                e_g: Some(5e-4),
                overshoot: 0.0,
                residual: 1e-14,
                seconds: 0.7,
            },
        ];
        let csv = rows_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let second = lines.nth(1).unwrap();
        let fields: Vec<&str> = second.split(',').collect();
        assert_eq!(fields.len(), 12);
        let order_c: f64 = fields[7].parse().unwrap();
        assert!((order_c - 2.0).abs() < 1e-12);
        let order_g: f64 = fields[8].parse().unwrap();
        assert!((order_g - 1.0).abs() < 1e-12);
    }
}
