//! Full reproduction bundle: the 1D sensitivity test, the three 2D
//! studies and the DOF table, with a machine-readable pass/fail report
//! against the reference thresholds.

use crate::config::{MeshFamily, ProblemId, StudyConfig};
use crate::study::{build_problem, rows_to_csv, run_level, LevelRow};
use hyfv::assembly::{solve_steady, AssemblyOptions, Scheme, SolveOptions};
use hyfv::mesh::{build_cartesian, compute_geometry, perturb_mesh_aligned, snap_to_lines, Rect};
use hyfv::problems::{least_squares_order, observed_order, overshoot, problem_hetero_rotation};
use hyfv::Result;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

struct SuiteCheck {
    name: String,
    pass: bool,
    detail: String,
}

pub fn run_paper_suite(out_dir: &Path, levels_cap: Option<usize>, seed: u64) -> Result<bool> {
    fs::create_dir_all(out_dir)?;
    let mut checks: Vec<SuiteCheck> = Vec::new();
    let cap = |n: usize| levels_cap.map(|c| c.min(n)).unwrap_or(n);

    run_eps_sensitivity(out_dir, &mut checks)?;
    run_smooth_study(out_dir, cap(6), seed, &mut checks)?;
    run_boundary_layer_study(out_dir, cap(6), seed, &mut checks)?;
    run_hetero_study(out_dir, seed, &mut checks)?;
    write_dof_table(out_dir, &mut checks)?;

    let mut report = String::new();
    let mut all_pass = true;
    for c in &checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        writeln!(report, "{status},{},{}", c.name, c.detail).unwrap();
        println!("{status} {}: {}", c.name, c.detail);
        all_pass &= c.pass;
    }
    fs::write(out_dir.join("report.csv"), &report)?;
    Ok(all_pass)
}

fn study_config(problem: ProblemId, scheme: Scheme, family: MeshFamily, seed: u64) -> StudyConfig {
    StudyConfig {
        problem,
        scheme,
        mesh_family: family,
        seed,
        ..Default::default()
    }
}

fn run_eps_sensitivity(out: &Path, checks: &mut Vec<SuiteCheck>) -> Result<()> {
    let epsilons: Vec<f64> = [4, 6, 8, 10].iter().map(|p| 2.0f64.powi(-p)).collect();
    for (scheme, vanishing, tag) in [
        (Scheme::Upwind1, false, "upwind1"),
        (Scheme::Hybrid2, false, "hybrid2"),
        (Scheme::Hybrid2, true, "hybrid2_vd"),
        (Scheme::CellCentered2, false, "cellcentered2"),
    ] {
        let mut csv = String::from("eps,h,E_c,overshoot,undershoot\n");
        for &eps in &epsilons {
            let mut config = study_config(ProblemId::Eps1d, scheme, MeshFamily::M1, 1);
            config.eps = eps;
            config.vanishing_diffusion = vanishing;
            let problem = build_problem(&config)?;
            let output = run_level(&config, &problem, 1)?;
            let bounds = overshoot(&output.field, 0.0, 1.0);
            writeln!(
                csv,
                "{:.9e},{:.4e},{:.6e},{:.6e},{:.6e}",
                eps,
                output.row.h,
                output.row.e_c.unwrap_or(f64::NAN),
                bounds.overshoot,
                bounds.undershoot
            )
            .unwrap();
            if scheme == Scheme::Upwind1 {
                checks.push(SuiteCheck {
                    name: format!("eps-1d upwind1 bounded (eps=2^{})", eps.log2() as i32),
                    pass: bounds.overshoot <= 1e-10 && bounds.undershoot <= 1e-10,
                    detail: format!("overshoot {:.2e}", bounds.overshoot),
                });
            }
            if scheme == Scheme::Hybrid2 && eps == 2.0f64.powi(-10) {
                if vanishing {
                    checks.push(SuiteCheck {
                        name: "eps-1d hybrid2+vd overshoot < 5%".into(),
                        pass: bounds.overshoot_fraction < 0.05,
                        detail: format!("overshoot {:.3}%", 100.0 * bounds.overshoot_fraction),
                    });
                } else {
                    checks.push(SuiteCheck {
                        name: "eps-1d hybrid2 exhibits an overshoot".into(),
                        pass: bounds.overshoot > 1e-8,
                        detail: format!("overshoot {:.3e}", bounds.overshoot),
                    });
                }
            }
        }
        fs::write(out.join(format!("eps_{tag}.csv")), csv)?;
    }
    Ok(())
}

/// Reference solution errors for the smooth test, hybridised second-order
/// scheme on the Cartesian family.
const SMOOTH_HYBRID2_M1_EC: [f64; 6] = [
    5.192e-02, 1.287e-02, 3.208e-03, 7.997e-04, 1.989e-04, 4.934e-05,
];
const SMOOTH_HYBRID2_M1_EG: [f64; 6] = [
    2.691e-04, 1.354e-04, 7.340e-05, 4.245e-05, 2.601e-05, 1.652e-05,
];

fn run_smooth_study(
    out: &Path,
    max_levels: usize,
    seed: u64,
    checks: &mut Vec<SuiteCheck>,
) -> Result<()> {
    for scheme in [Scheme::Hybrid2, Scheme::Upwind1, Scheme::CellCentered2] {
        for family in [
            MeshFamily::M1,
            MeshFamily::M2,
            MeshFamily::M3,
            MeshFamily::M4,
            MeshFamily::M5,
        ] {
            let levels = match family {
                MeshFamily::M1 | MeshFamily::M3 => max_levels.min(6),
                MeshFamily::M2 | MeshFamily::M4 => max_levels.min(5),
                _ => max_levels.min(4),
            };
            let config = study_config(ProblemId::Smooth, scheme, family, seed);
            let problem = build_problem(&config)?;
            let mut rows: Vec<LevelRow> = Vec::new();
            for level in 1..=levels {
                rows.push(run_level(&config, &problem, level)?.row);
            }
            fs::write(
                out.join(format!("smooth_{}_{}.csv", scheme.name(), family.name())),
                rows_to_csv(&rows),
            )?;

            if family == MeshFamily::M1 && scheme == Scheme::Hybrid2 && levels == 6 {
                for (i, row) in rows.iter().enumerate() {
                    let e_c = row.e_c.unwrap();
                    let target = SMOOTH_HYBRID2_M1_EC[i];
                    checks.push(SuiteCheck {
                        name: format!("smooth hybrid2 m1 E_c level {}", i + 1),
                        pass: (e_c - target).abs() <= 0.15 * target,
                        detail: format!("{e_c:.4e} vs {target:.3e} (15%)"),
                    });
                    let e_g = row.e_g.unwrap();
                    let target_g = SMOOTH_HYBRID2_M1_EG[i];
                    checks.push(SuiteCheck {
                        name: format!("smooth hybrid2 m1 E_g level {}", i + 1),
                        pass: (e_g - target_g).abs() <= 0.30 * target_g,
                        detail: format!("{e_g:.4e} vs {target_g:.3e} (30%)"),
                    });
                }
            }
            if family == MeshFamily::M1 && scheme == Scheme::Upwind1 && levels == 6 {
                let e_c = rows.last().unwrap().e_c.unwrap();
                checks.push(SuiteCheck {
                    name: "smooth upwind1 m1 E_c level 6".into(),
                    pass: (e_c - 2.178e-02).abs() <= 0.15 * 2.178e-02,
                    detail: format!("{e_c:.4e} vs 2.178e-02 (15%)"),
                });
            }
            if family == MeshFamily::M1 && scheme == Scheme::CellCentered2 && levels == 6 {
                let e_c = rows.last().unwrap().e_c.unwrap();
                checks.push(SuiteCheck {
                    name: "smooth cellcentered2 m1 E_c level 6".into(),
                    pass: (e_c - 5.903e-04).abs() <= 0.20 * 5.903e-04,
                    detail: format!("{e_c:.4e} vs 5.903e-04 (20%)"),
                });
            }
            if family == MeshFamily::M3 && levels >= 4 {
                let errors: Vec<f64> = rows.iter().skip(2).map(|r| r.e_c.unwrap()).collect();
                let hs: Vec<f64> = rows.iter().skip(2).map(|r| r.h).collect();
                if let Some(order) = least_squares_order(&errors, &hs) {
                    let (pass, checked, need) = match scheme {
                        Scheme::Hybrid2 => (order >= 1.8, order, ">= 1.8"),
                        Scheme::Upwind1 => ((order - 1.0).abs() <= 0.2, order, "1.0 +- 0.2"),
                        _ => {
                            let last = observed_order(&errors, &hs)
                                .unwrap()
                                .last()
                                .copied()
                                .flatten()
                                .unwrap_or(f64::NAN);
                            (last <= 1.3, last, "<= 1.3 (asymptotic)")
                        }
                    };
                    checks.push(SuiteCheck {
                        name: format!("smooth {} m3 order", scheme.name()),
                        pass,
                        detail: format!("order {checked:.3}, need {need}"),
                    });
                }
            }
        }
    }
    Ok(())
}

const BLAYER_HYBRID2_M1_EC: [f64; 4] = [8.734e-04, 2.174e-04, 5.184e-05, 1.274e-05];

fn run_boundary_layer_study(
    out: &Path,
    max_levels: usize,
    seed: u64,
    checks: &mut Vec<SuiteCheck>,
) -> Result<()> {
    for family in [
        MeshFamily::M1,
        MeshFamily::M2,
        MeshFamily::M3,
        MeshFamily::M4,
        MeshFamily::M5,
    ] {
        let levels = match family {
            MeshFamily::M1 | MeshFamily::M3 => max_levels.min(6),
            MeshFamily::M2 | MeshFamily::M4 => max_levels.min(5),
            _ => max_levels.min(4),
        };
        let config = study_config(ProblemId::BoundaryLayer, Scheme::Hybrid2, family, seed);
        let problem = build_problem(&config)?;
        let mut rows = Vec::new();
        for level in 1..=levels {
            rows.push(run_level(&config, &problem, level)?.row);
        }
        fs::write(
            out.join(format!("blayer_hybrid2_{}.csv", family.name())),
            rows_to_csv(&rows),
        )?;
        if family == MeshFamily::M1 && levels == 6 {
            // reference data covers levels 3..6
            for (i, row) in rows.iter().skip(2).enumerate() {
                let e_c = row.e_c.unwrap();
                let target = BLAYER_HYBRID2_M1_EC[i];
                checks.push(SuiteCheck {
                    name: format!("boundary-layer hybrid2 m1 E_c level {}", i + 3),
                    pass: (e_c - target).abs() <= 0.15 * target,
                    detail: format!("{e_c:.4e} vs {target:.3e} (15%)"),
                });
            }
        }
    }
    Ok(())
}

fn run_hetero_study(out: &Path, seed: u64, checks: &mut Vec<SuiteCheck>) -> Result<()> {
    let problem = problem_hetero_rotation();
    let n = 48;
    let lines = [2.0 / 3.0];
    let aligned = build_cartesian(n, n, Rect::unit())?;
    let distorted = {
        let snapped = snap_to_lines(&aligned, &lines, &lines)?;
        perturb_mesh_aligned(&snapped, 0.4, seed, &lines, &lines)?
    };
    let mut csv = String::from("mesh,vanishing_diffusion,n_cells,max,min\n");
    for (mesh, label) in [(&aligned, "cartesian"), (&distorted, "distorted")] {
        let geom = compute_geometry(mesh)?;
        for vanishing in [false, true] {
            let options = AssemblyOptions {
                vanishing_diffusion: vanishing,
                ..Default::default()
            };
            let (field, _) = solve_steady(
                mesh,
                &geom,
                &problem,
                Scheme::Hybrid2,
                &options,
                &SolveOptions::default(),
            )?;
            let max = field.cell.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = field.cell.iter().copied().fold(f64::INFINITY, f64::min);
            writeln!(
                csv,
                "{label},{vanishing},{},{max:.6e},{min:.6e}",
                mesh.n_cells()
            )
            .unwrap();
            if label == "cartesian" && !vanishing {
                checks.push(SuiteCheck {
                    name: "hetero rotation peak on aligned mesh".into(),
                    pass: (6.2e-4..=8.4e-4).contains(&max),
                    detail: format!("max {max:.4e}, need within [6.2e-4, 8.4e-4]"),
                });
            }
        }
    }
    fs::write(out.join("hetero_summary.csv"), csv)?;
    Ok(())
}

fn write_dof_table(out: &Path, checks: &mut Vec<SuiteCheck>) -> Result<()> {
    let expected = [
        (16usize, 40usize, 56usize, 32usize),
        (64, 144, 208, 96),
        (256, 544, 800, 320),
        (1024, 2112, 3136, 1152),
        (4096, 8320, 12416, 4352),
        (16384, 33024, 49408, 16896),
    ];
    let mut csv = String::from("level,h,n_cells,n_faces,dofs_hybrid,dofs_cellcentered\n");
    let mut all = true;
    for (level, (nk, ne, hybrid, cc)) in expected.iter().enumerate() {
        let n = 4usize << level;
        let mesh = build_cartesian(n, n, Rect::unit())?;
        let geom = compute_geometry(&mesh)?;
        let row = (
            mesh.n_cells(),
            mesh.n_faces(),
            mesh.n_cells() + mesh.n_faces(),
            mesh.n_cells() + mesh.n_boundary_faces(),
        );
        all &= row == (*nk, *ne, *hybrid, *cc);
        writeln!(
            csv,
            "{},{:.4e},{},{},{},{}",
            level + 1,
            geom.h,
            row.0,
            row.1,
            row.2,
            row.3
        )
        .unwrap();
    }
    fs::write(out.join("dof_table.csv"), csv)?;
    checks.push(SuiteCheck {
        name: "DOF table levels 1..6".into(),
        pass: all,
        detail: "cell/face/DOF counts match the reference table exactly".into(),
    });
    Ok(())
}
