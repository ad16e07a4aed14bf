//! End-to-end acceptance suite: reproduces the reference convergence
//! studies at fixed tolerances and checks the exact-arithmetic
//! properties of the discretisation. Each check prints one PASS/FAIL
//! line; a test panics if any of its checks fail.

use std::time::Instant;

use hyfv::algebra::{SymTensor2, Vec2};
use hyfv::assembly::{
    assemble_hybrid, condense, flux_residuals, solve_condensed, solve_full, solve_limited,
    solve_steady, AssemblyOptions, Scheme, SolveOptions,
};
use hyfv::fluxes::{limiter_phi, CorrectionGradient, FaceVelocity};
use hyfv::linalg::SolverKind;
use hyfv::mesh::{
    build_cartesian, build_interval, build_kershaw, build_triangular, compute_geometry,
    perturb_mesh, GeometryCache, PolyMesh, Rect, SplitMix64, KERSHAW_DEFAULT_DISTORTION,
};
use hyfv::problems::{
    error_metrics, least_squares_order, observed_order, overshoot, problem_boundary_layer_2d,
    problem_eps_1d, problem_hetero_rotation, problem_smooth_2d, ErrorGradient, ProblemSpec,
};
use hyfv::space::{interpolate, FaceQuadrature, HybridField};

/// Seed for the moved-mesh families. The reference random meshes are not
/// reproducible, so rate checks run on this fixed draw.
const MOVED_MESH_SEED: u64 = 2;

struct Check {
    label: String,
    pass: bool,
    detail: String,
}

fn report(checks: &[Check]) {
    let mut failed = 0;
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status} {}: {}", c.label, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    assert!(failed == 0, "{failed} acceptance check(s) failed");
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

enum Family {
    M1,
    M3,
    M4,
    M5,
}

fn family_mesh(family: &Family, n: usize) -> PolyMesh {
    match family {
        Family::M1 => build_cartesian(n, n, Rect::unit()).unwrap(),
        Family::M3 => {
            let base = build_cartesian(n, n, Rect::unit()).unwrap();
            perturb_mesh(&base, 0.4, MOVED_MESH_SEED).unwrap()
        }
        Family::M4 => {
            let base = build_triangular(n, n, Rect::unit()).unwrap();
            perturb_mesh(&base, 0.4, MOVED_MESH_SEED).unwrap()
        }
        Family::M5 => build_kershaw(n, n, KERSHAW_DEFAULT_DISTORTION).unwrap(),
    }
}

struct LevelResult {
    h: f64,
    e_c: f64,
    e_g: Option<f64>,
}

fn run_ladder(
    family: &Family,
    ns: &[usize],
    problem: &ProblemSpec,
    scheme: Scheme,
    options: &AssemblyOptions,
) -> Vec<LevelResult> {
    ns.iter()
        .map(|&n| {
            let mesh = family_mesh(family, n);
            let geom = compute_geometry(&mesh).unwrap();
            let (field, _) = solve_steady(
                &mesh,
                &geom,
                problem,
                scheme,
                options,
                &SolveOptions::default(),
            )
            .unwrap();
            let gradient = match scheme {
                Scheme::CellCentered2 => ErrorGradient::CellCenteredUpwind,
                _ => ErrorGradient::HybridConsistent,
            };
            let fv = FaceVelocity::new(
                &mesh,
                &geom,
                |p| (problem.velocity)(p),
                options.face_quadrature,
            );
            let report = error_metrics(&mesh, &geom, &field, problem, gradient, Some(&fv)).unwrap();
            LevelResult {
                h: report.h,
                e_c: report.e_c.unwrap(),
                e_g: report.e_g,
            }
        })
        .collect()
}

#[test]
fn criterion_1_smooth_hybrid2_cartesian_ladder() {
    let start = Instant::now();
    let reference = [
        5.192e-02, 1.287e-02, 3.208e-03, 7.997e-04, 1.989e-04, 4.934e-05,
    ];
    let ns = [4usize, 8, 16, 32, 64, 128];
    let results = run_ladder(
        &Family::M1,
        &ns,
        &problem_smooth_2d(),
        Scheme::Hybrid2,
        &AssemblyOptions::default(),
    );
    let elapsed = start.elapsed().as_secs_f64();

    let mut checks = Vec::new();
    for (level, (r, target)) in results.iter().zip(reference).enumerate() {
        checks.push(Check {
            label: format!("criterion 1 (E_c level {})", level + 1),
            pass: within(r.e_c, target, 0.15),
            detail: format!("E_c = {:.4e}, reference {:.3e} (15%)", r.e_c, target),
        });
    }
    let errors: Vec<f64> = results.iter().map(|r| r.e_c).collect();
    let hs: Vec<f64> = results.iter().map(|r| r.h).collect();
    let orders = observed_order(&errors, &hs).unwrap();
    let last = orders.last().unwrap().unwrap();
    checks.push(Check {
        label: "criterion 1 (order, last two levels)".into(),
        pass: last >= 1.9,
        detail: format!("order = {last:.3} (need >= 1.9)"),
    });
    checks.push(Check {
        label: "criterion 1 (runtime)".into(),
        pass: elapsed < 60.0,
        detail: format!("ladder solved in {elapsed:.1} s (need < 60 s)"),
    });
    report(&checks);
}

#[test]
fn criterion_2_smooth_upwind1_cartesian() {
    let ns = [16usize, 32, 64, 128];
    let results = run_ladder(
        &Family::M1,
        &ns,
        &problem_smooth_2d(),
        Scheme::Upwind1,
        &AssemblyOptions::default(),
    );
    let errors: Vec<f64> = results.iter().map(|r| r.e_c).collect();
    let hs: Vec<f64> = results.iter().map(|r| r.h).collect();
    let order = least_squares_order(&errors, &hs).unwrap();
    let finest = errors.last().unwrap();
    report(&[
        Check {
            label: "criterion 2 (E_c at h=1.105e-02)".into(),
            pass: within(*finest, 2.178e-02, 0.15),
            detail: format!("E_c = {finest:.4e}, reference 2.178e-02 (15%)"),
        },
        Check {
            label: "criterion 2 (order)".into(),
            pass: (order - 1.0).abs() <= 0.15,
            detail: format!("least-squares order = {order:.3} (need 1.0 +- 0.15)"),
        },
    ]);
}

#[test]
fn criterion_3_smooth_cell_centered_cartesian() {
    let ns = [4usize, 8, 16, 32, 64, 128];
    let results = run_ladder(
        &Family::M1,
        &ns,
        &problem_smooth_2d(),
        Scheme::CellCentered2,
        &AssemblyOptions::default(),
    );
    let errors: Vec<f64> = results.iter().map(|r| r.e_c).collect();
    let hs: Vec<f64> = results.iter().map(|r| r.h).collect();
    let finest = *errors.last().unwrap();
    let orders = observed_order(&errors, &hs).unwrap();
    let best = orders
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let ladder: Vec<String> = errors.iter().map(|e| format!("{e:.3e}")).collect();
    report(&[
        Check {
            label: "criterion 3 (E_c level 6)".into(),
            pass: within(finest, 5.903e-04, 0.20),
            detail: format!(
                "E_c = {finest:.4e}, reference 5.903e-04 (20%); ladder = [{}]",
                ladder.join(", ")
            ),
        },
        Check {
            label: "criterion 3 (order)".into(),
            pass: best >= 1.8,
            detail: format!("best pairwise order = {best:.3} (need >= 1.8)"),
        },
    ]);
}

#[test]
fn criterion_4_gradient_errors() {
    let reference = [
        2.691e-04, 1.354e-04, 7.340e-05, 4.245e-05, 2.601e-05, 1.652e-05,
    ];
    let ns = [4usize, 8, 16, 32, 64, 128];
    let problem = problem_smooth_2d();
    let options = AssemblyOptions::default();
    let results = run_ladder(&Family::M1, &ns, &problem, Scheme::Hybrid2, &options);

    let mut checks = Vec::new();
    for (level, (r, target)) in results.iter().zip(reference).enumerate() {
        let e_g = r.e_g.unwrap();
        checks.push(Check {
            label: format!("criterion 4 (E_g level {})", level + 1),
            pass: within(e_g, target, 0.30),
            detail: format!("E_g = {e_g:.4e}, reference {target:.3e} (30%)"),
        });
    }
    for (name, family, ns) in [
        ("M3", Family::M3, vec![8usize, 16, 32, 64, 128]),
        ("M4", Family::M4, vec![8usize, 16, 32, 64]),
        ("M5", Family::M5, vec![6usize, 12, 18, 24]),
    ] {
        let results = run_ladder(&family, &ns, &problem, Scheme::Hybrid2, &options);
        let errors: Vec<f64> = results.iter().map(|r| r.e_g.unwrap()).collect();
        let hs: Vec<f64> = results.iter().map(|r| r.h).collect();
        let order = least_squares_order(&errors, &hs).unwrap();
        checks.push(Check {
            label: format!("criterion 4 (E_g order on {name})"),
            pass: order >= 0.9,
            detail: format!("least-squares order = {order:.3} (need >= 0.9)"),
        });
    }
    report(&checks);
}

#[test]
fn criterion_5_moved_mesh_rates() {
    let problem = problem_smooth_2d();
    let options = AssemblyOptions::default();
    let mut checks = Vec::new();
    for (name, family) in [("M3", Family::M3), ("M4", Family::M4)] {
        let ns = [8usize, 16, 32, 64, 128];
        let hybrid = run_ladder(&family, &ns, &problem, Scheme::Hybrid2, &options);
        let upwind = run_ladder(&family, &ns, &problem, Scheme::Upwind1, &options);
        let cc = run_ladder(&family, &ns, &problem, Scheme::CellCentered2, &options);

        let ls = |rs: &[LevelResult]| {
            let errors: Vec<f64> = rs.iter().map(|r| r.e_c).collect();
            let hs: Vec<f64> = rs.iter().map(|r| r.h).collect();
            least_squares_order(&errors, &hs).unwrap()
        };
        let hybrid_order = ls(&hybrid);
        let upwind_order = ls(&upwind);
        let cc_errors: Vec<f64> = cc.iter().map(|r| r.e_c).collect();
        let cc_hs: Vec<f64> = cc.iter().map(|r| r.h).collect();
        let cc_last = observed_order(&cc_errors, &cc_hs)
            .unwrap()
            .last()
            .unwrap()
            .unwrap();

        checks.push(Check {
            label: format!("criterion 5 ({name} hybrid2 order)"),
            pass: hybrid_order >= 1.8,
            detail: format!("least-squares order = {hybrid_order:.3} (need >= 1.8)"),
        });
        checks.push(Check {
            label: format!("criterion 5 ({name} upwind1 order)"),
            pass: (upwind_order - 1.0).abs() <= 0.2,
            detail: format!("least-squares order = {upwind_order:.3} (need 1.0 +- 0.2)"),
        });
        checks.push(Check {
            label: format!("criterion 5 ({name} cellcentered2 order)"),
            pass: cc_last <= 1.3,
            detail: format!("asymptotic pairwise order = {cc_last:.3} (need <= 1.3)"),
        });
    }
    report(&checks);
}

#[test]
fn criterion_6_boundary_layer_subdomain() {
    let reference = [8.734e-04, 2.174e-04, 5.184e-05, 1.274e-05];
    let ns = [16usize, 32, 64, 128];
    let problem = problem_boundary_layer_2d(1e-4).unwrap();
    let results = run_ladder(
        &Family::M1,
        &ns,
        &problem,
        Scheme::Hybrid2,
        &AssemblyOptions::default(),
    );
    let mut checks = Vec::new();
    for ((r, target), n) in results.iter().zip(reference).zip(ns) {
        checks.push(Check {
            label: format!("criterion 6 (E_c at n={n})"),
            pass: within(r.e_c, target, 0.15),
            detail: format!(
                "subdomain E_c = {:.4e}, reference {:.3e} (15%)",
                r.e_c, target
            ),
        });
    }
    let errors: Vec<f64> = results.iter().map(|r| r.e_c).collect();
    let hs: Vec<f64> = results.iter().map(|r| r.h).collect();
    let order = least_squares_order(&errors, &hs).unwrap();
    checks.push(Check {
        label: "criterion 6 (order)".into(),
        pass: (order - 2.0).abs() <= 0.15,
        detail: format!("least-squares order = {order:.3} (need 2.0 +- 0.15)"),
    });
    report(&checks);
}

#[test]
fn criterion_7_epsilon_sensitivity_1d() {
    let eps = 2.0f64.powi(-10);
    let problem = problem_eps_1d(eps).unwrap();
    let mesh = build_interval(100, (0.0, 1.0)).unwrap();
    let geom = compute_geometry(&mesh).unwrap();

    let solve = |scheme: Scheme, vanishing: bool| {
        let options = AssemblyOptions {
            vanishing_diffusion: vanishing,
            ..Default::default()
        };
        let (field, _) = solve_steady(
            &mesh,
            &geom,
            &problem,
            scheme,
            &options,
            &SolveOptions::default(),
        )
        .unwrap();
        overshoot(&field, 0.0, 1.0)
    };

    let upwind = solve(Scheme::Upwind1, false);
    let plain = solve(Scheme::Hybrid2, false);
    let damped = solve(Scheme::Hybrid2, true);

    report(&[
        Check {
            label: "criterion 7 (upwind1 within [0,1])".into(),
            pass: upwind.overshoot <= 1e-10 && upwind.undershoot <= 1e-10,
            detail: format!(
                "overshoot = {:.2e}, undershoot = {:.2e} (need <= 1e-10)",
                upwind.overshoot, upwind.undershoot
            ),
        },
        Check {
            label: "criterion 7 (hybrid2 + vanishing diffusion < 5%)".into(),
            pass: damped.overshoot_fraction < 0.05,
            detail: format!(
                "overshoot = {:.3}% of the data range (need < 5%)",
                100.0 * damped.overshoot_fraction
            ),
        },
        Check {
            label: "criterion 7 (plain hybrid2 overshoots)".into(),
            pass: plain.overshoot > 1e-8,
            detail: format!(
                "overshoot = {:.4e} (need strictly positive)",
                plain.overshoot
            ),
        },
    ]);
}

#[test]
fn criterion_8_heterogeneous_rotation_peak() {
    let problem = problem_hetero_rotation();
    // 48 is divisible by 3, so the 2/3 interface lines are mesh lines
    let mesh = build_cartesian(48, 48, Rect::unit()).unwrap();
    let geom = compute_geometry(&mesh).unwrap();
    let (field, _) = solve_steady(
        &mesh,
        &geom,
        &problem,
        Scheme::Hybrid2,
        &AssemblyOptions::default(),
        &SolveOptions::default(),
    )
    .unwrap();
    let max = field.cell.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report(&[Check {
        label: "criterion 8 (heterogeneous rotation peak)".into(),
        pass: (6.2e-4..=8.4e-4).contains(&max),
        detail: format!("max cell value = {max:.4e} (need within [6.2e-4, 8.4e-4])"),
    }]);
}

// --------------------------------------------------------------------
// criterion 9: exact-tolerance property suite
// --------------------------------------------------------------------

fn property_meshes() -> Vec<(String, PolyMesh)> {
    vec![
        (
            "cartesian 5x4".into(),
            build_cartesian(5, 4, Rect::unit()).unwrap(),
        ),
        (
            "triangular 4x3".into(),
            build_triangular(4, 3, Rect::unit()).unwrap(),
        ),
        (
            "moved cartesian 6x6".into(),
            perturb_mesh(&build_cartesian(6, 6, Rect::unit()).unwrap(), 0.4, 3).unwrap(),
        ),
        (
            "moved triangular 5x5".into(),
            perturb_mesh(&build_triangular(5, 5, Rect::unit()).unwrap(), 0.4, 4).unwrap(),
        ),
        (
            "kershaw 6x6".into(),
            build_kershaw(6, 6, KERSHAW_DEFAULT_DISTORTION).unwrap(),
        ),
        (
            "interval 50".into(),
            build_interval(50, (0.0, 1.0)).unwrap(),
        ),
    ]
}

#[test]
fn criterion_9a_stabilisation_orthogonality() {
    let meshes = property_meshes();
    let geoms: Vec<GeometryCache> = meshes
        .iter()
        .map(|(_, m)| compute_geometry(m).unwrap())
        .collect();
    let mut rng = SplitMix64::new(2718);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let mi = trial % meshes.len();
        let (_, mesh) = &meshes[mi];
        let geom = &geoms[mi];
        let k = (rng.next_u64() % mesh.n_cells() as u64) as usize;
        let sqrt_d = (mesh.dim() as f64).sqrt();
        let q_cell = rng.next_centered() * 10.0;
        let q_faces: Vec<f64> = geom
            .sides(k)
            .iter()
            .map(|_| rng.next_centered() * 10.0)
            .collect();
        let grad = {
            let mut g = Vec2::ZERO;
            let inv = 1.0 / geom.cell(k).measure;
            for (side, qf) in geom.sides(k).iter().zip(&q_faces) {
                g += side.normal * (side.measure * inv * (qf - q_cell));
            }
            g
        };
        let mut sum = Vec2::ZERO;
        let mut scale = 0.0;
        for (side, qf) in geom.sides(k).iter().zip(&q_faces) {
            let s = hyfv::space::stabilisation_side(sqrt_d, side, q_cell, *qf, grad);
            sum += s * side.hull_measure;
            scale += s.norm() * side.hull_measure;
        }
        if scale > 0.0 {
            worst = worst.max(sum.x.abs().max(sum.y.abs()) / scale);
        }
    }
    report(&[Check {
        label: "criterion 9 (stabilisation orthogonality, 1000 pairs)".into(),
        pass: worst <= 1e-12,
        detail: format!("max relative defect = {worst:.2e} (need <= 1e-12)"),
    }]);
}

#[test]
fn criterion_9b_geometric_identities() {
    let mut worst_hull: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for (_, mesh) in property_meshes() {
        let geom = compute_geometry(&mesh).unwrap();
        let d = mesh.dim() as f64;
        for k in 0..mesh.n_cells() {
            let mut sum_sd = 0.0;
            for side in geom.sides(k) {
                let rel = (side.hull_measure - side.measure * side.distance / d).abs()
                    / side.hull_measure;
                worst_hull = worst_hull.max(rel);
                sum_sd += side.measure * side.distance;
            }
            let measure = geom.cell(k).measure;
            worst_sum = worst_sum.max((sum_sd - d * measure).abs() / (d * measure));
        }
    }
    report(&[
        Check {
            label: "criterion 9 (|D| = |sigma| d / dim)".into(),
            pass: worst_hull <= 1e-13,
            detail: format!("max relative defect = {worst_hull:.2e} (need <= 1e-13)"),
        },
        Check {
            label: "criterion 9 (sum |sigma| d = dim |K|)".into(),
            pass: worst_sum <= 1e-13,
            detail: format!("max relative defect = {worst_sum:.2e} (need <= 1e-13)"),
        },
    ]);
}

fn affine_problem(dim: usize) -> ProblemSpec {
    ProblemSpec {
        dim,
        name: "affine".into(),
        diffusion: Box::new(|_| SymTensor2::new(1.7, 0.3, 0.8)),
        velocity: Box::new(|_| Vec2::ZERO),
        source: Box::new(|_| 0.0),
        dirichlet: Box::new(|p| 0.75 * p.x - 1.25 * p.y + 0.5),
        exact: Some(Box::new(|p| 0.75 * p.x - 1.25 * p.y + 0.5)),
        exact_gradient: Some(Box::new(|_| Vec2::new(0.75, -1.25))),
        subdomain: None,
    }
}

#[test]
fn criterion_9c_affine_exactness_pure_diffusion() {
    let mut worst: f64 = 0.0;
    for (name, mesh) in property_meshes() {
        let geom = compute_geometry(&mesh).unwrap();
        let problem = affine_problem(mesh.dim());
        let (field, _) = solve_steady(
            &mesh,
            &geom,
            &problem,
            Scheme::Hybrid2,
            &AssemblyOptions::default(),
            &SolveOptions::default(),
        )
        .unwrap();
        let exact = interpolate(&mesh, &geom, |p| 0.75 * p.x - 1.25 * p.y + 0.5);
        let diff = field
            .cell
            .iter()
            .zip(&exact.cell)
            .chain(field.face.iter().zip(&exact.face))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(diff);
        assert!(
            diff <= 1e-10,
            "affine exactness violated on {name}: {diff:.2e}"
        );
    }
    report(&[Check {
        label: "criterion 9 (affine exactness, pure diffusion)".into(),
        pass: worst <= 1e-10,
        detail: format!("max nodal error = {worst:.2e} (need <= 1e-10)"),
    }]);
}

#[test]
fn criterion_9d_static_condensation_equivalence() {
    let mut worst: f64 = 0.0;
    for (name, mesh) in property_meshes() {
        let geom = compute_geometry(&mesh).unwrap();
        let problem: ProblemSpec = if mesh.dim() == 1 {
            problem_eps_1d(0.05).unwrap()
        } else {
            problem_smooth_2d()
        };
        for scheme in [Scheme::Upwind1, Scheme::Hybrid2] {
            let system =
                assemble_hybrid(&mesh, &geom, &problem, scheme, &AssemblyOptions::default())
                    .unwrap();
            let (full, _) = solve_full(&mesh, &system, SolverKind::Direct).unwrap();
            let condensed = condense(&system).unwrap();
            let (cond, _) = solve_condensed(&condensed, SolverKind::Direct).unwrap();
            let diff = full
                .cell
                .iter()
                .zip(&cond.cell)
                .chain(full.face.iter().zip(&cond.face))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            worst = worst.max(diff);
            assert!(
                diff <= 1e-10,
                "condensation mismatch on {name} ({scheme:?}): {diff:.2e}"
            );
        }
    }
    report(&[Check {
        label: "criterion 9 (static condensation equivalence)".into(),
        pass: worst <= 1e-10,
        detail: format!("max |full - condensed| = {worst:.2e} (need <= 1e-10)"),
    }]);
}

#[test]
fn criterion_9e_flux_conservation_and_balance() {
    let mut worst_balance: f64 = 0.0;
    let mut worst_conservation: f64 = 0.0;
    for (name, mesh) in property_meshes() {
        let geom = compute_geometry(&mesh).unwrap();
        let problem: ProblemSpec = if mesh.dim() == 1 {
            problem_eps_1d(0.05).unwrap()
        } else {
            problem_smooth_2d()
        };
        for scheme in [Scheme::Upwind1, Scheme::Hybrid2] {
            let options = AssemblyOptions::default();
            let (field, _) = solve_steady(
                &mesh,
                &geom,
                &problem,
                scheme,
                &options,
                &SolveOptions::default(),
            )
            .unwrap();
            let (balance, conservation) =
                flux_residuals(&mesh, &geom, &problem, scheme, &options, &field).unwrap();
            worst_balance = worst_balance.max(balance);
            worst_conservation = worst_conservation.max(conservation);
            assert!(
                balance <= 1e-10 && conservation <= 1e-10,
                "flux residuals on {name} ({scheme:?}): balance {balance:.2e}, conservation {conservation:.2e}"
            );
        }
    }
    report(&[Check {
        label: "criterion 9 (discrete balance and conservation)".into(),
        pass: worst_balance <= 1e-10 && worst_conservation <= 1e-10,
        detail: format!(
            "max balance residual = {worst_balance:.2e}, max conservation residual = {worst_conservation:.2e} (need <= 1e-10)"
        ),
    }]);
}

#[test]
fn criterion_9f_limiter_properties() {
    let meshes = property_meshes();
    let geoms: Vec<GeometryCache> = meshes
        .iter()
        .map(|(_, m)| compute_geometry(m).unwrap())
        .collect();
    let mut rng = SplitMix64::new(31415);
    let mut in_range = true;
    for trial in 0..100_000 {
        let mi = trial % meshes.len();
        let (_, mesh) = &meshes[mi];
        let geom = &geoms[mi];
        let k = (rng.next_u64() % mesh.n_cells() as u64) as usize;
        let m = geom.sides(k).len();
        let local: Vec<f64> = (0..=m).map(|_| rng.next_centered() * 100.0).collect();
        let phi = limiter_phi(mesh, geom, k, CorrectionGradient::Consistent, &local);
        in_range &= (0.0..=1.0).contains(&phi);
    }

    // strict local extrema force phi = 0
    let mut extrema_zero = true;
    for (mi, (_, mesh)) in meshes.iter().enumerate() {
        let geom = &geoms[mi];
        for k in 0..mesh.n_cells().min(8) {
            let m = geom.sides(k).len();
            let mut local = vec![5.0];
            local.extend((0..m).map(|i| 1.0 + 0.1 * i as f64)); // strict max
            let phi = limiter_phi(mesh, geom, k, CorrectionGradient::Consistent, &local);
            extrema_zero &= phi == 0.0;
            let mut local = vec![-5.0];
            local.extend((0..m).map(|i| 1.0 + 0.1 * i as f64)); // strict min
            let phi = limiter_phi(mesh, geom, k, CorrectionGradient::Consistent, &local);
            extrema_zero &= phi == 0.0;
        }
    }

    // phi = 0 reproduces the first-order upwind scheme bit-for-bit
    let problem = problem_eps_1d(2.0f64.powi(-8)).unwrap();
    let mesh = build_interval(100, (0.0, 1.0)).unwrap();
    let geom = compute_geometry(&mesh).unwrap();
    let upwind = {
        let sys = assemble_hybrid(
            &mesh,
            &geom,
            &problem,
            Scheme::Upwind1,
            &AssemblyOptions::default(),
        )
        .unwrap();
        solve_full(&mesh, &sys, SolverKind::Direct).unwrap().0
    };
    let forced = {
        let options = AssemblyOptions {
            force_phi_zero: true,
            ..Default::default()
        };
        solve_limited(
            &mesh,
            &geom,
            &problem,
            &options,
            &SolveOptions {
                condensation: false,
                ..Default::default()
            },
        )
        .unwrap()
        .0
    };
    let bitwise = upwind.cell == forced.cell && upwind.face == forced.face;

    report(&[
        Check {
            label: "criterion 9 (limiter range on 1e5 configurations)".into(),
            pass: in_range,
            detail: "phi stayed within [0, 1]".into(),
        },
        Check {
            label: "criterion 9 (limiter vanishes at strict extrema)".into(),
            pass: extrema_zero,
            detail: "phi = 0 at strict local extrema".into(),
        },
        Check {
            label: "criterion 9 (phi = 0 equals upwind1 bit-for-bit)".into(),
            pass: bitwise,
            detail: "limited solve with phi = 0 matches upwind1 exactly".into(),
        },
    ]);
}

#[test]
fn criterion_9g_dof_table() {
    let mut checks = Vec::new();
    let table = [
        // (h, N_K, N_e, hybrid DOFs, cell-centered DOFs)
        (3.535e-01, 16usize, 40usize, 56usize, 32usize),
        (1.767e-01, 64, 144, 208, 96),
        (8.838e-02, 256, 544, 800, 320),
        (4.419e-02, 1024, 2112, 3136, 1152),
        (2.209e-02, 4096, 8320, 12416, 4352),
        (1.104e-02, 16384, 33024, 49408, 16896),
    ];
    for (level, (h_ref, nk, ne, hybrid_dofs, cc_dofs)) in table.iter().enumerate() {
        let n = 4usize << level;
        let mesh = build_cartesian(n, n, Rect::unit()).unwrap();
        let geom = compute_geometry(&mesh).unwrap();
        let counts_ok = mesh.n_cells() == *nk
            && mesh.n_faces() == *ne
            && mesh.n_cells() + mesh.n_faces() == *hybrid_dofs
            && mesh.n_cells() + mesh.n_boundary_faces() == *cc_dofs;
        // the reference table truncates h after four significant digits
        let h_ok = (geom.h - h_ref).abs() < 1e-3 * h_ref;
        checks.push(Check {
            label: format!("criterion 9 (DOF table, level {})", level + 1),
            pass: counts_ok && h_ok,
            detail: format!(
                "n={n}: cells {}, faces {}, hybrid {}, cell-centered {}, h = {:.4e}",
                mesh.n_cells(),
                mesh.n_faces(),
                mesh.n_cells() + mesh.n_faces(),
                mesh.n_cells() + mesh.n_boundary_faces(),
                geom.h
            ),
        });
    }
    report(&checks);
}

// --------------------------------------------------------------------
// supporting regression: mesh-permutation invariance of the metrics
// --------------------------------------------------------------------

#[test]
fn error_metrics_invariant_under_relabeling() {
    let problem = problem_smooth_2d();
    let mesh = build_cartesian(5, 5, Rect::unit()).unwrap();
    let geom = compute_geometry(&mesh).unwrap();
    let (field, _) = solve_steady(
        &mesh,
        &geom,
        &problem,
        Scheme::Hybrid2,
        &AssemblyOptions::default(),
        &SolveOptions::default(),
    )
    .unwrap();
    let fv = FaceVelocity::new(
        &mesh,
        &geom,
        |p| (problem.velocity)(p),
        FaceQuadrature::Midpoint,
    );
    let base = error_metrics(
        &mesh,
        &geom,
        &field,
        &problem,
        ErrorGradient::HybridConsistent,
        Some(&fv),
    )
    .unwrap();

    // relabel cells by reversing their order and rebuild
    let nk = mesh.n_cells();
    let permuted_cells: Vec<Vec<usize>> = (0..nk).rev().map(|k| mesh.cell(k).to_vec()).collect();
    let permuted = PolyMesh::from_cells(2, mesh.vertices().to_vec(), permuted_cells).unwrap();
    let pgeom = compute_geometry(&permuted).unwrap();
    // map the field onto the permuted mesh (faces are rediscovered via midpoints)
    let mut face_value = std::collections::HashMap::new();
    for fi in 0..mesh.n_faces() {
        let mp = geom.face(fi).midpoint;
        face_value.insert(
            (format!("{:.12e}", mp.x), format!("{:.12e}", mp.y)),
            field.face[fi],
        );
    }
    let pfield = HybridField {
        cell: (0..nk).map(|k| field.cell[nk - 1 - k]).collect(),
        face: (0..permuted.n_faces())
            .map(|fi| {
                let mp = pgeom.face(fi).midpoint;
                face_value[&(format!("{:.12e}", mp.x), format!("{:.12e}", mp.y))]
            })
            .collect(),
    };
    let perm = error_metrics(
        &permuted,
        &pgeom,
        &pfield,
        &problem,
        ErrorGradient::HybridConsistent,
        None,
    )
    .unwrap();
    assert!((base.e_c.unwrap() - perm.e_c.unwrap()).abs() < 1e-14);
    assert!((base.e_g.unwrap() - perm.e_g.unwrap()).abs() < 1e-14);
}
