//! Command-line front end: single solves, convergence studies over mesh
//! ladders, the full reproduction suite, and mesh generation/inspection.

mod config;
mod study;
mod suite;
mod vtk;

use clap::{Args, Parser, Subcommand};
use config::{parse_levels, MeshFamily, ProblemId, StudyConfig};
use hyfv::assembly::Scheme;
use hyfv::mesh::{compute_geometry, read_mesh, regularity, write_mesh};
use hyfv::problems::overshoot;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hyfv",
    version,
    about = "Hybridised finite-volume solvers for stationary advection-diffusion problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single refinement level and write solution files.
    Run(StudyArgs),
    /// Run a refinement study and write a CSV with errors and rates.
    Convergence(StudyArgs),
    /// Reproduce the full experiment suite and check reference thresholds.
    PaperSuite {
        /// Output directory for CSV files and the pass/fail report.
        #[arg(long, default_value = "paper-suite")]
        out: PathBuf,
        /// Cap ladder lengths (for quick smoke runs).
        #[arg(long)]
        levels_cap: Option<usize>,
        /// Seed for the moved-mesh families.
        #[arg(long, default_value_t = 2)]
        seed: u64,
    },
    /// Generate or inspect meshes in the plain-text format.
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
}

#[derive(Subcommand)]
enum MeshAction {
    /// Generate a mesh of a family at a refinement level.
    Generate {
        #[arg(long, default_value = "m1")]
        family: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 2)]
        seed: u64,
        /// Output path for the mesh file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print counts, mesh size and regularity of a mesh file.
    Inspect { path: PathBuf },
}

#[derive(Args)]
struct StudyArgs {
    /// Flat key = value configuration file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// upwind1 | hybrid2 | hybrid2-limited | cellcentered2
    #[arg(long)]
    scheme: Option<String>,
    /// smooth | boundary-layer | hetero | eps
    #[arg(long)]
    problem: Option<String>,
    /// m1 | m2 | m3 | m4 | m5 | file
    #[arg(long = "mesh-family")]
    mesh_family: Option<String>,
    /// Single level (run) or inclusive range like 1..4 (convergence).
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shift the diffusion spectrum by |V_K| h^1.5.
    #[arg(long = "vanishing-diffusion")]
    vanishing_diffusion: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// direct | iterative
    #[arg(long)]
    solver: Option<String>,
    /// Tolerance of the iterative solver.
    #[arg(long)]
    tol: Option<f64>,
    /// Mesh file used with --mesh-family file.
    #[arg(long = "mesh-file")]
    mesh_file: Option<PathBuf>,
}

fn resolve_config(args: &StudyArgs) -> Result<StudyConfig, String> {
    let mut config = match &args.config {
        Some(path) => StudyConfig::load(path)?,
        None => StudyConfig::default(),
    };
    if let Some(scheme) = &args.scheme {
        config.scheme = Scheme::parse(scheme).map_err(|e| e.to_string())?;
    }
    if let Some(problem) = &args.problem {
        config.problem = ProblemId::parse(problem)?;
    }
    if let Some(family) = &args.mesh_family {
        config.mesh_family = MeshFamily::parse(family)?;
    }
    if let Some(levels) = &args.levels {
        config.levels = parse_levels(levels)?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.vanishing_diffusion {
        config.vanishing_diffusion = true;
    }
    if let Some(out) = &args.out {
        config.out = out.clone();
    }
    if let Some(solver) = &args.solver {
        config.set("solver", solver)?;
    }
    if let Some(tol) = args.tol {
        config.tol = tol;
    }
    if let Some(file) = &args.mesh_file {
        config.mesh_file = Some(file.clone());
    }
    Ok(config)
}

fn main() -> ExitCode {
    // die quietly when a pipe closes early (e.g. `hyfv ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match resolve_config(&args) {
            Ok(config) => cmd_run(&config),
            Err(message) => usage_error(&message),
        },
        Command::Convergence(args) => match resolve_config(&args) {
            Ok(config) => cmd_convergence(&config),
            Err(message) => usage_error(&message),
        },
        Command::PaperSuite {
            out,
            levels_cap,
            seed,
        } => match suite::run_paper_suite(&out, levels_cap, seed) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => {
                eprintln!("paper-suite: some reference checks failed (see report.csv)");
                ExitCode::FAILURE
            }
            Err(e) => {
                eprintln!("paper-suite failed: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Mesh { action } => cmd_mesh(action),
    }
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn cmd_run(config: &StudyConfig) -> ExitCode {
    if config.levels.0 != config.levels.1 {
        return usage_error("`run` expects a single level; use `convergence` for ranges");
    }
    let level = config.levels.0;
    let run = (|| -> hyfv::Result<String> {
        let problem = study::build_problem(config)?;
        let output = study::run_level(config, &problem, level)?;
        std::fs::create_dir_all(&config.out)?;

        let vtk_path = config.out.join("solution.vtk");
        let mut vtk_file = std::fs::File::create(&vtk_path)?;
        vtk::write_vtk(
            &output.mesh,
            &output.geom,
            &output.field,
            &format!("{} / {}", problem.name, config.scheme.name()),
            &mut vtk_file,
        )?;

        let bounds = overshoot(&output.field, 0.0, 1.0);
        let mut summary = String::new();
        use std::fmt::Write;
        writeln!(summary, "problem            {}", problem.name).unwrap();
        writeln!(summary, "scheme             {}", config.scheme.name()).unwrap();
        writeln!(summary, "mesh family        {}", config.mesh_family.name()).unwrap();
        writeln!(summary, "level              {level}").unwrap();
        writeln!(summary, "h                  {:.6e}", output.row.h).unwrap();
        writeln!(summary, "cells              {}", output.row.n_cells).unwrap();
        writeln!(summary, "faces              {}", output.row.n_faces).unwrap();
        writeln!(summary, "DOFs               {}", output.row.dofs).unwrap();
        if let Some(e_c) = output.row.e_c {
            writeln!(summary, "E_c                {e_c:.6e}").unwrap();
        }
        if let Some(e_g) = output.row.e_g {
            writeln!(summary, "E_g                {e_g:.6e}").unwrap();
        }
        let max = output
            .field
            .cell
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = output
            .field
            .cell
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        writeln!(summary, "max cell value     {max:.6e}").unwrap();
        writeln!(summary, "min cell value     {min:.6e}").unwrap();
        writeln!(summary, "overshoot          {:.6e}", bounds.overshoot).unwrap();
        writeln!(summary, "residual           {:.3e}", output.report.residual).unwrap();
        if let Some(picard) = output.report.picard_iterations {
            writeln!(summary, "picard iterations  {picard}").unwrap();
        }
        writeln!(summary, "seconds            {:.3}", output.report.seconds).unwrap();
        std::fs::write(config.out.join("summary.txt"), &summary)?;
        std::fs::write(config.out.join("config.txt"), config.to_config_string())?;
        Ok(summary)
    })();
    match run {
        Ok(summary) => {
            print!("{summary}");
            println!("wrote {}", config.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_convergence(config: &StudyConfig) -> ExitCode {
    let (lo, hi) = config.levels;
    if hi - lo + 1 < 2 {
        return usage_error("`convergence` needs at least two levels, e.g. --levels 1..4");
    }
    let problem = match study::build_problem(config) {
        Ok(p) => p,
        Err(e) => return usage_error(&e.to_string()),
    };
    let mut rows = Vec::new();
    let mut failures = 0;
    for level in lo..=hi {
        match study::run_level(config, &problem, level) {
            Ok(output) => rows.push(output.row),
            Err(e) => {
                eprintln!("level {level} failed: {e}");
                failures += 1;
            }
        }
    }
    let csv = study::rows_to_csv(&rows);
    print!("{csv}");
    if let Err(e) = std::fs::create_dir_all(&config.out).and_then(|_| {
        std::fs::write(config.out.join("convergence.csv"), &csv)?;
        std::fs::write(config.out.join("config.txt"), config.to_config_string())
    }) {
        eprintln!("cannot write outputs: {e}");
        return ExitCode::FAILURE;
    }
    println!("wrote {}", config.out.join("convergence.csv").display());
    if failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_mesh(action: MeshAction) -> ExitCode {
    match action {
        MeshAction::Generate {
            family,
            level,
            seed,
            out,
        } => {
            let family = match MeshFamily::parse(&family) {
                Ok(f) => f,
                Err(e) => return usage_error(&e),
            };
            let config = StudyConfig {
                mesh_family: family,
                seed,
                levels: (level, level),
                ..Default::default()
            };
            match study::build_level_mesh(&config, level) {
                Ok(mesh) => match write_mesh(&mesh, &out) {
                    Ok(()) => {
                        println!(
                            "wrote {} ({} cells, {} faces)",
                            out.display(),
                            mesh.n_cells(),
                            mesh.n_faces()
                        );
                        ExitCode::SUCCESS
                    }
                    Err(e) => {
                        eprintln!("cannot write mesh: {e}");
                        ExitCode::FAILURE
                    }
                },
                Err(e) => usage_error(&e.to_string()),
            }
        }
        MeshAction::Inspect { path } => match read_mesh(&path).and_then(|mesh| {
            let geom = compute_geometry(&mesh)?;
            Ok((mesh, geom))
        }) {
            Ok((mesh, geom)) => {
                let reg = regularity(&mesh, &geom);
                println!("dimension          {}", mesh.dim());
                println!("vertices           {}", mesh.n_vertices());
                println!("cells              {}", mesh.n_cells());
                println!("faces              {}", mesh.n_faces());
                println!("boundary faces     {}", mesh.n_boundary_faces());
                println!("h                  {:.6e}", geom.h);
                println!("distance ratio     {:.4}", reg.max_distance_ratio);
                println!("boundary ratio     {:.4}", reg.max_boundary_diameter_ratio);
                println!("max faces per cell {}", reg.max_faces_per_cell);
                println!("regularity         {:.4}", reg.combined);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("cannot inspect mesh: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
