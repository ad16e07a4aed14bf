//! End-to-end checks of the command-line interface: exit codes, CSV
//! schema, reproducibility and file outputs.

use std::path::Path;
use std::process::Command;

fn hyfv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyfv"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("cannot read {path:?}: {e}"))
}

/// Drops the timing column, which is legitimately nondeterministic.
fn strip_seconds(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let mut fields: Vec<&str> = line.split(',').collect();
            fields.pop();
            fields.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn unknown_scheme_is_a_usage_error() {
    let output = hyfv()
        .args(["run", "--scheme", "does-not-exist", "--levels", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unknown scheme"), "stderr: {stderr}");
}

#[test]
fn run_writes_summary_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = hyfv()
        .args([
            "run",
            "--problem",
            "smooth",
            "--scheme",
            "hybrid2",
            "--levels",
            "4",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = read(&out.join("summary.txt"));
    assert!(
        summary.contains("DOFs               3136"),
        "summary:\n{summary}"
    );
    let vtk = read(&out.join("solution.vtk"));
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    assert!(vtk.contains("SCALARS c double 1"));
    assert!(vtk.contains("VECTORS grad_c double"));
    // resolved config round-trips
    let config = read(&out.join("config.txt"));
    assert!(config.contains("scheme = hybrid2"));
}

#[test]
fn run_hetero_reports_reference_peak() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hetero");
    // level 2 of the hetero ladder is a 48x48 mesh aligned with the
    // coefficient interfaces at 2/3
    let status = hyfv()
        .args([
            "run",
            "--problem",
            "hetero",
            "--scheme",
            "hybrid2",
            "--levels",
            "2",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = read(&out.join("summary.txt"));
    let max_line = summary
        .lines()
        .find(|l| l.starts_with("max cell value"))
        .unwrap();
    let max: f64 = max_line.split_whitespace().last().unwrap().parse().unwrap();
    assert!(
        (6.2e-4..=8.4e-4).contains(&max),
        "peak {max:.4e} outside the reference band; summary:\n{summary}"
    );
}

#[test]
fn convergence_csv_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let status = hyfv()
            .args([
                "convergence",
                "--problem",
                "smooth",
                "--scheme",
                "upwind1",
                "--mesh-family",
                "m3",
                "--levels",
                "2..4",
                "--seed",
                "7",
            ])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = read(&out_a.join("convergence.csv"));
    let b = read(&out_b.join("convergence.csv"));
    assert_eq!(
        strip_seconds(&a),
        strip_seconds(&b),
        "identical config + seed must give byte-identical CSVs (timing aside)"
    );
    let header = a.lines().next().unwrap();
    assert_eq!(
        header,
        "level,h,n_cells,n_faces,dofs,E_c,E_g,order_c,order_g,overshoot,residual,seconds"
    );
    // DOF column: hybrid scheme has n_cells + n_faces
    for line in a.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let n_cells: usize = fields[2].parse().unwrap();
        let n_faces: usize = fields[3].parse().unwrap();
        let dofs: usize = fields[4].parse().unwrap();
        assert_eq!(dofs, n_cells + n_faces);
    }
}

#[test]
fn cell_centered_dof_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cc");
    let status = hyfv()
        .args([
            "convergence",
            "--problem",
            "smooth",
            "--scheme",
            "cellcentered2",
            "--levels",
            "1..2",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(&out.join("convergence.csv"));
    let line = csv.lines().nth(1).unwrap();
    let fields: Vec<&str> = line.split(',').collect();
    // 4x4: 16 cells + 16 boundary faces
    assert_eq!(fields[4], "32");
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("study.conf");
    std::fs::write(
        &config_path,
        "problem = eps\neps = 0.0625\nscheme = upwind1\nlevels = 1\n",
    )
    .unwrap();
    let out = dir.path().join("eps");
    let status = hyfv()
        .arg("run")
        .arg("--config")
        .arg(&config_path)
        .args(["--scheme", "hybrid2"]) // override the file
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = read(&out.join("summary.txt"));
    assert!(summary.contains("scheme             hybrid2"), "{summary}");
    assert!(summary.contains("cells              100"), "{summary}");
}

#[test]
fn mesh_generate_inspect_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_path = dir.path().join("mesh.txt");
    let status = hyfv()
        .args(["mesh", "generate", "--family", "m2", "--level", "2"])
        .arg("--out")
        .arg(&mesh_path)
        .status()
        .unwrap();
    assert!(status.success());
    let output = hyfv()
        .args(["mesh", "inspect"])
        .arg(&mesh_path)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("cells              128"), "{text}");

    // the generated file also feeds back into a solve
    let out = dir.path().join("file-run");
    let status = hyfv()
        .args([
            "run",
            "--problem",
            "smooth",
            "--mesh-family",
            "file",
            "--levels",
            "1",
        ])
        .arg("--mesh-file")
        .arg(&mesh_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn shipped_configs_parse() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(&configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e == "conf").unwrap_or(false) {
            let status = hyfv()
                .arg("run")
                .arg("--config")
                .arg(&path)
                .args(["--levels", "1", "--out"])
                .arg(tempfile::tempdir().unwrap().path().join("probe"))
                .status()
                .unwrap();
            assert!(status.success(), "config {path:?} failed");
            count += 1;
        }
    }
    assert!(
        count >= 8,
        "expected the shipped experiment configs, found {count}"
    );
}

#[test]
fn paper_suite_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("suite");
    // capped ladders keep the smoke run fast; reference checks that need
    // the full ladders are skipped, so the exit code only reflects the
    // checks that did run
    let output = hyfv()
        .arg("paper-suite")
        .arg("--out")
        .arg(&out)
        .args(["--levels-cap", "2"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    for file in [
        "eps_upwind1.csv",
        "eps_hybrid2.csv",
        "eps_hybrid2_vd.csv",
        "smooth_hybrid2_m1.csv",
        "smooth_cellcentered2_m5.csv",
        "blayer_hybrid2_m3.csv",
        "hetero_summary.csv",
        "dof_table.csv",
        "report.csv",
    ] {
        assert!(out.join(file).exists(), "missing {file}; stdout:\n{stdout}");
    }
    let report = read(&out.join("report.csv"));
    assert!(report.contains("DOF table"), "report:\n{report}");
    assert!(report
        .lines()
        .all(|l| l.starts_with("PASS") || l.starts_with("FAIL")));
}
