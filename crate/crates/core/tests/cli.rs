use std::process::Command;

use rdfem::harness::from_csv;
use rdfem::Scheme;

fn rdfem(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rdfem")).args(args).output().expect("binary runs")
}

#[test]
fn list_names_every_problem() {
    let out = rdfem(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in rdfem::harness::PROBLEM_NAMES {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn unknown_problem_exits_with_two() {
    let out = rdfem(&["study", "--problem", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn short_study_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = rdfem(&[
        "study", "--problem", "cfem_damped_2d", "--grids", "4,8", "--final-time", "0.1", "--dt", "0.05", "--out-dir", out_dir,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("cfem_damped_2d_cfem.csv")).unwrap();
    let report = from_csv(&text, "cfem_damped_2d", Scheme::Cfem).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.rows[0].grid, "4x4");
    assert!(report.rows[1].rate.is_some());
}

#[test]
fn config_file_drives_a_solve_with_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "[run]\nproblem = \"dg_damped_2d\"\nfinal_time = 0.1\ndt = 0.05\ngamma = 12.0\n\n[output]\nout_dir = {:?}\nvtk = true\n",
            dir.path().to_str().unwrap()
        ),
    )
    .unwrap();
    let out = rdfem(&["solve", "--config", cfg.to_str().unwrap(), "--grid", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let vtk = std::fs::read_to_string(dir.path().join("dg_damped_2d_dg_4.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    assert!(vtk.contains("CELL_TYPES 32"));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[run]\nproblem = \"cfem_damped_2d\"\nmesh = 3\n").unwrap();
    let out = rdfem(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
