use std::ffi::{CStr, CString};
use std::ptr;

use rdfem_ffi::*;

fn last_error() -> String {
    let p = rdfem_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn mesh_handles() {
    unsafe {
        let mut mesh = ptr::null_mut();
        assert_eq!(rdfem_mesh_create(2, 4, &mut mesh), RdfemStatus::Ok);
        let (mut c, mut v, mut f) = (0, 0, 0);
        assert_eq!(rdfem_mesh_counts(mesh, &mut c, &mut v, &mut f), RdfemStatus::Ok);
        assert_eq!((c, v, f), (32, 25, 56));
        let mut h = 0.0;
        assert_eq!(rdfem_mesh_h(mesh, &mut h), RdfemStatus::Ok);
        assert!((h - 2f64.sqrt() / 4.0).abs() < 1e-14);
        rdfem_mesh_free(mesh);

        assert_eq!(rdfem_mesh_create(4, 2, &mut mesh), RdfemStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(rdfem_mesh_counts(ptr::null(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut()), RdfemStatus::NullPointer);
        rdfem_mesh_free(ptr::null_mut());
    }
}

#[test]
fn unknown_problem_and_bad_arguments() {
    unsafe {
        let name = CString::new("no_such_problem").unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(rdfem_problem_lookup(name.as_ptr(), &mut p), RdfemStatus::UnknownProblem);
        assert!(last_error().contains("no_such_problem"));

        let name = CString::new("cfem_damped_2d").unwrap();
        assert_eq!(rdfem_problem_lookup(name.as_ptr(), &mut p), RdfemStatus::Ok);
        assert_eq!(rdfem_problem_set_dt(p, -1.0), RdfemStatus::InvalidArgument);
        assert_eq!(rdfem_problem_set_n_ref(p, 64), RdfemStatus::InvalidArgument);
        let grids = [8usize, 4];
        assert_eq!(rdfem_problem_set_grids(p, grids.as_ptr(), 2), RdfemStatus::Ok);
        let mut study = ptr::null_mut();
        assert_eq!(rdfem_study_run(p, &mut study), RdfemStatus::InvalidArgument);
        rdfem_problem_free(p);

        let mut r = 0.0;
        assert_eq!(rdfem_convergence_rate(0.2, 0.1, 0.5, 0.25, &mut r), RdfemStatus::Ok);
        assert!((r - 1.0).abs() < 1e-14);
        assert_eq!(rdfem_convergence_rate(0.0, 0.1, 0.5, 0.25, &mut r), RdfemStatus::InvalidArgument);
    }
}

#[test]
fn short_study_and_solve() {
    unsafe {
        let name = CString::new("ncfem_damped_2d").unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(rdfem_problem_lookup(name.as_ptr(), &mut p), RdfemStatus::Ok);
        assert_eq!(rdfem_problem_set_final_time(p, 0.1), RdfemStatus::Ok);
        assert_eq!(rdfem_problem_set_dt(p, 0.05), RdfemStatus::Ok);
        let grids = [4usize, 8];
        assert_eq!(rdfem_problem_set_grids(p, grids.as_ptr(), 2), RdfemStatus::Ok);

        let mut study = ptr::null_mut();
        assert_eq!(rdfem_study_run(p, &mut study), RdfemStatus::Ok);
        let mut tables = 0;
        assert_eq!(rdfem_study_table_count(study, &mut tables), RdfemStatus::Ok);
        assert_eq!(tables, 1);
        let (mut scheme, mut rows, mut stable) = (RdfemScheme::Cfem, 0, false);
        assert_eq!(rdfem_study_table_info(study, 0, &mut scheme, &mut rows, &mut stable), RdfemStatus::Ok);
        assert_eq!((scheme, rows, stable), (RdfemScheme::Ncfem, 2, true));
        let mut row = RdfemReportRow { n: 0, h: 0.0, error: 0.0, rate: 0.0 };
        assert_eq!(rdfem_study_row(study, 0, 0, &mut row), RdfemStatus::Ok);
        assert_eq!(row.n, 4);
        assert!(row.rate.is_nan());
        assert_eq!(rdfem_study_row(study, 0, 1, &mut row), RdfemStatus::Ok);
        assert!(row.rate.is_finite() && row.error > 0.0);
        assert_eq!(rdfem_study_row(study, 0, 2, &mut row), RdfemStatus::OutOfRange);
        assert_eq!(rdfem_study_row(study, 1, 0, &mut row), RdfemStatus::OutOfRange);

        let dir = tempfile::tempdir().unwrap();
        let csv = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
        assert_eq!(rdfem_study_write_csv(study, 0, csv.as_ptr()), RdfemStatus::Ok);
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(text.starts_with("grid,h,error,rate\n4x4,"));
        rdfem_study_free(study);

        let mut field = ptr::null_mut();
        let mut err = 0.0;
        assert_eq!(rdfem_solve(p, 4, &mut field, &mut err), RdfemStatus::Ok);
        assert!(err > 0.0);
        let mut n = 0;
        assert_eq!(rdfem_field_dof_count(field, &mut n), RdfemStatus::Ok);
        assert_eq!(n, 56);
        let mut buf = vec![0.0; n];
        assert_eq!(rdfem_field_dofs(field, buf.as_mut_ptr(), n - 1), RdfemStatus::OutOfRange);
        assert_eq!(rdfem_field_dofs(field, buf.as_mut_ptr(), n), RdfemStatus::Ok);
        assert!(buf.iter().any(|&v| v != 0.0));
        let x = [0.3, 0.6];
        let mut v = f64::NAN;
        assert_eq!(rdfem_field_eval(field, x.as_ptr(), 2, &mut v), RdfemStatus::Ok);
        assert!(v.is_finite());
        let out = [1.5, 0.5];
        assert_eq!(rdfem_field_eval(field, out.as_ptr(), 2, &mut v), RdfemStatus::InvalidArgument);
        let vtk = CString::new(dir.path().join("u.vtk").to_str().unwrap()).unwrap();
        assert_eq!(rdfem_field_write_vtk(field, vtk.as_ptr()), RdfemStatus::Ok);
        rdfem_field_free(field);
        rdfem_problem_free(p);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rdfem.h")).unwrap();
    for sym in ["rdfem_mesh_create", "rdfem_study_run", "rdfem_field_eval", "RDFEM_STATUS_OK", "RdfemReportRow"] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
    let v = unsafe { CStr::from_ptr(rdfem_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"rdfem.h\"\nint main(void) {\n  RdfemMesh *m = 0;\n  RdfemStatus s = rdfem_mesh_create(2, 4, &m);\n  rdfem_mesh_free(m);\n  return s == RDFEM_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
