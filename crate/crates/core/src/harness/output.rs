//! CSV convergence tables and legacy VTK field output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{grid_label, ConvergenceReport, NormKind, ReportRow};
use crate::error::{Error, Result};
use crate::spaces::{DiscreteField, Scheme, SpaceKind};

pub const CSV_HEADER: &str = "grid,h,error,rate";

/// Formats like C's `%.{digits}e`: two-digit signed exponent at minimum.
pub fn fmt_sci(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.digits$e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn to_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let rate = r.rate.map_or_else(|| "N/A".to_string(), |v| format!("{v:.2}"));
        let _ = writeln!(out, "{},{},{},{}", r.grid, fmt_sci(r.h, 6), fmt_sci(r.error, 6), rate);
    }
    out
}

pub fn write_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, to_csv(report)).map_err(|e| Error::io(path, e))
}

fn parse_err(detail: impl Into<String>) -> Error {
    Error::Parse {
        what: "convergence CSV",
        detail: detail.into(),
    }
}

/// Reads a table written by [`to_csv`]. The grid resolution is recovered
/// from the label; rates are re-read as printed (two decimals).
pub fn from_csv(text: &str, problem: &str, scheme: Scheme) -> Result<ConvergenceReport> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(parse_err(format!("bad header {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(parse_err(format!("expected 4 fields in `{line}`")));
        }
        let parts: Vec<&str> = f[0].split('x').collect();
        let dim = parts.len();
        let n: usize = parts[0].parse().map_err(|_| parse_err(format!("bad grid `{}`", f[0])))?;
        if grid_label(dim, n) != f[0] {
            return Err(parse_err(format!("bad grid `{}`", f[0])));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(format!("bad number `{s}`")));
        let rate = if f[3] == "N/A" { None } else { Some(num(f[3])?) };
        rows.push(ReportRow {
            grid: f[0].to_string(),
            n,
            h: num(f[1])?,
            error: num(f[2])?,
            rate,
        });
    }
    Ok(ConvergenceReport {
        problem: problem.to_string(),
        scheme,
        norm: NormKind::for_scheme(scheme),
        rows,
    })
}

/// Legacy ASCII VTK unstructured grid. Conforming fields are written as point
/// data on the mesh vertices; nonconforming and DG fields duplicate vertices
/// per cell so that discontinuities are preserved.
pub fn to_vtk(field: &DiscreteField, name: &str) -> String {
    let space = field.space();
    let mesh = space.mesh();
    let dim = mesh.dim();
    let nv_cell = dim + 1;
    let nc = mesh.n_cells();
    let conforming = space.kind() == SpaceKind::P1Conforming;
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0\n{name}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let mut values = Vec::new();
    if conforming {
        let _ = writeln!(out, "POINTS {} double", mesh.n_vertices());
        for v in 0..mesh.n_vertices() {
            let x = mesh.vertex3(v);
            let _ = writeln!(out, "{} {} {}", x[0], x[1], x[2]);
        }
        values.extend_from_slice(field.coeffs());
    } else {
        let _ = writeln!(out, "POINTS {} double", nc * nv_cell);
        for c in 0..nc {
            for (i, &v) in mesh.cell_vertices(c).iter().enumerate() {
                let x = mesh.vertex3(v);
                let _ = writeln!(out, "{} {} {}", x[0], x[1], x[2]);
                let mut bary = [0.0; 4];
                bary[i] = 1.0;
                values.push(field.value_in_cell(c, &bary[..=dim]));
            }
        }
    }
    let _ = writeln!(out, "CELLS {} {}", nc, nc * (nv_cell + 1));
    for c in 0..nc {
        let ids: Vec<String> = if conforming {
            mesh.cell_vertices(c).iter().map(|v| v.to_string()).collect()
        } else {
            (0..nv_cell).map(|i| (c * nv_cell + i).to_string()).collect()
        };
        let _ = writeln!(out, "{} {}", nv_cell, ids.join(" "));
    }
    let _ = writeln!(out, "CELL_TYPES {nc}");
    let cell_type = if dim == 2 { 5 } else { 10 };
    for _ in 0..nc {
        let _ = writeln!(out, "{cell_type}");
    }
    let _ = writeln!(out, "POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default", values.len());
    for v in values {
        let _ = writeln!(out, "{v:.12e}");
    }
    out
}

pub fn write_vtk(field: &DiscreteField, name: &str, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, to_vtk(field, name)).map_err(|e| Error::io(path, e))
}
