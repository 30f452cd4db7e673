//! Deterministic CSV rendering. Every float is printed with 17 significant
//! digits so that files round-trip exactly and compare byte for byte.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::farfield::{CVec3, Vec3};
use crate::npop::Spectrum;
use crate::polarization::PolarizationTensor;
use crate::scan::SweepResult;

pub const SPECTRUM_HEADER: &str = "index,re,im";
pub const SWEEP_HEADER: &str = "omega,wavelength_paper,wavelength_physical,re_eps_c,im_eps_c,\
re_lambda_eps,im_lambda_eps,re_m11,im_m11,re_m12,im_m12,re_m21,im_m21,re_m22,im_m22,\
pt_frobenius,rcond";
pub const FIELD_HEADER: &str = "x1,x2,x3,re_E1,im_E1,re_E2,im_E2,re_E3,im_E3";
pub const TRAJECTORY_HEADER: &str = "distance,index,re,im";

/// `{:.16e}`: one leading digit plus sixteen decimals. Signed zeros print
/// as `0`.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let mut first = true;
    for cell in cells {
        if !first {
            out.push(',');
        }
        out.push_str(&cell);
        first = false;
    }
    out.push('\n');
}

fn complex_cells(z: Complex64) -> [String; 2] {
    [fmt_f64(z.re), fmt_f64(z.im)]
}

pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = format!("{SPECTRUM_HEADER}\n");
    for (i, z) in spectrum.eigenvalues.iter().enumerate() {
        let [re, im] = complex_cells(*z);
        push_row(&mut out, [i.to_string(), re, im]);
    }
    out
}

pub fn tensor_header(dim: usize) -> String {
    let mut cols = Vec::with_capacity(2 * dim * dim);
    for i in 1..=dim {
        for j in 1..=dim {
            cols.push(format!("re_m{i}{j}"));
            cols.push(format!("im_m{i}{j}"));
        }
    }
    cols.join(",")
}

/// One header line and one row, entries in row-major order.
pub fn tensor_csv(tensor: &PolarizationTensor) -> String {
    let mut out = tensor_header(tensor.dim());
    out.push('\n');
    push_row(&mut out, tensor.row_major().into_iter().flat_map(complex_cells));
    out
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for row in &result.rows {
        let mut cells = vec![
            fmt_f64(row.omega),
            fmt_f64(row.wavelength_paper),
            fmt_f64(row.wavelength_physical),
        ];
        cells.extend(complex_cells(row.eps_c));
        cells.extend(complex_cells(row.lambda_eps));
        for z in row.pt {
            cells.extend(complex_cells(z));
        }
        cells.push(fmt_f64(row.pt_frobenius));
        cells.push(fmt_f64(row.rcond));
        push_row(&mut out, cells);
    }
    out
}

pub fn field_csv(points: &[Vec3], field: &[CVec3]) -> String {
    assert_eq!(points.len(), field.len(), "one field value per point");
    let mut out = format!("{FIELD_HEADER}\n");
    for (x, e) in points.iter().zip(field) {
        let mut cells: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
        for z in e.iter() {
            cells.extend(complex_cells(*z));
        }
        push_row(&mut out, cells);
    }
    out
}

/// Eigenvalue trajectories against particle separation.
pub fn trajectory_csv(rows: &[(f64, Spectrum)]) -> String {
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    for (d, spectrum) in rows {
        for (i, z) in spectrum.eigenvalues.iter().enumerate() {
            let [re, im] = complex_cells(*z);
            push_row(&mut out, [fmt_f64(*d), i.to_string(), re, im]);
        }
    }
    out
}

/// Semi-log plot of the tensor norm against wavelength for a sweep CSV.
pub fn sweep_gnuplot(csv_name: &str, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set xlabel 'wavelength (m)'");
    let _ = writeln!(s, "set ylabel '|M|_F'");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "plot '{csv_name}' using 3:16 with lines title '{title}'");
    s
}

/// Parses one float cell produced by [`fmt_f64`].
pub fn parse_f64(cell: &str) -> Option<f64> {
    cell.trim().parse().ok()
}
