//! Frame and report writers. Floats are printed with 17 significant digits so
//! that parsing a frame gives back the exact values in memory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::basis::BasisData;
use crate::equations::Equation;
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Vtk,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "vtk" => Ok(OutputFormat::Vtk),
            other => Err(Error::Config(format!("unknown output format `{other}`"))),
        }
    }
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Vtk => "vtk",
        }
    }
}

#[inline]
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Output variables of one node: primitives for Euler, the state otherwise.
fn output_vars(eq: &Equation, u: &[f64]) -> Vec<f64> {
    if eq.is_euler() {
        eq.primitive(u)
    } else {
        u.to_vec()
    }
}

/// Point-wise CSV: `x[,y],vars...,eps`, element-major, node-lexicographic.
pub fn frame_csv(field: &NodalField, eq: &Equation, mesh: &Mesh, basis: &BasisData, eps: &[f64]) -> Result<String> {
    let m = eq.n_vars();
    let n = basis.n_nodes();
    let mut out = String::new();
    out.push_str(if mesh.dim == 1 { "x" } else { "x,y" });
    for name in eq.variable_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",eps\n");
    for e in 0..field.n_elements {
        for q in 0..field.nodes_per_element {
            let (ix, jy) = (q % n, q / n);
            let eta = if mesh.dim == 2 { basis.nodes[jy] } else { 0.0 };
            let x = mesh.ref_to_phys(e, [basis.nodes[ix], eta])?;
            out.push_str(&num(x[0]));
            if mesh.dim == 2 {
                out.push(',');
                out.push_str(&num(x[1]));
            }
            for v in output_vars(eq, &field.state(e, q)[..m]) {
                out.push(',');
                out.push_str(&num(v));
            }
            let _ = writeln!(out, ",{}", num(eps[e]));
        }
    }
    Ok(out)
}

/// Legacy VTK structured points with cell-averaged primitives (2D only).
pub fn frame_vtk(field: &NodalField, eq: &Equation, mesh: &Mesh, weights: &[f64], eps: &[f64]) -> Result<String> {
    if mesh.dim != 2 {
        return Err(Error::Config("VTK output is only available for 2D runs".into()));
    }
    let m = eq.n_vars();
    let means: Vec<Vec<f64>> = (0..field.n_elements)
        .map(|e| {
            let mut mean = vec![0.0; m];
            for (q, w) in weights.iter().enumerate() {
                for (k, mk) in mean.iter_mut().enumerate() {
                    *mk += w * field.state(e, q)[k];
                }
            }
            output_vars(eq, &mean)
        })
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "relaxfr {} t={}", eq.name(), num(field.time));
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {} {} 1", mesh.n[0] + 1, mesh.n[1] + 1);
    let _ = writeln!(out, "ORIGIN {} {} 0", num(mesh.lo[0]), num(mesh.lo[1]));
    let _ = writeln!(out, "SPACING {} {} 1", num(mesh.dx[0]), num(mesh.dx[1]));
    let _ = writeln!(out, "CELL_DATA {}", field.n_elements);
    for (k, name) in eq.variable_names().iter().enumerate() {
        let _ = writeln!(out, "SCALARS {name} double 1");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for mean in &means {
            let _ = writeln!(out, "{}", num(mean[k]));
        }
    }
    let _ = writeln!(out, "SCALARS eps double 1");
    let _ = writeln!(out, "LOOKUP_TABLE default");
    for v in eps {
        let _ = writeln!(out, "{}", num(*v));
    }
    Ok(out)
}

pub fn frame_path(dir: &Path, index: usize, time: f64, format: OutputFormat) -> PathBuf {
    dir.join(format!("frame_{index:05}_t{time:.6}.{}", format.extension()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Parse a frame written by [`frame_csv`] into its header and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad number `{v}`: {e}"))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, NodeKind};
    use crate::mesh::BoundaryKind;

    #[test]
    fn csv_rows_and_round_trip() {
        let basis = build_basis(1, NodeKind::GaussLegendre).unwrap();
        let mesh = Mesh::new_1d(0.0, 1.0, 2, BoundaryKind::Periodic, BoundaryKind::Periodic).unwrap();
        let mut f = NodalField::zeros(2, 2, 1);
        f.data.copy_from_slice(&[0.1, 1.0 / 3.0, -2.0e-300, std::f64::consts::PI]);
        let text = frame_csv(&f, &Equation::Burgers, &mesh, &basis, &[1e-12, 2e-3]).unwrap();
        let (header, rows) = parse_csv(&text).unwrap();
        assert_eq!(header, vec!["x", "u", "eps"]);
        assert_eq!(rows.len(), 4);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r[1].to_bits(), f.data[i].to_bits());
        }
        assert_eq!(rows[3][2], 2e-3);
    }

    #[test]
    fn vtk_header() {
        let basis = build_basis(1, NodeKind::GaussLegendre).unwrap();
        let mesh = Mesh::new_2d([0.0; 2], [1.0; 2], [2, 3], [BoundaryKind::Periodic; 4]).unwrap();
        let eq = Equation::Euler2D { gamma: 1.4 };
        let mut f = NodalField::zeros(6, 4, 4);
        for s in f.data.chunks_exact_mut(4) {
            s.copy_from_slice(&[1.0, 0.0, 0.0, 2.5]);
        }
        let w: Vec<f64> = (0..4).map(|q| basis.weights[q % 2] * basis.weights[q / 2]).collect();
        let text = frame_vtk(&f, &eq, &mesh, &w, &[1e-12; 6]).unwrap();
        assert!(text.contains("DIMENSIONS 3 4 1"));
        assert!(text.contains("CELL_DATA 6"));
        assert_eq!(text.matches("SCALARS").count(), 5);
    }

    #[test]
    fn frame_names() {
        let p = frame_path(Path::new("out"), 3, 0.5, OutputFormat::Csv);
        assert_eq!(p, Path::new("out/frame_00003_t0.500000.csv"));
    }
}
