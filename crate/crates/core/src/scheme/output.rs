//! Diagnostics CSV and legacy ASCII VTK snapshots.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{StateSnapshot, StepRecord};
use crate::error::Result;
use crate::geometry::Point;
use crate::mesh::Phase;

pub const CSV_HEADER: &str = "step,t,perimeter,area_minus,dissipation,energy_residual,u_H1,p_L2,kappa_L2,\
min_scaled_jacobian,kappa_mesh,kappa_star_mesh";

/// Row-by-row CSV writer, flushed after every row.
pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{CSV_HEADER}")?;
        out.flush()?;
        Ok(Self { out })
    }

    pub fn write(&mut self, r: &StepRecord) -> Result<()> {
        writeln!(self.out, "{}", csv_row(r))?;
        self.out.flush()?;
        Ok(())
    }
}

pub fn csv_row(r: &StepRecord) -> String {
    format!(
        "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
        r.step,
        r.t,
        r.perimeter,
        r.area_minus,
        r.dissipation,
        r.energy_residual,
        r.u_h1,
        r.p_l2,
        r.kappa_l2,
        r.min_scaled_jacobian,
        r.kappa_mesh,
        r.kappa_star_mesh
    )
}

/// Equispaced sub-grid of the reference triangle and its `k²` sub-triangles.
fn subgrid(k: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let mut index = vec![vec![0usize; k + 1]; k + 1];
    let mut points = Vec::new();
    for j in 0..=k {
        for i in 0..=k - j {
            index[i][j] = points.len();
            points.push([i as f64 / k as f64, j as f64 / k as f64]);
        }
    }
    let mut tris = Vec::with_capacity(k * k);
    for j in 0..k {
        for i in 0..k - j {
            tris.push([index[i][j], index[i + 1][j], index[i][j + 1]]);
            if i + j + 1 < k {
                tris.push([index[i + 1][j], index[i + 1][j + 1], index[i][j + 1]]);
            }
        }
    }
    (points, tris)
}

/// Bulk snapshot: each curved element is drawn as `k²` flat triangles with
/// its own copy of the points, so the pressure jump stays visible.
pub fn write_vtk(path: &Path, state: &StateSnapshot) -> Result<()> {
    let mesh = &state.mesh;
    let kit = mesh.kit();
    let k = kit.order;
    let (local, tris) = subgrid(k);
    let geo: Vec<Vec<f64>> = local.iter().map(|&p| kit.geometry.values(p)).collect();
    let pre: Vec<Vec<f64>> = local.iter().map(|&p| kit.pressure.values(p)).collect();
    let vel = state.fe.velocity_at_nodes(&state.u);
    let ne = mesh.n_elements();
    let per = local.len();

    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "two-phase Stokes step {} t={:?}", state.step, state.t);
    let _ = writeln!(out, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", ne * per);
    let mut velocity = Vec::with_capacity(ne * per);
    let mut pressure = Vec::with_capacity(ne * per);
    for e in 0..ne {
        let el = mesh.element(e);
        let pd = state.fe.pressure_dofs(e);
        for (g, p) in geo.iter().zip(&pre) {
            let x: Point = el.iter().zip(g).map(|(&n, &w)| w * mesh.nodes()[n]).sum();
            let v: Point = el.iter().zip(g).map(|(&n, &w)| w * vel[n]).sum();
            let _ = writeln!(out, "{:?} {:?} 0", x.x, x.y);
            velocity.push(v);
            pressure.push(pd.iter().zip(p).map(|(&d, &w)| w * state.p[d]).sum::<f64>());
        }
    }
    let n_cells = ne * tris.len();
    let _ = writeln!(out, "CELLS {} {}", n_cells, 4 * n_cells);
    for e in 0..ne {
        for t in &tris {
            let _ = writeln!(out, "3 {} {} {}", e * per + t[0], e * per + t[1], e * per + t[2]);
        }
    }
    let _ = writeln!(out, "CELL_TYPES {n_cells}");
    for _ in 0..n_cells {
        let _ = writeln!(out, "5");
    }
    let _ = writeln!(out, "CELL_DATA {n_cells}\nSCALARS phase int 1\nLOOKUP_TABLE default");
    for e in 0..ne {
        let tag = if mesh.phase(e) == Phase::Minus { -1 } else { 1 };
        for _ in 0..tris.len() {
            let _ = writeln!(out, "{tag}");
        }
    }
    let _ = writeln!(out, "POINT_DATA {}\nVECTORS velocity double", ne * per);
    for v in &velocity {
        let _ = writeln!(out, "{:?} {:?} 0", v.x, v.y);
    }
    let _ = writeln!(out, "SCALARS pressure double 1\nLOOKUP_TABLE default");
    for p in &pressure {
        let _ = writeln!(out, "{p:?}");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Interface snapshot: closed polyline through the interface nodes with the
/// discrete curvature vector as point data.
pub fn write_interface_vtk(path: &Path, state: &StateSnapshot) -> Result<()> {
    let nodes = state.fe.interface_nodes();
    let n = nodes.len();
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "interface step {} t={:?}", state.step, state.t);
    let _ = writeln!(out, "ASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {n} double");
    for &i in nodes {
        let x = state.mesh.nodes()[i];
        let _ = writeln!(out, "{:?} {:?} 0", x.x, x.y);
    }
    let _ = write!(out, "CELLS 1 {}\n{}", n + 2, n + 1);
    for i in 0..=n {
        let _ = write!(out, " {}", i % n);
    }
    let _ = writeln!(out, "\nCELL_TYPES 1\n4");
    let _ = writeln!(out, "POINT_DATA {n}\nVECTORS curvature double");
    for s in 0..n {
        let _ = writeln!(out, "{:?} {:?} 0", state.kappa[2 * s], state.kappa[2 * s + 1]);
    }
    std::fs::write(path, out)?;
    Ok(())
}
