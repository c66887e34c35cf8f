//! Lagrange interpolation onto the finite element spaces.

use super::FeSystem;
use crate::geometry::Point;
use crate::mesh::{CurvedMesh, Phase};

/// Scalar `P^k` interpolant at every mesh node.
pub fn interpolate_nodal(mesh: &CurvedMesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
    mesh.nodes().iter().map(|&x| f(x)).collect()
}

/// Velocity interpolant; boundary values are dropped.
pub fn interpolate_velocity(mesh: &CurvedMesh, sys: &FeSystem, f: impl Fn(Point) -> Point) -> Vec<f64> {
    (0..sys.n_velocity() / 2)
        .flat_map(|slot| {
            let v = f(mesh.nodes()[sys.velocity_node(slot)]);
            [v.x, v.y]
        })
        .collect()
}

/// Pressure interpolant of a phase-wise function.
pub fn interpolate_pressure(mesh: &CurvedMesh, sys: &FeSystem, f: impl Fn(Point, Phase) -> f64) -> Vec<f64> {
    let nodes = &mesh.kit().pressure.nodes;
    let mut p = vec![0.0; sys.n_pressure()];
    for e in 0..mesh.n_elements() {
        for (m, &dof) in sys.pressure_dofs(e).iter().enumerate() {
            p[dof] = f(mesh.map_point(e, nodes[m]), mesh.phase(e));
        }
    }
    p
}

/// Interface interpolant of a vector field.
pub fn interpolate_interface(mesh: &CurvedMesh, sys: &FeSystem, f: impl Fn(Point) -> Point) -> Vec<f64> {
    sys.interface_nodes()
        .iter()
        .flat_map(|&n| {
            let v = f(mesh.nodes()[n]);
            [v.x, v.y]
        })
        .collect()
}
