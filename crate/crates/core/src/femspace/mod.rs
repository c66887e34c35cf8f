//! Finite element spaces on a curved mesh and assembly of the bilinear forms
//! of the discrete scheme.
//!
//! * velocity: vector `P^k`, continuous, zero on the outer boundary;
//! * pressure: scalar `P^{k-1}`, continuous inside each phase and duplicated
//!   along the interface, mean zero through one Lagrange multiplier;
//! * curvature: vector `P^k` on the interface edge chain.
//!
//! Vector dofs are interleaved: component `c` of slot `s` is dof `2 s + c`.

mod assembly;
mod interpolate;
mod norms;
mod sparse;

pub use assembly::{
    assemble_divergence, assemble_interface_mass, assemble_interface_stiffness, assemble_scalar_laplace,
    assemble_viscous, interface_positions, pressure_mass_diagonal, pressure_mean_vector, InterfaceMass,
};
pub use interpolate::{interpolate_interface, interpolate_nodal, interpolate_pressure, interpolate_velocity};
pub use norms::{
    interface_error, norm, nodal_error, pressure_error, velocity_error, Field, NormKind,
};
pub use sparse::SparseOperator;

pub(crate) use assembly::element_frame;

use std::collections::HashMap;

use crate::geometry::Point;
use crate::mesh::{CurvedMesh, Phase};
use crate::reference::EDGE_VERTICES;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum PressureKey {
    Vertex(usize),
    Edge(usize, usize, usize),
    Interior(usize, usize),
}

/// Degree-of-freedom maps of the three spaces on one mesh topology.
#[derive(Clone, Debug)]
pub struct FeSystem {
    order: usize,
    velocity_slot: Vec<usize>,
    velocity_nodes: Vec<usize>,
    pressure_local: usize,
    pressure_dofs: Vec<usize>,
    pressure_phase: Vec<Phase>,
    interface_slot: Vec<usize>,
    interface_nodes: Vec<usize>,
    interface_edge_slots: Vec<usize>,
}

impl FeSystem {
    pub fn new(mesh: &CurvedMesh) -> Self {
        let order = mesh.order();
        let mut velocity_slot = vec![NONE; mesh.n_nodes()];
        let mut velocity_nodes = Vec::new();
        for node in 0..mesh.n_nodes() {
            if !mesh.is_boundary(node) {
                velocity_slot[node] = velocity_nodes.len();
                velocity_nodes.push(node);
            }
        }

        let pressure = &mesh.kit().pressure;
        let p_loc = pressure.len();
        let per_edge = pressure.degree - 1;
        let mut keys: HashMap<(Phase, PressureKey), usize> = HashMap::new();
        let mut pressure_phase = Vec::new();
        let mut pressure_dofs = Vec::with_capacity(mesh.n_elements() * p_loc);
        for e in 0..mesh.n_elements() {
            let el = mesh.element(e);
            let phase = mesh.phase(e);
            for m in 0..p_loc {
                let key = if m < 3 {
                    PressureKey::Vertex(el[m])
                } else if m < 3 + 3 * per_edge {
                    let (edge, i) = ((m - 3) / per_edge, (m - 3) % per_edge);
                    let (a, b) = EDGE_VERTICES[edge];
                    let (ga, gb) = (el[a], el[b]);
                    let canonical = if ga < gb { i } else { per_edge - 1 - i };
                    PressureKey::Edge(ga.min(gb), ga.max(gb), canonical)
                } else {
                    PressureKey::Interior(e, m)
                };
                let next = pressure_phase.len();
                let dof = *keys.entry((phase, key)).or_insert(next);
                if dof == next {
                    pressure_phase.push(phase);
                }
                pressure_dofs.push(dof);
            }
        }

        let mut interface_slot = vec![NONE; mesh.n_nodes()];
        let mut interface_nodes = Vec::new();
        for node in mesh.interface_nodes() {
            interface_slot[node] = interface_nodes.len();
            interface_nodes.push(node);
        }
        let interface_edge_slots =
            mesh.interface_edges().iter().flat_map(|e| e.nodes.iter().map(|&n| interface_slot[n])).collect();

        Self {
            order,
            velocity_slot,
            velocity_nodes,
            pressure_local: p_loc,
            pressure_dofs,
            pressure_phase,
            interface_slot,
            interface_nodes,
            interface_edge_slots,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.velocity_nodes.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.pressure_phase.len()
    }

    pub fn n_interface(&self) -> usize {
        2 * self.interface_nodes.len()
    }

    /// Velocity dof of component `c` at `node`, `None` on the boundary.
    pub fn velocity_dof(&self, node: usize, c: usize) -> Option<usize> {
        let s = self.velocity_slot[node];
        (s != NONE).then(|| 2 * s + c)
    }

    /// Global node carrying velocity slot `s`.
    pub fn velocity_node(&self, slot: usize) -> usize {
        self.velocity_nodes[slot]
    }

    pub fn pressure_dofs(&self, e: usize) -> &[usize] {
        &self.pressure_dofs[e * self.pressure_local..(e + 1) * self.pressure_local]
    }

    pub fn pressure_phase(&self, dof: usize) -> Phase {
        self.pressure_phase[dof]
    }

    /// Interface dof of component `c` at `node`, `None` off the interface.
    pub fn interface_dof(&self, node: usize, c: usize) -> Option<usize> {
        let s = self.interface_slot[node];
        (s != NONE).then(|| 2 * s + c)
    }

    pub fn interface_nodes(&self) -> &[usize] {
        &self.interface_nodes
    }

    /// Interface slots of the `k + 1` nodes of interface edge `i`.
    pub fn interface_edge_slots(&self, i: usize) -> &[usize] {
        let n = self.order + 1;
        &self.interface_edge_slots[i * n..(i + 1) * n]
    }

    /// Velocity at every mesh node (zero on the boundary).
    pub fn velocity_at_nodes(&self, u: &[f64]) -> Vec<Point> {
        let mut out = vec![Point::zeros(); self.velocity_slot.len()];
        for (slot, &node) in self.velocity_nodes.iter().enumerate() {
            out[node] = Point::new(u[2 * slot], u[2 * slot + 1]);
        }
        out
    }

    /// Restriction of a velocity vector to the interface nodes.
    pub fn trace(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_interface()];
        for (slot, &node) in self.interface_nodes.iter().enumerate() {
            for c in 0..2 {
                out[2 * slot + c] = self.velocity_dof(node, c).map_or(0.0, |d| u[d]);
            }
        }
        out
    }

    /// Interface vector field as nodal points.
    pub fn interface_points(&self, v: &[f64]) -> Vec<Point> {
        (0..self.interface_nodes.len()).map(|s| Point::new(v[2 * s], v[2 * s + 1])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::InterfaceDescriptor;
    use crate::mesh::{generate_fitted_mesh, Rect};

    #[test]
    fn dof_counts() {
        let desc = InterfaceDescriptor::circle(Point::zeros(), 0.5).unwrap();
        let flat = generate_fitted_mesh(&Rect::new(-1.0, -1.0, 1.0, 1.0).unwrap(), &desc, 0.2).unwrap();
        for k in [2, 3] {
            let mesh = CurvedMesh::lenoir_curve(&flat, &desc, k).unwrap();
            let sys = FeSystem::new(&mesh);
            let interior = (0..mesh.n_nodes()).filter(|&n| !mesh.is_boundary(n)).count();
            assert_eq!(sys.n_velocity(), 2 * interior);
            // every interface node is a velocity node
            for &n in sys.interface_nodes() {
                assert!(sys.velocity_dof(n, 0).is_some());
            }
            // pressure: per-phase P^{k-1} node counts; the interface duplicates
            let n_vertices = flat.vertices.len();
            let n_iface = flat.interface_edges.len();
            if k == 2 {
                assert_eq!(sys.n_pressure(), n_vertices + n_iface);
            } else {
                let n_edges = mesh.n_nodes() - n_vertices - mesh.n_elements() * ((k - 1) * (k - 2) / 2);
                let n_edges = n_edges / (k - 1);
                assert_eq!(sys.n_pressure(), n_vertices + n_edges + 2 * n_iface);
            }
        }
    }
}
