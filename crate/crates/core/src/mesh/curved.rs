use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::Matrix2;

use super::metrics::{shape_metrics, ShapeMetrics};
use super::{edge_key, FlatFittedMesh, Phase};
use crate::error::{Error, Result};
use crate::geometry::{InterfaceDescriptor, Point};
use crate::reference::{ElementKit, EDGE_VERTICES};

/// Displacement of an interior point with barycentric weights `la`, `lb` on
/// the curved edge `p → q`: `λ_a λ_b R(λ_b − λ_a)`, where the polynomial `R`
/// of degree `k − 2` reproduces the projected edge nodes at `params`. Being a
/// polynomial of degree `k`, it is represented exactly by the element map.
fn edge_extension(desc: &InterfaceDescriptor, p: Point, q: Point, params: &[f64], la: f64, lb: f64) -> Result<Point> {
    let samples = params
        .iter()
        .map(|&s| {
            let lin = p + s * (q - p);
            Ok((2.0 * s - 1.0, (desc.closest_point(&lin)? - lin) / (s * (1.0 - s))))
        })
        .collect::<Result<Vec<(f64, Point)>>>()?;
    let t = lb - la;
    let r: Point = samples
        .iter()
        .enumerate()
        .map(|(i, &(ti, v))| {
            let w: f64 = samples.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &(tj, _))| (t - tj) / (ti - tj)).product();
            w * v
        })
        .sum();
    Ok(la * lb * r)
}

/// An element together with one of its local edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ElementEdge {
    pub element: usize,
    pub local_edge: usize,
}

/// One curved interface edge: its `k + 1` global nodes, ordered so that the
/// minus phase lies to the left, and the two adjacent elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterfaceEdge {
    pub nodes: Vec<usize>,
    pub minus: ElementEdge,
    pub plus: ElementEdge,
}

/// Whether `displace_with` insists on zero displacement at boundary nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryPolicy {
    Fixed,
    Free,
}

/// Order-`k` iso-parametric triangulation fitted to the interface.
#[derive(Clone, Debug)]
pub struct CurvedMesh {
    kit: Arc<ElementKit>,
    nodes: Vec<Point>,
    elements: Vec<usize>,
    phases: Vec<Phase>,
    interface: Vec<InterfaceEdge>,
    boundary: Vec<usize>,
    on_boundary: Vec<bool>,
}

impl CurvedMesh {
    /// Curve the flat mesh: interface edge nodes are projected onto the exact
    /// curve and interior nodes of interface elements follow the polynomial
    /// extension of the edge displacement. All other nodes are affine.
    pub fn lenoir_curve(flat: &FlatFittedMesh, desc: &InterfaceDescriptor, order: usize) -> Result<Self> {
        Self::from_flat(flat, order, Some(desc))
    }

    /// Order-`k` mesh with every element affine (no curving).
    pub fn straight(flat: &FlatFittedMesh, order: usize) -> Result<Self> {
        Self::from_flat(flat, order, None)
    }

    fn from_flat(flat: &FlatFittedMesh, order: usize, desc: Option<&InterfaceDescriptor>) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!("mesh order {order} must be at least 2")));
        }
        let kit = ElementKit::get(order);
        let reference = &kit.geometry;
        let inner = order - 1;
        let params = &reference.edge_params[1..order];
        let iface: HashMap<(usize, usize), ()> =
            flat.interface_edges.iter().map(|e| (edge_key(e.vertices[0], e.vertices[1]), ())).collect();

        let mut nodes = flat.vertices.clone();
        let mut edge_base: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &flat.triangles {
            for &(a, b) in &EDGE_VERTICES {
                let key = edge_key(tri[a], tri[b]);
                *edge_count.entry(key).or_default() += 1;
                if edge_base.contains_key(&key) {
                    continue;
                }
                edge_base.insert(key, nodes.len());
                let (p, q) = (flat.vertices[key.0], flat.vertices[key.1]);
                for &s in params {
                    let lin = p + s * (q - p);
                    let pos = match desc {
                        Some(d) if iface.contains_key(&key) => d.closest_point(&lin)?,
                        _ => lin,
                    };
                    nodes.push(pos);
                }
            }
        }

        let n_loc = reference.len();
        let mut elements = Vec::with_capacity(flat.triangles.len() * n_loc);
        for tri in &flat.triangles {
            elements.extend_from_slice(tri);
            for &(a, b) in &EDGE_VERTICES {
                let base = edge_base[&edge_key(tri[a], tri[b])];
                for i in 0..inner {
                    let offset = if tri[a] < tri[b] { i } else { inner - 1 - i };
                    elements.push(base + offset);
                }
            }
            let corners = tri.map(|v| flat.vertices[v]);
            let curved_edge = (0..3).find(|&e| {
                let (a, b) = EDGE_VERTICES[e];
                iface.contains_key(&edge_key(tri[a], tri[b]))
            });
            for local in reference.interior_nodes() {
                let xi = reference.nodes[local];
                let lambda = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
                let affine = lambda[0] * corners[0] + lambda[1] * corners[1] + lambda[2] * corners[2];
                let pos = match (desc, curved_edge) {
                    (Some(d), Some(e)) => {
                        let (a, b) = EDGE_VERTICES[e];
                        affine + edge_extension(d, corners[a], corners[b], params, lambda[a], lambda[b])?
                    }
                    _ => affine,
                };
                nodes.push(pos);
                elements.push(nodes.len() - 1);
            }
        }

        let interface_lists: Vec<Vec<usize>> = flat
            .interface_edges
            .iter()
            .map(|e| {
                let tri = flat.triangles[e.minus];
                let local = (0..3)
                    .find(|&l| {
                        let (a, b) = EDGE_VERTICES[l];
                        tri[a] == e.vertices[0] && tri[b] == e.vertices[1]
                    })
                    .expect("interface edge is a counterclockwise edge of its minus triangle");
                reference.edge_nodes(local).iter().map(|&i| elements[e.minus * n_loc + i]).collect()
            })
            .collect();

        let mut boundary = Vec::new();
        for tri in &flat.triangles {
            for &(a, b) in &EDGE_VERTICES {
                let key = edge_key(tri[a], tri[b]);
                if edge_count[&key] == 1 {
                    boundary.push(key.0);
                    boundary.push(key.1);
                    let base = edge_base[&key];
                    boundary.extend(base..base + inner);
                }
            }
        }
        Self::assemble(order, nodes, elements, flat.phases.clone(), interface_lists, boundary)
    }

    /// Build and validate a mesh from raw arrays. Interface node lists may be
    /// given in either direction; they are reoriented to keep minus on the left.
    pub fn assemble(
        order: usize,
        nodes: Vec<Point>,
        elements: Vec<usize>,
        phases: Vec<Phase>,
        interface_lists: Vec<Vec<usize>>,
        mut boundary: Vec<usize>,
    ) -> Result<Self> {
        let invalid = |msg: String| Error::InvalidMesh(msg);
        if order < 2 {
            return Err(invalid(format!("order {order} must be at least 2")));
        }
        let kit = ElementKit::get(order);
        let n_loc = kit.geometry.len();
        if elements.len() != phases.len() * n_loc {
            return Err(invalid("element node lists do not match the element count".into()));
        }
        if let Some(&bad) = elements.iter().chain(&boundary).find(|&&i| i >= nodes.len()) {
            return Err(invalid(format!("node id {bad} out of range")));
        }
        boundary.sort_unstable();
        boundary.dedup();
        let mut on_boundary = vec![false; nodes.len()];
        for &b in &boundary {
            on_boundary[b] = true;
        }

        let mut by_edge: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for e in 0..phases.len() {
            let el = &elements[e * n_loc..(e + 1) * n_loc];
            for (l, &(a, b)) in EDGE_VERTICES.iter().enumerate() {
                by_edge.entry(edge_key(el[a], el[b])).or_default().push((e, l));
            }
        }
        let mut interface = Vec::with_capacity(interface_lists.len());
        let mut per_element = vec![0usize; phases.len()];
        for mut list in interface_lists {
            if list.len() != order + 1 {
                return Err(invalid(format!("interface edge needs {} nodes", order + 1)));
            }
            let key = edge_key(list[0], list[order]);
            let adjacent = by_edge.get(&key).cloned().unwrap_or_default();
            let find = |phase: Phase| adjacent.iter().copied().find(|&(e, _)| phases[e] == phase);
            let (Some(minus), Some(plus)) = (find(Phase::Minus), find(Phase::Plus)) else {
                return Err(invalid(format!("interface edge {key:?} does not separate the phases")));
            };
            if adjacent.len() != 2 {
                return Err(invalid(format!("interface edge {key:?} is not shared by exactly two elements")));
            }
            let local = |(e, l): (usize, usize)| -> Vec<usize> {
                kit.geometry.edge_nodes(l).iter().map(|&i| elements[e * n_loc + i]).collect()
            };
            let minus_nodes = local(minus);
            if minus_nodes[0] != list[0] {
                list.reverse();
            }
            let mut plus_nodes = local(plus);
            plus_nodes.reverse();
            if minus_nodes != list || plus_nodes != list {
                return Err(invalid(format!("interface edge {key:?} nodes disagree with its elements")));
            }
            per_element[minus.0] += 1;
            per_element[plus.0] += 1;
            interface.push(InterfaceEdge {
                nodes: list,
                minus: ElementEdge { element: minus.0, local_edge: minus.1 },
                plus: ElementEdge { element: plus.0, local_edge: plus.1 },
            });
        }
        if let Some(e) = per_element.iter().position(|&c| c > 1) {
            return Err(invalid(format!("element {e} has more than one interface edge")));
        }
        if interface.is_empty() {
            return Err(invalid("mesh has no interface".into()));
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        for edge in &interface {
            if next.insert(edge.nodes[0], edge.nodes[order]).is_some() {
                return Err(invalid("interface vertex starts two edges".into()));
            }
        }
        let start = interface[0].nodes[0];
        let mut v = start;
        for _ in 0..interface.len() {
            v = *next.get(&v).ok_or_else(|| invalid("interface edges do not close".into()))?;
        }
        if v != start {
            return Err(invalid("interface edges do not form a single closed cycle".into()));
        }
        if interface.iter().flat_map(|e| &e.nodes).any(|&n| on_boundary[n]) {
            return Err(invalid("interface touches the outer boundary".into()));
        }

        let mesh = Self { kit, nodes, elements, phases, interface, boundary, on_boundary };
        mesh.check_jacobians()?;
        Ok(mesh)
    }

    pub fn order(&self) -> usize {
        self.kit.order
    }

    pub fn kit(&self) -> &ElementKit {
        &self.kit
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.phases.len()
    }

    /// Global node ids of element `e` in reference-element order.
    pub fn element(&self, e: usize) -> &[usize] {
        let n = self.kit.geometry.len();
        &self.elements[e * n..(e + 1) * n]
    }

    pub fn phase(&self, e: usize) -> Phase {
        self.phases[e]
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn interface_edges(&self) -> &[InterfaceEdge] {
        &self.interface
    }

    /// Sorted ids of the nodes on the outer boundary.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.on_boundary[node]
    }

    /// Interface nodes in chain order (each node once).
    pub fn interface_nodes(&self) -> Vec<usize> {
        let k = self.order();
        self.interface.iter().flat_map(|e| e.nodes[..k].iter().copied()).collect()
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.element(e).iter().map(|&i| self.nodes[i]).collect()
    }

    pub fn interface_edge_points(&self, i: usize) -> Vec<Point> {
        self.interface[i].nodes.iter().map(|&n| self.nodes[n]).collect()
    }

    /// Jacobian of the element map from its node positions and reference gradients.
    pub fn jacobian(points: &[Point], grads: &[[f64; 2]]) -> Matrix2<f64> {
        let mut j = Matrix2::zeros();
        for (x, g) in points.iter().zip(grads) {
            j[(0, 0)] += x.x * g[0];
            j[(0, 1)] += x.x * g[1];
            j[(1, 0)] += x.y * g[0];
            j[(1, 1)] += x.y * g[1];
        }
        j
    }

    /// Physical image of reference point `xi` under the map of element `e`.
    pub fn map_point(&self, e: usize, xi: [f64; 2]) -> Point {
        let values = self.kit.geometry.values(xi);
        self.element(e).iter().zip(values).map(|(&n, v)| v * self.nodes[n]).sum()
    }

    /// Positive Jacobian determinants at every quadrature point and node.
    pub fn check_jacobians(&self) -> Result<()> {
        let node_tab = self.kit.geometry.tabulate(&self.kit.geometry.nodes);
        for e in 0..self.n_elements() {
            let pts = self.element_points(e);
            for tab in [&self.kit.geometry_tab, &node_tab] {
                for q in 0..tab.n_points() {
                    let det = Self::jacobian(&pts, tab.grads(q)).determinant();
                    if !(det > 0.0) {
                        return Err(Error::JacobianFlip { element: e, det });
                    }
                }
            }
        }
        Ok(())
    }

    /// Areas of the minus and plus phases.
    pub fn phase_areas(&self) -> (f64, f64) {
        let rule = &self.kit.bulk_rule;
        let (mut minus, mut plus) = (0.0, 0.0);
        for e in 0..self.n_elements() {
            let pts = self.element_points(e);
            let area: f64 = (0..rule.len())
                .map(|q| rule.weights[q] * Self::jacobian(&pts, self.kit.geometry_tab.grads(q)).determinant())
                .sum();
            match self.phases[e] {
                Phase::Minus => minus += area,
                Phase::Plus => plus += area,
            }
        }
        (minus, plus)
    }

    /// Length of the discrete interface with the interface quadrature rule.
    pub fn interface_length(&self) -> f64 {
        (0..self.interface.len()).map(|i| self.edge_length(&self.interface_edge_points(i))).sum()
    }

    pub(crate) fn edge_length(&self, pts: &[Point]) -> f64 {
        let kit = &self.kit;
        (0..kit.edge_rule.len())
            .map(|q| {
                let d: Point = pts.iter().zip(&kit.edge_derivs[q]).map(|(p, &w)| w * p).sum();
                kit.edge_rule.weights[q] * d.norm()
            })
            .sum()
    }

    /// Move every node by `d` keeping the boundary fixed.
    pub fn displace(&self, d: &[Point]) -> Result<(CurvedMesh, ShapeMetrics)> {
        self.displace_with(d, BoundaryPolicy::Fixed)
    }

    pub fn displace_with(&self, d: &[Point], policy: BoundaryPolicy) -> Result<(CurvedMesh, ShapeMetrics)> {
        if d.len() != self.nodes.len() {
            return Err(Error::InvalidArgument(format!(
                "displacement has {} entries for {} nodes",
                d.len(),
                self.nodes.len()
            )));
        }
        if policy == BoundaryPolicy::Fixed {
            if let Some(&node) = self.boundary.iter().find(|&&b| d[b] != Point::zeros()) {
                return Err(Error::BoundaryDisplacement { node });
            }
        }
        let mut moved = self.clone();
        for (x, dx) in moved.nodes.iter_mut().zip(d) {
            *x += dx;
        }
        moved.check_jacobians()?;
        let metrics = shape_metrics(&moved);
        Ok((moved, metrics))
    }

    /// Replace node positions wholesale (same topology).
    pub fn with_nodes(&self, nodes: Vec<Point>) -> Result<CurvedMesh> {
        if nodes.len() != self.nodes.len() {
            return Err(Error::InvalidArgument("node count mismatch".into()));
        }
        let mut moved = self.clone();
        moved.nodes = nodes;
        moved.check_jacobians()?;
        Ok(moved)
    }
}
