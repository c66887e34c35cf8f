//! Fitted triangulations around the initial interface and their curved,
//! iso-parametric counterparts.

mod curved;
mod generate;
mod io;
mod metrics;

pub use curved::{BoundaryPolicy, CurvedMesh, ElementEdge, InterfaceEdge};
pub use generate::generate_fitted_mesh;
pub use io::{export_mesh, import_mesh};
pub use metrics::{shape_metrics, ShapeMetrics};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{InterfaceDescriptor, Point};

/// Fluid phase of an element: `Minus` is enclosed by the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Minus,
    Plus,
}

impl Phase {
    pub fn symbol(self) -> char {
        match self {
            Phase::Minus => '-',
            Phase::Plus => '+',
        }
    }
}

/// Axis-aligned rectangular domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        if !(xmax > xmin && ymax > ymin) {
            return Err(Error::InvalidArgument(format!(
                "empty rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Self { min: Point::new(xmin, ymin), max: Point::new(xmax, ymax) })
    }

    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }

    /// Distance from an interior point to the nearest side (negative outside).
    pub fn clearance(&self, p: &Point) -> f64 {
        (p.x - self.min.x).min(self.max.x - p.x).min(p.y - self.min.y).min(self.max.y - p.y)
    }
}

/// Interface edge of a flat mesh with its two adjacent triangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlatInterfaceEdge {
    /// Endpoints ordered so that the minus triangle lies to the left.
    pub vertices: [usize; 2],
    pub minus: usize,
    pub plus: usize,
}

/// Straight-sided triangulation whose interface polygon has its vertices on Γ⁰.
#[derive(Clone, Debug)]
pub struct FlatFittedMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub phases: Vec<Phase>,
    pub interface_edges: Vec<FlatInterfaceEdge>,
    pub boundary_vertices: Vec<usize>,
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl FlatFittedMesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * (pb - pa).perp(&(pc - pa))
    }

    /// Longest triangle edge.
    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                (0..3).map(move |i| (self.vertices[t[i]] - self.vertices[t[(i + 1) % 3]]).norm())
            })
            .fold(0.0, f64::max)
    }

    pub fn interface_vertices(&self) -> Vec<usize> {
        self.interface_edges.iter().map(|e| e.vertices[0]).collect()
    }

    /// Check every structural invariant: orientation, closed interface cycle,
    /// phase partition, vertices on the interface.
    pub fn validate(&self, desc: &InterfaceDescriptor) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidMesh(msg));
        for t in 0..self.triangles.len() {
            let area = self.triangle_area(t);
            if area <= 0.0 {
                return fail(format!("triangle {t} has non-positive area {area:e}"));
            }
        }
        let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                edge_tris.entry(edge_key(tri[i], tri[(i + 1) % 3])).or_default().push(t);
            }
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut per_triangle = vec![0usize; self.triangles.len()];
        for e in &self.interface_edges {
            let [a, b] = e.vertices;
            for v in [a, b] {
                let sd = desc.signed_distance(&self.vertices[v]);
                if sd.abs() > 1e-10 {
                    return fail(format!("interface vertex {v} is off the curve by {sd:e}"));
                }
            }
            let tris = edge_tris.get(&edge_key(a, b)).cloned().unwrap_or_default();
            if tris.len() != 2 || !tris.contains(&e.minus) || !tris.contains(&e.plus) {
                return fail(format!("interface edge ({a}, {b}) has inconsistent adjacency"));
            }
            if self.phases[e.minus] != Phase::Minus || self.phases[e.plus] != Phase::Plus {
                return fail(format!("interface edge ({a}, {b}) does not separate the phases"));
            }
            per_triangle[e.minus] += 1;
            per_triangle[e.plus] += 1;
            if next.insert(a, b).is_some() {
                return fail(format!("interface vertex {a} starts two edges"));
            }
        }
        if let Some(t) = per_triangle.iter().position(|&c| c > 1) {
            return fail(format!("triangle {t} has more than one interface edge"));
        }
        // single closed cycle
        if let Some(&start) = self.interface_edges.first().map(|e| &e.vertices[0]) {
            let mut v = start;
            for _ in 0..self.interface_edges.len() {
                v = match next.get(&v) {
                    Some(&w) => w,
                    None => return fail("interface edges do not close".into()),
                };
            }
            if v != start {
                return fail("interface edges do not form a single cycle".into());
            }
        } else {
            return fail("mesh has no interface".into());
        }
        // minus triangles are exactly those inside the interface polygon
        let polygon: Vec<Point> = self.interface_edges.iter().map(|e| self.vertices[e.vertices[0]]).collect();
        for (t, tri) in self.triangles.iter().enumerate() {
            let centroid = (self.vertices[tri[0]] + self.vertices[tri[1]] + self.vertices[tri[2]]) / 3.0;
            let inside = point_in_polygon(&centroid, &polygon);
            if inside != (self.phases[t] == Phase::Minus) {
                return fail(format!("triangle {t} has the wrong phase tag"));
            }
        }
        Ok(())
    }
}

pub(crate) fn point_in_polygon(p: &Point, polygon: &[Point]) -> bool {
    let mut inside = false;
    let n = polygon.len();
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}
