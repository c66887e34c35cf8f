//! Point location and field evaluation on a curved mesh.

use nalgebra::Matrix2;

use crate::femspace::FeSystem;
use crate::geometry::Point;
use crate::mesh::{CurvedMesh, Phase};

/// Bucket grid over element bounding boxes.
pub struct PointLocator<'a> {
    mesh: &'a CurvedMesh,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

/// Element containing (or nearest to) a point, with its reference coordinates.
#[derive(Clone, Copy, Debug)]
pub struct Location {
    pub element: usize,
    pub xi: [f64; 2],
    /// Distance of `xi` outside the reference triangle, 0 inside.
    pub outside: f64,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a CurvedMesh) -> Self {
        let nodes = mesh.nodes();
        let (mut lo, mut hi) = (nodes[0], nodes[0]);
        for p in nodes {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let n = (mesh.n_elements() as f64).sqrt().ceil().max(1.0);
        let cell = ((hi.x - lo.x).max(hi.y - lo.y) / n).max(f64::MIN_POSITIVE);
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for e in 0..mesh.n_elements() {
            let pts = mesh.element_points(e);
            let (mut a, mut b) = (pts[0], pts[0]);
            for p in &pts {
                a = a.inf(p);
                b = b.sup(p);
            }
            let (i0, j0) = Self::cell_of(lo, cell, nx, ny, a);
            let (i1, j1) = Self::cell_of(lo, cell, nx, ny, b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(e);
                }
            }
        }
        Self { mesh, origin: lo, cell, nx, ny, buckets }
    }

    fn cell_of(origin: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let i = ((p.x - origin.x) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let j = ((p.y - origin.y) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (i, j)
    }

    /// Reference coordinates of `x` under the map of element `e` (Newton).
    pub fn inverse_map(&self, e: usize, x: Point) -> [f64; 2] {
        let kit = self.mesh.kit();
        let pts = self.mesh.element_points(e);
        let mut xi = [1.0 / 3.0, 1.0 / 3.0];
        for _ in 0..30 {
            let vals = kit.geometry.values(xi);
            let grads = kit.geometry.gradients(xi);
            let f: Point = pts.iter().zip(&vals).map(|(p, &v)| v * p).sum::<Point>() - x;
            let j: Matrix2<f64> = CurvedMesh::jacobian(&pts, &grads);
            let Some(inv) = j.try_inverse() else { break };
            let d = inv * f;
            xi = [xi[0] - d.x, xi[1] - d.y];
            if d.norm() < 1e-14 {
                break;
            }
        }
        xi
    }

    /// Best element for `x` among those of `phase` (any phase for `None`),
    /// searching outward ring by ring until a containing element is found.
    pub fn locate(&self, x: Point, phase: Option<Phase>) -> Option<Location> {
        let (ci, cj) = Self::cell_of(self.origin, self.cell, self.nx, self.ny, x);
        let mut best: Option<Location> = None;
        for ring in 0..self.nx.max(self.ny) {
            let (i0, i1) = (ci.saturating_sub(ring), (ci + ring).min(self.nx - 1));
            let (j0, j1) = (cj.saturating_sub(ring), (cj + ring).min(self.ny - 1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if i != i0 && i != i1 && j != j0 && j != j1 {
                        continue;
                    }
                    for &e in &self.buckets[j * self.nx + i] {
                        if phase.is_some_and(|ph| self.mesh.phase(e) != ph) {
                            continue;
                        }
                        let xi = self.inverse_map(e, x);
                        let outside = (-xi[0]).max(-xi[1]).max(xi[0] + xi[1] - 1.0).max(0.0);
                        let outside = if outside.is_finite() { outside } else { f64::INFINITY };
                        if best.is_none_or(|b| outside < b.outside) {
                            best = Some(Location { element: e, xi, outside });
                        }
                    }
                }
            }
            // one more ring after a hit guards against bucket-edge effects
            if best.is_some_and(|b| b.outside <= 1e-12) && ring >= 1 {
                break;
            }
            if best.is_some() && ring >= 2 {
                break;
            }
        }
        best
    }

    /// Velocity of `u` at `x`.
    pub fn velocity(&self, fe: &FeSystem, u: &[f64], x: Point) -> Point {
        let Some(loc) = self.locate(x, None) else { return Point::zeros() };
        let vals = self.mesh.kit().geometry.values(loc.xi);
        self.mesh
            .element(loc.element)
            .iter()
            .zip(vals)
            .map(|(&n, v)| {
                let (a, b) = (fe.velocity_dof(n, 0), fe.velocity_dof(n, 1));
                v * Point::new(a.map_or(0.0, |d| u[d]), b.map_or(0.0, |d| u[d]))
            })
            .sum()
    }

    /// Pressure of `p` at `x`, evaluated from an element of `phase`.
    pub fn pressure(&self, fe: &FeSystem, p: &[f64], x: Point, phase: Phase) -> f64 {
        let Some(loc) = self.locate(x, Some(phase)) else { return 0.0 };
        let vals = self.mesh.kit().pressure.values(loc.xi);
        fe.pressure_dofs(loc.element).iter().zip(vals).map(|(&d, v)| v * p[d]).sum()
    }
}

/// Closest point on a discrete interface together with the edge and edge
/// parameter where it is attained.
#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub point: Point,
    pub edge: usize,
    pub s: f64,
}

/// Closest point on the curved interface of `mesh` to `x`.
pub fn closest_on_interface(mesh: &CurvedMesh, x: Point) -> CurvePoint {
    let kit = mesh.kit();
    let basis = &kit.edge_basis;
    let mut best = CurvePoint { point: Point::zeros(), edge: 0, s: 0.0 };
    let mut best_d = f64::INFINITY;
    for i in 0..mesh.interface_edges().len() {
        let pts = mesh.interface_edge_points(i);
        // cheap rejection by distance to the chord end points
        let chord = (pts[pts.len() - 1] - pts[0]).norm();
        if (pts[0] - x).norm() > best_d + chord && (pts[pts.len() - 1] - x).norm() > best_d + chord {
            continue;
        }
        let eval = |s: f64| -> (Point, Point) {
            let v = basis.values(s);
            let d = basis.derivatives(s);
            (pts.iter().zip(&v).map(|(p, &w)| w * p).sum(), pts.iter().zip(&d).map(|(p, &w)| w * p).sum())
        };
        let mut s_best = 0.0;
        let mut d_best = f64::INFINITY;
        for j in 0..=8 {
            let s = j as f64 / 8.0;
            let d = (eval(s).0 - x).norm();
            if d < d_best {
                (s_best, d_best) = (s, d);
            }
        }
        let mut s = s_best;
        for _ in 0..30 {
            let (p, t) = eval(s);
            let h = 1e-7;
            let (_, t2) = eval((s + h).min(1.0));
            let (_, t1) = eval((s - h).max(0.0));
            let dt = (t2 - t1) / ((s + h).min(1.0) - (s - h).max(0.0));
            let g = (p - x).dot(&t);
            let gp = t.norm_squared() + (p - x).dot(&dt);
            let step = if gp > 0.0 { -g / gp } else { -g.signum() * 0.1 };
            let next = (s + step).clamp(0.0, 1.0);
            if (next - s).abs() < 1e-15 {
                break;
            }
            s = next;
        }
        let p = eval(s).0;
        let d = (p - x).norm();
        if d < best_d {
            best_d = d;
            best = CurvePoint { point: p, edge: i, s };
        }
    }
    best
}
