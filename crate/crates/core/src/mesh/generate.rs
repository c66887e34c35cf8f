//! Ring-based fitted mesher.
//!
//! Inside the interface, scaled copies of the curve form concentric rings that
//! collapse to a fan around the center. Outside, rings blend the curve into the
//! rectangle boundary. Consecutive rings are stitched by a zipper
//! triangulation, so the interface polygon is a union of edges by construction
//! and no triangle has more than one interface edge.

use std::collections::HashMap;
use std::f64::consts::TAU;

use super::{edge_key, FlatFittedMesh, FlatInterfaceEdge, Phase, Rect};
use crate::error::{Error, Result};
use crate::geometry::{InterfaceDescriptor, Point};

const TABLE_SAMPLES: usize = 4096;

/// Equal-arclength parameters for `n` points on a closed curve given by `curve(t)`, `t ∈ [0, 2π)`.
fn equal_arclength_params(curve: &dyn Fn(f64) -> Point, n: usize) -> Vec<f64> {
    let m = TABLE_SAMPLES;
    let pts: Vec<Point> = (0..=m).map(|i| curve(TAU * i as f64 / m as f64)).collect();
    let mut cumulative = vec![0.0; m + 1];
    for i in 0..m {
        cumulative[i + 1] = cumulative[i] + (pts[i + 1] - pts[i]).norm();
    }
    let total = cumulative[m];
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for j in 0..n {
        let target = total * j as f64 / n as f64;
        while seg + 1 < m && cumulative[seg + 1] < target {
            seg += 1;
        }
        let span = cumulative[seg + 1] - cumulative[seg];
        let frac = if span > 0.0 { (target - cumulative[seg]) / span } else { 0.0 };
        out.push(TAU * (seg as f64 + frac) / m as f64);
    }
    out
}

fn closed_length(curve: &dyn Fn(f64) -> Point) -> f64 {
    let m = TABLE_SAMPLES;
    (0..m).map(|i| (curve(TAU * (i + 1) as f64 / m as f64) - curve(TAU * i as f64 / m as f64)).norm()).sum()
}

/// Point where the ray from `center` in direction `dir` leaves the rectangle.
fn ray_exit(rect: &Rect, center: &Point, dir: &Point) -> Point {
    let mut mu = f64::INFINITY;
    if dir.x > 0.0 {
        mu = mu.min((rect.max.x - center.x) / dir.x);
    } else if dir.x < 0.0 {
        mu = mu.min((rect.min.x - center.x) / dir.x);
    }
    if dir.y > 0.0 {
        mu = mu.min((rect.max.y - center.y) / dir.y);
    } else if dir.y < 0.0 {
        mu = mu.min((rect.min.y - center.y) / dir.y);
    }
    center + mu * dir
}

struct Builder {
    center: Point,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    phases: Vec<Phase>,
}

impl Builder {
    fn add_ring(&mut self, points: impl IntoIterator<Item = Point>) -> Vec<usize> {
        points
            .into_iter()
            .map(|p| {
                self.vertices.push(p);
                self.vertices.len() - 1
            })
            .collect()
    }

    fn angle(&self, v: usize) -> f64 {
        let d = self.vertices[v] - self.center;
        d.y.atan2(d.x)
    }

    fn area(&self, t: [usize; 3]) -> f64 {
        let [a, b, c] = t.map(|i| self.vertices[i]);
        0.5 * (b - a).perp(&(c - a))
    }

    fn push(&mut self, t: [usize; 3], phase: Phase) {
        self.triangles.push(t);
        self.phases.push(phase);
    }

    /// Stitch an inner ring to an outer ring; both counterclockwise.
    fn zip(&mut self, inner: &[usize], outer: &[usize], phase: Phase) {
        let (na, nb) = (inner.len(), outer.len());
        let a0 = self.angle(inner[0]);
        let wrap = |x: f64| {
            let y = x.rem_euclid(TAU);
            if y > std::f64::consts::PI {
                y - TAU
            } else {
                y
            }
        };
        let j0 = (0..nb)
            .min_by(|&i, &j| wrap(self.angle(outer[i]) - a0).abs().total_cmp(&wrap(self.angle(outer[j]) - a0).abs()))
            .expect("outer ring is non-empty");
        let a = |i: usize| inner[i % na];
        let b = |j: usize| outer[(j0 + j) % nb];
        let (mut i, mut j) = (0, 0);
        while i < na || j < nb {
            let tri_b = [a(i), b(j), b(j + 1)];
            let tri_a = [a(i), b(j), a(i + 1)];
            let advance_outer = if i == na {
                true
            } else if j == nb {
                false
            } else {
                let db = (self.vertices[a(i)] - self.vertices[b(j + 1)]).norm();
                let da = (self.vertices[a(i + 1)] - self.vertices[b(j)]).norm();
                let prefer_outer = db < da;
                let (ok_b, ok_a) = (self.area(tri_b) > 0.0, self.area(tri_a) > 0.0);
                if prefer_outer {
                    ok_b || !ok_a
                } else {
                    !ok_a && ok_b
                }
            };
            if advance_outer {
                self.push(tri_b, phase);
                j += 1;
            } else {
                self.push(tri_a, phase);
                i += 1;
            }
        }
    }
}

/// Build a quasi-uniform triangulation of `domain` fitted to `desc`.
pub fn generate_fitted_mesh(domain: &Rect, desc: &InterfaceDescriptor, target_h: f64) -> Result<FlatFittedMesh> {
    if !(target_h > 0.0 && target_h.is_finite()) {
        return Err(Error::InvalidArgument(format!("target_h = {target_h} must be positive")));
    }
    let c = desc.center;
    // star-shapedness: the polar angle must increase along the parametrization
    for i in 0..1024 {
        let t = TAU * i as f64 / 1024.0;
        let (d1, _) = desc.derivatives(t);
        if (desc.point(t) - c).perp(&d1) <= 0.0 {
            return Err(Error::NotStarShaped);
        }
    }
    let clearance = (0..TABLE_SAMPLES)
        .map(|i| domain.clearance(&desc.point(TAU * i as f64 / TABLE_SAMPLES as f64)))
        .fold(f64::INFINITY, f64::min);
    if clearance < 2.0 * target_h {
        return Err(Error::ClearanceTooSmall { clearance, required: 2.0 * target_h });
    }

    let gamma = |t: f64| desc.point(t);
    let perimeter = closed_length(&gamma);
    let n_iface = ((perimeter / target_h).ceil() as usize).max(6);
    let mut b = Builder { center: c, vertices: vec![c], triangles: Vec::new(), phases: Vec::new() };

    // inner rings
    let max_radius = (0..TABLE_SAMPLES)
        .map(|i| (desc.point(TAU * i as f64 / TABLE_SAMPLES as f64) - c).norm())
        .fold(0.0, f64::max);
    let n_inner = ((max_radius / target_h).round() as usize).max(1);
    let mut previous: Option<Vec<usize>> = None;
    for j in 1..n_inner {
        let s = j as f64 / n_inner as f64;
        let scaled = |t: f64| c + s * (desc.point(t) - c);
        let n = ((n_iface as f64 * s).round() as usize).max(3);
        let ring = b.add_ring(equal_arclength_params(&scaled, n).into_iter().map(scaled));
        match &previous {
            None => {
                for i in 0..ring.len() {
                    b.push([0, ring[i], ring[(i + 1) % ring.len()]], Phase::Minus);
                }
            }
            Some(prev) => b.zip(prev, &ring, Phase::Minus),
        }
        previous = Some(ring);
    }
    let iface_params = equal_arclength_params(&gamma, n_iface);
    let iface_ring = b.add_ring(iface_params.iter().map(|&t| desc.point(t)));
    match &previous {
        None => {
            for i in 0..n_iface {
                b.push([0, iface_ring[i], iface_ring[(i + 1) % n_iface]], Phase::Minus);
            }
        }
        Some(prev) => b.zip(prev, &iface_ring, Phase::Minus),
    }

    // outer rings blend the interface into the rectangle
    let exit = |t: f64| ray_exit(domain, &c, &(desc.point(t) - c));
    let max_gap = (0..TABLE_SAMPLES)
        .map(|i| {
            let t = TAU * i as f64 / TABLE_SAMPLES as f64;
            (exit(t) - desc.point(t)).norm()
        })
        .fold(0.0, f64::max);
    let n_outer = ((max_gap / target_h).round() as usize).max(1);
    let mut previous = iface_ring.clone();
    for j in 1..n_outer {
        let s = j as f64 / n_outer as f64;
        let blended = |t: f64| (1.0 - s) * desc.point(t) + s * exit(t);
        let n = ((closed_length(&blended) / target_h).round() as usize).max(3);
        let ring = b.add_ring(equal_arclength_params(&blended, n).into_iter().map(blended));
        b.zip(&previous, &ring, Phase::Plus);
        previous = ring;
    }
    let boundary_ring = b.add_ring(rectangle_points(domain, target_h));
    b.zip(&previous, &boundary_ring, Phase::Plus);

    // interface adjacency
    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in b.triangles.iter().enumerate() {
        for i in 0..3 {
            edge_tris.entry(edge_key(tri[i], tri[(i + 1) % 3])).or_default().push(t);
        }
    }
    let mut interface_edges = Vec::with_capacity(n_iface);
    for i in 0..n_iface {
        let (v0, v1) = (iface_ring[i], iface_ring[(i + 1) % n_iface]);
        let tris = &edge_tris[&edge_key(v0, v1)];
        let minus = *tris.iter().find(|&&t| b.phases[t] == Phase::Minus).expect("minus neighbour");
        let plus = *tris.iter().find(|&&t| b.phases[t] == Phase::Plus).expect("plus neighbour");
        interface_edges.push(FlatInterfaceEdge { vertices: [v0, v1], minus, plus });
    }
    let mut boundary_vertices = boundary_ring;
    boundary_vertices.sort_unstable();

    let mesh = FlatFittedMesh {
        vertices: b.vertices,
        triangles: b.triangles,
        phases: b.phases,
        interface_edges,
        boundary_vertices,
    };
    mesh.validate(desc)?;
    Ok(mesh)
}

/// Counterclockwise boundary points including the four corners.
fn rectangle_points(rect: &Rect, h: f64) -> Vec<Point> {
    let corners = [
        rect.min,
        Point::new(rect.max.x, rect.min.y),
        rect.max,
        Point::new(rect.min.x, rect.max.y),
    ];
    let mut out = Vec::new();
    for i in 0..4 {
        let (p, q) = (corners[i], corners[(i + 1) % 4]);
        let n = (((q - p).norm() / h).ceil() as usize).max(1);
        for j in 0..n {
            out.push(p + (q - p) * (j as f64 / n as f64));
        }
    }
    out
}
