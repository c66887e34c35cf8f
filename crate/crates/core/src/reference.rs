//! Reference Lagrange elements.
//!
//! Local node layout on the reference triangle `(0,0), (1,0), (0,1)`:
//! the three vertices, then the `k-1` interior nodes of each edge
//! `(0→1), (1→2), (2→0)` at Gauss–Lobatto positions in edge direction, then
//! the interior nodes at equispaced barycentric positions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::quadrature::{gauss_lobatto_points, LineRule, QuadratureRule};

/// Local vertex pairs of the three triangle edges.
pub const EDGE_VERTICES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Dense bivariate polynomial in the monomial basis `x^i y^j`, `i + j <= degree`.
#[derive(Clone, Debug)]
pub struct Poly2 {
    degree: usize,
    coeffs: Vec<f64>,
}

fn monomials(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for total in 0..=degree {
        for j in 0..=total {
            out.push((total - j, j));
        }
    }
    out
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

impl Poly2 {
    /// Value of the partial derivative `∂x^dx ∂y^dy` at `(x, y)`.
    pub fn derivative(&self, dx: usize, dy: usize, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for (&(i, j), &c) in monomials(self.degree).iter().zip(&self.coeffs) {
            if c == 0.0 || i < dx || j < dy {
                continue;
            }
            acc += c * falling(i, dx) * falling(j, dy) * x.powi((i - dx) as i32) * y.powi((j - dy) as i32);
        }
        acc
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.derivative(0, 0, x, y)
    }
}

/// Scalar `P^k` Lagrange element on the reference triangle.
#[derive(Clone, Debug)]
pub struct LagrangeTriangle {
    pub degree: usize,
    pub nodes: Vec<[f64; 2]>,
    pub basis: Vec<Poly2>,
    /// Gauss–Lobatto positions of the `degree + 1` nodes along an edge.
    pub edge_params: Vec<f64>,
}

impl LagrangeTriangle {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange elements need degree >= 1");
        let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let edge_params = gauss_lobatto_points(degree + 1);
        let mut nodes: Vec<[f64; 2]> = corners.to_vec();
        for &(a, b) in &EDGE_VERTICES {
            for &s in &edge_params[1..degree] {
                let (pa, pb) = (corners[a], corners[b]);
                nodes.push([pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]);
            }
        }
        let k = degree as f64;
        for j in 1..degree {
            for i in 1..degree - j {
                nodes.push([i as f64 / k, j as f64 / k]);
            }
        }
        let mons = monomials(degree);
        let n = mons.len();
        assert_eq!(n, nodes.len());
        let vandermonde = DMatrix::from_fn(n, n, |r, c| {
            let (i, j) = mons[c];
            nodes[r][0].powi(i as i32) * nodes[r][1].powi(j as i32)
        });
        let inv = vandermonde.try_inverse().expect("reference Lagrange nodes are unisolvent");
        let basis = (0..n)
            .map(|b| Poly2 { degree, coeffs: (0..n).map(|c| inv[(c, b)]).collect() })
            .collect();
        Self { degree, nodes, basis, edge_params }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Local node indices of edge `e` ordered from its first to its second vertex.
    pub fn edge_nodes(&self, e: usize) -> Vec<usize> {
        let (a, b) = EDGE_VERTICES[e];
        let inner = self.degree - 1;
        let mut out = vec![a];
        out.extend((0..inner).map(|i| 3 + e * inner + i));
        out.push(b);
        out
    }

    /// Range of local indices of the interior (bubble) nodes.
    pub fn interior_nodes(&self) -> std::ops::Range<usize> {
        3 + 3 * (self.degree - 1)..self.nodes.len()
    }

    pub fn values(&self, p: [f64; 2]) -> Vec<f64> {
        self.basis.iter().map(|b| b.eval(p[0], p[1])).collect()
    }

    pub fn gradients(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        self.basis
            .iter()
            .map(|b| [b.derivative(1, 0, p[0], p[1]), b.derivative(0, 1, p[0], p[1])])
            .collect()
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        let n = self.len();
        let mut values = Vec::with_capacity(points.len() * n);
        let mut grads = Vec::with_capacity(points.len() * n);
        for &p in points {
            values.extend(self.values(p));
            grads.extend(self.gradients(p));
        }
        Tabulation { n_basis: n, values, grads }
    }
}

/// Basis values and reference gradients at a fixed point set.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub n_basis: usize,
    values: Vec<f64>,
    grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn values(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_basis..(q + 1) * self.n_basis]
    }

    pub fn grads(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.n_basis..(q + 1) * self.n_basis]
    }

    pub fn n_points(&self) -> usize {
        self.values.len() / self.n_basis
    }
}

/// One-dimensional Lagrange basis on given nodes of `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Lagrange1d {
    pub nodes: Vec<f64>,
}

impl Lagrange1d {
    pub fn new(nodes: Vec<f64>) -> Self {
        Self { nodes }
    }

    pub fn values(&self, s: f64) -> Vec<f64> {
        let n = &self.nodes;
        (0..n.len())
            .map(|i| (0..n.len()).filter(|&j| j != i).map(|j| (s - n[j]) / (n[i] - n[j])).product())
            .collect()
    }

    pub fn derivatives(&self, s: f64) -> Vec<f64> {
        let n = &self.nodes;
        (0..n.len())
            .map(|i| {
                let mut acc = 0.0;
                for m in 0..n.len() {
                    if m == i {
                        continue;
                    }
                    let mut term = 1.0 / (n[i] - n[m]);
                    for j in 0..n.len() {
                        if j != i && j != m {
                            term *= (s - n[j]) / (n[i] - n[j]);
                        }
                    }
                    acc += term;
                }
                acc
            })
            .collect()
    }
}

/// Shared per-degree data: reference elements, quadrature rules and their tabulations.
#[derive(Debug)]
pub struct ElementKit {
    pub order: usize,
    /// Geometry and velocity element, degree `k`.
    pub geometry: LagrangeTriangle,
    /// Pressure element, degree `k - 1`.
    pub pressure: LagrangeTriangle,
    /// Bulk rule of degree `2k + 2`.
    pub bulk_rule: QuadratureRule,
    /// Interface rule of degree `2k + 3`.
    pub edge_rule: LineRule,
    pub geometry_tab: Tabulation,
    pub pressure_tab: Tabulation,
    pub edge_basis: Lagrange1d,
    /// Edge basis values and derivatives at the interface rule points.
    pub edge_values: Vec<Vec<f64>>,
    pub edge_derivs: Vec<Vec<f64>>,
}

impl ElementKit {
    fn build(order: usize) -> Self {
        assert!(order >= 2, "iso-parametric order must be at least 2");
        let geometry = LagrangeTriangle::new(order);
        let pressure = LagrangeTriangle::new(order - 1);
        let bulk_rule = QuadratureRule::triangle(2 * order + 2);
        let edge_rule = LineRule::gauss(2 * order + 3);
        let geometry_tab = geometry.tabulate(&bulk_rule.points);
        let pressure_tab = pressure.tabulate(&bulk_rule.points);
        let edge_basis = Lagrange1d::new(geometry.edge_params.clone());
        let edge_values = edge_rule.points.iter().map(|&s| edge_basis.values(s)).collect();
        let edge_derivs = edge_rule.points.iter().map(|&s| edge_basis.derivatives(s)).collect();
        Self {
            order,
            geometry,
            pressure,
            bulk_rule,
            edge_rule,
            geometry_tab,
            pressure_tab,
            edge_basis,
            edge_values,
            edge_derivs,
        }
    }

    /// Cached kit for order `k`.
    pub fn get(order: usize) -> Arc<ElementKit> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ElementKit>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("element kit cache poisoned");
        guard.entry(order).or_insert_with(|| Arc::new(ElementKit::build(order))).clone()
    }
}
