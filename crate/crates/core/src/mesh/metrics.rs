//! Shape-regularity quantities of the element parametrizations.
//!
//! Every element map is rescaled by its diameter before measuring, so the
//! numbers compare element shapes rather than sizes. Only derivative
//! (semi)norms enter, which also makes them translation invariant.

use nalgebra::Matrix2;

use super::CurvedMesh;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeMetrics {
    /// max over K of |F_K|_{H^1..H^{k-1}} + |F_K|_{W^{1,∞}} + |F_K^{-1}|_{W^{1,∞}}
    pub kappa: f64,
    /// max over K of |F_K|_{H^1..H^k}
    pub kappa_star: f64,
    /// Smallest pointwise mean-ratio quality, 1 for an equilateral element.
    pub min_scaled_jacobian: f64,
}

/// Reference equilateral triangle map: (1,0) -> (1,0), (0,1) -> (1/2, √3/2).
fn equilateral_inverse() -> Matrix2<f64> {
    let w = Matrix2::new(1.0, 0.5, 0.0, 0.75f64.sqrt());
    w.try_inverse().expect("equilateral map is invertible")
}

/// Mean-ratio quality `2 det(A) / |A|_F^2` of `A = J W^{-1}`.
pub(crate) fn mean_ratio(j: &Matrix2<f64>, w_inv: &Matrix2<f64>) -> f64 {
    let a = j * w_inv;
    2.0 * a.determinant() / a.norm_squared()
}

fn spectral_norm(m: &Matrix2<f64>) -> f64 {
    m.singular_values().max()
}

pub fn shape_metrics(mesh: &CurvedMesh) -> ShapeMetrics {
    let kit = mesh.kit();
    let k = kit.order;
    let rule = &kit.bulk_rule;
    let basis = &kit.geometry.basis;
    // derivative table: for each multi-index of order 1..=k, basis derivatives at each point
    let mut alphas = Vec::new();
    for order in 1..=k {
        for dy in 0..=order {
            alphas.push((order - dy, dy, order));
        }
    }
    let table: Vec<Vec<Vec<f64>>> = alphas
        .iter()
        .map(|&(dx, dy, _)| {
            rule.points
                .iter()
                .map(|p| basis.iter().map(|b| b.derivative(dx, dy, p[0], p[1])).collect())
                .collect()
        })
        .collect();
    let w_inv = equilateral_inverse();

    let mut kappa: f64 = 0.0;
    let mut kappa_star: f64 = 0.0;
    let mut min_q = f64::INFINITY;
    for e in 0..mesh.n_elements() {
        let pts = mesh.element_points(e);
        let diameter = (0..3).map(|i| (pts[i] - pts[(i + 1) % 3]).norm()).fold(0.0, f64::max);
        let mut w1: f64 = 0.0;
        let mut w1_inv: f64 = 0.0;
        for q in 0..rule.len() {
            let j = CurvedMesh::jacobian(&pts, kit.geometry_tab.grads(q));
            w1 = w1.max(spectral_norm(&j) / diameter);
            if let Some(inv) = j.try_inverse() {
                w1_inv = w1_inv.max(spectral_norm(&inv) * diameter);
            } else {
                w1_inv = f64::INFINITY;
            }
            min_q = min_q.min(mean_ratio(&j, &w_inv));
        }
        let mut lower = 0.0;
        let mut full = 0.0;
        for (a, &(_, _, order)) in alphas.iter().enumerate() {
            let integral: f64 = (0..rule.len())
                .map(|q| {
                    let d: nalgebra::Vector2<f64> = pts.iter().zip(&table[a][q]).map(|(x, &c)| c * x).sum();
                    rule.weights[q] * d.norm_squared()
                })
                .sum::<f64>()
                / (diameter * diameter);
            full += integral;
            if order < k {
                lower += integral;
            }
        }
        kappa = kappa.max(lower.sqrt() + w1 + w1_inv);
        kappa_star = kappa_star.max(full.sqrt());
    }
    ShapeMetrics { kappa, kappa_star, min_scaled_jacobian: min_q }
}
