//! Norms and error norms of discrete fields, integrated with the mesh
//! quadrature rules.

use nalgebra::Matrix2;

use super::{element_frame, FeSystem};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{CurvedMesh, Phase};

/// A discrete field together with the space it lives in.
#[derive(Clone, Copy, Debug)]
pub enum Field<'a> {
    /// Scalar `P^k` values at every mesh node.
    Nodal(&'a [f64]),
    Velocity(&'a [f64]),
    Pressure(&'a [f64]),
    Interface(&'a [f64]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L2,
    H1Semi,
    H1,
}

/// L² and H¹-seminorm errors of a scalar nodal field against `exact`, which
/// returns the value and gradient.
pub fn nodal_error(mesh: &CurvedMesh, v: &[f64], exact: impl Fn(Point) -> (f64, [f64; 2])) -> (f64, f64) {
    let tab = &mesh.kit().geometry_tab;
    let (mut l2, mut h1) = (0.0, 0.0);
    for e in 0..mesh.n_elements() {
        let frame = element_frame(mesh, e);
        let el = mesh.element(e);
        for (q, &w) in frame.weights.iter().enumerate() {
            let (mut val, mut grad) = (0.0, [0.0; 2]);
            for (i, &n) in el.iter().enumerate() {
                let g = frame.grad(q, i);
                val += tab.values(q)[i] * v[n];
                grad[0] += g[0] * v[n];
                grad[1] += g[1] * v[n];
            }
            let (ev, eg) = exact(frame.points[q]);
            l2 += w * (val - ev).powi(2);
            h1 += w * ((grad[0] - eg[0]).powi(2) + (grad[1] - eg[1]).powi(2));
        }
    }
    (l2.sqrt(), h1.sqrt())
}

/// L² and H¹-seminorm errors of a velocity against `exact`, which returns the
/// value and the gradient matrix `G[(a, b)] = ∂_b u_a`.
pub fn velocity_error(
    mesh: &CurvedMesh,
    sys: &FeSystem,
    u: &[f64],
    exact: impl Fn(Point) -> (Point, Matrix2<f64>),
) -> (f64, f64) {
    let nodal = sys.velocity_at_nodes(u);
    let tab = &mesh.kit().geometry_tab;
    let (mut l2, mut h1) = (0.0, 0.0);
    for e in 0..mesh.n_elements() {
        let frame = element_frame(mesh, e);
        let el = mesh.element(e);
        for (q, &w) in frame.weights.iter().enumerate() {
            let mut val = Point::zeros();
            let mut grad = Matrix2::zeros();
            for (i, &n) in el.iter().enumerate() {
                let g = frame.grad(q, i);
                let un = nodal[n];
                val += tab.values(q)[i] * un;
                for a in 0..2 {
                    grad[(a, 0)] += un[a] * g[0];
                    grad[(a, 1)] += un[a] * g[1];
                }
            }
            let (ev, eg) = exact(frame.points[q]);
            l2 += w * (val - ev).norm_squared();
            h1 += w * (grad - eg).norm_squared();
        }
    }
    (l2.sqrt(), h1.sqrt())
}

/// Broken L² error of a pressure against a phase-wise function.
pub fn pressure_error(mesh: &CurvedMesh, sys: &FeSystem, p: &[f64], exact: impl Fn(Point, Phase) -> f64) -> f64 {
    let ptab = &mesh.kit().pressure_tab;
    let mut l2 = 0.0;
    for e in 0..mesh.n_elements() {
        let frame = element_frame(mesh, e);
        let dofs = sys.pressure_dofs(e);
        for (q, &w) in frame.weights.iter().enumerate() {
            let val: f64 = dofs.iter().zip(ptab.values(q)).map(|(&d, &v)| v * p[d]).sum();
            l2 += w * (val - exact(frame.points[q], mesh.phase(e))).powi(2);
        }
    }
    l2.sqrt()
}

/// L² error on the discrete interface of an interface field against `exact`.
pub fn interface_error(mesh: &CurvedMesh, sys: &FeSystem, v: &[f64], exact: impl Fn(Point) -> Point) -> f64 {
    interface_integrals(mesh, sys, v, Some(&exact)).0.sqrt()
}

/// `(∫ |v - exact|², ∫ |∂_s v|²)` over the discrete interface.
fn interface_integrals(
    mesh: &CurvedMesh,
    sys: &FeSystem,
    v: &[f64],
    exact: Option<&dyn Fn(Point) -> Point>,
) -> (f64, f64) {
    let kit = mesh.kit();
    let (mut l2, mut h1) = (0.0, 0.0);
    for i in 0..mesh.interface_edges().len() {
        let pts = mesh.interface_edge_points(i);
        let vals: Vec<Point> = sys.interface_edge_slots(i).iter().map(|&s| Point::new(v[2 * s], v[2 * s + 1])).collect();
        for q in 0..kit.edge_rule.len() {
            let (lv, ld) = (&kit.edge_values[q], &kit.edge_derivs[q]);
            let x: Point = pts.iter().zip(lv).map(|(p, &w)| w * p).sum();
            let tangent: Point = pts.iter().zip(ld).map(|(p, &w)| w * p).sum();
            let val: Point = vals.iter().zip(lv).map(|(p, &w)| w * p).sum();
            let dval: Point = vals.iter().zip(ld).map(|(p, &w)| w * p).sum();
            let len = tangent.norm();
            let w = kit.edge_rule.weights[q];
            let target = exact.map_or(Point::zeros(), |f| f(x));
            l2 += w * len * (val - target).norm_squared();
            h1 += w * dval.norm_squared() / len;
        }
    }
    (l2, h1)
}

/// Norm of a discrete field.
pub fn norm(mesh: &CurvedMesh, sys: &FeSystem, field: Field<'_>, kind: NormKind) -> Result<f64> {
    let (l2, semi) = match field {
        Field::Nodal(v) => nodal_error(mesh, v, |_| (0.0, [0.0; 2])),
        Field::Velocity(u) => velocity_error(mesh, sys, u, |_| (Point::zeros(), Matrix2::zeros())),
        Field::Pressure(p) => {
            if kind != NormKind::L2 {
                return Err(Error::InvalidArgument("pressure is only measured in the broken L2 norm".into()));
            }
            (pressure_error(mesh, sys, p, |_, _| 0.0), 0.0)
        }
        Field::Interface(v) => {
            let (l2, semi) = interface_integrals(mesh, sys, v, None);
            (l2.sqrt(), semi.sqrt())
        }
    };
    Ok(match kind {
        NormKind::L2 => l2,
        NormKind::H1Semi => semi,
        NormKind::H1 => l2.hypot(semi),
    })
}
