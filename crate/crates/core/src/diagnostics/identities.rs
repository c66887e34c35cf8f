//! Numerical checks of the transport theorems and of integration by parts on
//! closed curves.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::geometry::{InterfaceDescriptor, Point};
use crate::mesh::{CurvedMesh, Phase};

const STEPS: [f64; 2] = [1e-3, 1e-4];
const MIN_RATIO: f64 = 50.0;
const IBP_TOL: f64 = 1e-8;
const IBP_SAMPLES: usize = 512;

/// One identity with its residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    /// `(δθ, residual)` for finite-difference checks, `(0, residual)` otherwise.
    pub residuals: Vec<(f64, f64)>,
    /// Residual decay between successive `δθ`, if applicable.
    pub ratio: Option<f64>,
    /// Size of the exact derivative, used to recognise round-off residuals.
    pub scale: f64,
    pub passed: bool,
}

impl IdentityCheck {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One PASS/FAIL line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = write!(out, "{} {}: max residual {:.3e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.max_residual());
            for (d, r) in &c.residuals {
                if *d > 0.0 {
                    let _ = write!(out, ", dθ={d:e} -> {r:.3e}");
                }
            }
            match c.ratio {
                Some(ratio) if ratio >= MIN_RATIO => {
                    let _ = write!(out, ", decay ratio {ratio:.1}");
                }
                Some(_) => {
                    let _ = write!(out, ", exact up to round-off");
                }
                None => {}
            }
            out.push('\n');
        }
        out
    }
}

/// Smooth displacement vanishing on the outer boundary nodes.
fn displacement(mesh: &CurvedMesh) -> Vec<Point> {
    mesh.nodes()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if mesh.is_boundary(i) {
                Point::zeros()
            } else {
                Point::new(0.3 * (2.0 * x.x + x.y).sin(), 0.2 * (x.x - 3.0 * x.y).cos())
            }
        })
        .collect()
}

fn shifted(mesh: &CurvedMesh, e: &[Point], theta: f64) -> Vec<Point> {
    mesh.nodes().iter().zip(e).map(|(x, d)| x + theta * d).collect()
}

/// `∫_{Γ_θ} f g` with `f, g` carried by their nodal values.
fn interface_integral(mesh: &CurvedMesh, nodes: &[Point], f: &[f64], g: &[f64]) -> f64 {
    let kit = mesh.kit();
    let mut total = 0.0;
    for edge in mesh.interface_edges() {
        for q in 0..kit.edge_rule.len() {
            let (lv, ld) = (&kit.edge_values[q], &kit.edge_derivs[q]);
            let t: Point = edge.nodes.iter().zip(ld).map(|(&n, &w)| w * nodes[n]).sum();
            let fv: f64 = edge.nodes.iter().zip(lv).map(|(&n, &w)| w * f[n]).sum();
            let gv: f64 = edge.nodes.iter().zip(lv).map(|(&n, &w)| w * g[n]).sum();
            total += kit.edge_rule.weights[q] * fv * gv * t.norm();
        }
    }
    total
}

/// `∫_{Γ_h} f g ∇_Γ·e`.
fn interface_derivative(mesh: &CurvedMesh, e: &[Point], f: &[f64], g: &[f64]) -> f64 {
    let kit = mesh.kit();
    let nodes = mesh.nodes();
    let mut total = 0.0;
    for edge in mesh.interface_edges() {
        for q in 0..kit.edge_rule.len() {
            let (lv, ld) = (&kit.edge_values[q], &kit.edge_derivs[q]);
            let t: Point = edge.nodes.iter().zip(ld).map(|(&n, &w)| w * nodes[n]).sum();
            let de: Point = edge.nodes.iter().zip(ld).map(|(&n, &w)| w * e[n]).sum();
            let fv: f64 = edge.nodes.iter().zip(lv).map(|(&n, &w)| w * f[n]).sum();
            let gv: f64 = edge.nodes.iter().zip(lv).map(|(&n, &w)| w * g[n]).sum();
            // ∇_Γ·e |X'| = e'·X' / |X'|
            total += kit.edge_rule.weights[q] * fv * gv * de.dot(&t) / t.norm();
        }
    }
    total
}

/// Integrand of a bulk functional at a quadrature point: physical position and
/// the nodal-held product `f_h g_h`.
type BulkIntegrand<'a> = &'a dyn Fn(Point, f64) -> f64;

/// Elements of the inner phase, which moves with the interface.
fn inner(mesh: &CurvedMesh) -> impl Iterator<Item = usize> + '_ {
    (0..mesh.n_elements()).filter(|&e| mesh.phase(e) == Phase::Minus)
}

fn bulk_integral(mesh: &CurvedMesh, nodes: &[Point], fg: &[f64], integrand: BulkIntegrand<'_>) -> f64 {
    let kit = mesh.kit();
    let tab = &kit.geometry_tab;
    let mut total = 0.0;
    for e in inner(mesh) {
        let el = mesh.element(e);
        let pts: Vec<Point> = el.iter().map(|&n| nodes[n]).collect();
        for q in 0..kit.bulk_rule.len() {
            let det = CurvedMesh::jacobian(&pts, tab.grads(q)).determinant();
            let x: Point = pts.iter().zip(tab.values(q)).map(|(p, &w)| w * p).sum();
            let v: f64 = el.iter().zip(tab.values(q)).map(|(&n, &w)| w * fg[n]).sum();
            total += kit.bulk_rule.weights[q] * det * integrand(x, v);
        }
    }
    total
}

/// `∫_{Ω₋} (∇F·e + F ∇·e)` for `F(x, v)` with gradient `grad_f` in `x` at fixed
/// `v`, plus `∂_v F` times the nodal-held factor.
fn bulk_derivative(
    mesh: &CurvedMesh,
    e: &[Point],
    fg: &[f64],
    value: BulkIntegrand<'_>,
    grad_x: &dyn Fn(Point, f64) -> Point,
) -> f64 {
    let kit = mesh.kit();
    let tab = &kit.geometry_tab;
    let nodes = mesh.nodes();
    let mut total = 0.0;
    for el_idx in inner(mesh) {
        let el = mesh.element(el_idx);
        let pts: Vec<Point> = el.iter().map(|&n| nodes[n]).collect();
        for q in 0..kit.bulk_rule.len() {
            let j = CurvedMesh::jacobian(&pts, tab.grads(q));
            let det = j.determinant();
            let inv = j.try_inverse().expect("valid element");
            let x: Point = pts.iter().zip(tab.values(q)).map(|(p, &w)| w * p).sum();
            let v: f64 = el.iter().zip(tab.values(q)).map(|(&n, &w)| w * fg[n]).sum();
            let ev: Point = el.iter().zip(tab.values(q)).map(|(&n, &w)| w * e[n]).sum();
            let mut div = 0.0;
            for (&n, g) in el.iter().zip(tab.grads(q)) {
                let gx = g[0] * inv[(0, 0)] + g[1] * inv[(1, 0)];
                let gy = g[0] * inv[(0, 1)] + g[1] * inv[(1, 1)];
                div += e[n].x * gx + e[n].y * gy;
            }
            total += kit.bulk_rule.weights[q] * det * (grad_x(x, v).dot(&ev) + value(x, v) * div);
        }
    }
    total
}

fn fd_check(name: &str, exact: f64, functional: impl Fn(f64) -> f64) -> IdentityCheck {
    let residuals: Vec<(f64, f64)> = STEPS
        .iter()
        .map(|&d| (d, ((functional(d) - functional(-d)) / (2.0 * d) - exact).abs()))
        .collect();
    let ratio = residuals[0].1 / residuals[1].1;
    let scale = exact.abs().max(1.0);
    // residuals at round-off level cannot show the decay
    let roundoff = residuals.iter().all(|r| r.1 <= 1e-10 * scale);
    IdentityCheck { name: name.into(), residuals, ratio: Some(ratio), scale, passed: ratio >= MIN_RATIO || roundoff }
}

/// Tangential gradient of `f` on the curve.
fn tangential(grad: Point, n: Point) -> Point {
    grad - grad.dot(&n) * n
}

type Scalar = fn(Point) -> (f64, Point);

fn ibp_check(desc: &InterfaceDescriptor) -> IdentityCheck {
    let pairs: [(Scalar, Scalar); 3] = [
        (|x| (x.x, Point::new(1.0, 0.0)), |_| (1.0, Point::zeros())),
        (
            |x| (x.x.sin() + x.y * x.y, Point::new(x.x.cos(), 2.0 * x.y)),
            |x| {
                let v = (x.x * x.y).exp();
                (v, Point::new(x.y * v, x.x * v))
            },
        ),
        (|x| (x.x * x.y, Point::new(x.y, x.x)), |x| (x.y.cos(), Point::new(0.0, -x.y.sin()))),
    ];
    let dt = 2.0 * PI / IBP_SAMPLES as f64;
    let mut residuals = Vec::new();
    let mut scale: f64 = 0.0;
    for (f, g) in pairs {
        let (mut lhs, mut rhs) = (Point::zeros(), Point::zeros());
        for j in 0..IBP_SAMPLES {
            let t = j as f64 * dt;
            let x = desc.point(t);
            let ds = desc.derivatives(t).0.norm() * dt;
            let n = desc.normal_at(t);
            let curvature = desc.curvature_at(t);
            let ((fv, fg), (gv, gg)) = (f(x), g(x));
            lhs += ds * (fv * tangential(gg, n) + gv * tangential(fg, n));
            rhs += ds * fv * gv * curvature * n;
        }
        scale = scale.max(rhs.norm());
        residuals.push((0.0, (lhs - rhs).amax()));
    }
    let passed = residuals.iter().all(|r| r.1 <= IBP_TOL);
    IdentityCheck { name: "integration by parts on the exact curve".into(), residuals, ratio: None, scale, passed }
}

/// Transport theorems on the mesh family `X + θ e` and integration by parts on
/// the exact closed curve `desc`.
pub fn identity_suite(mesh: &CurvedMesh, desc: &InterfaceDescriptor) -> IdentityReport {
    let e = displacement(mesh);
    let ones = vec![1.0; mesh.n_nodes()];
    let fx: Vec<f64> = mesh.nodes().iter().map(|x| x.x).collect();
    let gy: Vec<f64> = mesh.nodes().iter().map(|x| 1.0 + x.y).collect();
    let mut checks = Vec::new();

    checks.push(fd_check("interface transport, f = g = 1", interface_derivative(mesh, &e, &ones, &ones), |th| {
        interface_integral(mesh, &shifted(mesh, &e, th), &ones, &ones)
    }));
    checks.push(fd_check(
        "interface transport, nodal f = x, g = 1 + y",
        interface_derivative(mesh, &e, &fx, &gy),
        |th| interface_integral(mesh, &shifted(mesh, &e, th), &fx, &gy),
    ));

    let fg: Vec<f64> = fx.iter().zip(&gy).map(|(a, b)| a * b).collect();
    let held: BulkIntegrand<'_> = &|_, v| v;
    checks.push(fd_check(
        "inner-phase transport, nodal f = x, g = 1 + y",
        bulk_derivative(mesh, &e, &fg, held, &|_, _| Point::zeros()),
        |th| bulk_integral(mesh, &shifted(mesh, &e, th), &fg, held),
    ));

    let field: BulkIntegrand<'_> = &|x, _| x.x.exp() * x.y.cos() + x.x * x.x * x.y;
    let field_grad = |x: Point, _: f64| {
        Point::new(x.x.exp() * x.y.cos() + 2.0 * x.x * x.y, -x.x.exp() * x.y.sin() + x.x * x.x)
    };
    checks.push(fd_check(
        "inner-phase transport, F = exp(x) cos(y) + x^2 y",
        bulk_derivative(mesh, &e, &ones, field, &field_grad),
        |th| bulk_integral(mesh, &shifted(mesh, &e, th), &ones, field),
    ));

    checks.push(ibp_check(desc));
    IdentityReport { checks }
}
