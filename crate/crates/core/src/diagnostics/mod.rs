//! Error norms against exact or reference solutions, convergence rates and
//! the moving-domain calculus checks.

mod identities;
pub mod locate;

pub use identities::{identity_suite, IdentityCheck, IdentityReport};

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::femspace::{element_frame, norm, pressure_error, FeSystem, Field, NormKind};
use crate::geometry::{InterfaceDescriptor, Point, Shape};
use crate::mesh::{CurvedMesh, Phase};
use crate::scheme::StateSnapshot;
use locate::{closest_on_interface, PointLocator};

/// What the discrete solution was compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorSource {
    ExactCircle,
    ReferenceRun,
}

impl ErrorSource {
    pub fn label(self) -> &'static str {
        match self {
            ErrorSource::ExactCircle => "exact_circle",
            ErrorSource::ReferenceRun => "reference_run",
        }
    }
}

/// The error norms of one discretization level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRecord {
    pub h: f64,
    pub tau: f64,
    pub u_h1_err: f64,
    pub p_l2_err: f64,
    pub x_h1_err: f64,
    pub kappa_l2_err: f64,
    pub pressure_jump_err: f64,
    pub source: ErrorSource,
}

pub const ERROR_COLUMNS: [&str; 5] = ["u_H1_err", "p_L2_err", "x_H1_err", "kappa_L2_err", "pressure_jump_err"];

impl ErrorRecord {
    pub fn values(&self) -> [f64; 5] {
        [self.u_h1_err, self.p_l2_err, self.x_h1_err, self.kappa_l2_err, self.pressure_jump_err]
    }
}

/// Convergence rates `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` between
/// successive levels.
pub fn eoc_rates(h: &[f64], e: &[f64]) -> Vec<f64> {
    h.windows(2).zip(e.windows(2)).map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln()).collect()
}

/// Levels ordered by decreasing `h` with the rates of every error column.
#[derive(Clone, Debug, PartialEq)]
pub struct EocTable {
    pub records: Vec<ErrorRecord>,
    /// `rates[i]` compares level `i` with level `i + 1`.
    pub rates: Vec<[f64; 5]>,
}

/// Rate table of at least two levels with strictly decreasing `h`.
pub fn eoc(records: Vec<ErrorRecord>) -> Result<EocTable> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument("a rate table needs at least two levels".into()));
    }
    if records.windows(2).any(|w| !(w[1].h < w[0].h)) {
        return Err(Error::InvalidArgument("levels must be strictly decreasing in h".into()));
    }
    let h: Vec<f64> = records.iter().map(|r| r.h).collect();
    let mut rates = vec![[0.0; 5]; records.len() - 1];
    for c in 0..5 {
        let e: Vec<f64> = records.iter().map(|r| r.values()[c]).collect();
        for (i, r) in eoc_rates(&h, &e).into_iter().enumerate() {
            rates[i][c] = r;
        }
    }
    Ok(EocTable { records, rates })
}

impl EocTable {
    /// Rates of one column.
    pub fn column_rates(&self, c: usize) -> Vec<f64> {
        self.rates.iter().map(|r| r[c]).collect()
    }

    /// One row per level; the rate columns compare a level with the previous
    /// one and are empty on the first row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,h,tau,source");
        for c in ERROR_COLUMNS {
            let _ = write!(out, ",{c}");
        }
        for c in ERROR_COLUMNS {
            let _ = write!(out, ",rate_{c}");
        }
        out.push('\n');
        for (i, r) in self.records.iter().enumerate() {
            let _ = write!(out, "{i},{:?},{:?},{}", r.h, r.tau, r.source.label());
            for v in r.values() {
                let _ = write!(out, ",{v:?}");
            }
            for c in 0..5 {
                match i.checked_sub(1) {
                    Some(j) => {
                        let _ = write!(out, ",{:?}", self.rates[j][c]);
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let source = self.records[0].source;
        let _ = writeln!(
            out,
            "errors against {} ({})",
            source.label(),
            match source {
                ErrorSource::ExactCircle => "exact stationary solution",
                ErrorSource::ReferenceRun => "self-convergence estimate against a refined run",
            }
        );
        let _ = write!(out, "{:>10} {:>12}", "h", "tau");
        for c in ERROR_COLUMNS {
            let _ = write!(out, " {c:>18} {:>6}", "rate");
        }
        out.push('\n');
        for (i, r) in self.records.iter().enumerate() {
            let _ = write!(out, "{:>10.5} {:>12.4e}", r.h, r.tau);
            for (c, v) in r.values().iter().enumerate() {
                let rate = i.checked_sub(1).map_or("-".to_string(), |j| format!("{:.2}", self.rates[j][c]));
                let _ = write!(out, " {v:>18.6e} {rate:>6}");
            }
            out.push('\n');
        }
        out
    }
}

fn pack(points: &[Point]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y]).collect()
}

fn projection_with(state: &StateSnapshot, project: impl Fn(Point) -> Result<Point>) -> Result<(Vec<Point>, f64)> {
    let nodes = state.mesh.nodes();
    let e = state
        .fe
        .interface_nodes()
        .iter()
        .map(|&n| project(nodes[n]).map(|p| nodes[n] - p))
        .collect::<Result<Vec<Point>>>()?;
    let h1 = norm(&state.mesh, &state.fe, Field::Interface(&pack(&e)), NormKind::H1)?;
    Ok((e, h1))
}

/// Nodal projection error `X − X̂` on the interface nodes (in interface slot
/// order) and its `H¹(Γ_h)` norm, where `X̂` projects every interface node
/// onto the closest point of `desc`.
pub fn projection_error(state: &StateSnapshot, desc: &InterfaceDescriptor) -> Result<(Vec<Point>, f64)> {
    projection_with(state, |x| desc.closest_point(&x))
}

/// Mean pressure over each phase, `(minus, plus)`.
pub fn phase_means(mesh: &CurvedMesh, fe: &FeSystem, p: &[f64]) -> (f64, f64) {
    let ptab = &mesh.kit().pressure_tab;
    let (mut int, mut area) = ([0.0; 2], [0.0; 2]);
    for e in 0..mesh.n_elements() {
        let frame = element_frame(mesh, e);
        let i = usize::from(mesh.phase(e) == Phase::Plus);
        let dofs = fe.pressure_dofs(e);
        for (q, &w) in frame.weights.iter().enumerate() {
            let v: f64 = dofs.iter().zip(ptab.values(q)).map(|(&d, &b)| b * p[d]).sum();
            int[i] += w * v;
            area[i] += w;
        }
    }
    (int[0] / area[0], int[1] / area[1])
}

/// Relative deviation of the mean pressure jump from the Laplace–Young value
/// `1/R`.
pub fn laplace_young_check(state: &StateSnapshot, radius: f64) -> f64 {
    let (minus, plus) = phase_means(&state.mesh, &state.fe, &state.p);
    ((minus - plus) - 1.0 / radius).abs() * radius
}

/// Comparison data for [`theorem_errors`].
#[derive(Clone, Copy, Debug)]
pub enum Comparison<'a> {
    /// Stationary circle: `u = 0`, phase-wise constant pressure with jump
    /// `1/R` and zero mean, `κ = n / R`.
    ExactCircle(&'a InterfaceDescriptor),
    /// Solved state of a refined run at the same time.
    Reference(&'a StateSnapshot),
}

/// The error norms of a solved state.
pub fn theorem_errors(state: &StateSnapshot, h: f64, tau: f64, cmp: Comparison<'_>) -> Result<ErrorRecord> {
    match cmp {
        Comparison::ExactCircle(desc) => exact_circle_errors(state, desc, h, tau),
        Comparison::Reference(reference) => reference_errors(state, reference, h, tau),
    }
}

fn exact_circle_errors(state: &StateSnapshot, desc: &InterfaceDescriptor, h: f64, tau: f64) -> Result<ErrorRecord> {
    let Shape::Circle { radius } = desc.shape else {
        return Err(Error::InvalidArgument("exact comparison needs a circular interface".into()));
    };
    let (mesh, fe) = (&state.mesh, state.fe.as_ref());
    let (am, ap) = mesh.phase_areas();
    let plus = -(PI * radius * radius) / (radius * (am + ap));
    let minus = plus + 1.0 / radius;
    let p_err = pressure_error(mesh, fe, &state.p, |_, ph| if ph == Phase::Minus { minus } else { plus });
    let (_, x_err) = projection_error(state, desc)?;
    let nodes = mesh.nodes();
    let mut diff = state.kappa.clone();
    for (s, &n) in fe.interface_nodes().iter().enumerate() {
        let a = desc.closest_point(&nodes[n])?;
        let target = (a - desc.center) / (radius * radius);
        diff[2 * s] -= target.x;
        diff[2 * s + 1] -= target.y;
    }
    Ok(ErrorRecord {
        h,
        tau,
        u_h1_err: norm(mesh, fe, Field::Velocity(&state.u), NormKind::H1)?,
        p_l2_err: p_err,
        x_h1_err: x_err,
        kappa_l2_err: norm(mesh, fe, Field::Interface(&diff), NormKind::L2)?,
        pressure_jump_err: laplace_young_check(state, radius),
        source: ErrorSource::ExactCircle,
    })
}

fn reference_errors(state: &StateSnapshot, reference: &StateSnapshot, h: f64, tau: f64) -> Result<ErrorRecord> {
    if (state.t - reference.t).abs() > 1e-9 * state.t.abs().max(1.0) + 0.5 * tau {
        return Err(Error::ReferenceMismatch(format!("time {} differs from reference time {}", state.t, reference.t)));
    }
    let (mesh, fe) = (&state.mesh, state.fe.as_ref());
    let (rmesh, rfe) = (&reference.mesh, reference.fe.as_ref());
    let locator = PointLocator::new(rmesh);
    let nodes = mesh.nodes();

    let mut du = state.u.clone();
    for slot in 0..fe.n_velocity() / 2 {
        let v = locator.velocity(rfe, &reference.u, nodes[fe.velocity_node(slot)]);
        du[2 * slot] -= v.x;
        du[2 * slot + 1] -= v.y;
    }

    let mut dp = state.p.clone();
    let pnodes = &mesh.kit().pressure.nodes;
    for e in 0..mesh.n_elements() {
        for (m, &d) in fe.pressure_dofs(e).iter().enumerate() {
            let x = mesh.map_point(e, pnodes[m]);
            dp[d] = state.p[d] - locator.pressure(rfe, &reference.p, x, mesh.phase(e));
        }
    }

    let tube = h;
    let basis = &rmesh.kit().edge_basis;
    let mut ex = Vec::with_capacity(fe.interface_nodes().len());
    let mut dk = state.kappa.clone();
    for (s, &n) in fe.interface_nodes().iter().enumerate() {
        let cp = closest_on_interface(rmesh, nodes[n]);
        let gap = (nodes[n] - cp.point).norm();
        if !(gap <= tube) {
            return Err(Error::ReferenceMismatch(format!(
                "interface node {n} lies {gap:e} from the reference interface, beyond the tube {tube:e}"
            )));
        }
        ex.push(nodes[n] - cp.point);
        let k: Point = rfe
            .interface_edge_slots(cp.edge)
            .iter()
            .zip(basis.values(cp.s))
            .map(|(&r, w)| w * Point::new(reference.kappa[2 * r], reference.kappa[2 * r + 1]))
            .sum();
        dk[2 * s] -= k.x;
        dk[2 * s + 1] -= k.y;
    }

    let (cm, cp) = phase_means(mesh, fe, &state.p);
    let (rm, rp) = phase_means(rmesh, rfe, &reference.p);
    let jump_ref = rm - rp;
    Ok(ErrorRecord {
        h,
        tau,
        u_h1_err: norm(mesh, fe, Field::Velocity(&du), NormKind::H1)?,
        p_l2_err: norm(mesh, fe, Field::Pressure(&dp), NormKind::L2)?,
        x_h1_err: norm(mesh, fe, Field::Interface(&pack(&ex)), NormKind::H1)?,
        kappa_l2_err: norm(mesh, fe, Field::Interface(&dk), NormKind::L2)?,
        pressure_jump_err: ((cm - cp) - jump_ref).abs() / jump_ref.abs().max(f64::MIN_POSITIVE),
        source: ErrorSource::ReferenceRun,
    })
}

/// Hausdorff distance between the curved discrete interface and `desc`,
/// sampled with `samples` points per discrete edge and `samples` points per
/// discrete edge count along the exact curve.
pub fn hausdorff_distance(mesh: &CurvedMesh, desc: &InterfaceDescriptor, samples: usize) -> f64 {
    let basis = &mesh.kit().edge_basis;
    let mut d: f64 = 0.0;
    for i in 0..mesh.interface_edges().len() {
        let pts = mesh.interface_edge_points(i);
        for j in 0..=samples {
            let w = basis.values(j as f64 / samples as f64);
            let x: Point = pts.iter().zip(&w).map(|(p, &b)| b * p).sum();
            d = d.max((x - desc.nearest(&x).1).norm());
        }
    }
    let n = samples * mesh.interface_edges().len();
    for j in 0..n {
        let y = desc.point(2.0 * PI * j as f64 / n as f64);
        d = d.max((closest_on_interface(mesh, y).point - y).norm());
    }
    d
}
