//! One time step of the coupled scheme and the time loop.
//!
//! With the new interface positions eliminated through `X^{m+1} = X^m + τ u^m`
//! (nodal), each step solves for `[u | p | λ | κ]`:
//!
//! ```text
//!  A u − Bᵀ p            + Cᵀ κ = 0
//! −B u         − c λ            = 0
//!      − cᵀ p                   = 0
//!  τ S T u               − M κ  = −S X^m
//! ```
//!
//! `A` is the viscous form, `B` the divergence form, `c` the pressure mean
//! functional, `M` the interface mass, `C = M T` its coupling to the velocity
//! trace `T` and `S` the interface stiffness, all on the current mesh.

mod output;
mod run;
mod solver;

pub use output::{csv_row, write_interface_vtk, write_vtk, CsvWriter, CSV_HEADER};
pub use run::{initial_mesh, run, run_from, RunOutcome, StepRecord};
pub use solver::{SolvePath, StepSolver};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::femspace::{
    assemble_divergence, assemble_interface_mass, assemble_interface_stiffness, assemble_viscous,
    interface_positions, pressure_mass_diagonal, pressure_mean_vector, FeSystem, InterfaceMass, SparseOperator,
};
use crate::geometry::Point;
use crate::mesh::{shape_metrics, CurvedMesh, Phase, ShapeMetrics};

/// Viscosities of the two phases. Surface tension is 1 and there is no body force.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physics {
    pub nu_minus: f64,
    pub nu_plus: f64,
}

/// Mesh at step `m` with the fields of the most recent solve.
#[derive(Clone, Debug)]
pub struct StateSnapshot {
    pub step: usize,
    pub t: f64,
    pub mesh: CurvedMesh,
    pub fe: Arc<FeSystem>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub kappa: Vec<f64>,
    pub metrics: ShapeMetrics,
}

impl StateSnapshot {
    /// State at `t = 0` with zero fields.
    pub fn initial(mesh: CurvedMesh) -> Self {
        let fe = Arc::new(FeSystem::new(&mesh));
        let metrics = shape_metrics(&mesh);
        Self {
            step: 0,
            t: 0.0,
            u: vec![0.0; fe.n_velocity()],
            p: vec![0.0; fe.n_pressure()],
            kappa: vec![0.0; fe.n_interface()],
            mesh,
            fe,
            metrics,
        }
    }
}

/// Assembled linear system of one step.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    pub a: SparseOperator,
    pub b: SparseOperator,
    pub c: Vec<f64>,
    pub mass: InterfaceMass,
    pub s: SparseOperator,
    /// Interface positions `X^m` as an interface vector.
    pub x: Vec<f64>,
    pub tau: f64,
    /// Velocity dof of every interface component, `None` on the boundary.
    pub trace_dofs: Vec<Option<usize>>,
    /// Pressure mass diagonal divided by the phase viscosity.
    pub pressure_weights: Vec<f64>,
    pub matrix: SparseOperator,
    pub rhs: Vec<f64>,
}

impl SaddleSystem {
    pub fn n_velocity(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_pressure(&self) -> usize {
        self.b.nrows()
    }

    pub fn n_interface(&self) -> usize {
        self.s.nrows()
    }

    /// `b − K x`
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x).iter().zip(&self.rhs).map(|(kx, b)| b - kx).collect()
    }

    pub(crate) fn unpack(&self, x: &[f64]) -> StepSolution {
        let (nu, np) = (self.n_velocity(), self.n_pressure());
        StepSolution {
            u: x[..nu].to_vec(),
            p: x[nu..nu + np].to_vec(),
            lambda: x[nu + np],
            kappa: x[nu + np + 1..].to_vec(),
            relative_residual: 0.0,
        }
    }
}

/// Velocity, pressure, mean multiplier and curvature of one solve.
#[derive(Clone, Debug)]
pub struct StepSolution {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub lambda: f64,
    pub kappa: Vec<f64>,
    /// `|b − K x| / |b|` after refinement, 0 for a zero right-hand side.
    pub relative_residual: f64,
}

pub fn build_step_system(state: &StateSnapshot, physics: &Physics, tau: f64) -> Result<SaddleSystem> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step {tau} must be positive")));
    }
    let (mesh, fe) = (&state.mesh, state.fe.as_ref());
    let a = assemble_viscous(mesh, fe, physics.nu_minus, physics.nu_plus);
    let b = assemble_divergence(mesh, fe);
    let c = pressure_mean_vector(mesh, fe);
    let mass = assemble_interface_mass(mesh, fe);
    let s = assemble_interface_stiffness(mesh, fe);
    let x = interface_positions(mesh, fe);

    let (nu, np, nk) = (fe.n_velocity(), fe.n_pressure(), fe.n_interface());
    let (p0, l0, k0) = (nu, nu + np, nu + np + 1);
    let n = k0 + nk;
    let mut t = Vec::with_capacity(a.nnz() + 2 * b.nnz() + 2 * np + 2 * mass.coupling.nnz() + 2 * s.nnz());
    t.extend(a.triplets());
    for (r, col, v) in b.triplets() {
        t.push((col, p0 + r, -v));
        t.push((p0 + r, col, -v));
    }
    for (i, &ci) in c.iter().enumerate() {
        t.push((p0 + i, l0, -ci));
        t.push((l0, p0 + i, -ci));
    }
    for (r, col, v) in mass.coupling.triplets() {
        t.push((col, k0 + r, v));
    }
    let nodes = fe.interface_nodes();
    for (r, col, v) in s.triplets() {
        if let Some(vel) = fe.velocity_dof(nodes[col / 2], col % 2) {
            t.push((k0 + r, vel, tau * v));
        }
    }
    for (r, col, v) in mass.gamma.triplets() {
        t.push((k0 + r, k0 + col, -v));
    }
    let matrix = SparseOperator::from_triplets(n, n, t);

    let mut rhs = vec![0.0; n];
    for (i, v) in s.matvec(&x).into_iter().enumerate() {
        rhs[k0 + i] = -v;
    }
    let trace_dofs = (0..nk).map(|i| fe.velocity_dof(nodes[i / 2], i % 2)).collect();
    let pressure_weights = pressure_mass_diagonal(mesh, fe)
        .into_iter()
        .enumerate()
        .map(|(q, m)| {
            m / match fe.pressure_phase(q) {
                Phase::Minus => physics.nu_minus,
                Phase::Plus => physics.nu_plus,
            }
        })
        .collect();
    Ok(SaddleSystem { a, b, c, mass, s, x, tau, trace_dofs, pressure_weights, matrix, rhs })
}

/// Solve one system with a fresh factorization.
pub fn solve_step(sys: &SaddleSystem) -> Result<StepSolution> {
    StepSolver::new().solve(sys)
}

/// Assemble and solve on the state's mesh, storing the fields in the state.
pub fn solve_state(
    state: &mut StateSnapshot,
    physics: &Physics,
    tau: f64,
    solver: &mut StepSolver,
) -> Result<(SaddleSystem, StepSolution)> {
    let sys = build_step_system(state, physics, tau)?;
    let sol = solver.solve(&sys)?;
    state.u.clone_from(&sol.u);
    state.p.clone_from(&sol.p);
    state.kappa.clone_from(&sol.kappa);
    Ok((sys, sol))
}

/// Nodal mesh displacement `τ u`.
pub fn displacement(state: &StateSnapshot, tau: f64) -> Vec<Point> {
    state.fe.velocity_at_nodes(&state.u).into_iter().map(|v| tau * v).collect()
}

/// Move every mesh node by `τ u`; fields are carried over unchanged.
pub fn advance(state: &StateSnapshot, tau: f64) -> Result<StateSnapshot> {
    let (mesh, metrics) = state.mesh.displace(&displacement(state, tau))?;
    Ok(StateSnapshot {
        step: state.step + 1,
        t: state.t + tau,
        mesh,
        fe: Arc::clone(&state.fe),
        u: state.u.clone(),
        p: state.p.clone(),
        kappa: state.kappa.clone(),
        metrics,
    })
}
