use super::{advance, solve_state, Physics, SaddleSystem, StateSnapshot, StepSolution, StepSolver};
use crate::config::RunConfig;
use crate::error::Result;
use crate::femspace::{norm, Field, NormKind};
use crate::geometry::Point;
use crate::mesh::{generate_fitted_mesh, CurvedMesh};

/// Diagnostics of one solve, one CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    /// Length of `Γ^m`.
    pub perimeter: f64,
    pub area_minus: f64,
    /// `∫ 2ν |D(u)|²`
    pub dissipation: f64,
    /// `(|Γ^{m+1}| − |Γ^m|) / τ + ∫ 2ν |D(u)|²`, never positive.
    pub energy_residual: f64,
    pub u_h1: f64,
    pub p_l2: f64,
    pub kappa_l2: f64,
    pub min_scaled_jacobian: f64,
    pub kappa_mesh: f64,
    pub kappa_star_mesh: f64,
    /// `max_q |∫ ∇·u ψ_q| / ‖u‖_{H¹}`
    pub divergence_ratio: f64,
    pub relative_residual: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<StepRecord>,
    /// Last state, solved but not advanced.
    pub final_state: StateSnapshot,
}

/// Interface length after moving the interface nodes by `τ u`.
fn displaced_length(state: &StateSnapshot, tau: f64) -> f64 {
    let vel = state.fe.velocity_at_nodes(&state.u);
    let mesh = &state.mesh;
    mesh.interface_edges()
        .iter()
        .map(|edge| {
            let pts: Vec<Point> = edge.nodes.iter().map(|&n| mesh.nodes()[n] + tau * vel[n]).collect();
            mesh.edge_length(&pts)
        })
        .sum()
}

fn record(state: &StateSnapshot, sys: &SaddleSystem, sol: &StepSolution, tau: f64) -> Result<StepRecord> {
    let (mesh, fe) = (&state.mesh, state.fe.as_ref());
    let dissipation: f64 = sol.u.iter().zip(sys.a.matvec(&sol.u)).map(|(u, au)| u * au).sum();
    let perimeter = mesh.interface_length();
    let u_h1 = norm(mesh, fe, Field::Velocity(&sol.u), NormKind::H1)?;
    let divergence = sys.b.matvec(&sol.u).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(StepRecord {
        step: state.step,
        t: state.t,
        perimeter,
        area_minus: mesh.phase_areas().0,
        dissipation,
        energy_residual: (displaced_length(state, tau) - perimeter) / tau + dissipation,
        u_h1,
        p_l2: norm(mesh, fe, Field::Pressure(&sol.p), NormKind::L2)?,
        kappa_l2: norm(mesh, fe, Field::Interface(&sol.kappa), NormKind::L2)?,
        min_scaled_jacobian: state.metrics.min_scaled_jacobian,
        kappa_mesh: state.metrics.kappa,
        kappa_star_mesh: state.metrics.kappa_star,
        divergence_ratio: if u_h1 > 0.0 { divergence / u_h1 } else { divergence },
        relative_residual: sol.relative_residual,
    })
}

/// Solve at steps `0..=n_steps`, advancing the mesh in between. The observer
/// sees every solved state before the mesh moves, so on an abort everything
/// up to the failing step has been reported.
pub fn run_from(
    initial: StateSnapshot,
    physics: &Physics,
    tau: f64,
    n_steps: usize,
    observer: &mut dyn FnMut(&StateSnapshot, &StepRecord) -> Result<()>,
) -> Result<RunOutcome> {
    let mut solver = StepSolver::new();
    let mut state = initial;
    let mut records = Vec::with_capacity(n_steps + 1);
    for m in 0..=n_steps {
        let (sys, sol) = solve_state(&mut state, physics, tau, &mut solver)?;
        let rec = record(&state, &sys, &sol, tau)?;
        observer(&state, &rec)?;
        records.push(rec);
        if m < n_steps {
            state = advance(&state, tau)?;
        }
    }
    Ok(RunOutcome { records, final_state: state })
}

/// Initial curved mesh of a configuration.
pub fn initial_mesh(config: &RunConfig) -> Result<CurvedMesh> {
    let flat = generate_fitted_mesh(&config.domain, &config.interface, config.h)?;
    CurvedMesh::lenoir_curve(&flat, &config.interface, config.k)
}

/// Full run of a configuration.
pub fn run(
    config: &RunConfig,
    observer: &mut dyn FnMut(&StateSnapshot, &StepRecord) -> Result<()>,
) -> Result<RunOutcome> {
    let initial = StateSnapshot::initial(initial_mesh(config)?);
    run_from(initial, &config.physics(), config.tau(), config.n_steps(), observer)
}
