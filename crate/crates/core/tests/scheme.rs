use twophase::diagnostics::{eoc, theorem_errors, Comparison, ErrorSource};
use twophase::mesh::{generate_fitted_mesh, CurvedMesh, Rect};
use twophase::scheme::{run, run_from, Physics, StateSnapshot};
use twophase::{InterfaceDescriptor, Point, RunConfig};

fn mesh(desc: &InterfaceDescriptor, h: f64, k: usize) -> CurvedMesh {
    let flat = generate_fitted_mesh(&Rect::new(-1.0, -1.0, 1.0, 1.0).unwrap(), desc, h).unwrap();
    CurvedMesh::lenoir_curve(&flat, desc, k).unwrap()
}

const STAR: &str = "\
[interface]
kind = star
r0 = 0.5
amplitude = 0.08
lobes = 5

[discretization]
k = 2
h = 0.2
tau_rule = fixed
tau = 0.005

[physics]
T = 0.05
nu_minus = 1
nu_plus = 4
";

#[test]
fn zero_final_time_gives_one_record() {
    let config = RunConfig::parse_with_overrides(STAR, &["physics.T=0".into()]).unwrap();
    let out = run(&config, &mut |_, _| Ok(())).unwrap();
    assert_eq!(out.records.len(), 1);
    assert_eq!(out.final_state.step, 0);
    assert_eq!(out.records[0].t, 0.0);
}

#[test]
fn star_relaxation_obeys_the_energy_identity() {
    let config = RunConfig::parse(STAR).unwrap();
    let mut seen = 0;
    let out = run(&config, &mut |state, rec| {
        assert_eq!(state.step, rec.step);
        seen += 1;
        Ok(())
    })
    .unwrap();
    let r = &out.records;
    assert_eq!(seen, config.n_steps() + 1);
    assert_eq!(r.len(), 11);
    for w in r.windows(2) {
        assert!(w[1].perimeter <= w[0].perimeter + 1e-10);
    }
    for rec in r {
        assert!(rec.energy_residual <= 1e-12, "step {}: {}", rec.step, rec.energy_residual);
        assert!(rec.divergence_ratio <= 1e-9);
        assert!(rec.relative_residual <= 1e-10);
        assert!(rec.min_scaled_jacobian > 0.0);
    }
    let drift = (r[10].area_minus - r[0].area_minus).abs() / r[0].area_minus;
    assert!(drift < 1e-3, "area drift {drift}");
}

#[test]
fn repeated_runs_are_bit_identical() {
    let config = RunConfig::parse_with_overrides(STAR, &["physics.T=0.015".into()]).unwrap();
    let a = run(&config, &mut |_, _| Ok(())).unwrap();
    let b = run(&config, &mut |_, _| Ok(())).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_state.mesh.nodes(), b.final_state.mesh.nodes());
}

#[test]
fn stationary_circle_errors_converge() {
    let desc = InterfaceDescriptor::circle(Point::zeros(), 0.5).unwrap();
    let physics = Physics { nu_minus: 1.0, nu_plus: 10.0 };
    let records = [0.2, 0.1]
        .iter()
        .map(|&h| {
            let out = run_from(StateSnapshot::initial(mesh(&desc, h, 2)), &physics, h * h, 1, &mut |_, _| Ok(())).unwrap();
            theorem_errors(&out.final_state, h, h * h, Comparison::ExactCircle(&desc)).unwrap()
        })
        .collect();
    let table = eoc(records).unwrap();
    assert!(table.records.iter().all(|r| r.source == ErrorSource::ExactCircle));
    let rates = &table.rates[0];
    // velocity, pressure, interface position and curvature all converge
    assert!(rates[0] >= 1.5, "{rates:?}");
    assert!(rates[1] >= 1.5, "{rates:?}");
    assert!(rates[3] >= 1.0, "{rates:?}");
    assert!(table.records[1].pressure_jump_err < table.records[0].pressure_jump_err);
    assert!(table.to_text().contains("exact_circle"));
}

#[test]
fn reference_errors_shrink_towards_the_reference() {
    let desc = InterfaceDescriptor::ellipse(Point::zeros(), 0.6, 0.4).unwrap();
    let physics = Physics { nu_minus: 1.0, nu_plus: 1.0 };
    let t_final = 0.02;
    let solve = |h: f64, tau: f64| {
        let n = (t_final / tau).round() as usize;
        run_from(StateSnapshot::initial(mesh(&desc, h, 2)), &physics, tau, n, &mut |_, _| Ok(())).unwrap().final_state
    };
    let reference = solve(0.05, 0.0025);
    let errs: Vec<_> = [(0.2, 0.01), (0.1, 0.005)]
        .iter()
        .map(|&(h, tau)| theorem_errors(&solve(h, tau), h, tau, Comparison::Reference(&reference)).unwrap())
        .collect();
    assert!(errs.iter().all(|e| e.source == ErrorSource::ReferenceRun));
    assert!(errs[1].u_h1_err < errs[0].u_h1_err, "{errs:?}");
    assert!(errs[1].x_h1_err < errs[0].x_h1_err, "{errs:?}");
    assert!(errs[1].kappa_l2_err < errs[0].kappa_l2_err, "{errs:?}");
}
