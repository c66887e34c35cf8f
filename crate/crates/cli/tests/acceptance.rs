//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! with a failure status if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use twophase::diagnostics::{hausdorff_distance, identity_suite, phase_means};
use twophase::femspace::{
    assemble_interface_mass, assemble_interface_stiffness, interface_error, interface_positions, interpolate_nodal,
    nodal_error, norm, FeSystem, Field, NormKind, SparseOperator,
};
use twophase::mesh::{export_mesh, generate_fitted_mesh, import_mesh, CurvedMesh, Rect};
use twophase::scheme::{run_from, Physics, StateSnapshot, StepRecord};
use twophase::{InterfaceDescriptor, Point};

const RADIUS: f64 = 0.5;

fn unit_square() -> Rect {
    Rect::new(-1.0, -1.0, 1.0, 1.0).unwrap()
}

fn curved(desc: &InterfaceDescriptor, h: f64, k: usize) -> CurvedMesh {
    let flat = generate_fitted_mesh(&unit_square(), desc, h).unwrap();
    CurvedMesh::lenoir_curve(&flat, desc, k).unwrap()
}

fn circle() -> InterfaceDescriptor {
    InterfaceDescriptor::circle(Point::zeros(), RADIUS).unwrap()
}

fn rates(h: &[f64], e: &[f64]) -> Vec<f64> {
    h.windows(2).zip(e.windows(2)).map(|(h, e)| (e[0] / e[1]).log2() / (h[0] / h[1]).log2()).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn fmt_rates(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ")
}

/// Divergence ratios of every solve seen so far.
#[derive(Default)]
struct Divergence {
    solves: usize,
    worst: f64,
}

impl Divergence {
    fn add(&mut self, records: &[StepRecord]) {
        for r in records {
            self.solves += 1;
            self.worst = self.worst.max(r.divergence_ratio);
        }
    }
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn stationary_circle(div: &mut Divergence) -> Verdict {
    let start = Instant::now();
    let hs = [0.2, 0.1, 0.05];
    let mut passed = true;
    let mut detail = Vec::new();
    for (nu_minus, nu_plus) in [(1.0, 1.0), (1.0, 10.0)] {
        let (mut u, mut jump) = (Vec::new(), Vec::new());
        for &h in &hs {
            let mesh = curved(&circle(), h, 2);
            let out = run_from(StateSnapshot::initial(mesh), &Physics { nu_minus, nu_plus }, h * h, 1, &mut |_, _| Ok(()))
                .unwrap();
            div.add(&out.records);
            let s = &out.final_state;
            u.push(norm(&s.mesh, &s.fe, Field::Velocity(&s.u), NormKind::H1).unwrap());
            let (pm, pp) = phase_means(&s.mesh, &s.fe, &s.p);
            // Laplace–Young: p₋ − p₊ = γ₀ / R
            jump.push(((pm - pp) - 1.0 / RADIUS).abs() * RADIUS);
        }
        let r = rates(&hs, &u);
        let improve: Vec<f64> = jump.windows(2).map(|w| w[0] / w[1]).collect();
        passed &= u.windows(2).all(|w| w[1] < w[0]) && r.iter().all(|&x| x >= 1.5);
        passed &= jump[2] <= 0.05 && improve.iter().all(|&x| x >= 1.5);
        detail.push(format!(
            "nu=({nu_minus},{nu_plus}) |u|_H1 [{}] EOC [{}], LY err [{}]",
            fmt_list(&u),
            fmt_rates(&r),
            fmt_list(&jump)
        ));
    }
    let elapsed = start.elapsed();
    passed &= within(elapsed, 120);
    verdict(passed, format!("{}; {:.1} s", detail.join("; "), elapsed.as_secs_f64()))
}

/// Conjugate gradients for a symmetric positive definite operator.
fn cg(a: &SparseOperator, b: &[f64]) -> Vec<f64> {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let tol = 1e-28 * rr;
    for _ in 0..10 * b.len() {
        if rr <= tol {
            break;
        }
        let ad = a.matvec(&d);
        let alpha = rr / dot(&d, &ad);
        x.iter_mut().zip(&d).for_each(|(x, d)| *x += alpha * d);
        r.iter_mut().zip(&ad).for_each(|(r, a)| *r -= alpha * a);
        let next = dot(&r, &r);
        d.iter_mut().zip(&r).for_each(|(d, r)| *d = r + next / rr * *d);
        rr = next;
    }
    x
}

fn curvature_operator() -> Verdict {
    let start = Instant::now();
    let hs = [0.2, 0.1, 0.05];
    let mut passed = true;
    let mut detail = Vec::new();
    for k in [2, 3] {
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let mesh = curved(&circle(), h, k);
                let fe = FeSystem::new(&mesh);
                let m = assemble_interface_mass(&mesh, &fe).gamma;
                let s = assemble_interface_stiffness(&mesh, &fe);
                let kappa = cg(&m, &s.matvec(&interface_positions(&mesh, &fe)));
                // −Δ_Γ id = n / R on the circle
                interface_error(&mesh, &fe, &kappa, |x| x / (x.norm() * RADIUS))
            })
            .collect();
        let r = rates(&hs, &errs);
        passed &= r.iter().all(|&x| x >= k as f64 - 1.0);
        detail.push(format!("k={k} err [{}] EOC [{}]", fmt_list(&errs), fmt_rates(&r)));
    }
    let elapsed = start.elapsed();
    passed &= within(elapsed, 30);
    verdict(passed, format!("{}; {:.1} s", detail.join("; "), elapsed.as_secs_f64()))
}

fn interpolation_orders() -> Verdict {
    let start = Instant::now();
    let hs = [0.2, 0.1, 0.05];
    let f = |x: Point| {
        let (e, s, c) = (x.x.exp(), (2.0 * x.y).sin(), (2.0 * x.y).cos());
        (e * s + x.x * x.y * x.y, [e * s + x.y * x.y, 2.0 * e * c + 2.0 * x.x * x.y])
    };
    let mut passed = true;
    let mut detail = Vec::new();
    for k in [2, 3] {
        let (mut l2, mut h1) = (Vec::new(), Vec::new());
        for &h in &hs {
            let mesh = curved(&circle(), h, k);
            let v = interpolate_nodal(&mesh, |x| f(x).0);
            let (a, b) = nodal_error(&mesh, &v, f);
            l2.push(a);
            h1.push(b);
        }
        let (rl, rh) = (rates(&hs, &l2), rates(&hs, &h1));
        let kf = k as f64;
        passed &= rl.iter().all(|&r| (r - (kf + 1.0)).abs() <= 0.3) && rh.iter().all(|&r| (r - kf).abs() <= 0.3);
        detail.push(format!("k={k} L2 EOC [{}] H1 EOC [{}]", fmt_rates(&rl), fmt_rates(&rh)));
    }
    let elapsed = start.elapsed();
    passed &= within(elapsed, 30);
    verdict(passed, format!("{}; {:.1} s", detail.join("; "), elapsed.as_secs_f64()))
}

struct Relaxation {
    monotone: bool,
    drift: f64,
    energy: f64,
}

fn relax(h: f64, tau: f64, div: &mut Divergence) -> Relaxation {
    let desc = InterfaceDescriptor::ellipse(Point::zeros(), 0.6, 0.4).unwrap();
    let n = (0.5 / tau).round() as usize;
    let physics = Physics { nu_minus: 1.0, nu_plus: 1.0 };
    let out = run_from(StateSnapshot::initial(curved(&desc, h, 2)), &physics, tau, n, &mut |_, _| Ok(())).unwrap();
    div.add(&out.records);
    let r = &out.records;
    let a0 = r[0].area_minus;
    Relaxation {
        monotone: r.windows(2).all(|w| w[1].perimeter <= w[0].perimeter + 1e-10),
        drift: r.iter().map(|x| (x.area_minus - a0).abs() / a0).fold(0.0, f64::max),
        energy: r.iter().map(|x| x.energy_residual.abs()).fold(0.0, f64::max),
    }
}

fn ellipse_relaxation(div: &mut Divergence) -> Verdict {
    let start = Instant::now();
    let h = 0.1;
    let tau = 0.25 * h * h;
    let coarse = relax(h, tau, div);
    let fine = relax(h / 2.0, tau / 4.0, div);
    let elapsed = start.elapsed();
    let passed = coarse.monotone
        && fine.monotone
        && coarse.drift <= 1e-2
        && coarse.drift >= 1.5 * fine.drift
        && coarse.energy >= 1.5 * fine.energy
        && within(elapsed, 600);
    verdict(
        passed,
        format!(
            "perimeter nonincreasing: {}/{}; area drift {:.3e} -> {:.3e}; max |energy residual| {:.3e} -> {:.3e}; {:.1} s",
            coarse.monotone,
            fine.monotone,
            coarse.drift,
            fine.drift,
            coarse.energy,
            fine.energy,
            elapsed.as_secs_f64()
        ),
    )
}

fn identity_checks() -> Verdict {
    let start = Instant::now();
    let desc = circle();
    let report = identity_suite(&curved(&desc, 0.1, 2), &desc);
    let elapsed = start.elapsed();
    let summary: Vec<String> = report
        .checks
        .iter()
        .map(|c| match c.ratio {
            Some(r) => format!("{} ratio {r:.1}", c.name),
            None => format!("{} residual {:.1e}", c.name, c.max_residual()),
        })
        .collect();
    verdict(report.passed() && within(elapsed, 10), format!("{}; {:.2} s", summary.join("; "), elapsed.as_secs_f64()))
}

fn divergence_free(div: &Divergence) -> Verdict {
    verdict(
        div.solves > 0 && div.worst <= 1e-9,
        format!("max |∫ div(u) ψ| / |u|_H1 = {:.3e} over {} solves", div.worst, div.solves),
    )
}

fn run_binary(config: &Path, out: &Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_twophase"))
        .args(["run", "--quiet", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success(), "run exited with {status}");
    fs::read(out.join("diagnostics.csv")).unwrap()
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ellipse.cfg");
    fs::write(
        &config,
        "[interface]\nkind = ellipse\na = 0.6\nb = 0.4\n\n[discretization]\nk = 2\nh = 0.2\n\
         tau_rule = fixed\ntau = 0.01\n\n[physics]\nT = 0.1\nnu_minus = 1\nnu_plus = 3\n\n\
         [output]\nsnapshot_every = 5\n",
    )
    .unwrap();
    let a = run_binary(&config, &dir.path().join("a"));
    let b = run_binary(&config, &dir.path().join("b"));
    let rows = a.iter().filter(|&&c| c == b'\n').count();
    verdict(a == b && rows == 12, format!("{} bytes, {rows} lines, identical: {}", a.len(), a == b))
}

fn mesh_pipeline() -> Verdict {
    let shapes = [
        circle(),
        InterfaceDescriptor::ellipse(Point::zeros(), 0.6, 0.4).unwrap(),
        InterfaceDescriptor::star(Point::new(0.05, -0.02), 0.5, 0.08, 5).unwrap(),
    ];
    let mut round_trip = true;
    for desc in &shapes {
        for k in [2, 3] {
            let text = export_mesh(&curved(desc, 0.1, k));
            round_trip &= export_mesh(&import_mesh(&text).unwrap()) == text;
        }
    }
    let hs = [0.2, 0.1, 0.05];
    let ellipse = &shapes[1];
    let mut passed = round_trip;
    let mut detail = vec![format!("round trip byte-identical: {round_trip}")];
    for k in [2, 3] {
        let d: Vec<f64> = hs.iter().map(|&h| hausdorff_distance(&curved(ellipse, h, k), ellipse, 16)).collect();
        let r = rates(&hs, &d);
        passed &= r.iter().all(|&x| x >= k as f64 + 1.0 - 0.5);
        detail.push(format!("k={k} Hausdorff [{}] EOC [{}]", fmt_list(&d), fmt_rates(&r)));
    }
    verdict(passed, detail.join("; "))
}

fn main() {
    let mut div = Divergence::default();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    results.push((1, "stationary circle", stationary_circle(&mut div)));
    results.push((2, "curvature operator", curvature_operator()));
    results.push((3, "interpolation orders", interpolation_orders()));
    results.push((4, "ellipse relaxation", ellipse_relaxation(&mut div)));
    results.push((5, "identity suite", identity_checks()));
    results.push((6, "discrete divergence-free", divergence_free(&div)));
    results.push((7, "determinism", determinism()));
    results.push((8, "mesh pipeline", mesh_pipeline()));
    let mut failed = 0;
    for (n, name, v) in &results {
        println!("{} criterion {n} ({name}): {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.passed);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
