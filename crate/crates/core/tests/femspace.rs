use twophase::femspace::{
    assemble_interface_stiffness, assemble_scalar_laplace, assemble_viscous, interpolate_nodal, interpolate_velocity,
    nodal_error, FeSystem, SparseOperator,
};
use twophase::mesh::{generate_fitted_mesh, CurvedMesh, FlatFittedMesh, Rect};
use twophase::{InterfaceDescriptor, Point};

fn flat(h: f64) -> (FlatFittedMesh, InterfaceDescriptor) {
    let desc = InterfaceDescriptor::circle(Point::zeros(), 0.5).unwrap();
    (generate_fitted_mesh(&Rect::new(-1.0, -1.0, 1.0, 1.0).unwrap(), &desc, h).unwrap(), desc)
}

fn cg(a: &SparseOperator, b: &[f64]) -> Vec<f64> {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let tol = 1e-26 * rr;
    for _ in 0..20 * b.len() {
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

#[test]
fn interface_stiffness_matches_segment_oracle() {
    // quadratic Lagrange stiffness on a straight segment of length L
    let oracle = [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]];
    let (flat, _) = flat(0.2);
    let mesh = CurvedMesh::straight(&flat, 2).unwrap();
    let fe = FeSystem::new(&mesh);
    let s = assemble_interface_stiffness(&mesh, &fe);
    let mut expected = vec![vec![0.0; fe.n_interface()]; fe.n_interface()];
    for (i, edge) in mesh.interface_edges().iter().enumerate() {
        let nodes = mesh.nodes();
        let len = (nodes[edge.nodes[2]] - nodes[edge.nodes[0]]).norm();
        let slots = fe.interface_edge_slots(i);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..2 {
                    expected[2 * slots[a] + c][2 * slots[b] + c] += oracle[a][b] / (3.0 * len);
                }
            }
        }
    }
    let dense = s.to_dense();
    for (row, exp) in dense.iter().zip(&expected) {
        for (v, e) in row.iter().zip(exp) {
            assert!((v - e).abs() < 1e-10 * e.abs().max(1.0), "{v} vs {e}");
        }
    }
}

#[test]
fn viscous_energy_of_bubble_matches_closed_form() {
    // u = (ψ, 0), ψ = (1 − x²)(1 − y²): ∫ 2|D(u)|² = 2∫ψ_x² + ∫ψ_y² = 128/15
    let (flat, _) = flat(0.25);
    let mesh = CurvedMesh::straight(&flat, 4).unwrap();
    let fe = FeSystem::new(&mesh);
    let u = interpolate_velocity(&mesh, &fe, |x| Point::new((1.0 - x.x * x.x) * (1.0 - x.y * x.y), 0.0));
    let a = assemble_viscous(&mesh, &fe, 1.0, 1.0);
    let energy: f64 = u.iter().zip(a.matvec(&u)).map(|(u, au)| u * au).sum();
    assert!((energy - 128.0 / 15.0).abs() < 1e-10, "{energy}");
}

#[test]
fn viscous_form_is_linear_in_the_viscosities() {
    let (flat, desc) = flat(0.25);
    let mesh = CurvedMesh::lenoir_curve(&flat, &desc, 2).unwrap();
    let fe = FeSystem::new(&mesh);
    let u = interpolate_velocity(&mesh, &fe, |x| Point::new((3.0 * x.y).sin(), x.x * x.x));
    let energy = |nm: f64, np: f64| -> f64 {
        let a = assemble_viscous(&mesh, &fe, nm, np);
        u.iter().zip(a.matvec(&u)).map(|(u, au)| u * au).sum()
    };
    let (inner, outer) = (energy(1.0, 0.0), energy(0.0, 1.0));
    assert!(inner > 0.0 && outer > 0.0);
    let mixed = energy(2.0, 5.0);
    assert!((mixed - (2.0 * inner + 5.0 * outer)).abs() < 1e-10 * mixed);
}

#[test]
fn poisson_galerkin_converges_at_order_k() {
    // −Δu = 2π² u with u = sin(πx) sin(πy), zero on the boundary
    use std::f64::consts::PI;
    let exact = |x: Point| {
        let (sx, sy, cx, cy) = ((PI * x.x).sin(), (PI * x.y).sin(), (PI * x.x).cos(), (PI * x.y).cos());
        (sx * sy, [PI * cx * sy, PI * sx * cy])
    };
    for k in [2, 3] {
        let mut errs = Vec::new();
        for h in [0.2, 0.1] {
            let (flat, desc) = flat(h);
            let mesh = CurvedMesh::lenoir_curve(&flat, &desc, k).unwrap();
            let (stiff, mass) = assemble_scalar_laplace(&mesh);
            let f = interpolate_nodal(&mesh, |x| 2.0 * PI * PI * exact(x).0);
            let load = mass.matvec(&f);
            let free: Vec<usize> = (0..mesh.n_nodes()).filter(|&n| !mesh.is_boundary(n)).collect();
            let mut index = vec![usize::MAX; mesh.n_nodes()];
            for (i, &n) in free.iter().enumerate() {
                index[n] = i;
            }
            let reduced = SparseOperator::from_triplets(
                free.len(),
                free.len(),
                stiff
                    .triplets()
                    .filter(|&(r, c, _)| index[r] != usize::MAX && index[c] != usize::MAX)
                    .map(|(r, c, v)| (index[r], index[c], v))
                    .collect(),
            );
            let rhs: Vec<f64> = free.iter().map(|&n| load[n]).collect();
            let sol = cg(&reduced, &rhs);
            let mut u = vec![0.0; mesh.n_nodes()];
            for (i, &n) in free.iter().enumerate() {
                u[n] = sol[i];
            }
            errs.push(nodal_error(&mesh, &u, exact).1);
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > k as f64 - 0.3, "k={k}: H1 errors {errs:?}, rate {rate}");
    }
}

#[test]
fn curved_interpolation_keeps_optimal_order() {
    let f = |x: Point| ((2.0 * x.x).sin() * x.y.exp(), [2.0 * (2.0 * x.x).cos() * x.y.exp(), (2.0 * x.x).sin() * x.y.exp()]);
    for k in [2, 3, 4] {
        let errs: Vec<(f64, f64)> = [0.2, 0.1]
            .iter()
            .map(|&h| {
                let (flat, desc) = flat(h);
                let mesh = CurvedMesh::lenoir_curve(&flat, &desc, k).unwrap();
                nodal_error(&mesh, &interpolate_nodal(&mesh, |x| f(x).0), f)
            })
            .collect();
        let l2 = (errs[0].0 / errs[1].0).log2();
        let h1 = (errs[0].1 / errs[1].1).log2();
        assert!(l2 > k as f64 + 0.7, "k={k}: L2 rate {l2}");
        assert!(h1 > k as f64 - 0.3, "k={k}: H1 rate {h1}");
    }
}
