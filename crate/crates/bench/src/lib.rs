//! Fixtures shared by the benchmarks.

use twophase::mesh::{generate_fitted_mesh, CurvedMesh, Rect};
use twophase::scheme::StateSnapshot;
use twophase::{InterfaceDescriptor, Point};

/// Ellipse `a = 0.6`, `b = 0.4` in `(−1, 1)²`.
pub fn ellipse() -> InterfaceDescriptor {
    InterfaceDescriptor::ellipse(Point::zeros(), 0.6, 0.4).expect("valid ellipse")
}

/// Lenoir-curved ellipse mesh of order `k` and size `h`.
pub fn ellipse_mesh(h: f64, k: usize) -> CurvedMesh {
    let domain = Rect::new(-1.0, -1.0, 1.0, 1.0).expect("valid rectangle");
    let flat = generate_fitted_mesh(&domain, &ellipse(), h).expect("mesh generation");
    CurvedMesh::lenoir_curve(&flat, &ellipse(), k).expect("curving")
}

/// Initial state on [`ellipse_mesh`].
pub fn ellipse_state(h: f64, k: usize) -> StateSnapshot {
    StateSnapshot::initial(ellipse_mesh(h, k))
}
