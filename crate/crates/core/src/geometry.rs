//! Exact interface curves.
//!
//! Every supported curve is star-shaped about its center and carries a
//! 2π-periodic parametrization `t -> γ(t)` traversed counterclockwise whose
//! polar angle about the center increases monotonically. The outward normal
//! points from the enclosed phase (minus) to the exterior phase (plus) and the
//! curvature is positive for convex curves, so a circle of radius `R` has
//! `H = 1/R` and curvature vector `(1/R) n`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Number of uniform parameter samples used to seed the projection Newton solve.
const SEED_SAMPLES: usize = 256;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITERS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `r(θ) = r0 (1 + amplitude cos(lobes θ))`.
    Star { r0: f64, amplitude: f64, lobes: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceDescriptor {
    pub center: Point,
    pub shape: Shape,
}

impl InterfaceDescriptor {
    /// Validated descriptor of any shape.
    pub fn new(center: Point, shape: Shape) -> Result<Self> {
        match shape {
            Shape::Circle { radius } => Self::circle(center, radius),
            Shape::Ellipse { a, b } => Self::ellipse(center, a, b),
            Shape::Star { r0, amplitude, lobes } => Self::star(center, r0, amplitude, lobes),
        }
    }

    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("circle radius {radius} must be positive")));
        }
        Ok(Self { center, shape: Shape::Circle { radius } })
    }

    pub fn ellipse(center: Point, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("ellipse semi-axes ({a}, {b}) must be positive")));
        }
        Ok(Self { center, shape: Shape::Ellipse { a, b } })
    }

    pub fn star(center: Point, r0: f64, amplitude: f64, lobes: u32) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidArgument(format!("star radius {r0} must be positive")));
        }
        if !(0.0..1.0).contains(&amplitude) {
            return Err(Error::InvalidArgument(format!("star amplitude {amplitude} must lie in [0, 1)")));
        }
        if lobes == 0 {
            return Err(Error::InvalidArgument("star needs at least one lobe".into()));
        }
        Ok(Self { center, shape: Shape::Star { r0, amplitude, lobes } })
    }

    /// Point on the curve at parameter `t`.
    pub fn point(&self, t: f64) -> Point {
        self.center + self.offset(t).0
    }

    /// Offset from the center together with first and second parameter derivatives.
    fn offset(&self, t: f64) -> (Point, Point, Point) {
        let (s, c) = t.sin_cos();
        match self.shape {
            Shape::Circle { radius } => (
                Point::new(radius * c, radius * s),
                Point::new(-radius * s, radius * c),
                Point::new(-radius * c, -radius * s),
            ),
            Shape::Ellipse { a, b } => (
                Point::new(a * c, b * s),
                Point::new(-a * s, b * c),
                Point::new(-a * c, -b * s),
            ),
            Shape::Star { r0, amplitude, lobes } => {
                let l = lobes as f64;
                let (sl, cl) = (l * t).sin_cos();
                let r = r0 * (1.0 + amplitude * cl);
                let dr = -r0 * amplitude * l * sl;
                let ddr = -r0 * amplitude * l * l * cl;
                let radial = Point::new(c, s);
                let tangential = Point::new(-s, c);
                (r * radial, dr * radial + r * tangential, (ddr - r) * radial + 2.0 * dr * tangential)
            }
        }
    }

    /// First and second derivatives of the parametrization.
    pub fn derivatives(&self, t: f64) -> (Point, Point) {
        let (_, d1, d2) = self.offset(t);
        (d1, d2)
    }

    /// Outward unit normal at parameter `t`.
    pub fn normal_at(&self, t: f64) -> Point {
        let (d1, _) = self.derivatives(t);
        Point::new(d1.y, -d1.x) / d1.norm()
    }

    /// Signed curvature at parameter `t`, positive where the curve is convex.
    pub fn curvature_at(&self, t: f64) -> f64 {
        let (d1, d2) = self.derivatives(t);
        (d1.x * d2.y - d1.y * d2.x) / d1.norm().powi(3)
    }

    /// Parameter of a point that lies on the curve. Exact for on-curve input;
    /// for off-curve input it returns the parameter of the point on the same ray
    /// (circle, star) or the same scaled ellipse.
    pub fn parameter_of(&self, p: &Point) -> f64 {
        let d = p - self.center;
        let t = match self.shape {
            Shape::Circle { .. } | Shape::Star { .. } => d.y.atan2(d.x),
            Shape::Ellipse { a, b } => (d.y / b).atan2(d.x / a),
        };
        t.rem_euclid(TAU)
    }

    /// Outward unit normal and signed curvature at a point on the curve.
    pub fn normal_and_curvature(&self, p: &Point) -> (Point, f64) {
        if let Shape::Circle { radius } = self.shape {
            let d = p - self.center;
            return (d / d.norm(), 1.0 / radius);
        }
        let t = self.parameter_of(p);
        (self.normal_at(t), self.curvature_at(t))
    }

    /// Distance along the ray from the center to the curve in polar direction `phi`.
    pub fn ray_radius(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        match self.shape {
            Shape::Circle { radius } => radius,
            Shape::Ellipse { a, b } => 1.0 / ((c / a).powi(2) + (s / b).powi(2)).sqrt(),
            Shape::Star { r0, amplitude, lobes } => r0 * (1.0 + amplitude * (lobes as f64 * phi).cos()),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        let d = x - self.center;
        d.norm() < self.ray_radius(d.y.atan2(d.x))
    }

    /// Characteristic length: the largest distance of the curve from its center.
    pub fn size(&self) -> f64 {
        match self.shape {
            Shape::Circle { radius } => radius,
            Shape::Ellipse { a, b } => a.max(b),
            Shape::Star { r0, amplitude, .. } => r0 * (1.0 + amplitude),
        }
    }

    pub fn max_abs_curvature(&self) -> f64 {
        match self.shape {
            Shape::Circle { radius } => 1.0 / radius,
            Shape::Ellipse { a, b } => (a / (b * b)).max(b / (a * a)),
            Shape::Star { .. } => (0..4096)
                .map(|i| self.curvature_at(TAU * i as f64 / 4096.0).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Curve length by the periodic trapezoidal rule, which converges
    /// spectrally for the smooth periodic integrand.
    pub fn perimeter(&self) -> f64 {
        if let Shape::Circle { radius } = self.shape {
            return TAU * radius;
        }
        let n = 4096;
        (0..n).map(|i| self.derivatives(TAU * i as f64 / n as f64).0.norm()).sum::<f64>() * TAU / n as f64
    }

    pub fn enclosed_area(&self) -> f64 {
        match self.shape {
            Shape::Circle { radius } => PI * radius * radius,
            Shape::Ellipse { a, b } => PI * a * b,
            Shape::Star { r0, amplitude, .. } => PI * r0 * r0 * (1.0 + 0.5 * amplitude * amplitude),
        }
    }

    /// Global minimizer of `|x - γ(t)|` over the curve, without uniqueness checks.
    /// Returns the parameter and the curve point.
    pub fn nearest(&self, x: &Point) -> (f64, Point) {
        if let Shape::Circle { radius } = self.shape {
            let d = x - self.center;
            let t = if d.norm() > 0.0 { d.y.atan2(d.x).rem_euclid(TAU) } else { 0.0 };
            return (t, self.center + radius * Point::new(t.cos(), t.sin()));
        }
        let candidates = self.local_minima(x);
        let (t, p, _) = candidates
            .into_iter()
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .expect("at least one local minimum");
        (t, p)
    }

    /// Closest point on the curve. Fails where the minimizer is not unique.
    pub fn closest_point(&self, x: &Point) -> Result<Point> {
        let scale = self.size();
        let non_unique = || Error::NonUniqueProjection { x: x.x, y: x.y };
        match self.shape {
            Shape::Circle { radius } => {
                let d = x - self.center;
                if d.norm() <= 1e-12 * radius {
                    return Err(non_unique());
                }
                Ok(self.center + radius * d / d.norm())
            }
            Shape::Ellipse { a, b } => {
                // The medial axis of an ellipse is the segment between the
                // centers of curvature of the two vertices on the major axis.
                let d = x - self.center;
                let (major, minor, reach) = if a >= b {
                    (d.x, d.y, (a * a - b * b) / a)
                } else {
                    (d.y, d.x, (b * b - a * a) / b)
                };
                if minor.abs() <= 1e-14 * scale && major.abs() <= reach * (1.0 - 1e-12) {
                    return Err(non_unique());
                }
                Ok(self.nearest(x).1)
            }
            Shape::Star { .. } => {
                let mut candidates = self.local_minima_checked(x).ok_or_else(non_unique)?;
                candidates.sort_by(|a, b| a.2.total_cmp(&b.2));
                let best = candidates[0];
                for other in &candidates[1..] {
                    let gap = (other.0 - best.0).rem_euclid(TAU);
                    let distinct = gap.min(TAU - gap) > 1e-6;
                    if distinct && (other.2 - best.2).abs() <= 1e-12 * scale {
                        return Err(non_unique());
                    }
                }
                // A degenerate minimum (focal point) has no unique projection.
                let (d1, d2) = self.derivatives(best.0);
                let curvature_term = d1.norm_squared() + (best.1 - x).dot(&d2);
                if curvature_term <= 1e-10 * d1.norm_squared() {
                    return Err(non_unique());
                }
                Ok(best.1)
            }
        }
    }

    /// Signed distance: negative inside, positive outside.
    pub fn signed_distance(&self, x: &Point) -> f64 {
        if let Shape::Circle { radius } = self.shape {
            return (x - self.center).norm() - radius;
        }
        let dist = (x - self.nearest(x).1).norm();
        if self.contains(x) {
            -dist
        } else {
            dist
        }
    }

    fn local_minima(&self, x: &Point) -> Vec<(f64, Point, f64)> {
        self.local_minima_inner(x).into_iter().map(|(t, p, d, _)| (t, p, d)).collect()
    }

    /// Like `local_minima`, but `None` when a Newton solve competing for the
    /// global minimum failed to converge.
    fn local_minima_checked(&self, x: &Point) -> Option<Vec<(f64, Point, f64)>> {
        let all = self.local_minima_inner(x);
        let best = all.iter().map(|m| m.2).fold(f64::INFINITY, f64::min);
        let margin = 1e-8 * self.size();
        if all.iter().any(|m| !m.3 && m.2 <= best + margin) {
            return None;
        }
        Some(all.into_iter().map(|(t, p, d, _)| (t, p, d)).collect())
    }

    /// Newton-refined local minima of the distance, seeded from the local
    /// minima of a uniform parameter sampling.
    fn local_minima_inner(&self, x: &Point) -> Vec<(f64, Point, f64, bool)> {
        let n = SEED_SAMPLES;
        let dist: Vec<f64> = (0..n).map(|i| (self.point(TAU * i as f64 / n as f64) - x).norm_squared()).collect();
        let mut seeds: Vec<usize> = (0..n)
            .filter(|&i| {
                let prev = dist[(i + n - 1) % n];
                let next = dist[(i + 1) % n];
                dist[i] <= prev && dist[i] <= next
            })
            .collect();
        if seeds.is_empty() {
            seeds.push(0);
        }
        let mut out: Vec<(f64, Point, f64, bool)> = Vec::with_capacity(seeds.len());
        for i in seeds {
            let (t, converged) = self.newton_project(x, TAU * i as f64 / n as f64);
            let p = self.point(t);
            let d = (p - x).norm();
            let duplicate = out.iter().any(|m| {
                let gap = (m.0 - t).rem_euclid(TAU);
                gap.min(TAU - gap) < 1e-9
            });
            if !duplicate {
                out.push((t, p, d, converged));
            }
        }
        out
    }

    /// Damped Newton on the stationarity condition `(γ(t) - x)·γ'(t) = 0`.
    /// The residual is measured per unit arclength.
    fn newton_project(&self, x: &Point, t0: f64) -> (f64, bool) {
        let max_step = TAU / SEED_SAMPLES as f64;
        let tol = NEWTON_TOL * self.size().max(1.0);
        let objective = |t: f64| 0.5 * (self.point(t) - x).norm_squared();
        let mut t = t0;
        for _ in 0..NEWTON_MAX_ITERS {
            let (off, d1, d2) = self.offset(t);
            let r = self.center + off - x;
            let g = r.dot(&d1);
            if g.abs() / d1.norm() <= tol {
                return (t.rem_euclid(TAU), true);
            }
            let gp = d1.norm_squared() + r.dot(&d2);
            let mut step = if gp > 0.0 { -g / gp } else { -g.signum() * max_step };
            step = step.clamp(-max_step, max_step);
            if gp > 0.0 && step.abs() < 1e-6 * max_step {
                // plain Newton step in the quadratic convergence region
                t += step;
                continue;
            }
            let f0 = objective(t);
            let mut accepted = false;
            for _ in 0..40 {
                if objective(t + step) <= f0 {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                // No decrease possible in floating point: we are at the minimum.
                return (t.rem_euclid(TAU), g.abs() / d1.norm() <= 1e3 * tol);
            }
            t += step;
        }
        (t.rem_euclid(TAU), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> Point {
        Point::zeros()
    }

    #[test]
    fn circle_closed_forms() {
        let c = InterfaceDescriptor::circle(origin(), 1.0).unwrap();
        assert_eq!(c.closest_point(&Point::new(2.0, 0.0)).unwrap(), Point::new(1.0, 0.0));
        assert_eq!(c.signed_distance(&origin()), -1.0);
        assert_eq!(c.signed_distance(&Point::new(3.0, 4.0)), 4.0);
        let on = Point::new(0.6, 0.8);
        assert!((c.closest_point(&on).unwrap() - on).norm() < 1e-15);
        assert!(matches!(c.closest_point(&origin()), Err(Error::NonUniqueProjection { .. })));

        let half = InterfaceDescriptor::circle(origin(), 0.5).unwrap();
        let (n, h) = half.normal_and_curvature(&Point::new(0.5, 0.0));
        assert!((n - Point::new(1.0, 0.0)).norm() < 1e-15);
        assert!((h - 2.0).abs() < 1e-15);
        // parametric curvature agrees with the closed form
        for i in 0..16 {
            let t = i as f64 * 0.4;
            assert!((half.curvature_at(t) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_vertex_normal_and_curvature() {
        let e = InterfaceDescriptor::ellipse(origin(), 2.0, 1.0).unwrap();
        let (n, h) = e.normal_and_curvature(&Point::new(2.0, 0.0));
        assert!((n - Point::new(1.0, 0.0)).norm() < 1e-15);
        // a / b^2 from the parametrized-ellipse curvature formula
        assert!((h - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_signed_distance_on_axis() {
        let e = InterfaceDescriptor::ellipse(origin(), 2.0, 1.0).unwrap();
        // Dense polyline oracle: min distance from (3,0) over 1e5 samples.
        let x = Point::new(3.0, 0.0);
        let oracle = (0..100_000)
            .map(|i| (e.point(TAU * i as f64 / 1e5) - x).norm())
            .fold(f64::INFINITY, f64::min);
        assert!((oracle - 1.0).abs() < 1e-9);
        assert!((e.signed_distance(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_center_is_not_uniquely_projected() {
        let e = InterfaceDescriptor::ellipse(origin(), 2.0, 1.0).unwrap();
        // Brute force over 1e6 samples: two distinct minimizers (0, ±1).
        let n = 1_000_000;
        let d: Vec<f64> = (0..n).map(|i| e.point(TAU * i as f64 / n as f64).norm()).collect();
        let dmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let minimizers: Vec<Point> = (0..n)
            .filter(|&i| d[i] - dmin < 1e-10)
            .map(|i| e.point(TAU * i as f64 / n as f64))
            .collect();
        assert!(minimizers.iter().any(|p| p.y > 0.99) && minimizers.iter().any(|p| p.y < -0.99));
        assert!(matches!(e.closest_point(&origin()), Err(Error::NonUniqueProjection { .. })));
    }

    #[test]
    fn star_curvature_matches_dense_polyline() {
        let s = InterfaceDescriptor::star(origin(), 1.0, 0.1, 3).unwrap();
        let n = 1_000_000usize;
        let sample = |i: i64| s.point(TAU * i as f64 / n as f64);
        // circumcircle curvature through samples 30 indices apart
        let m = 30;
        let (a, b, c) = (sample(-m), sample(0), sample(m));
        let area2 = (b - a).perp(&(c - a));
        let oracle = 2.0 * area2 / ((b - a).norm() * (c - b).norm() * (c - a).norm());
        let (_, h) = s.normal_and_curvature(&Point::new(1.1, 0.0));
        assert!((h - oracle).abs() < 1e-6, "{h} vs {oracle}");
    }

    #[test]
    fn star_projection_round_trip() {
        let s = InterfaceDescriptor::star(Point::new(0.1, -0.2), 0.5, 0.2, 5).unwrap();
        for i in 0..50 {
            let t = 0.37 * i as f64;
            let p = s.point(t);
            let x = p + 0.01 * s.normal_at(t);
            let q = s.closest_point(&x).unwrap();
            assert!((q - p).norm() < 1e-10);
            assert!((s.signed_distance(&x) - 0.01).abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_descriptors_rejected() {
        assert!(InterfaceDescriptor::circle(origin(), 0.0).is_err());
        assert!(InterfaceDescriptor::star(origin(), 1.0, 1.0, 3).is_err());
        assert!(InterfaceDescriptor::ellipse(origin(), -1.0, 1.0).is_err());
    }
}
