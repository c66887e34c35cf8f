//! Gauss rules on the unit interval and the reference triangle.

/// Legendre polynomial `P_n` and its derivative at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    // derivative from the standard recurrence, valid away from |x| = 1
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss–Lobatto points on `[0, 1]`, `n >= 2` points including both ends, ascending.
pub fn gauss_lobatto_points(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let order = n - 1;
    let mut pts = vec![0.0; n];
    pts[n - 1] = 1.0;
    // interior points are the roots of q = P_{N-1} - x P_N, i.e. of P_N'
    for i in 1..order {
        let mut z = -(std::f64::consts::PI * i as f64 / order as f64).cos();
        for _ in 0..100 {
            let (pn, dpn) = legendre(order, z);
            let (pm, dpm) = legendre(order - 1, z);
            let q = pm - z * pn;
            let dq = dpm - pn - z * dpn;
            let dz = q / dq;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        pts[i] = 0.5 * (z + 1.0);
    }
    // enforce exact symmetry about 1/2
    for i in 0..n / 2 {
        let s = 0.5 * (pts[i] + (1.0 - pts[n - 1 - i]));
        pts[i] = s;
        pts[n - 1 - i] = 1.0 - s;
    }
    if n % 2 == 1 {
        pts[n / 2] = 0.5;
    }
    pts
}

/// Quadrature rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl LineRule {
    /// Gauss–Legendre rule exact for polynomials up to `degree`.
    pub fn gauss(degree: usize) -> Self {
        let n = degree / 2 + 1;
        let (x, w) = gauss_legendre(n);
        Self {
            points: x.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
            degree: 2 * n - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Quadrature rule on the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// Collapsed (Duffy) tensor Gauss rule exact up to `degree`. All weights are
    /// positive and all points interior.
    pub fn triangle(degree: usize) -> Self {
        // the collapse adds one power of (1 - u) to the integrand
        let n = (degree + 2).div_ceil(2);
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            let u = 0.5 * (x[i] + 1.0);
            for j in 0..n {
                let v = 0.5 * (x[j] + 1.0);
                points.push([u, (1.0 - u) * v]);
                weights.push(0.25 * w[i] * w[j] * (1.0 - u));
            }
        }
        Self { points, weights, degree: 2 * n - 2 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn triangle_rules_integrate_monomials() {
        for degree in 0..=14 {
            let rule = QuadratureRule::triangle(degree);
            assert!(rule.degree >= degree);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 0.5).abs() < 1e-15);
            for a in 0..=degree {
                for b in 0..=degree - a {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let approx: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    assert!((approx - exact).abs() < 1e-13, "degree {degree} monomial ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn line_rules_integrate_monomials() {
        for degree in 0..=15 {
            let rule = LineRule::gauss(degree);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for a in 0..=degree {
                let approx: f64 = rule.points.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(a as i32)).sum();
                assert!((approx - 1.0 / (a as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn lobatto_points_known_values() {
        assert_eq!(gauss_lobatto_points(3), vec![0.0, 0.5, 1.0]);
        let p = gauss_lobatto_points(4);
        let inner = 0.5 * (1.0 - 1.0 / 5f64.sqrt());
        assert!((p[1] - inner).abs() < 1e-15 && (p[2] - (1.0 - inner)).abs() < 1e-15);
        let p = gauss_lobatto_points(5);
        let inner = 0.5 * (1.0 - (3.0f64 / 7.0).sqrt());
        assert!((p[1] - inner).abs() < 1e-15 && p[2] == 0.5);
    }
}
