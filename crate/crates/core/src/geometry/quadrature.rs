//! Quadrature on the reference triangle and on the unit interval.
//!
//! Degrees 1, 2 and 3..=5 use the classical symmetric rules (centroid, three
//! interior points, Radon's seven points). Higher degrees use the conical
//! product of Gauss-Legendre rules through the collapsed map
//! `(u, v) -> (u, v (1 - u))`, whose points all lie strictly inside the
//! triangle and whose weights are positive.

use crate::error::{invalid, Result};
use crate::scalar::{Point2, Real};

pub const MAX_SIMPLEX_DEGREE: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    pub points: Vec<Point2<T>>,
    pub weights: Vec<T>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integral over the reference triangle of `f`.
    pub fn integrate(&self, f: impl Fn(Point2<T>) -> T) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// Rule on the reference triangle exact for polynomials of total degree `degree`.
pub fn simplex_quadrature<T: Real>(degree: usize) -> Result<QuadratureRule<T>> {
    match degree {
        0 => invalid("quadrature degree must be at least 1"),
        1 => Ok(centroid_rule()),
        2 => Ok(three_point_rule()),
        3..=5 => Ok(radon_rule()),
        6..=MAX_SIMPLEX_DEGREE => Ok(conical_product_rule(degree)),
        _ => invalid(format!(
            "quadrature degree {degree} unsupported (max {MAX_SIMPLEX_DEGREE})"
        )),
    }
}

fn centroid_rule<T: Real>() -> QuadratureRule<T> {
    let third = T::one() / T::lit(3.0);
    QuadratureRule {
        points: vec![[third, third]],
        weights: vec![T::lit(0.5)],
        degree: 1,
    }
}

fn three_point_rule<T: Real>() -> QuadratureRule<T> {
    let a = T::one() / T::lit(6.0);
    let b = T::lit(2.0) / T::lit(3.0);
    QuadratureRule {
        points: vec![[a, a], [b, a], [a, b]],
        weights: vec![a; 3],
        degree: 2,
    }
}

fn radon_rule<T: Real>() -> QuadratureRule<T> {
    let s15 = T::lit(15.0).sqrt();
    let one = T::one();
    let two = T::lit(2.0);
    let third = one / T::lit(3.0);
    let a1 = (T::lit(6.0) - s15) / T::lit(21.0);
    let a2 = (T::lit(6.0) + s15) / T::lit(21.0);
    let w0 = T::lit(9.0) / T::lit(80.0);
    let w1 = (T::lit(155.0) - s15) / T::lit(2400.0);
    let w2 = (T::lit(155.0) + s15) / T::lit(2400.0);
    QuadratureRule {
        points: vec![
            [third, third],
            [a1, a1],
            [one - two * a1, a1],
            [a1, one - two * a1],
            [a2, a2],
            [one - two * a2, a2],
            [a2, one - two * a2],
        ],
        weights: vec![w0, w1, w1, w1, w2, w2, w2],
        degree: 5,
    }
}

fn conical_product_rule<T: Real>(degree: usize) -> QuadratureRule<T> {
    // The collapse multiplies by (1 - u), raising the degree in u by one.
    let nu = (degree + 2).div_ceil(2);
    let nv = (degree + 1).div_ceil(2);
    let (xu, wu) = gauss_legendre_unit::<T>(nu);
    let (xv, wv) = gauss_legendre_unit::<T>(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&u, &wu) in xu.iter().zip(&wu) {
        let shrink = T::one() - u;
        for (&v, &wv) in xv.iter().zip(&wv) {
            points.push([u, v * shrink]);
            weights.push(wu * wv * shrink);
        }
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`, nodes ascending.
pub fn gauss_legendre_unit<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th largest root on [-1, 1].
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let xs = nodes.iter().map(|&x| T::lit(0.5 * (x + 1.0))).collect();
    let ws = weights.iter().map(|&w| T::lit(0.5 * w)).collect();
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn centroid_rule_for_degree_one() {
        let q = simplex_quadrature::<f64>(1).unwrap();
        assert_eq!(q.len(), 1);
        assert!((q.points[0][0] - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(q.weights[0], 0.5);
    }

    #[test]
    fn degree_two_integrates_xy() {
        let q = simplex_quadrature::<f64>(2).unwrap();
        let v = q.integrate(|p| p[0] * p[1]);
        assert!((v - 1.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn monomial_sweep_all_degrees() {
        for degree in 1..=MAX_SIMPLEX_DEGREE {
            let q = simplex_quadrature::<f64>(degree).unwrap();
            let wsum: f64 = q.weights.iter().sum();
            assert!((wsum - 0.5).abs() < 1e-14, "degree {degree}");
            for a in 0..=degree as u32 {
                for b in 0..=(degree as u32 - a) {
                    let v = q.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    let err = (v - monomial_exact(a, b)).abs();
                    assert!(
                        err < 1e-13,
                        "degree {degree} monomial ({a},{b}) err {err:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn points_strictly_inside() {
        for degree in 1..=MAX_SIMPLEX_DEGREE {
            let q = simplex_quadrature::<f64>(degree).unwrap();
            for p in &q.points {
                assert!(p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 1.0);
            }
            assert!(q.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn unsupported_degrees_rejected() {
        assert!(simplex_quadrature::<f64>(0).is_err());
        assert!(simplex_quadrature::<f64>(15).is_err());
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..=10 {
            let (x, w) = gauss_legendre_unit::<f64>(n);
            for m in 0..2 * n {
                let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(m as i32)).sum();
                assert!((v - 1.0 / (m as f64 + 1.0)).abs() < 1e-14, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn single_precision_rule() {
        let q = simplex_quadrature::<f32>(8).unwrap();
        let v = q.integrate(|p| p[0] * p[0] * p[1]);
        assert!((v - (monomial_exact(2, 1) as f32)).abs() < 1e-6);
    }
}
