//! Nodal Lagrange basis of degree `k` on the reference triangle.
//!
//! Nodes sit on the equispaced lattice `xhat = (a1/k, a2/k)` indexed by
//! barycentric multi-indices `(a0, a1, a2)` with `a0 + a1 + a2 = k`. Local
//! ordering: the three vertices, then the `k-1` nodes of each edge
//! `(v0,v1)`, `(v1,v2)`, `(v2,v0)` walking from the first vertex to the
//! second, then interior nodes with `a2` outer and `a1` inner, both ascending.

use crate::error::{invalid, Result};
use crate::scalar::{Point2, Real};

pub const MAX_DEGREE: usize = 5;

#[derive(Debug, Clone)]
pub struct LagrangeBasis<T> {
    degree: usize,
    multi_indices: Vec<[usize; 3]>,
    nodes: Vec<Point2<T>>,
}

impl<T: Real> LagrangeBasis<T> {
    pub fn new(degree: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return invalid(format!("Lagrange degree {degree} outside 1..={MAX_DEGREE}"));
        }
        let k = degree;
        let mut mi = vec![[k, 0, 0], [0, k, 0], [0, 0, k]];
        for m in 1..k {
            mi.push([k - m, m, 0]);
        }
        for m in 1..k {
            mi.push([0, k - m, m]);
        }
        for m in 1..k {
            mi.push([m, 0, k - m]);
        }
        for a2 in 1..k {
            for a1 in 1..k - a2 {
                mi.push([k - a1 - a2, a1, a2]);
            }
        }
        let kf = T::from_usize_lossy(k);
        let nodes = mi
            .iter()
            .map(|a| {
                [
                    T::from_usize_lossy(a[1]) / kf,
                    T::from_usize_lossy(a[2]) / kf,
                ]
            })
            .collect();
        Ok(Self {
            degree,
            multi_indices: mi,
            nodes,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of local basis functions, `(k+1)(k+2)/2`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point2<T>] {
        &self.nodes
    }

    pub fn multi_indices(&self) -> &[[usize; 3]] {
        &self.multi_indices
    }

    /// Number of nodes strictly inside each edge.
    pub fn nodes_per_edge(&self) -> usize {
        self.degree - 1
    }

    pub fn interior_nodes(&self) -> usize {
        (self.degree - 1) * self.degree.saturating_sub(2) / 2
    }

    /// Factors `prod_{m<a} (k lambda - m)/(m+1)` and their derivatives in
    /// `lambda`, for `a = 0..=k`.
    fn factors(&self, lambda: T) -> ([T; MAX_DEGREE + 1], [T; MAX_DEGREE + 1]) {
        let k = T::from_usize_lossy(self.degree);
        let mut p = [T::zero(); MAX_DEGREE + 1];
        let mut dp = [T::zero(); MAX_DEGREE + 1];
        p[0] = T::one();
        for a in 1..=self.degree {
            let af = T::from_usize_lossy(a);
            let lin = k * lambda - T::from_usize_lossy(a - 1);
            p[a] = p[a - 1] * lin / af;
            dp[a] = (dp[a - 1] * lin + p[a - 1] * k) / af;
        }
        (p, dp)
    }

    pub fn eval(&self, xhat: Point2<T>, out: &mut [T]) {
        let l = [T::one() - xhat[0] - xhat[1], xhat[0], xhat[1]];
        let f = l.map(|li| self.factors(li).0);
        for (o, a) in out.iter_mut().zip(&self.multi_indices) {
            *o = f[0][a[0]] * f[1][a[1]] * f[2][a[2]];
        }
    }

    pub fn eval_grad(&self, xhat: Point2<T>, out: &mut [Point2<T>]) {
        let l = [T::one() - xhat[0] - xhat[1], xhat[0], xhat[1]];
        let f = l.map(|li| self.factors(li));
        for (o, a) in out.iter_mut().zip(&self.multi_indices) {
            let (p0, p1, p2) = (f[0].0[a[0]], f[1].0[a[1]], f[2].0[a[2]]);
            let d0 = f[0].1[a[0]] * p1 * p2;
            let d1 = p0 * f[1].1[a[1]] * p2;
            let d2 = p0 * p1 * f[2].1[a[2]];
            *o = [d1 - d0, d2 - d0];
        }
    }

    pub fn values(&self, xhat: Point2<T>) -> Vec<T> {
        let mut v = vec![T::zero(); self.len()];
        self.eval(xhat, &mut v);
        v
    }

    pub fn gradients(&self, xhat: Point2<T>) -> Vec<Point2<T>> {
        let mut g = vec![[T::zero(); 2]; self.len()];
        self.eval_grad(xhat, &mut g);
        g
    }
}

pub fn lagrange_basis<T: Real>(k: usize, xhat: Point2<T>) -> Result<Vec<T>> {
    Ok(LagrangeBasis::new(k)?.values(xhat))
}

pub fn lagrange_basis_grad<T: Real>(k: usize, xhat: Point2<T>) -> Result<Vec<Point2<T>>> {
    Ok(LagrangeBasis::new(k)?.gradients(xhat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn p1_vertex_values() {
        assert_eq!(lagrange_basis(1, [0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn p2_edge_midpoint() {
        // Symbolic P2: the (v0,v1) midpoint function is 4 lambda0 lambda1.
        let v = lagrange_basis::<f64>(2, [0.5, 0.0]).unwrap();
        assert_eq!(v.len(), 6);
        for (i, &x) in v.iter().enumerate() {
            let expect = if i == 3 { 1.0 } else { 0.0 };
            assert!((x - expect).abs() < 1e-15, "{i}: {x}");
        }
        let v = lagrange_basis::<f64>(2, [0.2, 0.3]).unwrap();
        let l = [0.5, 0.2, 0.3];
        assert!((v[3] - 4.0 * l[0] * l[1]).abs() < 1e-15);
        assert!((v[4] - 4.0 * l[1] * l[2]).abs() < 1e-15);
        assert!((v[5] - 4.0 * l[2] * l[0]).abs() < 1e-15);
        assert!((v[0] - l[0] * (2.0 * l[0] - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn bad_degree() {
        assert!(lagrange_basis::<f64>(0, [0.0, 0.0]).is_err());
        assert!(lagrange_basis::<f64>(6, [0.0, 0.0]).is_err());
    }

    #[test]
    fn nodal_duality_and_counts() {
        for k in 1..=MAX_DEGREE {
            let b = LagrangeBasis::<f64>::new(k).unwrap();
            assert_eq!(b.len(), (k + 1) * (k + 2) / 2);
            assert_eq!(3 + 3 * b.nodes_per_edge() + b.interior_nodes(), b.len());
            for (i, &node) in b.nodes().iter().enumerate() {
                let v = b.values(node);
                for (j, &x) in v.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((x - e).abs() < 1e-12, "k={k} node {i} fn {j}");
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for k in 1..=MAX_DEGREE {
            let b = LagrangeBasis::<f64>::new(k).unwrap();
            let x = [0.21, 0.37];
            let g = b.gradients(x);
            let vx1 = b.values([x[0] + h, x[1]]);
            let vx0 = b.values([x[0] - h, x[1]]);
            let vy1 = b.values([x[0], x[1] + h]);
            let vy0 = b.values([x[0], x[1] - h]);
            for i in 0..b.len() {
                let fx = (vx1[i] - vx0[i]) / (2.0 * h);
                let fy = (vy1[i] - vy0[i]) / (2.0 * h);
                assert!((g[i][0] - fx).abs() < 1e-6 && (g[i][1] - fy).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(k in 1usize..=5, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (x, y) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            let basis = LagrangeBasis::<f64>::new(k).unwrap();
            let s: f64 = basis.values([x, y]).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-13);
            let g = basis.gradients([x, y]);
            let gx: f64 = g.iter().map(|v| v[0]).sum();
            let gy: f64 = g.iter().map(|v| v[1]).sum();
            prop_assert!(gx.abs() < 1e-11 && gy.abs() < 1e-11);
        }
    }
}
