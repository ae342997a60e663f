//! Preconditioned conjugate gradients for the symmetric positive definite
//! systems assembled on a Lagrange space.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fem::SparseOperator;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Stop when `||b - A x|| <= tolerance * ||b||`.
    pub tolerance: f64,
    /// Defaults to `10 * n` when unset.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: None,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Final relative residual `||b - A x|| / ||b||`.
    pub residual: f64,
}

const BLOCK: usize = 4096;

/// Dot product reduced over fixed-size blocks in index order, so the result
/// does not depend on the number of threads.
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let partial: Vec<T> = a
        .par_chunks(BLOCK)
        .zip(b.par_chunks(BLOCK))
        .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| p * q).sum::<T>())
        .collect();
    partial.into_iter().sum()
}

pub fn cg_solve<T: Real>(
    a: &SparseOperator<T>,
    b: &[T],
    x0: &[T],
    cfg: &SolverConfig,
) -> Result<Solution<T>> {
    let n = a.nrows();
    if b.len() != n || x0.len() != n {
        return invalid(format!(
            "dimension mismatch: matrix {n}, rhs {}, guess {}",
            b.len(),
            x0.len()
        ));
    }
    if !(cfg.tolerance > 0.0) {
        return invalid("solver tolerance must be positive");
    }
    let max_iter = cfg.max_iterations.unwrap_or(10 * n.max(1));
    let tol = T::lit(cfg.tolerance);

    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        return Ok(Solution {
            x: vec![T::zero(); n],
            iterations: 0,
            residual: 0.0,
        });
    }

    let inv_diag: Vec<T> = match cfg.preconditioner {
        Preconditioner::None => vec![T::one(); n],
        Preconditioner::Jacobi => {
            let d = a.diagonal();
            if let Some(i) = d.iter().position(|&v| !(v > T::zero())) {
                return invalid(format!("non-positive diagonal entry at row {i}"));
            }
            d.into_iter().map(|v| T::one() / v).collect()
        }
    };

    let residual_of = |x: &[T]| {
        let mut r = a.apply(x);
        r.par_iter_mut().zip(b).for_each(|(ri, &bi)| *ri = bi - *ri);
        r
    };
    let precondition =
        |r: &[T]| -> Vec<T> { r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect() };

    let mut x = x0.to_vec();
    let mut r = residual_of(&x);
    let mut rnorm = dot(&r, &r).sqrt();
    if rnorm <= tol * bnorm {
        return Ok(Solution {
            x,
            iterations: 0,
            residual: (rnorm / bnorm).to_f64_lossy(),
        });
    }

    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];

    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::SolverFailure {
                iterations: it,
                residual: (rnorm / bnorm).to_f64_lossy(),
            });
        }
        let alpha = rz / pap;
        x.par_iter_mut()
            .zip(&p)
            .for_each(|(xi, &pi)| *xi += alpha * pi);
        r.par_iter_mut()
            .zip(&ap)
            .for_each(|(ri, &api)| *ri -= alpha * api);
        rnorm = dot(&r, &r).sqrt();
        if rnorm <= tol * bnorm {
            // The recursive residual drifts from b - Ax; confirm before stopping.
            r = residual_of(&x);
            rnorm = dot(&r, &r).sqrt();
            if rnorm <= tol * bnorm {
                return Ok(Solution {
                    x,
                    iterations: it,
                    residual: (rnorm / bnorm).to_f64_lossy(),
                });
            }
            z = precondition(&r);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        z.par_iter_mut()
            .zip(&r)
            .zip(&inv_diag)
            .for_each(|((zi, &ri), &di)| *zi = ri * di);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut()
            .zip(&z)
            .for_each(|(pi, &zi)| *pi = zi + beta * *pi);
    }
    Err(Error::SolverFailure {
        iterations: max_iter,
        residual: (rnorm / bnorm).to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_one_iteration() {
        let a = SparseOperator::<f64>::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let s = cg_solve(&a, &b, &[0.0; 5], &SolverConfig::default()).unwrap();
        assert_eq!(s.x, b);
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn two_by_two() {
        let a = SparseOperator::<f64>::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        for pre in [Preconditioner::None, Preconditioner::Jacobi] {
            let cfg = SolverConfig {
                preconditioner: pre,
                ..Default::default()
            };
            let s = cg_solve(&a, &[1.0, 2.0], &[0.0, 0.0], &cfg).unwrap();
            // Cramer's rule: det 11.
            assert!((s.x[0] - 1.0 / 11.0).abs() < 1e-12);
            assert!((s.x[1] - 7.0 / 11.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs() {
        let a = SparseOperator::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let s = cg_solve(&a, &[0.0, 0.0], &[5.0, 5.0], &SolverConfig::default()).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
    }

    #[test]
    fn failure_reports_residual() {
        let n: usize = 50;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            2.0 + i as f64
                        } else if i.abs_diff(j) == 1 {
                            -1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let a = SparseOperator::from_dense(&rows).unwrap();
        let cfg = SolverConfig {
            max_iterations: Some(2),
            ..Default::default()
        };
        match cg_solve(&a, &vec![1.0; n], &vec![0.0; n], &cfg) {
            Err(Error::SolverFailure {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = SparseOperator::<f64>::identity(3);
        assert!(cg_solve(&a, &[1.0; 2], &[0.0; 3], &SolverConfig::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn residual_contract(entries in proptest::collection::vec(-1.0f64..1.0, 64), rhs in proptest::collection::vec(-10.0f64..10.0, 8)) {
            let n = 8;
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..i {
                    rows[i][j] = entries[i * n + j];
                    rows[j][i] = entries[i * n + j];
                }
            }
            for i in 0..n {
                let off: f64 = rows[i].iter().map(|v| v.abs()).sum();
                rows[i][i] = off + 0.5 + entries[i * n + i].abs();
            }
            let a = SparseOperator::from_dense(&rows).unwrap();
            let s = cg_solve(&a, &rhs, &vec![0.0; n], &SolverConfig::default()).unwrap();
            let ax = a.apply(&s.x);
            let r: f64 = ax.iter().zip(&rhs).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let bn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(r <= 1e-12 * bn + 1e-300);
            let again = cg_solve(&a, &rhs, &vec![0.0; n], &SolverConfig::default()).unwrap();
            prop_assert_eq!(again.x, s.x);
        }
    }
}
