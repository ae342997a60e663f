//! Runge-Kutta generation of the first levels from the initial datum.

use super::{Problem, SchemeConfig};
use crate::error::{invalid, Result};
use crate::fem::{
    assemble_convection, assemble_load, assemble_mass, assemble_reaction_diffusion, interpolate,
    LagrangeSpace, ScalarField, SparseOperator,
};
use crate::geometry::QuadratureRule;
use crate::scalar::Real;
use crate::solver::cg_solve;

/// Explicit Butcher tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct StartupTableau {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl StartupTableau {
    /// Euler, explicit midpoint, Kutta's third-order method or classical RK4.
    pub fn of_order(order: usize) -> Result<Self> {
        let t = match order {
            1 => Self {
                a: vec![vec![]],
                b: vec![1.0],
                c: vec![0.0],
            },
            2 => Self {
                a: vec![vec![], vec![0.5]],
                b: vec![0.0, 1.0],
                c: vec![0.0, 0.5],
            },
            3 => Self {
                a: vec![vec![], vec![0.5], vec![-1.0, 2.0]],
                b: vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                c: vec![0.0, 0.5, 1.0],
            },
            4 => Self {
                a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
                b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
                c: vec![0.0, 0.5, 0.5, 1.0],
            },
            _ => {
                return invalid(format!(
                    "startup Runge-Kutta order {order} not available (1..=4)"
                ))
            }
        };
        Ok(t)
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// Levels `c^0..c^{q-1}`: `c^0` interpolates the initial datum, the others
/// integrate `M c' = F(t) - (C(t) + A) c` with an explicit method of order
/// `min(q - 1, 4)` and `startup_substeps` substeps per time step.
pub fn rk_startup<T: Real>(
    problem: &Problem<T>,
    space: &LagrangeSpace<T>,
    quad: &QuadratureRule<T>,
    cfg: &SchemeConfig<T>,
) -> Result<Vec<ScalarField<T>>> {
    let first = interpolate(space, |x, t| (problem.initial)(x, t), T::zero())?;
    let mut levels = vec![first];
    if cfg.q == 1 {
        return Ok(levels);
    }
    let tableau = StartupTableau::of_order((cfg.q - 1).min(4))?;
    let mass = assemble_mass(space, quad);
    let stiff = assemble_reaction_diffusion(space, problem.mu, problem.a0, quad)?;
    let n = space.ndof();
    let h = cfg.dt / T::from_usize_lossy(cfg.startup_substeps);

    let rate = |t: T, y: &[T], guess: &[T]| -> Result<Vec<T>> {
        let conv = assemble_convection(space, &problem.velocity, t, quad);
        let op = SparseOperator::linear_combination(T::one(), &conv, T::one(), &stiff)?;
        let mut rhs = op.apply(y);
        rhs.iter_mut().for_each(|r| *r = -*r);
        if let Some(f) = &problem.source {
            let load = assemble_load(space, |x, s| f(x, s), t, quad);
            rhs.iter_mut().zip(load).for_each(|(r, l)| *r += l);
        }
        Ok(cg_solve(&mass, &rhs, guess, &cfg.solver)?.x)
    };

    let mut y = levels[0].coeffs().to_vec();
    let mut prev_rate = vec![T::zero(); n];
    for level in 1..cfg.q {
        let t_level = T::from_usize_lossy(level - 1) * cfg.dt;
        for sub in 0..cfg.startup_substeps {
            let t0 = t_level + T::from_usize_lossy(sub) * h;
            let mut k: Vec<Vec<T>> = Vec::with_capacity(tableau.stages());
            for s in 0..tableau.stages() {
                let mut ys = y.clone();
                for (j, &a) in tableau.a[s].iter().enumerate() {
                    if a != 0.0 {
                        let ha = h * T::lit(a);
                        ys.iter_mut().zip(&k[j]).for_each(|(v, kj)| *v += ha * *kj);
                    }
                }
                let ks = rate(t0 + T::lit(tableau.c[s]) * h, &ys, &prev_rate)?;
                prev_rate.clone_from(&ks);
                k.push(ks);
            }
            for (s, ks) in k.iter().enumerate() {
                let hb = h * T::lit(tableau.b[s]);
                y.iter_mut().zip(ks).for_each(|(v, kv)| *v += hb * *kv);
            }
        }
        levels.push(ScalarField::new(space, y.clone())?);
    }
    Ok(levels)
}
