//! Element-by-element assembly of the operators and load vectors.
//!
//! Local contributions are computed in parallel and scattered into the
//! global arrays in ascending element order, so results do not depend on
//! the thread count.

use rayon::prelude::*;

use super::space::{BasisTable, LagrangeSpace};
use super::sparse::SparseOperator;
use crate::characteristics::VelocityField;
use crate::error::{invalid, Result};
use crate::geometry::{AffineMap, QuadratureRule};
use crate::scalar::{Point2, Real};

const CHUNK: usize = 512;

/// Quadrature data for one element handed to the local kernels.
pub struct ElementContext<'a, T> {
    pub element: usize,
    pub map: &'a AffineMap<T>,
    pub quad: &'a QuadratureRule<T>,
    pub table: &'a BasisTable<T>,
}

impl<T: Real> ElementContext<'_, T> {
    /// Physical quadrature point `g`.
    pub fn point(&self, g: usize) -> Point2<T> {
        self.map.apply(self.quad.points[g])
    }

    /// Quadrature weight scaled to the physical element.
    pub fn weight(&self, g: usize) -> T {
        self.quad.weights[g] * self.map.det
    }

    pub fn physical_gradients(&self, g: usize) -> Vec<Point2<T>> {
        self.table.gradients[g]
            .iter()
            .map(|&r| self.map.push_gradient(r))
            .collect()
    }
}

pub fn assemble_matrix<T, F>(
    space: &LagrangeSpace<T>,
    quad: &QuadratureRule<T>,
    symmetric: bool,
    kernel: F,
) -> SparseOperator<T>
where
    T: Real,
    F: Fn(&ElementContext<'_, T>, &mut [T]) + Sync,
{
    let table = space.tabulate(quad);
    let mesh = space.mesh();
    let nloc = space.local_len();
    let ne = mesh.num_elements();
    let pattern = space.pattern().clone();
    let mut op = SparseOperator::zeros(pattern.clone(), symmetric);
    for start in (0..ne).step_by(CHUNK) {
        let end = (start + CHUNK).min(ne);
        let locals: Vec<Vec<T>> = (start..end)
            .into_par_iter()
            .map(|l| {
                let ctx = ElementContext {
                    element: l,
                    map: mesh.affine(l),
                    quad,
                    table: &table,
                };
                let mut m = vec![T::zero(); nloc * nloc];
                kernel(&ctx, &mut m);
                m
            })
            .collect();
        let values = op.values_mut();
        for (l, m) in (start..end).zip(locals) {
            let dofs = space.element_dofs(l);
            for (a, &row) in dofs.iter().enumerate() {
                for (b, &col) in dofs.iter().enumerate() {
                    let p = pattern
                        .position(row, col)
                        .expect("entry in element pattern");
                    values[p] += m[a * nloc + b];
                }
            }
        }
    }
    op
}

pub fn assemble_vector<T, F>(
    space: &LagrangeSpace<T>,
    quad: &QuadratureRule<T>,
    kernel: F,
) -> Vec<T>
where
    T: Real,
    F: Fn(&ElementContext<'_, T>, &mut [T]) + Sync,
{
    let table = space.tabulate(quad);
    let mesh = space.mesh();
    let nloc = space.local_len();
    let ne = mesh.num_elements();
    let mut out = vec![T::zero(); space.ndof()];
    for start in (0..ne).step_by(CHUNK) {
        let end = (start + CHUNK).min(ne);
        let locals: Vec<Vec<T>> = (start..end)
            .into_par_iter()
            .map(|l| {
                let ctx = ElementContext {
                    element: l,
                    map: mesh.affine(l),
                    quad,
                    table: &table,
                };
                let mut v = vec![T::zero(); nloc];
                kernel(&ctx, &mut v);
                v
            })
            .collect();
        for (l, v) in (start..end).zip(locals) {
            for (&d, &x) in space.element_dofs(l).iter().zip(&v) {
                out[d] += x;
            }
        }
    }
    out
}

/// `M_ij = (chi_j, chi_i)`.
pub fn assemble_mass<T: Real>(
    space: &LagrangeSpace<T>,
    quad: &QuadratureRule<T>,
) -> SparseOperator<T> {
    assemble_weighted_mass(space, quad, |_| T::one())
}

/// `W_ij = (w chi_j, chi_i)` for a pointwise weight `w(x)`.
pub fn assemble_weighted_mass<T: Real>(
    space: &LagrangeSpace<T>,
    quad: &QuadratureRule<T>,
    weight: impl Fn(Point2<T>) -> T + Sync,
) -> SparseOperator<T> {
    let nloc = space.local_len();
    assemble_matrix(space, quad, true, |ctx, m| {
        for g in 0..ctx.quad.len() {
            let w = ctx.weight(g) * weight(ctx.point(g));
            let phi = &ctx.table.values[g];
            for a in 0..nloc {
                let wa = w * phi[a];
                for b in 0..nloc {
                    m[a * nloc + b] += wa * phi[b];
                }
            }
        }
    })
}

/// `K_ij = (grad chi_j, grad chi_i)`.
pub fn assemble_stiffness<T: Real>(
    space: &LagrangeSpace<T>,
    quad: &QuadratureRule<T>,
) -> SparseOperator<T> {
    // mu = 1, a0 = 0 is always admissible.
    reaction_diffusion(space, T::one(), T::zero(), quad)
}

/// Operator of `a(u, v) = (mu grad u, grad v) + a0 (u, v)`.
pub fn assemble_reaction_diffusion<T: Real>(
    space: &LagrangeSpace<T>,
    mu: T,
    a0: T,
    quad: &QuadratureRule<T>,
) -> Result<SparseOperator<T>> {
    if !(mu > T::zero()) {
        return invalid(format!("diffusion coefficient must be positive, got {mu}"));
    }
    if !(a0 >= T::zero()) {
        return invalid(format!(
            "reaction coefficient must be non-negative, got {a0}"
        ));
    }
    Ok(reaction_diffusion(space, mu, a0, quad))
}

fn reaction_diffusion<T: Real>(
    space: &LagrangeSpace<T>,
    mu: T,
    a0: T,
    quad: &QuadratureRule<T>,
) -> SparseOperator<T> {
    let nloc = space.local_len();
    assemble_matrix(space, quad, true, |ctx, m| {
        for g in 0..ctx.quad.len() {
            let w = ctx.weight(g);
            let grad = ctx.physical_gradients(g);
            let phi = &ctx.table.values[g];
            for a in 0..nloc {
                for b in 0..nloc {
                    let k = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1];
                    m[a * nloc + b] += w * (mu * k + a0 * phi[a] * phi[b]);
                }
            }
        }
    })
}

/// `C_ij = (u . grad chi_j + (div u) chi_j, chi_i)` at time `t`.
pub fn assemble_convection<T: Real>(
    space: &LagrangeSpace<T>,
    velocity: &VelocityField<T>,
    t: T,
    quad: &QuadratureRule<T>,
) -> SparseOperator<T> {
    let nloc = space.local_len();
    assemble_matrix(space, quad, false, |ctx, m| {
        for g in 0..ctx.quad.len() {
            let x = ctx.point(g);
            let w = ctx.weight(g);
            let u = velocity.u(x, t);
            let div = velocity.div(x, t);
            let grad = ctx.physical_gradients(g);
            let phi = &ctx.table.values[g];
            for a in 0..nloc {
                for b in 0..nloc {
                    let adv = u[0] * grad[b][0] + u[1] * grad[b][1] + div * phi[b];
                    m[a * nloc + b] += w * adv * phi[a];
                }
            }
        }
    })
}

/// `F_i = (f(., t), chi_i)`.
pub fn assemble_load<T: Real>(
    space: &LagrangeSpace<T>,
    f: impl Fn(Point2<T>, T) -> T + Sync,
    t: T,
    quad: &QuadratureRule<T>,
) -> Vec<T> {
    let nloc = space.local_len();
    assemble_vector(space, quad, |ctx, v| {
        for g in 0..ctx.quad.len() {
            let w = ctx.weight(g) * f(ctx.point(g), t);
            let phi = &ctx.table.values[g];
            for a in 0..nloc {
                v[a] += w * phi[a];
            }
        }
    })
}
