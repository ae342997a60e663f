//! Lagrange finite element space on the fixed mesh and its discrete operators.

mod assembly;
pub mod basis;
mod space;
mod sparse;

pub use assembly::{
    assemble_convection, assemble_load, assemble_mass, assemble_matrix,
    assemble_reaction_diffusion, assemble_stiffness, assemble_vector, assemble_weighted_mass,
    ElementContext,
};
pub use basis::{lagrange_basis, lagrange_basis_grad, LagrangeBasis};
pub use space::{
    build_space, integrate_field, integrate_with, interpolate, BasisTable, LagrangeSpace,
    ScalarField,
};
pub use sparse::{CsrPattern, SparseOperator};

use crate::error::Result;
use crate::geometry::QuadratureRule;
use crate::scalar::{Point2, Real};
use crate::solver::{cg_solve, SolverConfig};

/// `L2` projection: solves `M c = (f, chi_i)`.
pub fn l2_project<T: Real>(
    space: &LagrangeSpace<T>,
    f: impl Fn(Point2<T>, T) -> T + Sync,
    t: T,
    quad: &QuadratureRule<T>,
    solver: &SolverConfig,
) -> Result<ScalarField<T>> {
    let mass = assemble_mass(space, quad);
    let load = assemble_load(space, &f, t, quad);
    if let Some(i) = load.iter().position(|v| !v.is_finite()) {
        return crate::error::invalid(format!("projected function is not finite near dof {i}"));
    }
    let sol = cg_solve(&mass, &load, &vec![T::zero(); space.ndof()], solver)?;
    ScalarField::new(space, sol.x)
}
