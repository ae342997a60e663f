use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;

use super::basis::LagrangeBasis;
use super::sparse::CsrPattern;
use crate::error::{invalid, Error, Result};
use crate::geometry::{Mesh, QuadratureRule};
use crate::scalar::{Point2, Real};

/// Continuous piecewise-polynomial space of degree `k` on a fixed mesh.
///
/// Global numbering: vertex dofs first (same index as the vertex), then
/// `k-1` dofs per edge ordered from the lower to the higher vertex index,
/// then interior dofs element by element.
#[derive(Debug, Clone)]
pub struct LagrangeSpace<T> {
    mesh: Arc<Mesh<T>>,
    basis: LagrangeBasis<T>,
    element_dofs: Vec<usize>,
    dof_coords: Vec<Point2<T>>,
    pattern: Arc<CsrPattern>,
}

pub fn build_space<T: Real>(mesh: Arc<Mesh<T>>, k: usize) -> Result<LagrangeSpace<T>> {
    LagrangeSpace::new(mesh, k)
}

impl<T: Real> LagrangeSpace<T> {
    pub fn new(mesh: Arc<Mesh<T>>, k: usize) -> Result<Self> {
        let basis = LagrangeBasis::new(k)?;
        let nloc = basis.len();
        let per_edge = basis.nodes_per_edge();
        let per_interior = basis.interior_nodes();
        let nv = mesh.num_vertices();
        let ne = mesh.num_elements();

        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in mesh.elements() {
            for m in 0..3 {
                let (a, b) = (tri[m], tri[(m + 1) % 3]);
                let next = edge_ids.len();
                edge_ids.entry((a.min(b), a.max(b))).or_insert(next);
            }
        }
        let edge_base = nv;
        let interior_base = nv + edge_ids.len() * per_edge;
        let ndof = interior_base + ne * per_interior;

        let mut element_dofs = Vec::with_capacity(ne * nloc);
        for (l, tri) in mesh.elements().iter().enumerate() {
            element_dofs.extend_from_slice(tri);
            for m in 0..3 {
                let (a, b) = (tri[m], tri[(m + 1) % 3]);
                let edge = edge_ids[&(a.min(b), a.max(b))];
                for j in 0..per_edge {
                    let g = if a < b { j } else { per_edge - 1 - j };
                    element_dofs.push(edge_base + edge * per_edge + g);
                }
            }
            for j in 0..per_interior {
                element_dofs.push(interior_base + l * per_interior + j);
            }
        }

        let mut dof_coords = vec![[T::zero(); 2]; ndof];
        for l in 0..ne {
            let map = mesh.affine(l);
            for (a, &node) in basis.nodes().iter().enumerate() {
                let d = element_dofs[l * nloc + a];
                dof_coords[d] = if a < 3 {
                    mesh.vertices()[d]
                } else {
                    map.apply(node)
                };
            }
        }

        let mut rows = vec![Vec::new(); ndof];
        for l in 0..ne {
            let dofs = &element_dofs[l * nloc..(l + 1) * nloc];
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        let pattern = Arc::new(CsrPattern::from_rows(rows));

        Ok(Self {
            mesh,
            basis,
            element_dofs,
            dof_coords,
            pattern,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn basis(&self) -> &LagrangeBasis<T> {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn ndof(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn local_len(&self) -> usize {
        self.basis.len()
    }

    pub fn element_dofs(&self, l: usize) -> &[usize] {
        let n = self.basis.len();
        &self.element_dofs[l * n..(l + 1) * n]
    }

    pub fn dof_coords(&self) -> &[Point2<T>] {
        &self.dof_coords
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    /// Basis values and reference gradients at every point of a rule.
    pub fn tabulate(&self, quad: &QuadratureRule<T>) -> BasisTable<T> {
        BasisTable {
            values: quad.points.iter().map(|&p| self.basis.values(p)).collect(),
            gradients: quad
                .points
                .iter()
                .map(|&p| self.basis.gradients(p))
                .collect(),
        }
    }

    /// Value of `field` at reference point `xhat` of element `l`.
    #[inline]
    pub fn eval_in_element(&self, coeffs: &[T], l: usize, xhat: Point2<T>, scratch: &mut [T]) -> T {
        self.basis.eval(xhat, scratch);
        self.element_dofs(l)
            .iter()
            .zip(scratch.iter())
            .map(|(&d, &phi)| coeffs[d] * phi)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct BasisTable<T> {
    /// `values[g][a]`
    pub values: Vec<Vec<T>>,
    /// `gradients[g][a]` with respect to the reference coordinates.
    pub gradients: Vec<Vec<Point2<T>>>,
}

/// Coefficient vector of a function in a [`LagrangeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    coeffs: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(space: &LagrangeSpace<T>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != space.ndof() {
            return invalid(format!(
                "field has {} coefficients, space has {} dofs",
                coeffs.len(),
                space.ndof()
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn constant(space: &LagrangeSpace<T>, value: T) -> Self {
        Self {
            coeffs: vec![value; space.ndof()],
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Point value, locating `y` in the mesh first.
    pub fn evaluate(&self, space: &LagrangeSpace<T>, y: Point2<T>) -> Result<T> {
        let loc = space.mesh().locate_point(y, None)?;
        let mut scratch = vec![T::zero(); space.local_len()];
        Ok(space.eval_in_element(&self.coeffs, loc.element, loc.reference, &mut scratch))
    }

    /// One coefficient per line, 17 significant digits.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.coeffs {
            writeln!(w, "{c:.16e}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(space: &LagrangeSpace<T>, r: R) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(space.ndof());
        for line in r.lines() {
            let line = line?;
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            let v: f64 = s.parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            coeffs.push(T::lit(v));
        }
        Self::new(space, coeffs)
    }
}

/// Lagrange interpolant: coefficients are `f` sampled at the dof coordinates.
pub fn interpolate<T: Real>(
    space: &LagrangeSpace<T>,
    f: impl Fn(Point2<T>, T) -> T + Sync,
    t: T,
) -> Result<ScalarField<T>> {
    let coeffs: Vec<T> = space.dof_coords().par_iter().map(|&x| f(x, t)).collect();
    if let Some(i) = coeffs.iter().position(|v| !v.is_finite()) {
        return invalid(format!("interpolated function is not finite at dof {i}"));
    }
    Ok(ScalarField { coeffs })
}

/// `sum_l int_{T_l} c_h` by quadrature.
pub fn integrate_field<T: Real>(
    space: &LagrangeSpace<T>,
    field: &ScalarField<T>,
    quad: &QuadratureRule<T>,
) -> T {
    let table = space.tabulate(quad);
    let mesh = space.mesh();
    let per_element: Vec<T> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|l| {
            let dofs = space.element_dofs(l);
            let s: T = quad
                .weights
                .iter()
                .zip(&table.values)
                .map(|(&w, phi)| {
                    w * dofs
                        .iter()
                        .zip(phi)
                        .map(|(&d, &p)| field.coeffs[d] * p)
                        .sum::<T>()
                })
                .sum();
            s * mesh.affine(l).det
        })
        .collect();
    per_element.into_iter().sum()
}

/// `sum_l int_{T_l} g(x, c_h(x))` by quadrature, for error functionals.
pub fn integrate_with<T: Real>(
    space: &LagrangeSpace<T>,
    field: &ScalarField<T>,
    quad: &QuadratureRule<T>,
    g: impl Fn(Point2<T>, T) -> T + Sync,
) -> T {
    let table = space.tabulate(quad);
    let mesh = space.mesh();
    let per_element: Vec<T> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|l| {
            let dofs = space.element_dofs(l);
            let map = mesh.affine(l);
            let s: T = quad
                .points
                .iter()
                .zip(&quad.weights)
                .zip(&table.values)
                .map(|((&p, &w), phi)| {
                    let ch = dofs
                        .iter()
                        .zip(phi)
                        .map(|(&d, &v)| field.coeffs[d] * v)
                        .sum::<T>();
                    w * g(map.apply(p), ch)
                })
                .sum();
            s * map.det
        })
        .collect();
    per_element.into_iter().sum()
}
