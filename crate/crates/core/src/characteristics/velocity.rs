use std::fmt;
use std::sync::Arc;

use crate::geometry::DomainBox;
use crate::scalar::{Point2, Real, ScalarFn, VectorFn};

/// Analytic velocity `u(x, t)` together with its divergence.
#[derive(Clone)]
pub struct VelocityField<T> {
    velocity: VectorFn<T>,
    divergence: ScalarFn<T>,
    /// Optional bound on `|div u|` over the space-time cylinder.
    c_div: Option<T>,
}

impl<T> fmt::Debug for VelocityField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityField").finish_non_exhaustive()
    }
}

impl<T: Real> VelocityField<T> {
    pub fn new(
        velocity: impl Fn(Point2<T>, T) -> Point2<T> + Send + Sync + 'static,
        divergence: impl Fn(Point2<T>, T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            velocity: Arc::new(velocity),
            divergence: Arc::new(divergence),
            c_div: None,
        }
    }

    pub fn with_div_bound(mut self, c_div: T) -> Self {
        self.c_div = Some(c_div);
        self
    }

    pub fn zero() -> Self {
        Self::new(|_, _| [T::zero(); 2], |_, _| T::zero()).with_div_bound(T::zero())
    }

    pub fn constant(u: Point2<T>) -> Self {
        Self::new(move |_, _| u, |_, _| T::zero()).with_div_bound(T::zero())
    }

    #[inline]
    pub fn u(&self, x: Point2<T>, t: T) -> Point2<T> {
        (self.velocity)(x, t)
    }

    #[inline]
    pub fn div(&self, x: Point2<T>, t: T) -> T {
        (self.divergence)(x, t)
    }

    pub fn c_div(&self) -> Option<T> {
        self.c_div
    }

    /// Largest `|u . nu|` over `samples` equispaced points per side of the box
    /// and the given times. Zero for fields tangent to the boundary.
    pub fn boundary_normal_flux(&self, domain: &DomainBox<T>, samples: usize, times: &[T]) -> T {
        let mut worst = T::zero();
        let s = samples.max(2);
        for &t in times {
            for i in 0..s {
                let r = T::from_usize_lossy(i) / T::from_usize_lossy(s - 1);
                let x = domain.lo[0] + r * (domain.hi[0] - domain.lo[0]);
                let y = domain.lo[1] + r * (domain.hi[1] - domain.lo[1]);
                let checks = [
                    ([domain.lo[0], y], [-T::one(), T::zero()]),
                    ([domain.hi[0], y], [T::one(), T::zero()]),
                    ([x, domain.lo[1]], [T::zero(), -T::one()]),
                    ([x, domain.hi[1]], [T::zero(), T::one()]),
                ];
                for (p, nu) in checks {
                    let u = self.u(p, t);
                    worst = worst.max((u[0] * nu[0] + u[1] * nu[1]).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_tangent_on_disk_not_square() {
        let rot = VelocityField::<f64>::new(|x, _| [-x[1], x[0]], |_, _| 0.0);
        let d = DomainBox::symmetric_unit();
        assert!((rot.boundary_normal_flux(&d, 11, &[0.0]) - 1.0).abs() < 1e-15);
        let shear = VelocityField::<f64>::new(|x, _| [1.0 - x[1] * x[1], 0.0], |_, _| 0.0);
        let v = shear.boundary_normal_flux(&d, 11, &[0.0]);
        assert!((v - 1.0).abs() < 1e-15);
        let tangent =
            VelocityField::<f64>::new(|x, _| [1.0 - x[0] * x[0], 0.0], |x, _| -2.0 * x[0]);
        assert_eq!(tangent.boundary_normal_flux(&d, 11, &[0.0, 1.0]), 0.0);
    }
}
