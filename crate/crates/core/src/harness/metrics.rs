use crate::error::Result;
use crate::fem::{integrate_field, integrate_with, interpolate, LagrangeSpace, ScalarField};
use crate::geometry::QuadratureRule;
use crate::scalar::{Point2, Real};

/// `||c_h - c|| / ||c||` in `L2` at time `t`, with `c` evaluated analytically
/// at the quadrature points.
pub fn relative_l2_error<T: Real>(
    space: &LagrangeSpace<T>,
    field: &ScalarField<T>,
    exact: impl Fn(Point2<T>, T) -> T + Sync,
    t: T,
    quad: &QuadratureRule<T>,
) -> T {
    let err = integrate_with(space, field, quad, |x, ch| {
        let d = ch - exact(x, t);
        d * d
    });
    let norm = integrate_with(space, field, quad, |x, _| {
        let c = exact(x, t);
        c * c
    });
    (err / norm).sqrt()
}

/// `|int (c_h - c)| / |int c|` at time `t`.
pub fn relative_mass_error<T: Real>(
    space: &LagrangeSpace<T>,
    field: &ScalarField<T>,
    exact: impl Fn(Point2<T>, T) -> T + Sync,
    t: T,
    quad: &QuadratureRule<T>,
) -> T {
    let err = integrate_with(space, field, quad, |x, ch| ch - exact(x, t));
    let total = integrate_with(space, field, quad, |x, _| exact(x, t));
    (err / total).abs()
}

/// Errors measured against the interpolant `L_h c` instead of `c`:
/// `max_n ||c_h^n - L_h c^n|| / max_n ||L_h c^n||` over every level and the
/// relative mass defect at the last level seen.
#[derive(Debug, Clone)]
pub struct InterpolantErrors<T> {
    max_error: T,
    max_norm: T,
    last_mass_error: T,
    levels: usize,
}

impl<T: Real> Default for InterpolantErrors<T> {
    fn default() -> Self {
        Self {
            max_error: T::zero(),
            max_norm: T::zero(),
            last_mass_error: T::zero(),
            levels: 0,
        }
    }
}

impl<T: Real> InterpolantErrors<T> {
    pub fn record(
        &mut self,
        space: &LagrangeSpace<T>,
        field: &ScalarField<T>,
        exact: impl Fn(Point2<T>, T) -> T + Sync,
        t: T,
        quad: &QuadratureRule<T>,
    ) -> Result<()> {
        let lc = interpolate(space, exact, t)?;
        let diff: Vec<T> = field
            .coeffs()
            .iter()
            .zip(lc.coeffs())
            .map(|(a, b)| *a - *b)
            .collect();
        let diff = ScalarField::new(space, diff)?;
        let err = integrate_with(space, &diff, quad, |_, d| d * d).sqrt();
        let norm = integrate_with(space, &lc, quad, |_, c| c * c).sqrt();
        self.max_error = self.max_error.max(err);
        self.max_norm = self.max_norm.max(norm);
        self.last_mass_error =
            (integrate_field(space, &diff, quad) / integrate_field(space, &lc, quad)).abs();
        self.levels += 1;
        Ok(())
    }

    pub fn l2(&self) -> T {
        self.max_error / self.max_norm
    }

    pub fn mass(&self) -> T {
        self.last_mass_error
    }

    pub fn levels(&self) -> usize {
        self.levels
    }
}
