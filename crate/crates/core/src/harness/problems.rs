use crate::characteristics::VelocityField;
use crate::geometry::DomainBox;
use crate::scalar::Real;
use crate::scheme::Problem;

/// Velocity `u = (1 + sin(t - x1), 1 + sin(t - x2))` with
/// `div u = -cos(t - x1) - cos(t - x2)`, so `|div u| <= 2`.
pub fn rotating_wave_velocity<T: Real>() -> VelocityField<T> {
    VelocityField::new(
        |x: [T; 2], t: T| [T::one() + (t - x[0]).sin(), T::one() + (t - x[1]).sin()],
        |x: [T; 2], t: T| -(t - x[0]).cos() - (t - x[1]).cos(),
    )
    .with_div_bound(T::lit(2.0))
}

/// `c = exp(-(2 - cos(t - x1) - cos(t - x2)) / mu)`, which solves the
/// conservative equation with the velocity above, `a0 = 0` and `f = 0` on
/// `(-1, 1)^2`.
pub fn rotating_wave_exact<T: Real>(
    mu: T,
) -> impl Fn([T; 2], T) -> T + Send + Sync + Clone + 'static {
    move |x, t| (-(T::lit(2.0) - (t - x[0]).cos() - (t - x[1]).cos()) / mu).exp()
}

/// The benchmark problem with `T = t_final`.
pub fn rotating_wave_problem<T: Real>(mu: T, t_final: T) -> Problem<T> {
    Problem::with_exact(
        DomainBox::symmetric_unit(),
        rotating_wave_velocity(),
        mu,
        T::zero(),
        rotating_wave_exact(mu),
        t_final,
    )
}
