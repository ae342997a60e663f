//! Isoparametric feet of the characteristics and the approximate Jacobian.

use std::io::Write;

use rayon::prelude::*;

use super::trace::{NodeTrajectories, StepSchedule};
use super::VelocityField;
use crate::error::{invalid, Result};
use crate::fem::LagrangeSpace;
use crate::geometry::{PointLocation, QuadratureRule};
use crate::scalar::{Point2, Real};

/// Interpolates traced node positions of level `idx` at `xhat` in element `l`.
pub fn interpolated_foot<T: Real>(
    space: &LagrangeSpace<T>,
    traj: &NodeTrajectories<T>,
    idx: usize,
    l: usize,
    xhat: Point2<T>,
) -> Point2<T> {
    let phi = space.basis().values(xhat);
    combine(traj.level(idx), space.element_dofs(l), &phi)
}

#[inline]
fn combine<T: Real>(pos: &[Point2<T>], dofs: &[usize], phi: &[T]) -> Point2<T> {
    let mut y = [T::zero(); 2];
    for (&d, &p) in dofs.iter().zip(phi) {
        y[0] += p * pos[d][0];
        y[1] += p * pos[d][1];
    }
    y
}

/// `exp(-int_{t_{n-i}}^{t_n} div u(X(s), s) ds)` along the interpolated
/// trajectory from `xhat` in element `l`, using the schedule's Gauss subtimes.
pub fn jacobian_tilde<T: Real>(
    space: &LagrangeSpace<T>,
    schedule: &StepSchedule<T>,
    traj: &NodeTrajectories<T>,
    velocity: &VelocityField<T>,
    l: usize,
    xhat: Point2<T>,
    i: usize,
) -> T {
    let phi = space.basis().values(xhat);
    let dofs = space.element_dofs(l);
    let mut integral = T::zero();
    for j in 1..=i {
        for g in 0..schedule.time_points() {
            let idx = schedule.sub_index(j, g);
            let x = combine(traj.level(idx), dofs, &phi);
            integral += schedule.sub_weight(g) * velocity.div(x, schedule.times()[idx]);
        }
    }
    (-integral).exp()
}

/// Feet, host elements and Jacobian factors of one past level at every
/// quadrature point, stored at `element * nq + g`.
#[derive(Debug, Clone)]
pub struct FeetData<T> {
    pub level: usize,
    pub time: T,
    pub points_per_element: usize,
    pub feet: Vec<Point2<T>>,
    pub hosts: Vec<PointLocation<T>>,
    pub jacobians: Vec<T>,
}

impl<T: Real> FeetData<T> {
    pub fn len(&self) -> usize {
        self.feet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feet.is_empty()
    }

    /// Number of feet that were projected back into the domain during location.
    pub fn clamped(&self) -> usize {
        self.hosts.iter().filter(|h| h.clamped).count()
    }

    pub fn jacobian_range(&self) -> (T, T) {
        self.jacobians
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &j| {
                (lo.min(j), hi.max(j))
            })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "level,element,g,x,y,host,xhat1,xhat2,jacobian")?;
        let nq = self.points_per_element;
        for (p, ((y, h), j)) in self
            .feet
            .iter()
            .zip(&self.hosts)
            .zip(&self.jacobians)
            .enumerate()
        {
            writeln!(
                w,
                "{},{},{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e}",
                self.level,
                p / nq,
                p % nq,
                y[0],
                y[1],
                h.element,
                h.reference[0],
                h.reference[1],
                j
            )?;
        }
        Ok(())
    }
}

/// Builds the feet of levels `1..=q` of `schedule` at the points of `quad`.
///
/// With `with_jacobian == false` every factor is one and the divergence is
/// never evaluated.
pub fn build_feet<T: Real>(
    space: &LagrangeSpace<T>,
    schedule: &StepSchedule<T>,
    traj: &NodeTrajectories<T>,
    quad: &QuadratureRule<T>,
    velocity: &VelocityField<T>,
    with_jacobian: bool,
) -> Result<Vec<FeetData<T>>> {
    if traj.num_levels() != schedule.times().len() {
        return invalid("trajectories do not match the step schedule");
    }
    let mesh = space.mesh();
    let table = space.tabulate(quad);
    let q = schedule.q();
    let nq = quad.len();
    let npts = schedule.time_points();

    type Local<T> = Vec<(Point2<T>, PointLocation<T>, T)>;
    let per_element: Vec<Result<Local<T>>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|l| {
            let dofs = space.element_dofs(l);
            let mut out = Vec::with_capacity(q * nq);
            for phi in &table.values {
                let mut integral = T::zero();
                for i in 1..=q {
                    if with_jacobian {
                        for g in 0..npts {
                            let idx = schedule.sub_index(i, g);
                            let x = combine(traj.level(idx), dofs, phi);
                            integral +=
                                schedule.sub_weight(g) * velocity.div(x, schedule.times()[idx]);
                        }
                    }
                    let y = combine(traj.level(schedule.level_index(i)), dofs, phi);
                    let host = mesh.locate_point(y, Some(l))?;
                    out.push((y, host, (-integral).exp()));
                }
            }
            Ok(out)
        })
        .collect();

    let ne = mesh.num_elements();
    let mut levels: Vec<FeetData<T>> = (1..=q)
        .map(|i| FeetData {
            level: i,
            time: schedule.times()[schedule.level_index(i)],
            points_per_element: nq,
            feet: Vec::with_capacity(ne * nq),
            hosts: Vec::with_capacity(ne * nq),
            jacobians: Vec::with_capacity(ne * nq),
        })
        .collect();
    for local in per_element {
        for (p, (y, host, jac)) in local?.into_iter().enumerate() {
            let lvl = &mut levels[p % q];
            lvl.feet.push(y);
            lvl.hosts.push(host);
            lvl.jacobians.push(jac);
        }
    }
    if levels
        .iter()
        .any(|d| d.jacobians.iter().any(|j| !j.is_finite()))
    {
        return invalid("divergence produced a non-finite Jacobian factor");
    }
    Ok(levels)
}

/// Single-level variant of [`build_feet`].
pub fn build_feet_data<T: Real>(
    space: &LagrangeSpace<T>,
    schedule: &StepSchedule<T>,
    traj: &NodeTrajectories<T>,
    level: usize,
    quad: &QuadratureRule<T>,
    velocity: &VelocityField<T>,
) -> Result<FeetData<T>> {
    if level == 0 || level > schedule.q() {
        return invalid(format!("level {level} outside 1..={}", schedule.q()));
    }
    let mesh = space.mesh();
    let nq = quad.len();
    let mut data = FeetData {
        level,
        time: schedule.times()[schedule.level_index(level)],
        points_per_element: nq,
        feet: Vec::new(),
        hosts: Vec::new(),
        jacobians: Vec::new(),
    };
    for l in 0..mesh.num_elements() {
        for &xhat in &quad.points {
            let y = interpolated_foot(space, traj, schedule.level_index(level), l, xhat);
            data.hosts.push(mesh.locate_point(y, Some(l))?);
            data.feet.push(y);
            data.jacobians.push(jacobian_tilde(
                space, schedule, traj, velocity, l, xhat, level,
            ));
        }
    }
    Ok(data)
}
