//! Backward integration of the characteristic curves through every dof node.

use rayon::prelude::*;

use super::VelocityField;
use crate::error::{invalid, Result};
use crate::fem::LagrangeSpace;
use crate::geometry::gauss_legendre_unit;
use crate::scalar::{Point2, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RkOrder {
    Euler,
    Midpoint,
    Kutta3,
    #[default]
    Classic4,
}

impl RkOrder {
    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            1 => Ok(Self::Euler),
            2 => Ok(Self::Midpoint),
            3 => Ok(Self::Kutta3),
            4 => Ok(Self::Classic4),
            _ => invalid(format!("Runge-Kutta order {order} not available (1..=4)")),
        }
    }

    pub fn order(self) -> usize {
        match self {
            Self::Euler => 1,
            Self::Midpoint => 2,
            Self::Kutta3 => 3,
            Self::Classic4 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RkConfig {
    /// Substeps per time step `dt`.
    pub substeps: usize,
    pub order: RkOrder,
}

impl Default for RkConfig {
    fn default() -> Self {
        Self {
            substeps: 4,
            order: RkOrder::Classic4,
        }
    }
}

/// Explicit Runge-Kutta step of `dX/dt = u(X, t)` from `t` to `t + h`.
pub fn rk_step<T: Real>(
    order: RkOrder,
    velocity: &VelocityField<T>,
    x: Point2<T>,
    t: T,
    h: T,
) -> Point2<T> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let add = |x: Point2<T>, s: T, k: Point2<T>| [x[0] + s * k[0], x[1] + s * k[1]];
    match order {
        RkOrder::Euler => add(x, h, velocity.u(x, t)),
        RkOrder::Midpoint => {
            let k1 = velocity.u(x, t);
            let k2 = velocity.u(add(x, half * h, k1), t + half * h);
            add(x, h, k2)
        }
        RkOrder::Kutta3 => {
            let k1 = velocity.u(x, t);
            let k2 = velocity.u(add(x, half * h, k1), t + half * h);
            let y = [
                x[0] - h * k1[0] + two * h * k2[0],
                x[1] - h * k1[1] + two * h * k2[1],
            ];
            let k3 = velocity.u(y, t + h);
            let six = T::lit(6.0);
            let four = T::lit(4.0);
            [
                x[0] + h / six * (k1[0] + four * k2[0] + k3[0]),
                x[1] + h / six * (k1[1] + four * k2[1] + k3[1]),
            ]
        }
        RkOrder::Classic4 => {
            let k1 = velocity.u(x, t);
            let k2 = velocity.u(add(x, half * h, k1), t + half * h);
            let k3 = velocity.u(add(x, half * h, k2), t + half * h);
            let k4 = velocity.u(add(x, h, k3), t + h);
            let six = T::lit(6.0);
            [
                x[0] + h / six * (k1[0] + two * k2[0] + two * k3[0] + k4[0]),
                x[1] + h / six * (k1[1] + two * k2[1] + two * k3[1] + k4[1]),
            ]
        }
    }
}

/// Positions `X(a_j, t_n; s)` of every dof node `a_j` at a list of times `s <= t_n`.
#[derive(Debug, Clone)]
pub struct NodeTrajectories<T> {
    base_time: T,
    times: Vec<T>,
    positions: Vec<Vec<Point2<T>>>,
    projections: usize,
}

impl<T: Real> NodeTrajectories<T> {
    pub fn base_time(&self) -> T {
        self.base_time
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn num_levels(&self) -> usize {
        self.times.len()
    }

    /// Node positions at level `idx` (same order as the requested times).
    pub fn level(&self, idx: usize) -> &[Point2<T>] {
        &self.positions[idx]
    }

    /// Number of stored positions that left the domain and were projected back.
    pub fn projections(&self) -> usize {
        self.projections
    }
}

/// Traces every dof node of `space` backward from `t_n` through `levels`.
///
/// Each segment between consecutive requested times is covered with
/// `ceil(substeps * span / dt)` explicit Runge-Kutta steps. Positions that
/// exit the domain are projected onto it before being stored.
pub fn trace_nodes<T: Real>(
    space: &LagrangeSpace<T>,
    t_n: T,
    dt: T,
    levels: &[T],
    velocity: &VelocityField<T>,
    rk: &RkConfig,
) -> Result<NodeTrajectories<T>> {
    if rk.substeps == 0 {
        return invalid("at least one Runge-Kutta substep is required");
    }
    if !(dt > T::zero()) {
        return invalid("time step must be positive");
    }
    if levels.iter().any(|&s| !(s <= t_n)) {
        return invalid("trajectory levels must not exceed the base time");
    }
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[b].partial_cmp(&levels[a]).unwrap().then(a.cmp(&b)));

    let mesh = space.mesh();
    let substeps = T::from_usize_lossy(rk.substeps);
    let per_node: Vec<(Vec<Point2<T>>, usize)> = space
        .dof_coords()
        .par_iter()
        .map(|&node| {
            let mut out = vec![node; levels.len()];
            let mut x = node;
            let mut t = t_n;
            let mut projected = 0;
            for &idx in &order {
                let target = levels[idx];
                let span = t - target;
                if span > T::zero() {
                    let count = (substeps * span / dt - T::lit(1e-9)).ceil().max(T::one());
                    let h = -span / count;
                    let count = count.to_f64_lossy() as usize;
                    for s in 0..count {
                        let ts = t + T::from_usize_lossy(s) * h;
                        x = rk_step(rk.order, velocity, x, ts, h);
                    }
                    if !x[0].is_finite() || !x[1].is_finite() {
                        out[idx] = x;
                        break;
                    }
                    let (p, moved) = mesh.project_into_domain(x);
                    x = p;
                    projected += usize::from(moved);
                    t = target;
                }
                out[idx] = x;
            }
            (out, projected)
        })
        .collect();

    if per_node
        .iter()
        .any(|(p, _)| p.iter().any(|x| !x[0].is_finite() || !x[1].is_finite()))
    {
        return invalid("velocity produced a non-finite trajectory");
    }
    let projections = per_node.iter().map(|(_, c)| c).sum();
    let mut positions = vec![Vec::with_capacity(space.ndof()); levels.len()];
    for (p, _) in &per_node {
        for (lvl, &x) in positions.iter_mut().zip(p) {
            lvl.push(x);
        }
    }
    Ok(NodeTrajectories {
        base_time: t_n,
        times: levels.to_vec(),
        positions,
        projections,
    })
}

/// Time levels needed by one BDF step at `t_n`: the past levels
/// `t_n - i dt` (`i = 0..=q`) followed by Gauss-Legendre subtimes on every
/// interval `[t_n - j dt, t_n - (j-1) dt]`, `j = 1..=q`.
#[derive(Debug, Clone)]
pub struct StepSchedule<T> {
    t_n: T,
    dt: T,
    q: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
    times: Vec<T>,
}

impl<T: Real> StepSchedule<T> {
    pub fn new(t_n: T, dt: T, q: usize, time_points: usize) -> Result<Self> {
        if q == 0 || time_points == 0 {
            return invalid("schedule needs q >= 1 and at least one time quadrature point");
        }
        let (nodes, weights) = gauss_legendre_unit::<T>(time_points);
        let mut times: Vec<T> = (0..=q).map(|i| t_n - T::from_usize_lossy(i) * dt).collect();
        for j in 1..=q {
            let lo = t_n - T::from_usize_lossy(j) * dt;
            times.extend(nodes.iter().map(|&s| lo + s * dt));
        }
        Ok(Self {
            t_n,
            dt,
            q,
            nodes,
            weights,
            times,
        })
    }

    pub fn base_time(&self) -> T {
        self.t_n
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn time_points(&self) -> usize {
        self.nodes.len()
    }

    /// Trajectory index of `t_{n-i}`.
    pub fn level_index(&self, i: usize) -> usize {
        i
    }

    /// Trajectory index and time of subtime `g` on interval `j` (1-based).
    pub fn sub_index(&self, j: usize, g: usize) -> usize {
        self.q + 1 + (j - 1) * self.nodes.len() + g
    }

    /// Weight of subtime `g`, already scaled by the interval length.
    pub fn sub_weight(&self, g: usize) -> T {
        self.weights[g] * self.dt
    }

    pub fn trace(
        &self,
        space: &LagrangeSpace<T>,
        velocity: &VelocityField<T>,
        rk: &RkConfig,
    ) -> Result<NodeTrajectories<T>> {
        trace_nodes(space, self.t_n, self.dt, &self.times, velocity, rk)
    }
}
