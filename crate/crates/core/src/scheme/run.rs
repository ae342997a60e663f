//! The time loop.

use std::collections::VecDeque;

use super::startup::rk_startup;
use super::{bdf_coefficients, Problem, SchemeConfig, StartupMode, Variant};
use crate::characteristics::{build_feet, FeetData, StepSchedule};
use crate::error::{invalid, Error, Result};
use crate::fem::{
    assemble_load, assemble_mass, assemble_reaction_diffusion, assemble_vector,
    assemble_weighted_mass, integrate_field, interpolate, LagrangeSpace, ScalarField,
    SparseOperator,
};
use crate::geometry::{simplex_quadrature, QuadratureRule};
use crate::scalar::Real;
use crate::solver::cg_solve;

/// Per-level record kept by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics<T> {
    pub n: usize,
    pub t: T,
    /// `int c_h` at this level.
    pub mass: T,
    /// Conjugate gradient iterations (zero for startup levels).
    pub iterations: usize,
    pub residual: f64,
    /// Traced node positions that left the domain and were projected back.
    pub projected_nodes: usize,
    /// Feet located outside the domain and projected onto it.
    pub clamped_feet: usize,
    pub startup: bool,
}

/// What the observer sees after every level, startup levels included.
pub struct StepReport<'a, T> {
    pub diagnostics: &'a StepDiagnostics<T>,
    pub field: &'a ScalarField<T>,
    /// Feet used to produce this level (`None` for startup levels).
    pub feet: Option<&'a [FeetData<T>]>,
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub field: ScalarField<T>,
    pub time: T,
    pub steps: usize,
    pub diagnostics: Vec<StepDiagnostics<T>>,
}

impl<T: Real> RunOutput<T> {
    pub fn total_iterations(&self) -> usize {
        self.diagnostics.iter().map(|d| d.iterations).sum()
    }

    pub fn total_clamped_feet(&self) -> usize {
        self.diagnostics.iter().map(|d| d.clamped_feet).sum()
    }

    pub fn total_projected_nodes(&self) -> usize {
        self.diagnostics.iter().map(|d| d.projected_nodes).sum()
    }
}

/// Advances `problem` from `t = 0` to `floor(T / dt) dt`.
pub fn run<T: Real>(
    problem: &Problem<T>,
    space: &LagrangeSpace<T>,
    cfg: &SchemeConfig<T>,
    mut observer: impl FnMut(&StepReport<'_, T>),
) -> Result<RunOutput<T>> {
    cfg.validate()?;
    let q = cfg.q;
    let dt = cfg.dt;
    let steps = problem.num_steps(dt);
    if steps < q {
        return invalid(format!(
            "{steps} time steps do not cover the {q} startup levels"
        ));
    }
    let quad = simplex_quadrature::<T>(cfg.quad_degree_for(space.degree()))?;
    let alpha = bdf_coefficients::<T>(q)?;
    let time = |n: usize| T::from_usize_lossy(n) * dt;

    let starts = match cfg.startup {
        StartupMode::Exact => {
            let Some(exact) = &problem.exact else {
                return invalid("exact startup needs an exact solution");
            };
            (0..q)
                .map(|n| interpolate(space, |x, t| exact(x, t), time(n)))
                .collect::<Result<Vec<_>>>()?
        }
        StartupMode::RungeKutta => rk_startup(problem, space, &quad, cfg)?,
    };

    let mut diagnostics = Vec::with_capacity(steps + 1);
    let mut history: VecDeque<ScalarField<T>> = VecDeque::with_capacity(q);
    for (n, field) in starts.into_iter().enumerate() {
        let d = StepDiagnostics {
            n,
            t: time(n),
            mass: integrate_field(space, &field, &quad),
            iterations: 0,
            residual: 0.0,
            projected_nodes: 0,
            clamped_feet: 0,
            startup: true,
        };
        observer(&StepReport {
            diagnostics: &d,
            field: &field,
            feet: None,
        });
        diagnostics.push(d);
        history.push_front(field);
    }

    let mass = assemble_mass(space, &quad);
    let diffusion = assemble_reaction_diffusion(space, problem.mu, problem.a0, &quad)?;
    let base = SparseOperator::linear_combination(alpha[0], &mass, dt, &diffusion)?;

    for n in q..=steps {
        let t_n = time(n);
        let wrap = |e: Error| Error::Step {
            step: n,
            source: Box::new(e),
        };
        let schedule = StepSchedule::new(t_n, dt, q, cfg.time_points).map_err(wrap)?;
        let traj = schedule
            .trace(space, &problem.velocity, &cfg.rk)
            .map_err(wrap)?;
        let conservative = cfg.variant == Variant::Conservative;
        let feet = build_feet(
            space,
            &schedule,
            &traj,
            &quad,
            &problem.velocity,
            conservative,
        )
        .map_err(wrap)?;

        let mut rhs = transport_rhs(space, &quad, &alpha, &history, &feet);
        if let Some(f) = &problem.source {
            let load = assemble_load(space, |x, s| f(x, s), t_n, &quad);
            rhs.iter_mut().zip(load).for_each(|(r, l)| *r += dt * l);
        }
        if let Some(i) = rhs.iter().position(|v| !v.is_finite()) {
            return Err(wrap(Error::InvalidState(format!(
                "non-finite right-hand side at dof {i}"
            ))));
        }
        let system = match cfg.variant {
            Variant::Conservative | Variant::NonConservative => None,
            Variant::NonConservativeReaction => {
                let div = assemble_weighted_mass(space, &quad, |x| problem.velocity.div(x, t_n));
                Some(SparseOperator::linear_combination(T::one(), &base, dt, &div).map_err(wrap)?)
            }
        };
        let sol = cg_solve(
            system.as_ref().unwrap_or(&base),
            &rhs,
            history[0].coeffs(),
            &cfg.solver,
        )
        .map_err(wrap)?;
        let field = ScalarField::new(space, sol.x).map_err(wrap)?;
        let d = StepDiagnostics {
            n,
            t: t_n,
            mass: integrate_field(space, &field, &quad),
            iterations: sol.iterations,
            residual: sol.residual,
            projected_nodes: traj.projections(),
            clamped_feet: feet.iter().map(FeetData::clamped).sum(),
            startup: false,
        };
        observer(&StepReport {
            diagnostics: &d,
            field: &field,
            feet: Some(&feet),
        });
        diagnostics.push(d);
        history.pop_back();
        history.push_front(field);
    }

    Ok(RunOutput {
        field: history.pop_front().expect("at least one level"),
        time: time(steps),
        steps,
        diagnostics,
    })
}

/// `-sum_i alpha_i (J_i c^{n-i}(X_i), chi_j)` with `history[i - 1] = c^{n-i}`.
pub(crate) fn transport_rhs<T: Real>(
    space: &LagrangeSpace<T>,
    quad: &QuadratureRule<T>,
    alpha: &[T],
    history: &VecDeque<ScalarField<T>>,
    feet: &[FeetData<T>],
) -> Vec<T> {
    let nq = quad.len();
    let nloc = space.local_len();
    assemble_vector(space, quad, |ctx, out| {
        let mut scratch = vec![T::zero(); nloc];
        for g in 0..nq {
            let p = ctx.element * nq + g;
            let mut value = T::zero();
            for (data, (a, c)) in feet.iter().zip(alpha[1..].iter().zip(history)) {
                let host = &data.hosts[p];
                let v =
                    space.eval_in_element(c.coeffs(), host.element, host.reference, &mut scratch);
                value -= *a * data.jacobians[p] * v;
            }
            let w = ctx.weight(g) * value;
            for (o, &phi) in out.iter_mut().zip(&ctx.table.values[g]) {
                *o += w * phi;
            }
        }
    })
}
