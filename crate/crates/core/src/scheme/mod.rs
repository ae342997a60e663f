//! Lagrange-Galerkin BDF time stepping.

mod bdf;
mod run;
mod startup;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bdf::{bdf_coefficients, MAX_BDF_ORDER};
pub use run::{run, RunOutput, StepDiagnostics, StepReport};
pub use startup::{rk_startup, StartupTableau};

use crate::characteristics::{RkConfig, VelocityField};
use crate::error::{invalid, Result};
use crate::geometry::{DomainBox, MAX_SIMPLEX_DEGREE};
use crate::scalar::{Point2, Real, ScalarFn};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Variant {
    /// Transported values are weighted by the approximate Jacobian.
    #[default]
    #[serde(rename = "conservative")]
    Conservative,
    /// Plain transport of the past levels; consistent only for
    /// divergence-free velocities.
    #[serde(rename = "nonconservative")]
    NonConservative,
    /// Plain transport plus an implicit `(div u) c` reaction term, the
    /// consistent Lagrange-Galerkin treatment of the conservative equation.
    #[serde(rename = "nonconservative-reaction")]
    NonConservativeReaction,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Conservative => "conservative",
            Self::NonConservative => "nonconservative",
            Self::NonConservativeReaction => "nonconservative-reaction",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conservative" | "nclg" => Ok(Self::Conservative),
            "nonconservative" | "lg" => Ok(Self::NonConservative),
            "nonconservative-reaction" | "lg-reaction" => Ok(Self::NonConservativeReaction),
            _ => invalid(format!("unknown variant '{s}'")),
        }
    }
}

/// How the first `q - 1` levels are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StartupMode {
    /// Interpolate the exact solution at `t_0..t_{q-1}`.
    #[default]
    #[serde(rename = "exact")]
    Exact,
    /// Interpolate the initial datum and integrate the semi-discrete
    /// Eulerian problem with explicit Runge-Kutta.
    #[serde(rename = "rk")]
    RungeKutta,
}

impl std::str::FromStr for StartupMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "rk" => Ok(Self::RungeKutta),
            _ => invalid(format!("unknown startup mode '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig<T> {
    pub q: usize,
    pub dt: T,
    pub variant: Variant,
    /// Element quadrature degree used for every integral; the highest
    /// available degree (14) when unset.
    pub quad_degree: Option<usize>,
    pub startup: StartupMode,
    /// Substeps per startup level when `startup` is `RungeKutta`.
    pub startup_substeps: usize,
    pub rk: RkConfig,
    /// Gauss-Legendre points per step for the Jacobian time integral.
    pub time_points: usize,
    pub solver: SolverConfig,
}

impl<T: Real> SchemeConfig<T> {
    pub fn new(q: usize, dt: T) -> Self {
        Self {
            q,
            dt,
            variant: Variant::Conservative,
            quad_degree: None,
            startup: StartupMode::Exact,
            startup_substeps: 2,
            rk: RkConfig::default(),
            time_points: 3,
            solver: SolverConfig::default(),
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn quad_degree_for(&self, k: usize) -> usize {
        self.quad_degree
            .unwrap_or(MAX_SIMPLEX_DEGREE.max(2 * k + 2))
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_BDF_ORDER).contains(&self.q) {
            return invalid(format!("BDF order {} outside 1..={MAX_BDF_ORDER}", self.q));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return invalid(format!(
                "time step must be positive and finite, got {}",
                self.dt
            ));
        }
        if let Some(d) = self.quad_degree {
            if d == 0 || d > MAX_SIMPLEX_DEGREE {
                return invalid(format!(
                    "quadrature degree {d} outside 1..={MAX_SIMPLEX_DEGREE}"
                ));
            }
        }
        if self.time_points == 0 || self.startup_substeps == 0 || self.rk.substeps == 0 {
            return invalid("quadrature point and substep counts must be positive");
        }
        Ok(())
    }
}

/// `dc/dt + div(u c) - mu lap c + a0 c = f` with homogeneous Neumann data.
#[derive(Clone)]
pub struct Problem<T> {
    pub domain: DomainBox<T>,
    pub velocity: VelocityField<T>,
    pub mu: T,
    pub a0: T,
    pub source: Option<ScalarFn<T>>,
    /// Initial datum `c(x, 0)`.
    pub initial: ScalarFn<T>,
    pub exact: Option<ScalarFn<T>>,
    pub t_final: T,
}

impl<T> fmt::Debug for Problem<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("domain", &self.domain)
            .field("mu", &self.mu)
            .field("a0", &self.a0)
            .field("has_source", &self.source.is_some())
            .field("has_exact", &self.exact.is_some())
            .field("t_final", &self.t_final)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Problem<T> {
    /// Problem whose initial datum is the exact solution at `t = 0`.
    pub fn with_exact(
        domain: DomainBox<T>,
        velocity: VelocityField<T>,
        mu: T,
        a0: T,
        exact: impl Fn(Point2<T>, T) -> T + Send + Sync + 'static,
        t_final: T,
    ) -> Self {
        let exact: ScalarFn<T> = Arc::new(exact);
        Self {
            domain,
            velocity,
            mu,
            a0,
            source: None,
            initial: exact.clone(),
            exact: Some(exact),
            t_final,
        }
    }

    pub fn with_source(mut self, f: impl Fn(Point2<T>, T) -> T + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(f));
        self
    }

    /// Number of steps `floor(T / dt)` (with a small tolerance for round-off).
    pub fn num_steps(&self, dt: T) -> usize {
        (self.t_final / dt + T::lit(1e-9))
            .floor()
            .to_f64_lossy()
            .max(0.0) as usize
    }
}
