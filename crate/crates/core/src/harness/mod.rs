//! Benchmark problems, error functionals and convergence sweeps.

mod metrics;
mod problems;
mod sweep;

pub use metrics::{relative_l2_error, relative_mass_error, InterpolantErrors};
pub use problems::{rotating_wave_exact, rotating_wave_problem, rotating_wave_velocity};
pub use sweep::{
    convergence_sweep, observed_order, run_case, ConvergenceTable, MassComparison, ProblemSettings,
    RunRecord, SweepCase, SweepConfig,
};
