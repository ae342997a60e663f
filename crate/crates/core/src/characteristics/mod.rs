//! Characteristic tracing, interpolated feet and Jacobian factors.

mod feet;
mod trace;
mod velocity;

pub use feet::{build_feet, build_feet_data, interpolated_foot, jacobian_tilde, FeetData};
pub use trace::{rk_step, trace_nodes, NodeTrajectories, RkConfig, RkOrder, StepSchedule};
pub use velocity::VelocityField;
