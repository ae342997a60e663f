//! Nearly-conservative Lagrange-Galerkin BDF schemes for conservative
//! advection-diffusion on rectangles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod scalar;
pub mod scheme;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::{Point2, Real};

pub type Mesh64 = geometry::Mesh<f64>;
pub type Space64 = fem::LagrangeSpace<f64>;
pub type Field64 = fem::ScalarField<f64>;
pub type Velocity64 = characteristics::VelocityField<f64>;
pub type Problem64 = scheme::Problem<f64>;
pub type Config64 = scheme::SchemeConfig<f64>;

pub type Mesh32 = geometry::Mesh<f32>;
pub type Space32 = fem::LagrangeSpace<f32>;
pub type Field32 = fem::ScalarField<f32>;
pub type Velocity32 = characteristics::VelocityField<f32>;
pub type Problem32 = scheme::Problem<f32>;
pub type Config32 = scheme::SchemeConfig<f32>;
