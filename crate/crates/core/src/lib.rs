//! Numerical potential theory on `ℝ^d`: Riesz kernels and potentials, Green's
//! functions of balls, subharmonic fields, balayage of measures, the duality
//! between Jensen-type measures and their potentials, and zero distributions of
//! holomorphic functions.

pub mod balayage;
pub mod duality;
pub mod error;
pub mod extreal;
pub mod fields;
pub mod geometry;
pub mod green;
pub mod kernels;
pub mod measures;
pub mod potentials;
pub mod quadrature;
pub mod zeros;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use fields::{ScalarField, Smoothness};
pub use geometry::{Domain, ExtPoint, GridDomain, Point};
pub use kernels::KernelConfig;
pub use measures::{Component, Measure};
