//! Iso-parametric finite elements for two-phase Stokes flow driven by surface
//! tension on a moving fitted mesh.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod femspace;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod reference;
pub mod scheme;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use geometry::{InterfaceDescriptor, Point, Shape};
