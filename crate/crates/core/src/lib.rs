//! Virtual element solver for the planar quad-curl problem through a Hodge decomposition.

pub mod basis;
pub mod element;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod hodge;
pub mod mesh;
pub mod metrics;
pub mod quadrature;
pub mod scalar;
pub mod sparse;

pub use error::{Result, VemError};
pub use geometry::Point2;
