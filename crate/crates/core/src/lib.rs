//! Generalized Ricci flow on circle-invariant geometries and T-duality.

// Index loops mirror the tensor formulas; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod base_geometry;
pub mod charts;
pub mod circle_bundle;
pub mod courant;
pub mod error;
pub mod fixtures;
pub mod flow_ode;
pub mod jet;
pub mod oracle;
pub mod tduality;
pub mod tensor_point;
pub mod verify;

pub use error::{GeomError, Result};
