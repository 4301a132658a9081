//! Projector characterizations of higher-order quantum transformations.
//!
//! Operators carry labeled subsystems. Sets of quantum objects are described by a
//! projector, a trace value and a positivity flag; transformations between such
//! sets are characterized by new projectors built from the old ones.

pub mod causality;
pub mod choi;
pub mod dsl;
pub mod error;
pub mod export;
pub mod format;
pub mod objects;
pub mod operator;
pub mod par;
pub mod projmap;
pub mod rational;
pub mod sampling;
pub mod space;
pub mod transforms;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use operator::{Operator, C64};
pub use space::{CompositeSpace, Label};
