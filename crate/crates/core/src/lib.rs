//! Dyadic grids, bilinear Calderón–Zygmund operators, multilinear weight
//! characteristics and sparse domination on discretized functions.
//!
//! Everything lives on the base cube `[0,1)^n` (`n ∈ {1,2}`) cut into `2^{nK}`
//! cells; functions are piecewise constant and extended by zero.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calib;
pub mod czo;
pub mod dyadic;
pub mod error;
pub mod gridfn;
pub mod maximal;
pub mod random;
pub mod report;
pub mod sparse;
pub mod verify;
pub mod weights;

pub use calib::{CalibrationConstants, Slacks};
pub use dyadic::{CellBox, DyadicCube, Geometry, Placement};
pub use error::{Error, Result};
pub use gridfn::{GridFunction, Weight};
pub use report::{PointwiseCheck, VerificationReport};
pub use sparse::{DominationConfig, DominationResult, SparseFamily};
