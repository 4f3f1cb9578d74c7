//! Construction and numerical verification of self-similar mass and energy
//! fields for the supercritical defocusing nonlinear wave system.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bump;
pub mod cli;
pub mod cone;
pub mod construct;
pub mod error;
pub mod io;
pub mod jet;
pub mod params;
pub mod quad;
pub mod smooth;
pub mod verify;

pub use error::{ForgeError, Result};
pub use params::{Params, Tolerances};
