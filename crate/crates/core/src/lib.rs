//! Numerical toolkit for a free-boundary tumor growth model with a time delay
//! in cell proliferation.
//!
//! The nutrient is quasi-steady, the tumor is two-dimensional, and cells move
//! by Darcy's law. Proliferation at time `t` depends on the nutrient seen by
//! the same cell at time `t - τ`, which couples the problem to backward
//! characteristics of the velocity field.
//!
//! Modules:
//! - [`bessel`]: modified Bessel functions `I_n` and their identities.
//! - [`stationary`]: the radially symmetric steady state, as a closed-form
//!   leading order, a first-order correction in `τ`, and a full fixed-point
//!   construction.
//! - [`perturbation`]: growth rates and thresholds of boundary modes and the
//!   first-order-in-`τ` mode dynamics.
//! - [`radial_sim`]: a time stepper for the radially symmetric problem with
//!   the delay kept in full.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod error;
pub mod grid;
pub mod perturbation;
pub mod quadrature;
pub mod radial_sim;
pub mod stationary;

pub use error::{Error, Result};
