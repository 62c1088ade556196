//! Longitudinal energy-control workbench for fixed-wing MAVs.
//!
//! The crate bundles a nonlinear 6-DOF airframe model, a Dryden gust
//! generator, the energy-state signals used by total energy control, a
//! generic linear extended state observer, the classical TEC law and the
//! LADRC-TEC law with its control allocation, the inner pitch/throttle/lateral
//! loops, and a scenario harness that runs and scores closed-loop experiments.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airframe;
pub mod config;
pub mod energy;
pub mod error;
pub mod eso;
pub mod inner_loop;
pub mod ode;
pub mod sim;
pub mod tec;
pub mod turbulence;

pub use error::{Error, Result};
