//! Nonlinear 6-DOF fixed-wing airframe: parameters, state, forces and
//! moments, fixed-step integration and a level-flight trim solver.

mod dynamics;
mod params;
mod state;
mod trim;

pub use dynamics::{AeroLoads, AirData, Airframe, ConstantWind, WindProvider, EULER_GUARD};
pub(crate) use params::config_error;
pub use params::{AirframeParams, DragModel, Gammas};
pub use state::{AircraftState, ControlInputs};
pub use trim::{trim_level_flight, TrimPoint, TRIM_TOLERANCE};
