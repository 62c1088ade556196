//! Fixed-step classical Runge-Kutta integration.

use std::ops::{Add, Mul};

/// A state vector that can be combined linearly by the integrator.
pub trait OdeState: Copy + Add<Output = Self> + Mul<f64, Output = Self> {}

impl<T> OdeState for T where T: Copy + Add<Output = T> + Mul<f64, Output = T> {}

/// Advances `x` by one classical RK4 step of size `dt`.
///
/// `f(t, x)` returns the time derivative. A zero step returns `x` unchanged
/// without evaluating `f`.
pub fn rk4_step<S, E, F>(t: f64, x: S, dt: f64, mut f: F) -> Result<S, E>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S, E>,
{
    if dt == 0.0 {
        return Ok(x);
    }
    let half = 0.5 * dt;
    let k1 = f(t, &x)?;
    let k2 = f(t + half, &(x + k1 * half))?;
    let k3 = f(t + half, &(x + k2 * half))?;
    let k4 = f(t + dt, &(x + k3 * dt))?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
}
