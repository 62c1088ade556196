use serde::{Deserialize, Serialize};

use super::dynamics::Airframe;
use super::state::{AircraftState, ControlInputs};
use crate::error::{Error, Result};

/// Convergence threshold on the (u̇, ẇ, q̇) residual norm.
pub const TRIM_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 50;

/// Wings-level, constant-altitude equilibrium (flight-path angle zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimPoint {
    pub va: f64,
    pub h: f64,
    pub alpha: f64,
    pub theta: f64,
    pub delta_e: f64,
    pub delta_t: f64,
    pub thrust: f64,
    pub drag: f64,
    pub lift: f64,
    /// Effective drag coefficient `D / (q̄ S)` at trim.
    pub c_d: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl TrimPoint {
    pub fn state(&self) -> AircraftState {
        level_state(self.va, self.h, self.alpha)
    }

    pub fn inputs(&self) -> ControlInputs {
        ControlInputs {
            delta_e: self.delta_e,
            delta_t: self.delta_t,
            ..Default::default()
        }
    }
}

fn level_state(va: f64, h: f64, alpha: f64) -> AircraftState {
    let (sa, ca) = alpha.sin_cos();
    AircraftState {
        h,
        u: va * ca,
        w: va * sa,
        theta: alpha,
        ..Default::default()
    }
}

fn residual(af: &Airframe, va: f64, h: f64, x: [f64; 3]) -> Result<[f64; 3]> {
    let state = level_state(va, h, x[0]);
    let inputs = ControlInputs {
        delta_e: x[1],
        delta_t: x[2],
        ..Default::default()
    };
    let d = af.state_derivative(&state, &inputs, [0.0; 3])?;
    Ok([d.u, d.w, d.q])
}

fn norm(r: &[f64; 3]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Solves `m x = b` by Cramer's rule.
fn solve3(m: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let det = det3(m);
    if det.abs() < 1e-14 {
        return None;
    }
    Some(std::array::from_fn(|col| {
        let mut mc = *m;
        for row in 0..3 {
            mc[row][col] = b[row];
        }
        det3(&mc) / det
    }))
}

/// Solves for (alpha, delta_e, delta_t) that zero u̇, ẇ and q̇ with theta =
/// alpha, using Newton iterations on a central-difference Jacobian. The
/// throttle is treated as unbounded during the solve; a solution outside
/// (0, 1) is reported as infeasible.
pub fn trim_level_flight(va: f64, h: f64, airframe: &Airframe) -> Result<TrimPoint> {
    if !(va.is_finite() && va > 0.0) {
        return Err(Error::invalid(
            "va",
            format!("trim airspeed must be positive, got {va}"),
        ));
    }
    let mut iterations = 0;
    // A Newton iterate that leaves the model domain (Euler guard, stalled
    // air data) is a failure to trim, not a fault of the model.
    let eval = |x: [f64; 3], iterations: usize| {
        residual(airframe, va, h, x).map_err(|e| Error::TrimNoConvergence {
            iterations,
            residual: f64::NAN,
            reason: format!("iterate left the model domain: {e}"),
        })
    };
    let mut x = [0.02, 0.0, 0.5];
    let mut r = eval(x, iterations)?;
    while norm(&r) > TRIM_TOLERANCE {
        if iterations == MAX_ITERATIONS {
            return Err(Error::TrimNoConvergence {
                iterations,
                residual: norm(&r),
                reason: "Newton iteration limit reached".into(),
            });
        }
        let mut jac = [[0.0; 3]; 3];
        for col in 0..3 {
            let step = 1e-6;
            let (mut xp, mut xm) = (x, x);
            xp[col] += step;
            xm[col] -= step;
            let rp = eval(xp, iterations)?;
            let rm = eval(xm, iterations)?;
            for row in 0..3 {
                jac[row][col] = (rp[row] - rm[row]) / (2.0 * step);
            }
        }
        let dx = solve3(&jac, &r.map(|v| -v)).ok_or_else(|| Error::TrimNoConvergence {
            iterations,
            residual: norm(&r),
            reason: "singular trim Jacobian".into(),
        })?;
        for i in 0..3 {
            x[i] += dx[i];
        }
        iterations += 1;
        r = eval(x, iterations)?;
    }

    let [alpha, delta_e, delta_t] = x;
    if !(delta_t > 0.0 && delta_t < 1.0) {
        return Err(Error::TrimNoConvergence {
            iterations,
            residual: norm(&r),
            reason: format!("required throttle {delta_t:.4} is outside (0, 1)"),
        });
    }
    if delta_e.abs() > airframe.params().delta_e_max || alpha.abs() > 0.5 {
        return Err(Error::TrimNoConvergence {
            iterations,
            residual: norm(&r),
            reason: format!("trim outside envelope (alpha {alpha:.4}, delta_e {delta_e:.4})"),
        });
    }

    let state = level_state(va, h, alpha);
    let inputs = ControlInputs {
        delta_e,
        delta_t,
        ..Default::default()
    };
    let loads = airframe.aero_forces_moments(&state, [0.0; 3], &inputs)?;
    let p = airframe.params();
    let qbar_s = 0.5 * p.rho * va * va * p.s;
    Ok(TrimPoint {
        va,
        h,
        alpha,
        theta: alpha,
        delta_e,
        delta_t,
        thrust: airframe.propeller_thrust(delta_t, va),
        drag: loads.drag,
        lift: loads.lift,
        c_d: loads.drag / qbar_s,
        residual: norm(&r),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aerosonde_trim_at_cruise() {
        let af = Airframe::aerosonde();
        let trim = trim_level_flight(35.0, 100.0, &af).unwrap();
        assert_eq!(trim.theta, trim.alpha);
        assert!(trim.residual < 1e-8);
        assert!(trim.delta_t > 0.0 && trim.delta_t < 1.0);
        let p = af.params();
        let a_e2 = 2.0 * af.k_t1() * trim.delta_t / (p.m * p.g);
        assert!((a_e2 - 5.7639).abs() / 5.7639 <= 0.10, "a_e2 = {a_e2}");
    }

    #[test]
    fn trim_state_is_an_equilibrium() {
        let af = Airframe::aerosonde();
        let trim = trim_level_flight(35.0, 100.0, &af).unwrap();
        let d = af
            .state_derivative(&trim.state(), &trim.inputs(), [0.0; 3])
            .unwrap();
        let mut arr = d.to_array();
        arr[0] = 0.0;
        arr[1] = 0.0;
        let n = arr.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(n < 1e-6, "derivative norm {n}");
    }

    #[test]
    fn thrust_balances_drag_and_lift_balances_weight() {
        let af = Airframe::aerosonde();
        let trim = trim_level_flight(35.0, 100.0, &af).unwrap();
        let p = af.params();
        // theta = alpha: thrust along body x, so T cos(alpha) = D and
        // L + T sin(alpha) = m g.
        assert!((trim.thrust * trim.alpha.cos() - trim.drag).abs() < 1e-6);
        assert!((trim.lift - p.m * p.g).abs() / (p.m * p.g) < 0.01);
    }

    #[test]
    fn infeasible_airspeed_fails() {
        let af = Airframe::aerosonde();
        assert!(matches!(
            trim_level_flight(90.0, 100.0, &af),
            Err(Error::TrimNoConvergence { .. })
        ));
        assert!(trim_level_flight(-1.0, 100.0, &af).is_err());
    }
}
