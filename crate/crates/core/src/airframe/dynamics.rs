use std::f64::consts::FRAC_PI_2;

use super::params::{AirframeParams, DragModel, Gammas};
use super::state::{AircraftState, ControlInputs};
use crate::error::{Error, Result};
use crate::ode::rk4_step;

/// Distance from ±pi/2 at which pitch is treated as singular (rad).
pub const EULER_GUARD: f64 = 0.01;

/// Below this airspeed the aerodynamic loads are taken as zero.
const AIRSPEED_EPS: f64 = 1e-9;

/// Source of body-frame wind velocity during an integration step.
pub trait WindProvider {
    fn body_wind(&self, t: f64, state: &AircraftState) -> [f64; 3];
}

/// Wind that is constant over the step (gusts are sample-and-hold).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConstantWind(pub [f64; 3]);

impl WindProvider for ConstantWind {
    fn body_wind(&self, _t: f64, _state: &AircraftState) -> [f64; 3] {
        self.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AirData {
    pub va: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Aerodynamic loads in body axes, plus the wind-axis lift and drag they were
/// built from.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AeroLoads {
    pub force: [f64; 3],
    pub moment: [f64; 3],
    pub lift: f64,
    pub drag: f64,
    pub air: AirData,
}

/// Validated airframe with cached derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Airframe {
    params: AirframeParams,
    gammas: Gammas,
    drag: DragModel,
    k_t1: f64,
    k_t2: f64,
}

impl Airframe {
    pub fn new(params: AirframeParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            gammas: params.gammas(),
            drag: params.drag_model(),
            k_t1: params.k_t1(),
            k_t2: params.k_t2(),
            params,
        })
    }

    pub fn aerosonde() -> Self {
        Self::new(AirframeParams::aerosonde()).expect("built-in parameters are valid")
    }

    pub fn params(&self) -> &AirframeParams {
        &self.params
    }

    pub fn gammas(&self) -> &Gammas {
        &self.gammas
    }

    pub fn k_t1(&self) -> f64 {
        self.k_t1
    }

    pub fn k_t2(&self) -> f64 {
        self.k_t2
    }

    /// `T = k_T1 delta_t² - k_T2 V_a²`. Negative values are windmilling drag.
    pub fn propeller_thrust(&self, delta_t: f64, va: f64) -> f64 {
        self.k_t1 * delta_t * delta_t - self.k_t2 * va * va
    }

    pub fn lift_coefficient(&self, alpha: f64, q_hat: f64, delta_e: f64) -> f64 {
        let p = &self.params;
        p.c_l0 + p.c_l_alpha * alpha + p.c_l_q * q_hat + p.c_l_delta_e * delta_e
    }

    pub fn drag_coefficient(&self, alpha: f64, q_hat: f64, delta_e: f64) -> f64 {
        let p = &self.params;
        let static_part = match self.drag {
            DragModel::Linear { c_d0, c_d_alpha } => c_d0 + c_d_alpha * alpha,
            DragModel::Induced { c_d_p, k_induced } => {
                let c_l = p.c_l0 + p.c_l_alpha * alpha;
                c_d_p + k_induced * c_l * c_l
            }
        };
        static_part + p.c_d_q * q_hat + p.c_d_delta_e * delta_e
    }

    pub fn pitch_moment_coefficient(&self, alpha: f64, q_hat: f64, delta_e: f64) -> f64 {
        let p = &self.params;
        p.c_m0 + p.c_m_alpha * alpha + p.c_m_q * q_hat + p.c_m_delta_e * delta_e
    }

    pub fn air_data(&self, state: &AircraftState, wind: [f64; 3]) -> AirData {
        let [ur, vr, wr] = state.air_relative(wind);
        let va = (ur * ur + vr * vr + wr * wr).sqrt();
        if va < AIRSPEED_EPS {
            return AirData::default();
        }
        AirData {
            va,
            alpha: wr.atan2(ur),
            beta: (vr / va).clamp(-1.0, 1.0).asin(),
        }
    }

    /// Body-axis aerodynamic force (N) and moment (N·m). Zero at zero airspeed.
    pub fn aero_forces_moments(
        &self,
        state: &AircraftState,
        wind: [f64; 3],
        inputs: &ControlInputs,
    ) -> Result<AeroLoads> {
        let air = self.air_data(state, wind);
        if air.va < AIRSPEED_EPS {
            return Ok(AeroLoads::default());
        }
        if !air.alpha.is_finite() || !air.beta.is_finite() {
            return Err(Error::DegenerateState(format!(
                "angle of attack undefined at V_a = {}",
                air.va
            )));
        }
        let p = &self.params;
        let AirData { va, alpha, beta } = air;
        let qbar_s = 0.5 * p.rho * va * va * p.s;
        let c_over_2v = p.c_chord / (2.0 * va);
        let b_over_2v = p.b_span / (2.0 * va);
        let q_hat = state.q * c_over_2v;

        let lift = qbar_s * self.lift_coefficient(alpha, q_hat, inputs.delta_e);
        let drag = qbar_s * self.drag_coefficient(alpha, q_hat, inputs.delta_e);
        let (sa, ca) = alpha.sin_cos();
        let fx = lift * sa - drag * ca;
        let fz = -lift * ca - drag * sa;

        let p_hat = state.p * b_over_2v;
        let r_hat = state.r * b_over_2v;
        let fy = qbar_s
            * (p.c_y0
                + p.c_y_beta * beta
                + p.c_y_p * p_hat
                + p.c_y_r * r_hat
                + p.c_y_delta_a * inputs.delta_a
                + p.c_y_delta_r * inputs.delta_r);
        let roll = qbar_s
            * p.b_span
            * (p.c_ell0
                + p.c_ell_beta * beta
                + p.c_ell_p * p_hat
                + p.c_ell_r * r_hat
                + p.c_ell_delta_a * inputs.delta_a
                + p.c_ell_delta_r * inputs.delta_r);
        let pitch = qbar_s * p.c_chord * self.pitch_moment_coefficient(alpha, q_hat, inputs.delta_e);
        let yaw = qbar_s
            * p.b_span
            * (p.c_n0
                + p.c_n_beta * beta
                + p.c_n_p * p_hat
                + p.c_n_r * r_hat
                + p.c_n_delta_a * inputs.delta_a
                + p.c_n_delta_r * inputs.delta_r);

        Ok(AeroLoads {
            force: [fx, fy, fz],
            moment: [roll, pitch, yaw],
            lift,
            drag,
            air,
        })
    }

    pub fn check_attitude(state: &AircraftState) -> Result<()> {
        if !state.theta.is_finite() || state.theta.abs() >= FRAC_PI_2 - EULER_GUARD {
            return Err(Error::EulerSingularity { theta: state.theta });
        }
        Ok(())
    }

    /// Full 12-state time derivative (north/east/altitude kinematics, body
    /// translational and rotational dynamics, Euler-angle kinematics).
    pub fn state_derivative(
        &self,
        state: &AircraftState,
        inputs: &ControlInputs,
        wind: [f64; 3],
    ) -> Result<AircraftState> {
        Self::check_attitude(state)?;
        let p = &self.params;
        let loads = self.aero_forces_moments(state, wind, inputs)?;
        let thrust = self.propeller_thrust(inputs.delta_t, loads.air.va);

        let AircraftState {
            u,
            v,
            w,
            phi,
            theta,
            psi,
            p: pr,
            q,
            r,
            ..
        } = *state;
        let (sphi, cphi) = phi.sin_cos();
        let (sth, cth) = theta.sin_cos();
        let (spsi, cpsi) = psi.sin_cos();
        let tth = sth / cth;

        let north =
            cth * cpsi * u + (sphi * sth * cpsi - cphi * spsi) * v + (cphi * sth * cpsi + sphi * spsi) * w;
        let east =
            cth * spsi * u + (sphi * sth * spsi + cphi * cpsi) * v + (cphi * sth * spsi - sphi * cpsi) * w;
        let h = u * sth - v * sphi * cth - w * cphi * cth;

        let [fx, fy, fz] = loads.force;
        let u_dot = r * v - q * w - p.g * sth + (fx + thrust) / p.m;
        let v_dot = pr * w - r * u + p.g * cth * sphi + fy / p.m;
        let w_dot = q * u - pr * v + p.g * cth * cphi + fz / p.m;

        let phi_dot = pr + (q * sphi + r * cphi) * tth;
        let theta_dot = q * cphi - r * sphi;
        let psi_dot = (q * sphi + r * cphi) / cth;

        let g = &self.gammas;
        let [l_moment, m_moment, n_moment] = loads.moment;
        let p_dot = g.g1 * pr * q - g.g2 * q * r + g.g3 * l_moment + g.g4 * n_moment;
        let q_dot = g.g5 * pr * r - g.g6 * (pr * pr - r * r) + m_moment / p.jy;
        let r_dot = g.g7 * pr * q - g.g1 * q * r + g.g4 * l_moment + g.g8 * n_moment;

        Ok(AircraftState {
            north,
            east,
            h,
            u: u_dot,
            v: v_dot,
            w: w_dot,
            phi: phi_dot,
            theta: theta_dot,
            psi: psi_dot,
            p: p_dot,
            q: q_dot,
            r: r_dot,
        })
    }

    /// One classical RK4 step with inputs held over the step.
    pub fn step_rk4<W: WindProvider + ?Sized>(
        &self,
        state: &AircraftState,
        inputs: &ControlInputs,
        wind: &W,
        t: f64,
        dt: f64,
    ) -> Result<AircraftState> {
        if !(dt >= 0.0) {
            return Err(Error::invalid("dt", format!("must be non-negative, got {dt}")));
        }
        let next = rk4_step(t, *state, dt, |t, x| {
            self.state_derivative(x, inputs, wind.body_wind(t, x))
        })?;
        Self::check_attitude(&next)?;
        Ok(next)
    }
}
