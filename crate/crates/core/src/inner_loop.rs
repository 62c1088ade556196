//! Inner loops: pitch-attitude PID to elevator, feedback-free throttle from
//! the propeller thrust model, and a wings-level / heading-hold lateral PD.

use serde::{Deserialize, Serialize};

use crate::airframe::Airframe;

/// Moves `prev` toward `target` by at most `max_rate * dt`.
pub fn slew(prev: f64, target: f64, max_rate: f64, dt: f64) -> f64 {
    let step = max_rate * dt;
    prev + (target - prev).clamp(-step, step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchGains {
    pub k_p: f64,
    pub k_i: f64,
    pub k_d: f64,
    /// Elevator slew limit (rad/s).
    pub slew_rate: f64,
    /// Clamp on the integral accumulator (rad·s).
    pub integral_limit: f64,
}

impl Default for PitchGains {
    fn default() -> Self {
        Self {
            k_p: 4.0,
            k_i: 1.0,
            k_d: 0.8,
            slew_rate: 200f64.to_radians(),
            integral_limit: 0.5,
        }
    }
}

/// `δe = k_p (θ^d − θ) + k_i ∫(θ^d − θ) dt − k_d q` in nose-up-positive
/// units, mapped to the surface through `polarity`.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchPid {
    pub gains: PitchGains,
    /// `+1` when positive deflection pitches the nose up, `-1` otherwise.
    pub polarity: f64,
    pub delta_e_max: f64,
    integral: f64,
    last_error: Option<f64>,
    last_output: Option<f64>,
}

impl PitchPid {
    pub fn new(gains: PitchGains, polarity: f64, delta_e_max: f64) -> Self {
        Self {
            gains,
            polarity: polarity.signum(),
            delta_e_max,
            integral: 0.0,
            last_error: None,
            last_output: None,
        }
    }

    /// Pitch loop for `airframe`, with polarity taken from the sign of the
    /// elevator pitching-moment derivative.
    pub fn for_airframe(gains: PitchGains, airframe: &Airframe) -> Self {
        let p = airframe.params();
        let polarity = if p.c_m_delta_e < 0.0 { -1.0 } else { 1.0 };
        Self::new(gains, polarity, p.delta_e_max)
    }

    /// Preloads the integrator so the loop holds `delta_e` with zero error.
    pub fn reset_to(&mut self, delta_e: f64) {
        self.integral = if self.gains.k_i != 0.0 {
            (self.polarity * delta_e / self.gains.k_i)
                .clamp(-self.gains.integral_limit, self.gains.integral_limit)
        } else {
            0.0
        };
        self.last_error = None;
        self.last_output = Some(delta_e);
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn update(&mut self, theta_d: f64, theta: f64, q: f64, dt: f64) -> f64 {
        let g = &self.gains;
        let error = theta_d - theta;
        let prev = self.last_error.unwrap_or(error);
        let candidate =
            (self.integral + 0.5 * dt * (error + prev)).clamp(-g.integral_limit, g.integral_limit);

        let raw = |integral: f64| self.polarity * (g.k_p * error + g.k_i * integral - g.k_d * q);
        let unsat = raw(candidate);
        let saturated = unsat.abs() > self.delta_e_max;
        // Conditional integration: hold the integrator while saturated and
        // the error pushes further into the limit.
        let winding = saturated && (candidate - self.integral) * unsat.signum() * self.polarity > 0.0;
        if !winding {
            self.integral = candidate;
        }
        let mut out = raw(self.integral).clamp(-self.delta_e_max, self.delta_e_max);
        if let Some(last) = self.last_output {
            out = slew(last, out, g.slew_rate, dt);
        }
        self.last_error = Some(error);
        self.last_output = Some(out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrottleCommand {
    pub delta_t: f64,
    pub saturated: bool,
}

/// `δ_t = √((T^d + k_T2 V_a²) / k_T1)`, clamped to [0, 1]. A negative radicand
/// (braking beyond the windmill limit) returns 0 with the saturation flag.
pub fn throttle_from_thrust(thrust: f64, va: f64, airframe: &Airframe) -> ThrottleCommand {
    let radicand = (thrust + airframe.k_t2() * va * va) / airframe.k_t1();
    if radicand < 0.0 {
        return ThrottleCommand {
            delta_t: 0.0,
            saturated: true,
        };
    }
    let delta_t = radicand.sqrt();
    if delta_t > 1.0 {
        ThrottleCommand {
            delta_t: 1.0,
            saturated: true,
        }
    } else {
        ThrottleCommand {
            delta_t,
            saturated: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LateralGains {
    pub k_p_phi: f64,
    pub k_d_phi: f64,
    /// Heading error to roll command (rad/rad).
    pub k_psi: f64,
    pub phi_max: f64,
    /// Rudder per unit yaw rate.
    pub k_yaw_damper: f64,
}

impl Default for LateralGains {
    fn default() -> Self {
        Self {
            k_p_phi: 1.0,
            k_d_phi: 0.1,
            k_psi: 1.0,
            phi_max: 30f64.to_radians(),
            k_yaw_damper: 0.5,
        }
    }
}

/// Returns `(δa, δr)`.
pub fn lateral_hold(phi: f64, p: f64, psi: f64, psi_cmd: f64, r: f64, gains: &LateralGains) -> (f64, f64) {
    let mut heading_error = psi_cmd - psi;
    heading_error =
        (heading_error + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    let phi_cmd = (gains.k_psi * heading_error).clamp(-gains.phi_max, gains.phi_max);
    let delta_a = gains.k_p_phi * (phi_cmd - phi) - gains.k_d_phi * p;
    let delta_r = gains.k_yaw_damper * r;
    (delta_a, delta_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bare(k_p: f64, k_i: f64, k_d: f64) -> PitchPid {
        PitchPid::new(
            PitchGains {
                k_p,
                k_i,
                k_d,
                slew_rate: f64::INFINITY,
                integral_limit: 10.0,
            },
            1.0,
            45f64.to_radians(),
        )
    }

    #[test]
    fn pitch_pid_examples() {
        assert_eq!(bare(4.0, 1.0, 0.8).update(0.1, 0.1, 0.0, 0.01), 0.0);
        assert!((bare(3.0, 0.0, 0.0).update(0.1, 0.0, 0.0, 0.01) - 0.3).abs() < 1e-15);
        assert!((bare(0.0, 0.0, 1.0).update(0.0, 0.0, 0.2, 0.01) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn integral_is_trapezoidal() {
        let mut pid = bare(0.0, 1.0, 0.0);
        pid.update(0.0, 0.0, 0.0, 0.1);
        let out = pid.update(0.2, 0.0, 0.0, 0.1);
        assert!((out - 0.01).abs() < 1e-15);
        assert!((pid.integral() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn polarity_flips_the_surface() {
        let mut pid = bare(3.0, 0.0, 0.0);
        pid.polarity = -1.0;
        assert!((pid.update(0.1, 0.0, 0.0, 0.01) + 0.3).abs() < 1e-15);
    }

    #[test]
    fn reset_holds_trim_deflection() {
        let mut pid = PitchPid::for_airframe(PitchGains::default(), &Airframe::aerosonde());
        pid.reset_to(-0.05);
        let out = pid.update(0.02, 0.02, 0.0, 0.01);
        assert!((out + 0.05).abs() < 1e-12);
    }

    #[test]
    fn anti_windup_bounds_integral_and_release() {
        let gains = PitchGains {
            k_p: 4.0,
            k_i: 1.0,
            k_d: 0.0,
            slew_rate: 200f64.to_radians(),
            integral_limit: 0.5,
        };
        let dt = 0.01;
        let mut pid = PitchPid::new(gains, 1.0, 45f64.to_radians());
        pid.reset_to(0.0);
        let mut last = 0.0;
        let max_step = gains.slew_rate * dt + 1e-12;
        for _ in 0..1000 {
            let out = pid.update(1.0, 0.0, 0.0, dt);
            assert!(pid.integral().abs() <= gains.integral_limit);
            assert!((out - last).abs() <= max_step);
            last = out;
        }
        assert!((last - 45f64.to_radians()).abs() < 1e-12);
        for _ in 0..300 {
            let out = pid.update(0.0, 0.0, 0.0, dt);
            assert!((out - last).abs() <= max_step);
            last = out;
        }
    }

    #[test]
    fn throttle_inversion_edges() {
        let af = Airframe::aerosonde();
        let va = 30.0;
        let windmill = -af.k_t2() * va * va;
        let c = throttle_from_thrust(windmill, va, &af);
        assert_eq!(c.delta_t, 0.0);
        assert!(!c.saturated);
        let c = throttle_from_thrust(af.k_t1() + windmill, va, &af);
        assert_eq!(c.delta_t, 1.0);
        let c = throttle_from_thrust(windmill - 1.0, va, &af);
        assert_eq!((c.delta_t, c.saturated), (0.0, true));
        let c = throttle_from_thrust(af.k_t1() * 2.0, va, &af);
        assert_eq!((c.delta_t, c.saturated), (1.0, true));
    }

    #[test]
    fn lateral_examples() {
        let g = LateralGains::default();
        assert_eq!(lateral_hold(0.0, 0.0, 0.3, 0.3, 0.0, &g), (0.0, 0.0));
        let g1 = LateralGains { k_p_phi: 1.0, ..g };
        let (da, _) = lateral_hold(0.1, 0.0, 0.0, 0.0, 0.0, &g1);
        assert!((da + 0.1).abs() < 1e-15);
    }

    #[test]
    fn heading_error_wraps() {
        let g = LateralGains::default();
        let (a, _) = lateral_hold(0.0, 0.0, 3.1, -3.1, 0.0, &g);
        let (b, _) = lateral_hold(0.0, 0.0, 0.0, 2.0 * std::f64::consts::PI - 6.2, 0.0, &g);
        assert!((a - b).abs() < 1e-9);
        assert!(a > 0.0);
    }

    proptest! {
        #[test]
        fn thrust_inversion_round_trip(frac in 0.0..=1.0f64, va in 0.0..60.0f64) {
            let af = Airframe::aerosonde();
            let lo = -af.k_t2() * va * va;
            let hi = af.k_t1() + lo;
            let t = lo + frac * (hi - lo);
            let dt = throttle_from_thrust(t, va, &af).delta_t;
            prop_assert!((af.propeller_thrust(dt, va) - t).abs() < 1e-9);
        }
    }
}
