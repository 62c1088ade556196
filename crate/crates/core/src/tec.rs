//! Outer-loop energy controllers.
//!
//! [`TecClassic`] is the classical total energy control law: thrust from the
//! specific energy rate, pitch from the energy-distribution rate, each with a
//! proportional term on the measured rate and an integral term on the rate
//! error. [`LadrcTec`] observes `E` and `B` with one first-order LESO per
//! channel, closes each channel with a proportional law plus disturbance
//! feedforward, and maps the two virtual inputs to throttle and pitch through
//! the inverse of the linearized control-allocation matrix.

use serde::{Deserialize, Serialize};

use crate::airframe::{AirframeParams, TrimPoint};
use crate::energy::EnergySignals;
use crate::error::{Error, Result};
use crate::eso::{lsefc_first_order, Leso, LesoConfig, LesoState};
use crate::inner_loop::slew;

/// Saturation and slew limits shared by both outer loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommandLimits {
    /// |θ^d| bound (rad).
    pub theta_max: f64,
    /// θ^d slew limit (rad/s).
    pub theta_rate: f64,
    /// Throttle slew limit (1/s).
    pub throttle_rate: f64,
}

impl Default for CommandLimits {
    fn default() -> Self {
        Self {
            theta_max: 30f64.to_radians(),
            theta_rate: 60f64.to_radians(),
            throttle_rate: 2.0,
        }
    }
}

/// Outer-loop output. `thrust` is the demanded thrust for the classical law
/// and the model thrust of the commanded throttle for LADRC-TEC.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OuterCommand {
    pub delta_t: f64,
    pub theta: f64,
    pub thrust: f64,
    pub saturated: bool,
}

// ---------------------------------------------------------------------------
// Classical TEC

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TecClassicGains {
    /// Thrust per unit Ė, in units of the weight m·g.
    pub k_ep_mg: f64,
    /// Thrust-integral gain on ΔĖ, in units of m·g per second.
    pub k_ei_mg: f64,
    /// Pitch per unit Ḃ (rad).
    pub k_bp: f64,
    /// Pitch-integral gain on ΔḂ (rad/s).
    pub k_bi: f64,
    /// Clamp on the thrust integrator, in units of m·g.
    pub int_e_limit_mg: f64,
    /// Clamp on the pitch integrator (rad).
    pub int_b_limit: f64,
}

impl Default for TecClassicGains {
    fn default() -> Self {
        Self {
            k_ep_mg: 0.5,
            k_ei_mg: 2.25,
            k_bp: 1.0,
            k_bi: 2.25,
            int_e_limit_mg: 1.0,
            int_b_limit: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TecClassicOutput {
    pub thrust: f64,
    pub theta: f64,
    pub thrust_saturated: bool,
    pub theta_saturated: bool,
}

/// `T^d = T* − k_Ep Ė + ∫k_Ei ΔĖ dt`, `θ^d = −k_Bp Ḃ + ∫k_Bi ΔḂ dt`.
///
/// The proportional terms act on the measured rates and oppose them; the
/// integral terms act on the rate errors. Both integrators use conditional
/// integration while their output is saturated.
#[derive(Debug, Clone, PartialEq)]
pub struct TecClassic {
    pub gains: TecClassicGains,
    weight: f64,
    t_star: f64,
    int_e: f64,
    int_b: f64,
    theta_max: f64,
}

impl TecClassic {
    pub fn new(gains: TecClassicGains, params: &AirframeParams, t_star: f64, theta_max: f64) -> Self {
        Self {
            gains,
            weight: params.m * params.g,
            t_star,
            int_e: 0.0,
            int_b: 0.0,
            theta_max,
        }
    }

    /// Sets the pitch integrator so the law starts at `theta0` with zero rates.
    pub fn reset(&mut self, theta0: f64) {
        self.int_e = 0.0;
        self.int_b = theta0;
    }

    pub fn k_ep(&self) -> f64 {
        self.gains.k_ep_mg * self.weight
    }

    pub fn k_ei(&self) -> f64 {
        self.gains.k_ei_mg * self.weight
    }

    pub fn integrators(&self) -> (f64, f64) {
        (self.int_e, self.int_b)
    }

    /// `thrust_range` is the feasible thrust interval at the current airspeed.
    pub fn update(&mut self, signals: &EnergySignals, thrust_range: (f64, f64), dt: f64) -> TecClassicOutput {
        let g = self.gains;
        let d_e = signals.e_dot_desired - signals.e_dot;
        let d_b = signals.b_dot_desired - signals.b_dot;

        let int_e_limit = g.int_e_limit_mg * self.weight;
        let cand_e = (self.int_e + self.k_ei() * d_e * dt).clamp(-int_e_limit, int_e_limit);
        let base = self.t_star - self.k_ep() * signals.e_dot;
        let thrust_of = |int_e: f64| base + int_e;
        let (lo, hi) = thrust_range;
        let raw = thrust_of(cand_e);
        let thrust_saturated = raw > hi || raw < lo;
        if !(raw > hi && cand_e > self.int_e || raw < lo && cand_e < self.int_e) {
            self.int_e = cand_e;
        }
        let thrust = thrust_of(self.int_e).clamp(lo, hi);

        let cand_b = (self.int_b + g.k_bi * d_b * dt).clamp(-g.int_b_limit, g.int_b_limit);
        let theta_of = |int_b: f64| -g.k_bp * signals.b_dot + int_b;
        let raw = theta_of(cand_b);
        let theta_saturated = raw.abs() > self.theta_max;
        if !(raw > self.theta_max && cand_b > self.int_b || raw < -self.theta_max && cand_b < self.int_b) {
            self.int_b = cand_b;
        }
        let theta = theta_of(self.int_b).clamp(-self.theta_max, self.theta_max);

        TecClassicOutput {
            thrust,
            theta,
            thrust_saturated,
            theta_saturated,
        }
    }
}

// ---------------------------------------------------------------------------
// Control allocation

/// Linearized map from (δ_t, θ) deviations to (b_E u_E, b_B u_B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationMatrix {
    /// Row-major `[[∂Ė/∂δ_t, ∂Ė/∂θ], [∂Ḃ/∂δ_t, ∂Ḃ/∂θ]]`.
    pub a: [[f64; 2]; 2],
    pub inverse: [[f64; 2]; 2],
    pub det: f64,
    pub condition: f64,
    /// `∂V̇/∂θ = −g cos(θ* − α*)`
    pub a1: f64,
    /// `∂V̇/∂δ_t = 2 k_T1 δ_t* / m`
    pub a2: f64,
    /// `∂V̇/∂V_a = −(ρ S C_D V* + 2 k_T2 V*) / m`, not used by the allocation.
    pub a3: f64,
}

impl AllocationMatrix {
    pub const SINGULAR_DET: f64 = 1e-6;
    pub const DEFAULT_CONDITION_BOUND: f64 = 1e4;

    pub fn from_matrix(a: [[f64; 2]; 2], condition_bound: f64) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if !(det.abs() >= Self::SINGULAR_DET) {
            return Err(Error::SingularAllocation { det });
        }
        let inverse = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let condition = condition_number(&a);
        if !(condition <= condition_bound) {
            return Err(Error::IllConditionedAllocation {
                cond: condition,
                bound: condition_bound,
            });
        }
        Ok(Self {
            a,
            inverse,
            det,
            condition,
            a1: f64::NAN,
            a2: f64::NAN,
            a3: f64::NAN,
        })
    }

    /// `(b_E u_E, b_B u_B) = A (δ_t − δ_t*, θ − θ*)`
    pub fn apply(&self, deviation: [f64; 2]) -> [f64; 2] {
        mul(&self.a, deviation)
    }

    /// `(δ_t − δ_t*, θ − θ*) = A⁻¹ (b_E u_E, b_B u_B)`
    pub fn solve(&self, virtual_input: [f64; 2]) -> [f64; 2] {
        mul(&self.inverse, virtual_input)
    }
}

fn mul(m: &[[f64; 2]; 2], x: [f64; 2]) -> [f64; 2] {
    [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
}

/// 2-norm condition number from the singular values of a 2×2 matrix.
fn condition_number(a: &[[f64; 2]; 2]) -> f64 {
    let frob2 = a.iter().flatten().map(|x| x * x).sum::<f64>();
    let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).abs();
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let s_max = (0.5 * (frob2 + disc)).sqrt();
    let s_min2 = 0.5 * (frob2 - disc);
    if s_min2 <= 0.0 {
        return f64::INFINITY;
    }
    // s_max * s_min = det gives a better-conditioned s_min.
    s_max / (det / s_max)
}

/// Builds the allocation matrix at `trim`. The throttle column is
/// `(a₂/g, −a₂/g)` and the pitch column `(a₁/g + 1, −a₁/g + 1)`.
pub fn allocation_matrix(trim: &TrimPoint, params: &AirframeParams) -> Result<AllocationMatrix> {
    let g = params.g;
    let a1 = -g * (trim.theta - trim.alpha).cos();
    let a2 = 2.0 * params.k_t1() * trim.delta_t / params.m;
    let a3 = -(params.rho * params.s * trim.c_d * trim.va + 2.0 * params.k_t2() * trim.va) / params.m;
    let throttle = a2 / g;
    let a = [[throttle, a1 / g + 1.0], [-throttle, -a1 / g + 1.0]];
    let mut alloc = AllocationMatrix::from_matrix(a, AllocationMatrix::DEFAULT_CONDITION_BOUND)?;
    alloc.a1 = a1;
    alloc.a2 = a2;
    alloc.a3 = a3;
    Ok(alloc)
}

// ---------------------------------------------------------------------------
// LADRC-TEC

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadrcTecGains {
    pub k_e: f64,
    pub k_b: f64,
    pub b_e: f64,
    pub b_b: f64,
    /// Observer bandwidths (rad/s).
    pub omega_e: f64,
    pub omega_b: f64,
    /// Disturbance feedforward `−f̂/b`. Off reduces each channel to a
    /// proportional law on the observed energy.
    pub feedforward: bool,
    pub observer_pitch: ObserverPitch,
}

/// Pitch deviation the observers are told was applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverPitch {
    /// The pitch attitude reached by the inner loop. Keeps the pitch-loop lag
    /// out of `f_B`.
    Measured,
    /// The outer-loop pitch command.
    Command,
}

impl Default for LadrcTecGains {
    fn default() -> Self {
        Self {
            k_e: 4.0,
            k_b: 1.5,
            b_e: 1.0,
            b_b: 1.0,
            omega_e: 30.0,
            omega_b: 30.0,
            feedforward: true,
            observer_pitch: ObserverPitch::Measured,
        }
    }
}

/// Observer internals exported with each command.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LadrcEstimates {
    pub e_hat: f64,
    pub f_e_hat: f64,
    pub b_hat: f64,
    pub f_b_hat: f64,
    /// `b_E u_E`, `b_B u_B` after saturation.
    pub virtual_e: f64,
    pub virtual_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadrcTec {
    pub gains: LadrcTecGains,
    alloc: AllocationMatrix,
    trim_delta_t: f64,
    trim_theta: f64,
    limits: CommandLimits,
    leso_e: Leso,
    leso_b: Leso,
    /// Virtual inputs applied over the last step.
    applied: [f64; 2],
    last_command: Option<[f64; 2]>,
}

impl LadrcTec {
    pub fn new(
        gains: LadrcTecGains,
        alloc: AllocationMatrix,
        trim: &TrimPoint,
        limits: CommandLimits,
        dt: f64,
    ) -> Result<Self> {
        let leso_e = Leso::new(LesoConfig::new(1, gains.b_e, gains.omega_e, dt))?;
        let leso_b = Leso::new(LesoConfig::new(1, gains.b_b, gains.omega_b, dt))?;
        let mut c = Self {
            gains,
            alloc,
            trim_delta_t: trim.delta_t,
            trim_theta: trim.theta,
            limits,
            leso_e,
            leso_b,
            applied: [0.0; 2],
            last_command: None,
        };
        c.reset(0.0, 0.0);
        Ok(c)
    }

    /// Resets both observers together at the measured `(E, B)`.
    pub fn reset(&mut self, e: f64, b: f64) {
        self.leso_e.reset(LesoState::at_output(1, e));
        self.leso_b.reset(LesoState::at_output(1, b));
        self.applied = [0.0; 2];
        self.last_command = None;
    }

    pub fn allocation(&self) -> &AllocationMatrix {
        &self.alloc
    }

    pub fn estimates(&self) -> LadrcEstimates {
        let (e, b) = (self.leso_e.state(), self.leso_b.state());
        LadrcEstimates {
            e_hat: e.output(),
            f_e_hat: e.disturbance(),
            b_hat: b.output(),
            f_b_hat: b.disturbance(),
            virtual_e: self.applied[0],
            virtual_b: self.applied[1],
        }
    }

    /// Observer update with the measured `(E, B)`, proportional law with
    /// disturbance feedforward per channel, then allocation through `A⁻¹`.
    /// `theta` is the measured pitch attitude. Returns absolute throttle and
    /// pitch commands.
    pub fn update(
        &mut self,
        signals: &EnergySignals,
        theta: f64,
        dt: f64,
    ) -> Result<(OuterCommand, LadrcEstimates)> {
        let g = self.gains;
        if let (ObserverPitch::Measured, Some([delta_t, _])) = (g.observer_pitch, self.last_command) {
            self.applied = self
                .alloc
                .apply([delta_t - self.trim_delta_t, theta - self.trim_theta]);
        }
        // Observers see the b·u actually applied; b·u is what A produces, so
        // the channel input is b·u / b.
        let e_state = self.leso_e.update(self.applied[0] / g.b_e, signals.e)?.clone();
        let b_state = self.leso_b.update(self.applied[1] / g.b_b, signals.b)?.clone();

        let ff = |f: f64| if g.feedforward { f } else { 0.0 };
        let u_e = lsefc_first_order(
            signals.e_desired,
            e_state.output(),
            ff(e_state.disturbance()),
            g.k_e,
            g.b_e,
        )?;
        let u_b = lsefc_first_order(
            signals.b_desired,
            b_state.output(),
            ff(b_state.disturbance()),
            g.k_b,
            g.b_b,
        )?;
        let deviation = self.alloc.solve([g.b_e * u_e, g.b_b * u_b]);

        let mut delta_t = (self.trim_delta_t + deviation[0]).clamp(0.0, 1.0);
        let mut theta = (self.trim_theta + deviation[1]).clamp(-self.limits.theta_max, self.limits.theta_max);
        let mut saturated =
            delta_t != self.trim_delta_t + deviation[0] || theta != self.trim_theta + deviation[1];
        if let Some([last_t, last_theta]) = self.last_command {
            let limited_t = slew(last_t, delta_t, self.limits.throttle_rate, dt);
            let limited_theta = slew(last_theta, theta, self.limits.theta_rate, dt);
            saturated |= limited_t != delta_t || limited_theta != theta;
            delta_t = limited_t;
            theta = limited_theta;
        }
        self.last_command = Some([delta_t, theta]);
        self.applied = self
            .alloc
            .apply([delta_t - self.trim_delta_t, theta - self.trim_theta]);

        let cmd = OuterCommand {
            delta_t,
            theta,
            thrust: f64::NAN,
            saturated,
        };
        Ok((cmd, self.estimates()))
    }
}
