//! Closed-loop scenario execution.
//!
//! Each control step: air data and energy rates from the current state with
//! the inputs held over the previous step, guidance demands, outer loop,
//! inner loops, one sample recorded, one RK4 step of the airframe with the
//! new inputs and the current gust held.

mod compare;
mod metrics;
mod series;

pub use compare::{
    compared_metrics, run_comparison, run_comparison_pair, run_sweep, seed_list, CompareReport, Comparison,
    ControllerRuns, FaultRecord, RunRecord, SeedOutcome, SweepReport, COMPARE_SCHEMA, METRICS_SCHEMA,
    SWEEP_SCHEMA,
};
pub use metrics::{compute_metrics, MetricSpec, Metrics, Response, SETTLING_BAND};
pub use series::{format_value, quantize, Sample, Series, COLUMNS};

use crate::airframe::{trim_level_flight, AircraftState, Airframe, ConstantWind, ControlInputs, TrimPoint};
use crate::config::{ControllerKind, RunConfig, ScenarioKind};
use crate::energy::{desired_rates, energy_rates, total_energy, EnergyRates, EnergySignals};
use crate::error::{Error, Result};
use crate::inner_loop::{lateral_hold, slew, throttle_from_thrust, PitchPid};
use crate::tec::{allocation_matrix, AllocationMatrix, LadrcTec, TecClassic};
use crate::turbulence::build_dryden;

/// Output of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub controller: ControllerKind,
    pub seed: u64,
    pub trim: TrimPoint,
    pub allocation: AllocationMatrix,
    pub spec: MetricSpec,
    pub series: Series,
    pub metrics: Metrics,
}

/// Metric settings implied by a configuration and its trim point.
pub fn metric_spec(cfg: &RunConfig, trim: &TrimPoint) -> MetricSpec {
    let sc = &cfg.scenario;
    let (response, initial, step) = match sc.kind {
        ScenarioKind::AltitudeStep => (Response::Altitude, sc.h, sc.step),
        ScenarioKind::AirspeedStep => (Response::Airspeed, sc.va, sc.step),
        ScenarioKind::TurbulenceOnset | ScenarioKind::Hold => (Response::Altitude, sc.h, 0.0),
    };
    MetricSpec {
        response,
        initial,
        step,
        step_time: sc.step_time,
        duration: sc.duration,
        window_start: sc.window_start(),
        nominal_delta_e: trim.delta_e,
        nominal_delta_t: trim.delta_t,
    }
}

enum Outer {
    Classic { tec: TecClassic, last: [f64; 2] },
    Ladrc(Box<LadrcTec>),
}

/// Runs `cfg` with the given controller and seed.
pub fn run_scenario(cfg: &RunConfig, controller: ControllerKind, seed: u64) -> Result<ScenarioResult> {
    cfg.validate()?;
    let sc = &cfg.scenario;
    let airframe = Airframe::new(cfg.airframe.clone())?;
    let params = airframe.params();
    let (m, g) = (params.m, params.g);
    let trim = trim_level_flight(sc.va, sc.h, &airframe).map_err(|e| e.at_time(0.0))?;
    let allocation = allocation_matrix(&trim, params).map_err(|e| e.at_time(0.0))?;
    let limits = cfg.controller.limits;
    let dt = sc.dt;

    let mut outer = match controller {
        ControllerKind::TecClassic => {
            let mut tec = TecClassic::new(cfg.controller.tec, params, trim.thrust, limits.theta_max);
            tec.reset(trim.theta);
            Outer::Classic {
                tec,
                last: [trim.delta_t, trim.theta],
            }
        }
        ControllerKind::LadrcTec => Outer::Ladrc(Box::new(
            LadrcTec::new(cfg.controller.ladrc, allocation, &trim, limits, dt).map_err(|e| e.at_time(0.0))?,
        )),
    };
    let mut pitch = PitchPid::for_airframe(cfg.inner_loop.pitch, &airframe);
    pitch.reset_to(trim.delta_e);
    let lateral = cfg.inner_loop.lateral;

    let mut dryden = match sc.kind {
        ScenarioKind::TurbulenceOnset => Some(build_dryden(cfg.turbulence, dt, seed)?),
        _ => None,
    };

    let steps = (sc.duration / dt).round() as usize;
    let onset_step = (sc.onset / dt).round() as usize;
    let command_step = (sc.step_time / dt).round() as usize;
    let mut state: AircraftState = trim.state();
    let mut inputs: ControlInputs = trim.inputs();
    let psi_cmd = state.psi;
    let mut signals = EnergySignals::default();
    let mut samples = Vec::with_capacity(steps + 1);

    for k in 0..=steps {
        let t = k as f64 * dt;
        let fault = |e: Error| e.at_time(t);

        let gust = match dryden.as_mut() {
            Some(d) if k >= onset_step => d.step_gust(),
            _ => (0.0, 0.0),
        };
        let wind = [gust.0, 0.0, gust.1];

        let (h_cmd, va_cmd) = if k >= command_step {
            match sc.kind {
                ScenarioKind::AltitudeStep => (sc.h + sc.step, sc.va),
                ScenarioKind::AirspeedStep => (sc.h, sc.va + sc.step),
                _ => (sc.h, sc.va),
            }
        } else {
            (sc.h, sc.va)
        };

        // Measurements with the inputs held over the previous step.
        let loads = airframe
            .aero_forces_moments(&state, wind, &inputs)
            .map_err(fault)?;
        let va = loads.air.va;
        let thrust = airframe.propeller_thrust(inputs.delta_t, va);
        let deriv = airframe.state_derivative(&state, &inputs, wind).map_err(fault)?;
        let rel = state.air_relative(wind);
        let va_dot = (rel[0] * deriv.u + rel[1] * deriv.v + rel[2] * deriv.w) / va;
        let measured = energy_rates(va_dot, deriv.h, va, g).map_err(fault)?;
        let desired = desired_rates(va_cmd, h_cmd, va, state.h, &cfg.guidance, g).map_err(fault)?;
        let desired = EnergyRates {
            e_dot: desired.e_dot,
            b_dot: desired.b_dot,
        };
        let e_total = total_energy(m, va, state.h, g);
        signals = if k == 0 {
            EnergySignals::start(e_total, measured, desired)
        } else {
            signals.integrate(e_total, measured, desired, dt)
        };

        let mut saturated = false;
        let (delta_t, theta_cmd, est) = match &mut outer {
            Outer::Classic { tec, last } => {
                let lo = -airframe.k_t2() * va * va;
                let range = (lo, airframe.k_t1() + lo);
                let out = tec.update(&signals, range, dt);
                let throttle = throttle_from_thrust(out.thrust, va, &airframe);
                let delta_t = slew(last[0], throttle.delta_t, limits.throttle_rate, dt);
                let theta = slew(last[1], out.theta, limits.theta_rate, dt);
                saturated |= out.thrust_saturated
                    || out.theta_saturated
                    || throttle.saturated
                    || delta_t != throttle.delta_t
                    || theta != out.theta;
                *last = [delta_t, theta];
                (delta_t, theta, Default::default())
            }
            Outer::Ladrc(c) => {
                let (cmd, est) = c.update(&signals, state.theta, dt).map_err(fault)?;
                saturated |= cmd.saturated;
                (cmd.delta_t, cmd.theta, est)
            }
        };

        let delta_e = pitch.update(theta_cmd, state.theta, state.q, dt);
        saturated |= delta_e.abs() >= params.delta_e_max;
        let (delta_a, delta_r) = lateral_hold(state.phi, state.p, state.psi, psi_cmd, state.r, &lateral);
        let next_inputs = ControlInputs {
            delta_e,
            delta_t,
            delta_a,
            delta_r,
        }
        .saturated(params.delta_e_max, params.delta_a_max, params.delta_r_max);

        samples.push(
            Sample {
                t,
                h: state.h,
                h_cmd,
                va,
                va_cmd,
                alpha: loads.air.alpha,
                theta: state.theta,
                theta_cmd,
                q: state.q,
                phi: state.phi,
                psi: state.psi,
                delta_e: next_inputs.delta_e,
                delta_t: next_inputs.delta_t,
                delta_a: next_inputs.delta_a,
                delta_r: next_inputs.delta_r,
                thrust,
                drag: loads.drag,
                e_dot: signals.e_dot,
                b_dot: signals.b_dot,
                e_dot_d: signals.e_dot_desired,
                b_dot_d: signals.b_dot_desired,
                e: signals.e,
                b: signals.b,
                e_d: signals.e_desired,
                b_d: signals.b_desired,
                e_hat: est.e_hat,
                f_e_hat: est.f_e_hat,
                b_hat: est.b_hat,
                f_b_hat: est.f_b_hat,
                u_gust: gust.0,
                w_gust: gust.1,
                saturated: if saturated { 1.0 } else { 0.0 },
            }
            .quantized(),
        );

        if k == steps {
            break;
        }
        inputs = next_inputs;
        state = airframe
            .step_rk4(&state, &inputs, &ConstantWind(wind), t, dt)
            .map_err(fault)?;
        if !state.is_finite() {
            return Err(Error::DegenerateState("non-finite state".into()).at_time(t + dt));
        }
    }

    let series = Series { samples };
    let spec = metric_spec(cfg, &trim);
    let metrics = compute_metrics(&series, &spec);
    Ok(ScenarioResult {
        controller,
        seed,
        trim,
        allocation,
        spec,
        series,
        metrics,
    })
}

/// Descriptions of stored samples that fall outside the configured command
/// bounds. Empty when every command is in range. Values are compared with a
/// relative slack of 1e-8 to absorb the nine-digit storage rounding.
pub fn bound_violations(series: &Series, cfg: &RunConfig) -> Vec<String> {
    let p = &cfg.airframe;
    let within = |x: f64, lo: f64, hi: f64| {
        let slack = 1e-8 * lo.abs().max(hi.abs()).max(1.0);
        x >= lo - slack && x <= hi + slack
    };
    let theta_max = cfg.controller.limits.theta_max;
    let mut out = Vec::new();
    for s in &series.samples {
        let checks = [
            ("delta_e", within(s.delta_e, -p.delta_e_max, p.delta_e_max)),
            ("delta_a", within(s.delta_a, -p.delta_a_max, p.delta_a_max)),
            ("delta_r", within(s.delta_r, -p.delta_r_max, p.delta_r_max)),
            ("delta_t", within(s.delta_t, 0.0, 1.0)),
            ("theta_cmd", within(s.theta_cmd, -theta_max, theta_max)),
        ];
        for (name, ok) in checks {
            if !ok {
                out.push(format!("t = {}: {name} out of bounds", s.t));
            }
        }
    }
    out
}
