//! Dryden longitudinal turbulence.
//!
//! The u-axis gust is white noise shaped by
//! `G_u(s) = σ_u √(2V/L_u) / (s + V/L_u)` and the w-axis gust by
//! `G_w(s) = σ_w √(3V/L_w) (s + V/(√3 L_w)) / (s + V/L_w)²`.
//! Both filters are realized in state space and discretized by exact
//! zero-order hold. Each sample of the driving noise has variance `1/dt`, so
//! the held sequence emulates continuous white noise of unit intensity and
//! the output variance approaches σ².

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrydenParams {
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub l_u: f64,
    pub l_w: f64,
    /// Airspeed the filters are formed at (m/s).
    pub va_ref: f64,
}

impl Default for DrydenParams {
    /// Mild low-altitude turbulence at 35 m/s cruise.
    fn default() -> Self {
        Self {
            sigma_u: 1.06,
            sigma_w: 0.7,
            l_u: 200.0,
            l_w: 50.0,
            va_ref: 35.0,
        }
    }
}

impl DrydenParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_u >= 0.0) {
            return Err(Error::invalid("sigma_u", "must be non-negative"));
        }
        if !(self.sigma_w >= 0.0) {
            return Err(Error::invalid("sigma_w", "must be non-negative"));
        }
        if !(self.l_u > 0.0) {
            return Err(Error::invalid("L_u", "scale length must be positive"));
        }
        if !(self.l_w > 0.0) {
            return Err(Error::invalid("L_w", "scale length must be positive"));
        }
        if !(self.va_ref > 0.0) {
            return Err(Error::invalid("va_ref", "reference airspeed must be positive"));
        }
        Ok(())
    }

    /// Steady-state (s = 0) gain of `G_u`.
    pub fn dc_gain_u(&self) -> f64 {
        self.sigma_u * (2.0 * self.l_u / self.va_ref).sqrt()
    }

    /// `|G_u(jω)|²`
    pub fn psd_u(&self, omega: f64) -> f64 {
        let a = self.va_ref / self.l_u;
        self.sigma_u * self.sigma_u * 2.0 * a / (omega * omega + a * a)
    }

    /// `|G_w(jω)|²`
    pub fn psd_w(&self, omega: f64) -> f64 {
        let a = self.va_ref / self.l_w;
        let b = a / 3f64.sqrt();
        let den = omega * omega + a * a;
        self.sigma_w * self.sigma_w * 3.0 * a * (omega * omega + b * b) / (den * den)
    }
}

/// Discrete Dryden generator. Single owner; advance with [`DrydenState::step_gust`].
#[derive(Debug, Clone)]
pub struct DrydenState {
    params: DrydenParams,
    dt: f64,
    seed: u64,
    rng: ChaCha8Rng,
    // u-axis: x' = -a x + n, u_g = c_u x
    u_phi: f64,
    u_gamma: f64,
    u_out: f64,
    x_u: f64,
    // w-axis: controllable canonical form, w_g = c_w (b x1 + x2)
    w_phi: [[f64; 2]; 2],
    w_gamma: [f64; 2],
    w_out: [f64; 2],
    x_w: [f64; 2],
    noise_scale: f64,
}

/// Builds the discretized filters. Rejects non-positive `dt`.
pub fn build_dryden(params: DrydenParams, dt: f64, seed: u64) -> Result<DrydenState> {
    params.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }

    let a_u = params.va_ref / params.l_u;
    let e_u = (-a_u * dt).exp();
    let u_phi = e_u;
    let u_gamma = (1.0 - e_u) / a_u;
    let u_out = params.sigma_u * (2.0 * a_u).sqrt();

    // exp(A t) for A = [[0, 1], [-a², -2a]] is e^{-at} [[1 + at, t], [-a² t, 1 - at]].
    let a = params.va_ref / params.l_w;
    let b = a / 3f64.sqrt();
    let e = (-a * dt).exp();
    let w_phi = [
        [e * (1.0 + a * dt), e * dt],
        [-a * a * dt * e, e * (1.0 - a * dt)],
    ];
    let w_gamma = [(1.0 - e * (1.0 + a * dt)) / (a * a), dt * e];
    let c_w = params.sigma_w * (3.0 * a).sqrt();
    let w_out = [c_w * b, c_w];

    Ok(DrydenState {
        params,
        dt,
        seed,
        rng: ChaCha8Rng::seed_from_u64(seed),
        u_phi,
        u_gamma,
        u_out,
        x_u: 0.0,
        w_phi,
        w_gamma,
        w_out,
        x_w: [0.0; 2],
        noise_scale: 1.0 / dt.sqrt(),
    })
}

impl DrydenState {
    pub fn params(&self) -> &DrydenParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Restores the filters to rest and rewinds the noise stream.
    pub fn reset(&mut self) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.x_u = 0.0;
        self.x_w = [0.0; 2];
    }

    /// Advances both filters one step and returns the body-axis gust
    /// `(u_gust, w_gust)` in m/s.
    pub fn step_gust(&mut self) -> (f64, f64) {
        let n_u: f64 = StandardNormal.sample(&mut self.rng);
        let n_w: f64 = StandardNormal.sample(&mut self.rng);
        let n_u = n_u * self.noise_scale;
        let n_w = n_w * self.noise_scale;

        self.x_u = self.u_phi * self.x_u + self.u_gamma * n_u;
        let [x1, x2] = self.x_w;
        self.x_w = [
            self.w_phi[0][0] * x1 + self.w_phi[0][1] * x2 + self.w_gamma[0] * n_w,
            self.w_phi[1][0] * x1 + self.w_phi[1][1] * x2 + self.w_gamma[1] * n_w,
        ];

        let u_gust = self.u_out * self.x_u;
        let w_gust = self.w_out[0] * self.x_w[0] + self.w_out[1] * self.x_w[1];
        (u_gust, w_gust)
    }
}
