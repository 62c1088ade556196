//! Linear extended state observer (LESO) and the linear state-error feedback
//! compensator (LSEFC).
//!
//! For a plant `y⁽ⁿ⁾ = f + b₀u` the observer carries `n + 1` states: the `n`
//! plant states followed by the lumped disturbance `f`, which absorbs any
//! unmodelled dynamics. Gains come from bandwidth parameterization, placing every
//! observer pole at `-ω_o`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesoConfig {
    /// Plant order n ≥ 1.
    pub order: usize,
    /// Nominal input gain.
    pub b0: f64,
    /// Observer bandwidth (rad/s).
    pub omega_o: f64,
    /// Update period (s).
    pub dt: f64,
    /// Estimate-norm bound beyond which the observer is declared divergent.
    pub divergence_bound: f64,
}

impl LesoConfig {
    pub const DEFAULT_DIVERGENCE_BOUND: f64 = 1e6;

    pub fn new(order: usize, b0: f64, omega_o: f64, dt: f64) -> Self {
        Self {
            order,
            b0,
            omega_o,
            dt,
            divergence_bound: Self::DEFAULT_DIVERGENCE_BOUND,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::invalid("order", "plant order must be at least 1"));
        }
        if !(self.omega_o > 0.0 && self.omega_o.is_finite()) {
            return Err(Error::invalid("omega_o", "observer bandwidth must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt", "update period must be positive"));
        }
        if self.dt * self.omega_o >= 0.5 {
            return Err(Error::invalid(
                "omega_o",
                format!(
                    "dt * omega_o = {:.3} violates the discrete stability margin 0.5",
                    self.dt * self.omega_o
                ),
            ));
        }
        if self.b0 == 0.0 || !self.b0.is_finite() {
            return Err(Error::invalid("b0", "nominal input gain must be non-zero"));
        }
        Ok(())
    }
}

/// `L_i = C(n+1, i) ω_o^i` for `i = 1 … n+1`, the coefficients of
/// `(s + ω_o)^{n+1}` below the leading term.
pub fn leso_gains(config: &LesoConfig) -> Vec<f64> {
    let m = config.order + 1;
    let mut binom = 1.0;
    let mut power = 1.0;
    (1..=m)
        .map(|i| {
            binom = binom * (m + 1 - i) as f64 / i as f64;
            power *= config.omega_o;
            binom * power
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesoState {
    /// Plant-state estimates followed by the disturbance estimate.
    pub x_hat: Vec<f64>,
    /// Last correction error `y - x̂₁`.
    pub error: f64,
}

impl LesoState {
    pub fn zeros(order: usize) -> Self {
        Self {
            x_hat: vec![0.0; order + 1],
            error: 0.0,
        }
    }

    /// Starts the output estimate at `y0` with every other state at zero.
    pub fn at_output(order: usize, y0: f64) -> Self {
        let mut s = Self::zeros(order);
        s.x_hat[0] = y0;
        s
    }

    pub fn output(&self) -> f64 {
        self.x_hat[0]
    }

    pub fn disturbance(&self) -> f64 {
        *self.x_hat.last().expect("observer has at least two states")
    }
}

fn step(state: &LesoState, gains: &[f64], u: f64, y: f64, config: &LesoConfig) -> Result<LesoState> {
    let n = config.order;
    let x = &state.x_hat;
    if x.len() != n + 1 {
        return Err(Error::invalid(
            "x_hat",
            format!("expected {} states, got {}", n + 1, x.len()),
        ));
    }
    let e = y - x[0];
    let mut next = x.clone();
    for i in 0..n - 1 {
        next[i] += config.dt * (x[i + 1] + gains[i] * e);
    }
    next[n - 1] += config.dt * (x[n] + config.b0 * u + gains[n - 1] * e);
    next[n] += config.dt * gains[n] * e;

    let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm <= config.divergence_bound) {
        return Err(Error::ObserverDivergence {
            norm,
            bound: config.divergence_bound,
        });
    }
    Ok(LesoState {
        x_hat: next,
        error: e,
    })
}

/// One forward-Euler step of the continuous observer
/// `x̂' = A x̂ + B u + L (y - x̂₁)`.
pub fn leso_update(state: &LesoState, u: f64, y: f64, config: &LesoConfig) -> Result<LesoState> {
    config.validate()?;
    step(state, &leso_gains(config), u, y, config)
}

/// Observer with validated configuration and cached gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Leso {
    config: LesoConfig,
    gains: Vec<f64>,
    state: LesoState,
}

impl Leso {
    pub fn new(config: LesoConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            gains: leso_gains(&config),
            state: LesoState::zeros(config.order),
            config,
        })
    }

    pub fn reset(&mut self, state: LesoState) {
        self.state = state;
    }

    pub fn update(&mut self, u: f64, y: f64) -> Result<&LesoState> {
        self.state = step(&self.state, &self.gains, u, y, &self.config)?;
        Ok(&self.state)
    }

    pub fn state(&self) -> &LesoState {
        &self.state
    }

    pub fn config(&self) -> &LesoConfig {
        &self.config
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }
}

/// `u = k (r - x̂) - f̂ / b₀`
pub fn lsefc_first_order(r: f64, x_hat: f64, f_hat: f64, k: f64, b0: f64) -> Result<f64> {
    if b0 == 0.0 {
        return Err(Error::invalid("b0", "nominal input gain must be non-zero"));
    }
    Ok(k * (r - x_hat) - f_hat / b0)
}

/// `u = (k_p (r - ŷ) - k_d ŷ' - f̂) / b₀`
pub fn lsefc_second_order(
    r: f64,
    y_hat: f64,
    ydot_hat: f64,
    f_hat: f64,
    kp: f64,
    kd: f64,
    b0: f64,
) -> Result<f64> {
    if b0 == 0.0 {
        return Err(Error::invalid("b0", "nominal input gain must be non-zero"));
    }
    let u0 = kp * (r - y_hat) - kd * ydot_hat;
    Ok((u0 - f_hat) / b0)
}
