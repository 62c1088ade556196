use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

/// 12-state rigid-body state. Position is north/east/altitude (m), velocities
/// are body-frame (m/s), attitude is roll/pitch/yaw Euler angles (rad) and
/// rates are body-frame (rad/s).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    pub north: f64,
    pub east: f64,
    pub h: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl AircraftState {
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.north, self.east, self.h, self.u, self.v, self.w, self.phi, self.theta, self.psi, self.p,
            self.q, self.r,
        ]
    }

    pub fn from_array(a: [f64; 12]) -> Self {
        Self {
            north: a[0],
            east: a[1],
            h: a[2],
            u: a[3],
            v: a[4],
            w: a[5],
            phi: a[6],
            theta: a[7],
            psi: a[8],
            p: a[9],
            q: a[10],
            r: a[11],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Air-relative body velocity for a body-frame wind vector.
    pub fn air_relative(&self, wind: [f64; 3]) -> [f64; 3] {
        [self.u - wind[0], self.v - wind[1], self.w - wind[2]]
    }

    pub fn airspeed(&self, wind: [f64; 3]) -> f64 {
        let [ur, vr, wr] = self.air_relative(wind);
        (ur * ur + vr * vr + wr * wr).sqrt()
    }
}

impl Add for AircraftState {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.to_array(), rhs.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Mul<f64> for AircraftState {
    type Output = Self;

    fn mul(self, k: f64) -> Self {
        Self::from_array(self.to_array().map(|x| x * k))
    }
}

/// Surface deflections (rad) and throttle fraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlInputs {
    pub delta_e: f64,
    pub delta_a: f64,
    pub delta_r: f64,
    pub delta_t: f64,
}

impl ControlInputs {
    /// Clamps throttle to [0, 1] and each surface to its symmetric limit.
    pub fn saturated(self, delta_e_max: f64, delta_a_max: f64, delta_r_max: f64) -> Self {
        Self {
            delta_e: self.delta_e.clamp(-delta_e_max, delta_e_max),
            delta_a: self.delta_a.clamp(-delta_a_max, delta_a_max),
            delta_r: self.delta_r.clamp(-delta_r_max, delta_r_max),
            delta_t: self.delta_t.clamp(0.0, 1.0),
        }
    }
}
