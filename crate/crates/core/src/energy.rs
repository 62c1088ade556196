//! Energy-state signals for total energy control.
//!
//! `Ė = V̇/g + ḣ/V_a` is the specific (weight- and airspeed-normalized)
//! total-energy rate and `Ḃ = -V̇/g + ḣ/V_a` the specific energy-distribution
//! rate. `E` and `B` are their running integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Airspeed floor guarding the `1/V_a` terms (m/s).
pub const AIRSPEED_FLOOR: f64 = 1.0;

/// `E_T = ½ m V_a² + m g h` (J).
pub fn total_energy(m: f64, va: f64, h: f64, g: f64) -> f64 {
    0.5 * m * va * va + m * g * h
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyRates {
    pub e_dot: f64,
    pub b_dot: f64,
}

/// `(Ė, Ḃ)` from airspeed rate, climb rate and airspeed.
pub fn energy_rates(va_dot: f64, h_dot: f64, va: f64, g: f64) -> Result<EnergyRates> {
    if !(va > AIRSPEED_FLOOR) {
        return Err(Error::LowAirspeed {
            airspeed: va,
            floor: AIRSPEED_FLOOR,
        });
    }
    let kinetic = va_dot / g;
    let potential = h_dot / va;
    Ok(EnergyRates {
        e_dot: kinetic + potential,
        b_dot: -kinetic + potential,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceGains {
    /// Airspeed-error to acceleration gain (1/s).
    pub k_v: f64,
    /// Altitude-error to climb-rate gain (1/s).
    pub k_h: f64,
    /// Limit on `|ḣ^d|` (m/s).
    pub h_dot_max: f64,
    /// Limit on `|V̇^d|` (m/s²).
    pub va_dot_max: f64,
}

impl Default for GuidanceGains {
    fn default() -> Self {
        Self {
            k_v: 0.5,
            k_h: 0.3,
            h_dot_max: 5.0,
            va_dot_max: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DesiredRates {
    pub va_dot: f64,
    pub h_dot: f64,
    pub e_dot: f64,
    pub b_dot: f64,
}

/// Shapes altitude and airspeed errors into rate demands, applies the rate
/// limits, then forms the energy-rate demands from the limited values.
pub fn desired_rates(
    va_cmd: f64,
    h_cmd: f64,
    va: f64,
    h: f64,
    gains: &GuidanceGains,
    g: f64,
) -> Result<DesiredRates> {
    let va_dot = (gains.k_v * (va_cmd - va)).clamp(-gains.va_dot_max, gains.va_dot_max);
    let h_dot = (gains.k_h * (h_cmd - h)).clamp(-gains.h_dot_max, gains.h_dot_max);
    let rates = energy_rates(va_dot, h_dot, va, g)?;
    Ok(DesiredRates {
        va_dot,
        h_dot,
        e_dot: rates.e_dot,
        b_dot: rates.b_dot,
    })
}

/// Measured and commanded energy rates together with their integrals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergySignals {
    /// Total energy `E_T` (J).
    pub e_total: f64,
    pub e: f64,
    pub e_dot: f64,
    pub b: f64,
    pub b_dot: f64,
    pub e_desired: f64,
    pub e_dot_desired: f64,
    pub b_desired: f64,
    pub b_dot_desired: f64,
}

impl EnergySignals {
    /// Signals at scenario start: integrators at zero, rates as given.
    pub fn start(e_total: f64, measured: EnergyRates, desired: EnergyRates) -> Self {
        Self {
            e_total,
            e_dot: measured.e_dot,
            b_dot: measured.b_dot,
            e_dot_desired: desired.e_dot,
            b_dot_desired: desired.b_dot,
            ..Default::default()
        }
    }

    /// Trapezoidal accumulation from the rates held in `self` to the new ones.
    pub fn integrate(&self, e_total: f64, measured: EnergyRates, desired: EnergyRates, dt: f64) -> Self {
        let half = 0.5 * dt;
        Self {
            e_total,
            e: self.e + half * (self.e_dot + measured.e_dot),
            e_dot: measured.e_dot,
            b: self.b + half * (self.b_dot + measured.b_dot),
            b_dot: measured.b_dot,
            e_desired: self.e_desired + half * (self.e_dot_desired + desired.e_dot),
            e_dot_desired: desired.e_dot,
            b_desired: self.b_desired + half * (self.b_dot_desired + desired.b_dot),
            b_dot_desired: desired.b_dot,
        }
    }
}

/// First-difference rate estimate smoothed by a one-pole low-pass, for use
/// when true derivatives are not available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceRate {
    tau: f64,
    last: Option<f64>,
    rate: f64,
}

impl DifferenceRate {
    pub const DEFAULT_TAU: f64 = 0.05;

    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            last: None,
            rate: 0.0,
        }
    }

    pub fn update(&mut self, value: f64, dt: f64) -> f64 {
        if let Some(last) = self.last {
            let raw = (value - last) / dt;
            let k = dt / (self.tau + dt);
            self.rate += k * (raw - self.rate);
        }
        self.last = Some(value);
        self.rate
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G: f64 = 9.81;

    #[test]
    fn total_energy_examples() {
        assert_eq!(total_energy(13.5, 0.0, 0.0, G), 0.0);
        let e = total_energy(13.5, 35.0, 100.0, G);
        assert!((e - 21512.25).abs() < 1e-9, "{e}");
        let kinetic = |v| total_energy(13.5, v, 0.0, G);
        assert_eq!(kinetic(70.0), 4.0 * kinetic(35.0));
    }

    #[test]
    fn energy_rate_examples() {
        assert_eq!(energy_rates(0.0, 0.0, 35.0, G).unwrap(), EnergyRates::default());
        let r = energy_rates(G, 0.0, 35.0, G).unwrap();
        assert_eq!((r.e_dot, r.b_dot), (1.0, -1.0));
        let r = energy_rates(0.0, 3.5, 35.0, G).unwrap();
        assert!((r.e_dot - 0.1).abs() < 1e-15 && (r.b_dot - 0.1).abs() < 1e-15);
    }

    #[test]
    fn low_airspeed_is_an_error() {
        assert!(matches!(
            energy_rates(0.0, 1.0, 0.5, G),
            Err(Error::LowAirspeed { .. })
        ));
    }

    #[test]
    fn desired_rate_examples() {
        let gains = GuidanceGains::default();
        let d = desired_rates(35.0, 100.0, 35.0, 100.0, &gains, G).unwrap();
        assert_eq!(d, DesiredRates::default());

        let d = desired_rates(35.0, 110.0, 35.0, 100.0, &gains, G).unwrap();
        assert!((d.h_dot - 3.0).abs() < 1e-12);

        let d = desired_rates(40.0, 100.0, 35.0, 100.0, &gains, G).unwrap();
        assert!((d.va_dot - 2.5).abs() < 1e-12);
    }

    #[test]
    fn desired_rates_are_limited_before_energy_forming() {
        let gains = GuidanceGains::default();
        let d = desired_rates(60.0, 200.0, 35.0, 100.0, &gains, G).unwrap();
        assert_eq!(d.h_dot, 5.0);
        assert_eq!(d.va_dot, 3.0);
        assert!((d.e_dot - (3.0 / G + 5.0 / 35.0)).abs() < 1e-15);
        let d = desired_rates(10.0, 0.0, 35.0, 100.0, &gains, G).unwrap();
        assert_eq!((d.h_dot, d.va_dot), (-5.0, -3.0));
    }

    #[test]
    fn zero_rates_leave_integrals_unchanged() {
        let mut s = EnergySignals {
            e: 0.3,
            b: -0.2,
            e_desired: 0.5,
            b_desired: 0.1,
            ..Default::default()
        };
        let before = s;
        for _ in 0..1000 {
            s = s.integrate(0.0, EnergyRates::default(), EnergyRates::default(), 0.01);
        }
        assert_eq!(
            (s.e, s.b, s.e_desired, s.b_desired),
            (before.e, before.b, before.e_desired, before.b_desired)
        );
    }

    #[test]
    fn constant_rate_integrates_to_rectangle() {
        let rate = EnergyRates {
            e_dot: 0.1,
            b_dot: 0.0,
        };
        let mut s = EnergySignals::start(0.0, EnergyRates::default(), rate);
        for _ in 0..1000 {
            s = s.integrate(0.0, EnergyRates::default(), rate, 0.01);
        }
        assert!((s.e_desired - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_ramp_matches_closed_form() {
        // rate(t) = 0.2 t + 0.05 integrates to 0.1 t² + 0.05 t.
        let dt = 0.01;
        let rate = |t: f64| EnergyRates {
            e_dot: 0.2 * t + 0.05,
            b_dot: -0.3 * t,
        };
        let mut s = EnergySignals::start(0.0, rate(0.0), rate(0.0));
        for k in 1..=700 {
            let t = k as f64 * dt;
            s = s.integrate(0.0, rate(t), rate(t), dt);
        }
        let t = 7.0;
        assert!((s.e - (0.1 * t * t + 0.05 * t)).abs() < 1e-6);
        assert!((s.b - (-0.15 * t * t)).abs() < 1e-6);
        assert!((s.e_desired - s.e).abs() < 1e-12);
    }

    #[test]
    fn difference_rate_tracks_a_ramp() {
        let mut d = DifferenceRate::new(DifferenceRate::DEFAULT_TAU);
        for k in 0..200 {
            d.update(2.0 * k as f64 * 0.01, 0.01);
        }
        assert!((d.rate() - 2.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn rate_forms_are_consistent(
            va_dot in -20.0..20.0f64,
            h_dot in -20.0..20.0f64,
            va in 1.5..80.0f64,
        ) {
            let r = energy_rates(va_dot, h_dot, va, G).unwrap();
            prop_assert!((r.e_dot - r.b_dot - 2.0 * va_dot / G).abs() < 1e-12);
            prop_assert!((r.e_dot + r.b_dot - 2.0 * h_dot / va).abs() < 1e-12);
        }

        #[test]
        fn total_energy_is_monotone(
            va in 0.0..80.0f64,
            h in 0.0..3000.0f64,
            dv in 1e-3..5.0f64,
            dh in 1e-3..50.0f64,
        ) {
            let e = total_energy(13.5, va, h, G);
            prop_assert!(e >= 0.0);
            prop_assert!(total_energy(13.5, va + dv, h, G) > e);
            prop_assert!(total_energy(13.5, va, h + dh, G) > e);
        }
    }
}
