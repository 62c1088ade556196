//! Step-response and disturbance-response metrics computed from a series.

use serde::{Deserialize, Serialize};

use super::series::{Sample, Series};

/// Settling band as a fraction of the step magnitude.
pub const SETTLING_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    Altitude,
    Airspeed,
}

impl Response {
    fn value(self, s: &Sample) -> f64 {
        match self {
            Self::Altitude => s.h,
            Self::Airspeed => s.va,
        }
    }
}

/// Everything besides the series that the metrics depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub response: Response,
    /// Value before the step.
    pub initial: f64,
    /// Signed step magnitude; zero for scenarios without a step.
    pub step: f64,
    pub step_time: f64,
    pub duration: f64,
    /// Start of the standard-deviation window.
    pub window_start: f64,
    /// Nominal elevator (rad) and throttle the surface deviations are taken from.
    pub nominal_delta_e: f64,
    pub nominal_delta_t: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metrics {
    /// Time from the step to entering the band for good (s); the scenario
    /// duration when the response never settles.
    pub settling_time: f64,
    pub settled: bool,
    /// Peak excursion beyond the final command, % of the step magnitude.
    pub overshoot: f64,
    /// RMS deviation from the commanded altitude over the window (m).
    pub std_h: f64,
    /// RMS deviation from the commanded airspeed over the window (m/s).
    pub std_va: f64,
    /// RMS elevator deviation from nominal over the window (deg).
    pub std_de: f64,
    /// RMS throttle deviation from nominal over the window (fraction).
    pub std_dt: f64,
}

impl Metrics {
    pub const FIELDS: [&'static str; 6] = [
        "settling_time",
        "overshoot",
        "std_h",
        "std_va",
        "std_de",
        "std_dt",
    ];

    pub fn get(&self, field: &str) -> Option<f64> {
        Some(match field {
            "settling_time" => self.settling_time,
            "overshoot" => self.overshoot,
            "std_h" => self.std_h,
            "std_va" => self.std_va,
            "std_de" => self.std_de,
            "std_dt" => self.std_dt,
            _ => return None,
        })
    }

    /// Field-wise mean; `settled` is true only if every run settled.
    pub fn mean<'a>(all: impl IntoIterator<Item = &'a Metrics>) -> Option<Metrics> {
        let mut sum = Metrics {
            settled: true,
            ..Default::default()
        };
        let mut n = 0usize;
        for m in all {
            sum.settling_time += m.settling_time;
            sum.overshoot += m.overshoot;
            sum.std_h += m.std_h;
            sum.std_va += m.std_va;
            sum.std_de += m.std_de;
            sum.std_dt += m.std_dt;
            sum.settled &= m.settled;
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let k = n as f64;
        Some(Metrics {
            settling_time: sum.settling_time / k,
            overshoot: sum.overshoot / k,
            std_h: sum.std_h / k,
            std_va: sum.std_va / k,
            std_de: sum.std_de / k,
            std_dt: sum.std_dt / k,
            settled: sum.settled,
        })
    }
}

pub fn compute_metrics(series: &Series, spec: &MetricSpec) -> Metrics {
    let (settling_time, settled, overshoot) = step_metrics(series, spec);
    let window: Vec<&Sample> = series
        .samples
        .iter()
        .filter(|s| s.t >= spec.window_start)
        .collect();
    let rms = |f: &dyn Fn(&Sample) -> f64| {
        if window.is_empty() {
            return 0.0;
        }
        (window.iter().map(|s| f(s).powi(2)).sum::<f64>() / window.len() as f64).sqrt()
    };
    Metrics {
        settling_time,
        settled,
        overshoot,
        std_h: rms(&|s| s.h - s.h_cmd),
        std_va: rms(&|s| s.va - s.va_cmd),
        std_de: rms(&|s| s.delta_e - spec.nominal_delta_e).to_degrees(),
        std_dt: rms(&|s| s.delta_t - spec.nominal_delta_t),
    }
}

fn step_metrics(series: &Series, spec: &MetricSpec) -> (f64, bool, f64) {
    if spec.step == 0.0 {
        return (0.0, true, 0.0);
    }
    let target = spec.initial + spec.step;
    let band = SETTLING_BAND * spec.step.abs();
    let after: Vec<&Sample> = series.samples.iter().filter(|s| s.t >= spec.step_time).collect();

    // Last sample outside the band; settling is the sample after it.
    let last_out = after
        .iter()
        .rposition(|s| (spec.response.value(s) - target).abs() > band);
    let (settling_time, settled) = match last_out {
        None => (0.0, true),
        Some(i) if i + 1 < after.len() => (after[i + 1].t - spec.step_time, true),
        Some(_) => (spec.duration, false),
    };

    let direction = spec.step.signum();
    let peak = after
        .iter()
        .map(|s| direction * (spec.response.value(s) - target))
        .fold(0.0_f64, f64::max);
    (settling_time, settled, 100.0 * peak / spec.step.abs())
}
