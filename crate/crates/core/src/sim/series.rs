//! Recorded time series and its CSV form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the series CSV.
pub const COLUMNS: [&str; 32] = [
    "t",
    "h",
    "h_cmd",
    "va",
    "va_cmd",
    "alpha",
    "theta",
    "theta_cmd",
    "q",
    "phi",
    "psi",
    "delta_e",
    "delta_t",
    "delta_a",
    "delta_r",
    "thrust",
    "drag",
    "e_dot",
    "b_dot",
    "e_dot_d",
    "b_dot_d",
    "e",
    "b",
    "e_d",
    "b_d",
    "e_hat",
    "f_e_hat",
    "b_hat",
    "f_b_hat",
    "u_gust",
    "w_gust",
    "saturated",
];

/// One sample per control step. Angles in rad, surfaces in rad, throttle as a
/// fraction, forces in N. `saturated` is 1 when any outer or inner command hit
/// a limit on that step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub h: f64,
    pub h_cmd: f64,
    pub va: f64,
    pub va_cmd: f64,
    pub alpha: f64,
    pub theta: f64,
    pub theta_cmd: f64,
    pub q: f64,
    pub phi: f64,
    pub psi: f64,
    pub delta_e: f64,
    pub delta_t: f64,
    pub delta_a: f64,
    pub delta_r: f64,
    pub thrust: f64,
    pub drag: f64,
    pub e_dot: f64,
    pub b_dot: f64,
    pub e_dot_d: f64,
    pub b_dot_d: f64,
    pub e: f64,
    pub b: f64,
    pub e_d: f64,
    pub b_d: f64,
    pub e_hat: f64,
    pub f_e_hat: f64,
    pub b_hat: f64,
    pub f_b_hat: f64,
    pub u_gust: f64,
    pub w_gust: f64,
    pub saturated: f64,
}

impl Sample {
    pub fn to_array(&self) -> [f64; 32] {
        [
            self.t,
            self.h,
            self.h_cmd,
            self.va,
            self.va_cmd,
            self.alpha,
            self.theta,
            self.theta_cmd,
            self.q,
            self.phi,
            self.psi,
            self.delta_e,
            self.delta_t,
            self.delta_a,
            self.delta_r,
            self.thrust,
            self.drag,
            self.e_dot,
            self.b_dot,
            self.e_dot_d,
            self.b_dot_d,
            self.e,
            self.b,
            self.e_d,
            self.b_d,
            self.e_hat,
            self.f_e_hat,
            self.b_hat,
            self.f_b_hat,
            self.u_gust,
            self.w_gust,
            self.saturated,
        ]
    }

    pub fn from_array(a: [f64; 32]) -> Self {
        let [t, h, h_cmd, va, va_cmd, alpha, theta, theta_cmd, q, phi, psi, delta_e, delta_t, delta_a, delta_r, thrust, drag, e_dot, b_dot, e_dot_d, b_dot_d, e, b, e_d, b_d, e_hat, f_e_hat, b_hat, f_b_hat, u_gust, w_gust, saturated] =
            a;
        Self {
            t,
            h,
            h_cmd,
            va,
            va_cmd,
            alpha,
            theta,
            theta_cmd,
            q,
            phi,
            psi,
            delta_e,
            delta_t,
            delta_a,
            delta_r,
            thrust,
            drag,
            e_dot,
            b_dot,
            e_dot_d,
            b_dot_d,
            e,
            b,
            e_d,
            b_d,
            e_hat,
            f_e_hat,
            b_hat,
            f_b_hat,
            u_gust,
            w_gust,
            saturated,
        }
    }

    /// Rounds every field to its CSV text form so a stored series reads back
    /// bit-identical.
    pub fn quantized(&self) -> Self {
        Self::from_array(self.to_array().map(quantize))
    }
}

/// Nine significant digits in scientific notation.
pub fn format_value(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn quantize(x: f64) -> f64 {
    format_value(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub samples: Vec<Sample>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn column(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS).map_err(csv_error)?;
        for s in &self.samples {
            w.write_record(s.to_array().map(format_value))
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(csv_error)?;
        if header.iter().ne(COLUMNS) {
            return Err(Error::Config {
                key: None,
                message: format!(
                    "unexpected series header: {}",
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut samples = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record.map_err(csv_error)?;
            let mut row = [0.0; 32];
            for (slot, field) in row.iter_mut().zip(record.iter()) {
                *slot = field.parse().map_err(|e| Error::Config {
                    key: None,
                    message: format!("row {}: cannot parse `{field}`: {e}", line + 1),
                })?;
            }
            samples.push(Sample::from_array(row));
        }
        Ok(Self { samples })
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config {
            key: None,
            message: format!("csv: {other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn array_round_trip_follows_column_order() {
        let a: [f64; 32] = std::array::from_fn(|i| i as f64);
        let s = Sample::from_array(a);
        assert_eq!(s.t, 0.0);
        assert_eq!(s.saturated, 31.0);
        assert_eq!(
            s.w_gust,
            COLUMNS.iter().position(|c| *c == "w_gust").unwrap() as f64
        );
        assert_eq!(s.to_array(), a);
    }

    #[test]
    fn csv_round_trip_is_exact_after_quantization() {
        let samples = (0..50)
            .map(|k| {
                let a: [f64; 32] =
                    std::array::from_fn(|i| ((k * 32 + i) as f64).sin() * 1e3 / (i + 1) as f64);
                Sample::from_array(a).quantized()
            })
            .collect();
        let series = Series { samples };
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        let back = Series::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, series);
        let mut again = Vec::new();
        back.write_csv(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(Series::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn quantize_is_idempotent(x in -1e6..1e6f64) {
            let q = quantize(x);
            prop_assert_eq!(quantize(q), q);
            prop_assert!((q - x).abs() <= 1e-8 * x.abs() + f64::MIN_POSITIVE);
        }
    }
}
