use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass, inertia, aerodynamic and propulsion constants of a fixed-wing airframe.
///
/// Key names in the parameter file mirror the field renames below. The
/// default is the Aerosonde set (Beard & McLain, *Small Unmanned Aircraft*,
/// appendix E) which is also shipped as `configs/aerosonde.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AirframeParams {
    pub m: f64,
    pub g: f64,
    #[serde(rename = "Jx")]
    pub jx: f64,
    #[serde(rename = "Jy")]
    pub jy: f64,
    #[serde(rename = "Jz")]
    pub jz: f64,
    #[serde(rename = "Jxz")]
    pub jxz: f64,
    pub rho: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub b_span: f64,
    pub c_chord: f64,

    #[serde(rename = "C_L0")]
    pub c_l0: f64,
    #[serde(rename = "C_L_alpha")]
    pub c_l_alpha: f64,
    #[serde(rename = "C_L_q")]
    pub c_l_q: f64,
    #[serde(rename = "C_L_delta_e")]
    pub c_l_delta_e: f64,
    #[serde(rename = "C_D0")]
    pub c_d0: f64,
    #[serde(rename = "C_D_alpha")]
    pub c_d_alpha: f64,
    /// Parasitic drag for the induced-drag polar. Together with `e_oswald`
    /// this selects `C_D = C_Dp + C_L(alpha)^2 / (pi e AR)`.
    #[serde(rename = "C_D_p", skip_serializing_if = "Option::is_none")]
    pub c_d_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_oswald: Option<f64>,
    #[serde(rename = "C_D_q")]
    pub c_d_q: f64,
    #[serde(rename = "C_D_delta_e")]
    pub c_d_delta_e: f64,
    #[serde(rename = "C_m0")]
    pub c_m0: f64,
    #[serde(rename = "C_m_alpha")]
    pub c_m_alpha: f64,
    #[serde(rename = "C_m_q")]
    pub c_m_q: f64,
    #[serde(rename = "C_m_delta_e")]
    pub c_m_delta_e: f64,

    #[serde(rename = "C_Y0")]
    pub c_y0: f64,
    #[serde(rename = "C_Y_beta")]
    pub c_y_beta: f64,
    #[serde(rename = "C_Y_p")]
    pub c_y_p: f64,
    #[serde(rename = "C_Y_r")]
    pub c_y_r: f64,
    #[serde(rename = "C_Y_delta_a")]
    pub c_y_delta_a: f64,
    #[serde(rename = "C_Y_delta_r")]
    pub c_y_delta_r: f64,
    #[serde(rename = "C_ell0")]
    pub c_ell0: f64,
    #[serde(rename = "C_ell_beta")]
    pub c_ell_beta: f64,
    #[serde(rename = "C_ell_p")]
    pub c_ell_p: f64,
    #[serde(rename = "C_ell_r")]
    pub c_ell_r: f64,
    #[serde(rename = "C_ell_delta_a")]
    pub c_ell_delta_a: f64,
    #[serde(rename = "C_ell_delta_r")]
    pub c_ell_delta_r: f64,
    #[serde(rename = "C_n0")]
    pub c_n0: f64,
    #[serde(rename = "C_n_beta")]
    pub c_n_beta: f64,
    #[serde(rename = "C_n_p")]
    pub c_n_p: f64,
    #[serde(rename = "C_n_r")]
    pub c_n_r: f64,
    #[serde(rename = "C_n_delta_a")]
    pub c_n_delta_a: f64,
    #[serde(rename = "C_n_delta_r")]
    pub c_n_delta_r: f64,

    #[serde(rename = "S_prop")]
    pub s_prop: f64,
    #[serde(rename = "C_prop")]
    pub c_prop: f64,
    pub k_motor: f64,

    /// Surface saturation (rad, symmetric).
    pub delta_e_max: f64,
    pub delta_a_max: f64,
    pub delta_r_max: f64,
}

impl Default for AirframeParams {
    fn default() -> Self {
        Self::aerosonde()
    }
}

/// Inertia ratios of the rigid-body rotational equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gammas {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
    pub g5: f64,
    pub g6: f64,
    pub g7: f64,
    pub g8: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DragModel {
    /// `C_D = C_D0 + C_D_alpha * alpha`
    Linear { c_d0: f64, c_d_alpha: f64 },
    /// `C_D = C_Dp + (C_L0 + C_L_alpha * alpha)^2 / (pi * e * AR)`
    Induced { c_d_p: f64, k_induced: f64 },
}

impl AirframeParams {
    pub fn aerosonde() -> Self {
        Self {
            m: 13.5,
            g: 9.81,
            jx: 0.8244,
            jy: 1.135,
            jz: 1.759,
            jxz: 0.1204,
            rho: 1.2682,
            s: 0.55,
            b_span: 2.8956,
            c_chord: 0.18994,
            c_l0: 0.28,
            c_l_alpha: 3.45,
            c_l_q: 0.0,
            c_l_delta_e: -0.36,
            c_d0: 0.03,
            c_d_alpha: 0.30,
            c_d_p: Some(0.0437),
            e_oswald: Some(0.9),
            c_d_q: 0.0,
            c_d_delta_e: 0.0,
            c_m0: -0.02338,
            c_m_alpha: -0.38,
            c_m_q: -3.6,
            c_m_delta_e: -0.5,
            c_y0: 0.0,
            c_y_beta: -0.98,
            c_y_p: 0.0,
            c_y_r: 0.0,
            c_y_delta_a: 0.0,
            c_y_delta_r: -0.17,
            c_ell0: 0.0,
            c_ell_beta: -0.12,
            c_ell_p: -0.26,
            c_ell_r: 0.14,
            c_ell_delta_a: 0.08,
            c_ell_delta_r: 0.105,
            c_n0: 0.0,
            c_n_beta: 0.25,
            c_n_p: 0.022,
            c_n_r: -0.35,
            c_n_delta_a: 0.06,
            c_n_delta_r: -0.032,
            s_prop: 0.2027,
            c_prop: 1.0,
            k_motor: 80.0,
            delta_e_max: 45f64.to_radians(),
            delta_a_max: 30f64.to_radians(),
            delta_r_max: 30f64.to_radians(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let params: Self = toml::from_str(text).map_err(|e| config_error(&e))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Config {
            key: None,
            message: format!("cannot read {}: {e}", path.as_ref().display()),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("g", self.g),
            ("Jx", self.jx),
            ("Jy", self.jy),
            ("Jz", self.jz),
            ("rho", self.rho),
            ("S", self.s),
            ("b_span", self.b_span),
            ("c_chord", self.c_chord),
            ("S_prop", self.s_prop),
            ("C_prop", self.c_prop),
            ("k_motor", self.k_motor),
            ("delta_e_max", self.delta_e_max),
            ("delta_a_max", self.delta_a_max),
            ("delta_r_max", self.delta_r_max),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        if self.jx * self.jz - self.jxz * self.jxz <= 0.0 {
            return Err(Error::invalid("Jxz", "Jx*Jz - Jxz^2 must be positive"));
        }
        if let Some(e) = self.e_oswald {
            if !(e > 0.0) {
                return Err(Error::invalid("e_oswald", format!("must be positive, got {e}")));
            }
        }
        Ok(())
    }

    /// `k_T1 = ½ rho S_prop C_prop k_motor²` (N per unit throttle squared).
    pub fn k_t1(&self) -> f64 {
        self.k_t2() * self.k_motor * self.k_motor
    }

    /// `k_T2 = ½ rho S_prop C_prop` (N s²/m²).
    pub fn k_t2(&self) -> f64 {
        0.5 * self.rho * self.s_prop * self.c_prop
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.b_span * self.b_span / self.s
    }

    pub fn drag_model(&self) -> DragModel {
        match (self.c_d_p, self.e_oswald) {
            (Some(c_d_p), Some(e)) => DragModel::Induced {
                c_d_p,
                k_induced: 1.0 / (std::f64::consts::PI * e * self.aspect_ratio()),
            },
            _ => DragModel::Linear {
                c_d0: self.c_d0,
                c_d_alpha: self.c_d_alpha,
            },
        }
    }

    pub fn gammas(&self) -> Gammas {
        let (jx, jy, jz, jxz) = (self.jx, self.jy, self.jz, self.jxz);
        let gamma = jx * jz - jxz * jxz;
        Gammas {
            g1: jxz * (jx - jy + jz) / gamma,
            g2: (jz * (jz - jy) + jxz * jxz) / gamma,
            g3: jz / gamma,
            g4: jxz / gamma,
            g5: (jz - jx) / jy,
            g6: jxz / jy,
            g7: ((jx - jy) * jx + jxz * jxz) / gamma,
            g8: jx / gamma,
        }
    }
}

pub(crate) fn config_error(e: &toml::de::Error) -> Error {
    let message = e.message().to_string();
    let key = message
        .split('`')
        .nth(1)
        .filter(|_| message.starts_with("unknown field"))
        .map(str::to_string);
    Error::Config { key, message }
}
