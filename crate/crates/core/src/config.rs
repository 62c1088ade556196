//! Run configuration.
//!
//! One TOML file per run with the sections `[airframe]`, `[scenario]`,
//! `[turbulence]`, `[guidance]`, `[inner_loop.pitch]`, `[inner_loop.lateral]`,
//! `[controller.tec]`, `[controller.ladrc]` and `[controller.limits]`. Every
//! section and key is optional. `[airframe]` may name a `params_file`
//! (relative to the config file) whose keys are overlaid by the remaining
//! `[airframe]` keys. Unknown keys are rejected by name.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::airframe::{config_error, AirframeParams};
use crate::energy::GuidanceGains;
use crate::error::{Error, Result};
use crate::inner_loop::{LateralGains, PitchGains};
use crate::tec::{CommandLimits, LadrcTecGains, TecClassicGains};
use crate::turbulence::DrydenParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    AltitudeStep,
    AirspeedStep,
    TurbulenceOnset,
    /// Trim hold with no command change and no turbulence.
    Hold,
}

impl ScenarioKind {
    pub fn is_step(self) -> bool {
        matches!(self, Self::AltitudeStep | Self::AirspeedStep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    TecClassic,
    LadrcTec,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 2] = [Self::TecClassic, Self::LadrcTec];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::TecClassic => "tec_classic",
            Self::LadrcTec => "ladrc_tec",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tec_classic" => Ok(Self::TecClassic),
            "ladrc_tec" => Ok(Self::LadrcTec),
            other => Err(Error::Config {
                key: Some("controller".into()),
                message: format!("unknown controller `{other}`, expected `tec_classic` or `ladrc_tec`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Stem of the output file names.
    pub name: String,
    pub kind: ScenarioKind,
    /// Cruise airspeed (m/s).
    pub va: f64,
    /// Cruise altitude (m).
    pub h: f64,
    /// Step magnitude in m (altitude) or m/s (airspeed).
    pub step: f64,
    /// Time the step command is applied (s).
    pub step_time: f64,
    /// Time the turbulence starts (s).
    pub onset: f64,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    /// Number of consecutive seeds used by `compare` on turbulence and by `sweep`.
    pub seeds: u64,
    pub controller: ControllerKind,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "altitude_step".into(),
            kind: ScenarioKind::AltitudeStep,
            va: 35.0,
            h: 100.0,
            step: 10.0,
            step_time: 1.0,
            onset: 3.0,
            duration: 30.0,
            dt: 0.01,
            seed: 1,
            seeds: 10,
            controller: ControllerKind::LadrcTec,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(Error::Config {
                key: Some(key.into()),
                message,
            })
        };
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(
                "duration",
                format!("duration must be positive, got {}", self.duration),
            );
        }
        if !(self.va > 0.0) {
            return bad("va", format!("cruise airspeed must be positive, got {}", self.va));
        }
        if self.kind == ScenarioKind::TurbulenceOnset && !(self.onset >= 0.0 && self.onset < self.duration) {
            return bad(
                "onset",
                format!(
                    "onset {} must lie in [0, duration = {})",
                    self.onset, self.duration
                ),
            );
        }
        if self.kind.is_step() && !(self.step_time >= 0.0 && self.step_time < self.duration) {
            return bad(
                "step_time",
                format!(
                    "step_time {} must lie in [0, duration = {})",
                    self.step_time, self.duration
                ),
            );
        }
        if self.seeds == 0 {
            return bad("seeds", "seeds must be at least 1".into());
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name", format!("`{}` is not usable as a file stem", self.name));
        }
        Ok(())
    }

    /// Start of the window used for standard deviations.
    pub fn window_start(&self) -> f64 {
        match self.kind {
            ScenarioKind::TurbulenceOnset => self.onset,
            ScenarioKind::AltitudeStep | ScenarioKind::AirspeedStep => self.step_time,
            ScenarioKind::Hold => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InnerLoopConfig {
    pub pitch: PitchGains,
    pub lateral: LateralGains,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub tec: TecClassicGains,
    pub ladrc: LadrcTecGains,
    pub limits: CommandLimits,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    airframe: toml::Table,
    #[serde(default)]
    scenario: ScenarioConfig,
    #[serde(default)]
    turbulence: DrydenParams,
    #[serde(default)]
    guidance: GuidanceGains,
    #[serde(default)]
    inner_loop: InnerLoopConfig,
    #[serde(default)]
    controller: ControllerConfig,
}

/// Fully resolved configuration for one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunConfig {
    pub airframe: AirframeParams,
    pub scenario: ScenarioConfig,
    pub turbulence: DrydenParams,
    pub guidance: GuidanceGains,
    pub inner_loop: InnerLoopConfig,
    pub controller: ControllerConfig,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base)
    }

    /// Parses `text`, resolving `params_file` against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_error(&e))?;
        let airframe = resolve_airframe(raw.airframe, base_dir)?;
        let cfg = Self {
            airframe,
            scenario: raw.scenario,
            turbulence: raw.turbulence,
            guidance: raw.guidance,
            inner_loop: raw.inner_loop,
            controller: raw.controller,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.airframe.validate()?;
        self.scenario.validate()?;
        if self.scenario.kind == ScenarioKind::TurbulenceOnset {
            self.turbulence.validate()?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config {
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn resolve_airframe(mut table: toml::Table, base_dir: &Path) -> Result<AirframeParams> {
    let mut merged = match table.remove("params_file") {
        None => toml::Table::new(),
        Some(toml::Value::String(file)) => {
            let file = PathBuf::from(file);
            let path = if file.is_absolute() {
                file
            } else {
                base_dir.join(file)
            };
            read(&path)?
                .parse::<toml::Table>()
                .map_err(|e| config_error(&e))?
        }
        Some(other) => {
            return Err(Error::Config {
                key: Some("params_file".into()),
                message: format!("params_file must be a string, got {}", other.type_str()),
            })
        }
    };
    merged.extend(table);
    let params: AirframeParams = merged.try_into().map_err(|e| config_error(&e))?;
    params.validate()?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml_str("", Path::new(".")).unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_named() {
        for (text, key) in [
            ("[scenario]\nbogus = 1\n", "bogus"),
            ("[controller.ladrc]\nk_x = 1.0\n", "k_x"),
            ("[airframe]\nmass = 2.0\n", "mass"),
            ("[nonsense]\n", "nonsense"),
        ] {
            match RunConfig::from_toml_str(text, Path::new(".")) {
                Err(Error::Config { key: Some(k), .. }) => assert_eq!(k, key),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn params_file_is_overlaid() {
        let dir = std::env::temp_dir().join(format!("mav-tec-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("plane.toml"), "m = 10.0\nS = 0.6\n").unwrap();
        let text = "[airframe]\nparams_file = \"plane.toml\"\nS = 0.7\n";
        let cfg = RunConfig::from_toml_str(text, &dir).unwrap();
        assert_eq!(cfg.airframe.m, 10.0);
        assert_eq!(cfg.airframe.s, 0.7);
        assert_eq!(cfg.airframe.jy, AirframeParams::aerosonde().jy);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn scenario_values_are_checked() {
        let text = "[scenario]\nkind = \"turbulence_onset\"\nonset = 70.0\nduration = 60.0\n";
        assert!(matches!(
            RunConfig::from_toml_str(text, Path::new(".")),
            Err(Error::Config { key: Some(k), .. }) if k == "onset"
        ));
        let text = "[scenario]\ndt = 0.0\n";
        assert!(RunConfig::from_toml_str(text, Path::new(".")).is_err());
    }

    #[test]
    fn controller_names_parse() {
        assert_eq!(
            "ladrc_tec".parse::<ControllerKind>().unwrap(),
            ControllerKind::LadrcTec
        );
        assert!("pid".parse::<ControllerKind>().is_err());
        let cfg =
            RunConfig::from_toml_str("[scenario]\ncontroller = \"tec_classic\"\n", Path::new(".")).unwrap();
        assert_eq!(cfg.scenario.controller, ControllerKind::TecClassic);
    }
}
