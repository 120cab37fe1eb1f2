//! JSON run configuration.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crackloc::imaging::{PeakOptions, DEFAULT_MIN_PEAK_SEPARATION, DEFAULT_PEAK_THRESHOLD};
use crackloc::locate::{LocateConfig, DEFAULT_PROBE_RADIUS};
use crackloc::scene::{Crack, DirectionSet, ImagingGrid, Scene, DEFAULT_SEPARATION_FACTOR};
use crackloc::spectral::DEFAULT_RANK_THRESHOLD;
use crackloc::Vec2;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// serde_json reports line and column.
    #[error("{0}")]
    Parse(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Image,
    Predict,
    Locate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Image => "image",
            Mode::Predict => "predict",
            Mode::Locate => "locate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackSpec {
    pub center: [f64; 2],
    #[serde(default)]
    pub orientation: f64,
    /// Overrides the scene half-length for this crack.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    /// Exactly one of `wavelength` and `omega` must be set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub half_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_separation: Option<f64>,
    /// Cracks must satisfy `ℓ < ratio · λ`.
    #[serde(default = "default_small_ratio")]
    pub max_half_length_ratio: f64,
    pub cracks: Vec<CrackSpec>,
}

fn default_small_ratio() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub scene: SceneSpec,
    #[serde(default = "default_directions")]
    pub directions: usize,
    pub omega_hat: Vec<f64>,
    #[serde(default)]
    pub grid: ImagingGrid,
    /// `null` or absent for noise-free data.
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rank_threshold")]
    pub rank_threshold: f64,
    #[serde(default = "default_peak_threshold")]
    pub peak_threshold: f64,
    #[serde(default = "default_min_peak_separation")]
    pub min_peak_separation: f64,
    #[serde(default = "default_true")]
    pub refine_peaks: bool,
    #[serde(default = "default_probe_radius")]
    pub probe_radius: f64,
    #[serde(default = "default_min_angle_gap_deg")]
    pub min_angle_gap_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_location: Option<[f64; 2]>,
    #[serde(default)]
    pub known_frequency: bool,
}

fn default_directions() -> usize {
    20
}
fn default_rank_threshold() -> f64 {
    DEFAULT_RANK_THRESHOLD
}
fn default_peak_threshold() -> f64 {
    DEFAULT_PEAK_THRESHOLD
}
fn default_min_peak_separation() -> f64 {
    DEFAULT_MIN_PEAK_SEPARATION
}
fn default_true() -> bool {
    true
}
fn default_probe_radius() -> f64 {
    DEFAULT_PROBE_RADIUS
}
fn default_min_angle_gap_deg() -> f64 {
    15.0
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scene()?;
        self.direction_set()?;
        if self.omega_hat.is_empty() {
            return Err(field_err(
                "omega_hat",
                "needs at least one working frequency",
            ));
        }
        for (i, w) in self.omega_hat.iter().enumerate() {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(field_err(
                    format!("omega_hat[{i}]"),
                    format!("must be positive, got {w}"),
                ));
            }
        }
        self.grid.validate().map_err(|e| field_err("grid", e))?;
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(field_err(
                    "snr_db",
                    "must be finite (use null for noise-free data)",
                ));
            }
        }
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(field_err(name, format!("must lie in (0, 1), got {v}")))
            }
        };
        unit("rank_threshold", self.rank_threshold)?;
        unit("peak_threshold", self.peak_threshold)?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(field_err(name, format!("must be positive, got {v}")))
            }
        };
        positive("min_peak_separation", self.min_peak_separation)?;
        positive("probe_radius", self.probe_radius)?;
        if !(self.min_angle_gap_deg >= 0.0 && self.min_angle_gap_deg < 180.0) {
            return Err(field_err(
                "min_angle_gap_deg",
                format!("must lie in [0, 180), got {}", self.min_angle_gap_deg),
            ));
        }
        if let Some(p) = self.probe_location {
            if !(p[0].is_finite() && p[1].is_finite()) || (p[0] == 0.0 && p[1] == 0.0) {
                return Err(field_err(
                    "probe_location",
                    "must be a finite point away from the origin",
                ));
            }
        }
        Ok(())
    }

    pub fn true_frequency(&self) -> Result<f64, ConfigError> {
        let s = &self.scene;
        let omega = match (s.wavelength, s.omega) {
            (Some(l), None) if l > 0.0 && l.is_finite() => std::f64::consts::TAU / l,
            (Some(l), None) => {
                return Err(field_err(
                    "scene.wavelength",
                    format!("must be positive, got {l}"),
                ))
            }
            (None, Some(w)) if w > 0.0 && w.is_finite() => w,
            (None, Some(w)) => {
                return Err(field_err(
                    "scene.omega",
                    format!("must be positive, got {w}"),
                ))
            }
            _ => {
                return Err(field_err(
                    "scene",
                    "set exactly one of `wavelength` and `omega`",
                ))
            }
        };
        Ok(omega)
    }

    pub fn scene(&self) -> Result<Scene, ConfigError> {
        let s = &self.scene;
        let omega = self.true_frequency()?;
        let ell_ok = |ell: f64| ell > 0.0 && ell < 2.0;
        if !ell_ok(s.half_length) {
            return Err(field_err(
                "scene.half_length",
                format!("must lie in (0, 2), got {}", s.half_length),
            ));
        }
        if s.max_half_length_ratio.is_nan() || s.max_half_length_ratio <= 0.0 {
            return Err(field_err("scene.max_half_length_ratio", "must be positive"));
        }
        let mut cracks = Vec::with_capacity(s.cracks.len());
        for (i, c) in s.cracks.iter().enumerate() {
            let ell = c.half_length.unwrap_or(s.half_length);
            if !ell_ok(ell) {
                return Err(field_err(
                    format!("scene.cracks[{i}].half_length"),
                    format!("must lie in (0, 2), got {ell}"),
                ));
            }
            let crack = Crack::new(Vec2::from(c.center), ell, c.orientation)
                .map_err(|e| field_err(format!("scene.cracks[{i}]"), e))?;
            cracks.push(crack);
        }
        let largest = cracks
            .iter()
            .map(|c| c.half_length)
            .fold(s.half_length, f64::max);
        let sep = s
            .min_separation
            .unwrap_or(DEFAULT_SEPARATION_FACTOR * largest);
        let scene = Scene::with_min_separation(cracks, omega, sep)
            .map_err(|e| field_err("scene.cracks", e))?;
        scene
            .check_small_cracks(s.max_half_length_ratio)
            .map_err(|e| field_err("scene.cracks", e))?;
        Ok(scene)
    }

    pub fn direction_set(&self) -> Result<DirectionSet, ConfigError> {
        DirectionSet::uniform(self.directions).map_err(|e| field_err("directions", e))
    }

    /// `+∞` when noise is disabled.
    pub fn snr(&self) -> f64 {
        self.snr_db.unwrap_or(f64::INFINITY)
    }

    pub fn peak_options(&self) -> PeakOptions {
        PeakOptions {
            relative_threshold: self.peak_threshold,
            min_separation: self.min_peak_separation,
            refine: self.refine_peaks,
            max_peaks: None,
        }
    }

    pub fn locate_config(&self) -> LocateConfig {
        LocateConfig {
            rank_threshold: self.rank_threshold,
            peaks: self.peak_options(),
            probe_radius: self.probe_radius,
            min_angle_gap: self.min_angle_gap_deg.to_radians(),
            known_frequency: self.known_frequency,
            probe_location: self.probe_location.map(Vec2::from),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "scene": { "wavelength": 0.4, "half_length": 0.05,
                   "cracks": [ { "center": [0.1, 0.2] } ] },
        "omega_hat": [20]
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.directions, 20);
        assert_eq!(cfg.grid, ImagingGrid::default());
        assert_eq!(cfg.snr(), f64::INFINITY);
        assert_eq!(cfg.rank_threshold, 0.1);
        assert!(
            (cfg.locate_config().min_angle_gap - crackloc::locate::DEFAULT_MIN_ANGLE_GAP).abs()
                < 1e-15
        );
        assert!((cfg.true_frequency().unwrap() - 15.707963267948966).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let text = MINIMAL.replace("\"omega_hat\"", "\"omega_hats\": [1], \"omega_hat\"");
        let err = RunConfig::from_json(&text).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("unknown field") && msg.contains("line"),
            "{msg}"
        );
    }

    #[test]
    fn field_diagnostics() {
        let bad = MINIMAL.replace("[20]", "[20, -1]");
        assert!(RunConfig::from_json(&bad)
            .unwrap_err()
            .to_string()
            .starts_with("omega_hat[1]"));
        let bad = MINIMAL.replace("\"wavelength\": 0.4", "\"wavelength\": 0.4, \"omega\": 3");
        assert!(RunConfig::from_json(&bad)
            .unwrap_err()
            .to_string()
            .starts_with("scene:"));
        let bad = MINIMAL.replace("[0.1, 0.2] }", "[0.1, 0.2] }, { \"center\": [0.1, 0.25] }");
        assert!(RunConfig::from_json(&bad)
            .unwrap_err()
            .to_string()
            .starts_with("scene.cracks"));
        let bad = MINIMAL.replace("\"half_length\": 0.05", "\"half_length\": 0.2");
        assert!(RunConfig::from_json(&bad)
            .unwrap_err()
            .to_string()
            .starts_with("scene.cracks"));
        let bad = MINIMAL.replace("\"omega_hat\"", "\"directions\": 2, \"omega_hat\"");
        assert!(RunConfig::from_json(&bad)
            .unwrap_err()
            .to_string()
            .starts_with("directions"));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
