//! JSON documents written by each mode.
//!
//! These mirror the library report types, but with plain arrays for points and
//! file names for the maps, so that they deserialize without the library.

use serde::{Deserialize, Serialize};

use crackloc::imaging::Peak;
use crackloc::locate::{ImagingStage, RayLine};

use crate::config::{Mode, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakDoc {
    pub location: [f64; 2],
    /// Fraction of the map maximum.
    pub value: f64,
}

impl From<&Peak> for PeakDoc {
    fn from(p: &Peak) -> Self {
        PeakDoc {
            location: p.location.into(),
            value: p.value,
        }
    }
}

pub fn peak_docs(peaks: &[Peak]) -> Vec<PeakDoc> {
    peaks.iter().map(PeakDoc::from).collect()
}

/// Files written for one map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFiles {
    pub csv: String,
    pub normalized_csv: String,
    pub pgm: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub mode: Mode,
    pub seed: u64,
    pub directions: usize,
    pub realized_snr_db: Option<f64>,
    pub singular_values: Vec<f64>,
    pub estimated_rank: usize,
    pub symmetry_defect: f64,
    pub msr_csv: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub omega_hat: f64,
    pub files: MapFiles,
    pub peaks: Vec<PeakDoc>,
    /// Predict mode only: the rescaled centers `(ω/ω̂)·z`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaled_centers: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub mode: Mode,
    /// Absent in predict mode, which uses no measured data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized_snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_rank: Option<usize>,
    pub maps: Vec<MapReport>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDoc {
    pub omega_hat: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub realized_snr_db: Option<f64>,
    pub peaks: Vec<PeakDoc>,
    pub files: MapFiles,
}

impl StageDoc {
    pub fn new(stage: &ImagingStage, files: MapFiles) -> Self {
        StageDoc {
            omega_hat: stage.omega_hat,
            singular_values: stage.singular_values.clone(),
            rank: stage.rank,
            realized_snr_db: stage.realized_snr_db,
            peaks: peak_docs(&stage.peaks),
            files,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayDoc {
    pub through: [f64; 2],
    /// Radians in `[0, 2π)`.
    pub angle: f64,
    /// `null` for vertical rays.
    pub slope: Option<f64>,
    pub half_plane: String,
}

impl From<&RayLine> for RayDoc {
    fn from(r: &RayLine) -> Self {
        RayDoc {
            through: r.source_peak.into(),
            angle: r.direction_angle,
            slope: r.slope(),
            half_plane: r.half_plane().as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeDoc {
    pub location: [f64; 2],
    pub rays: Vec<RayDoc>,
    pub skipped_peaks: Vec<[f64; 2]>,
    pub stage: StageDoc,
    pub probe_peak: PeakDoc,
}

/// Scores against the simulated ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub true_frequency: f64,
    pub frequency_relative_error: f64,
    pub initial_error: f64,
    pub final_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocateReport {
    pub mode: Mode,
    pub seed: u64,
    pub working_frequency: f64,
    pub omega_est: f64,
    pub initial: StageDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeDoc>,
    #[serde(rename = "final")]
    pub final_stage: StageDoc,
    pub centers: Vec<[f64; 2]>,
    pub evaluation: Evaluation,
    pub config: RunConfig,
}
