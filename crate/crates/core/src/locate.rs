//! Crack localization when the illumination frequency is unknown.
//!
//! Imaging at a working frequency `ω̂` places each crack at `(ω/ω̂) z_m`, so
//! every peak lies on the ray from the origin through the true center. A
//! probe scatterer placed at a known point `y` away from all those rays
//! shows up at `ŷ = (ω/ω̂) y`, which gives `ω`. Re-imaging at the estimate
//! recovers the true centers.
//!
//! The pipeline only sees data through [`MeasurementOracle`]; it never has
//! access to the true frequency.

use std::f64::consts::TAU;

use log::{debug, warn};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::forward::{add_noise, assemble_msr, with_probe, MsrMatrix};
use crate::geometry::{angular_distance, wrap_angle, Vec2};
use crate::imaging::{compute_map, extract_peaks_with, ImageMap, Peak, PeakList, PeakOptions};
use crate::scene::{DirectionSet, ImagingGrid, Scene};
use crate::spectral::{estimate_rank, svd, DEFAULT_RANK_THRESHOLD};

pub const DEFAULT_PROBE_RADIUS: f64 = 1.5;
/// 15 degrees.
pub const DEFAULT_MIN_ANGLE_GAP: f64 = std::f64::consts::PI / 12.0;
/// The stage-2 grid is widened to cover `probe_radius × GRID_MARGIN`.
pub const GRID_MARGIN: f64 = 1.1;

/// Which side of the origin a ray occupies, reported as `x>0`, `x<0`, `y>0` or `y<0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    XPositive,
    XNegative,
    YPositive,
    YNegative,
}

impl HalfPlane {
    pub fn as_str(self) -> &'static str {
        match self {
            HalfPlane::XPositive => "x>0",
            HalfPlane::XNegative => "x<0",
            HalfPlane::YPositive => "y>0",
            HalfPlane::YNegative => "y<0",
        }
    }
}

impl Serialize for HalfPlane {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Ray from the origin through a peak: `y = slope·x` restricted to a half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayLine {
    /// Radians in `[0, 2π)`.
    pub direction_angle: f64,
    pub source_peak: Vec2,
}

impl RayLine {
    pub fn through(peak: Vec2) -> Result<Self> {
        if peak == Vec2::ZERO || !peak.is_finite() {
            return Err(Error::invalid("ray through the origin is undefined"));
        }
        Ok(RayLine {
            direction_angle: peak.angle(),
            source_peak: peak,
        })
    }

    /// `None` for vertical rays.
    pub fn slope(&self) -> Option<f64> {
        if self.source_peak.x == 0.0 {
            None
        } else {
            Some(self.source_peak.y / self.source_peak.x)
        }
    }

    pub fn half_plane(&self) -> HalfPlane {
        let p = self.source_peak;
        match (p.x, p.y) {
            (x, _) if x > 0.0 => HalfPlane::XPositive,
            (x, _) if x < 0.0 => HalfPlane::XNegative,
            (_, y) if y > 0.0 => HalfPlane::YPositive,
            _ => HalfPlane::YNegative,
        }
    }
}

/// Rays fitted to a peak list, plus the peaks too close to the origin to define one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RayFit {
    pub rays: Vec<RayLine>,
    pub skipped: Vec<Vec2>,
}

/// One ray per peak. Peaks within `origin_tolerance` of the origin are skipped.
pub fn fit_rays(peaks: &[Peak], origin_tolerance: f64) -> RayFit {
    let mut fit = RayFit::default();
    for p in peaks {
        if p.location.norm() <= origin_tolerance {
            warn!(
                "peak at ({:.4}, {:.4}) is at the origin; no ray direction",
                p.location.x, p.location.y
            );
            fit.skipped.push(p.location);
            continue;
        }
        match RayLine::through(p.location) {
            Ok(ray) => fit.rays.push(ray),
            Err(_) => fit.skipped.push(p.location),
        }
    }
    fit
}

/// Accept a user-chosen probe if it clears every ray by `min_angle_gap`.
pub fn check_probe(probe: Vec2, rays: &[RayLine], min_angle_gap: f64) -> Result<Vec2> {
    if !probe.is_finite() || probe.norm() == 0.0 {
        return Err(Error::PlacementFailure(
            "probe must be a finite point away from the origin".into(),
        ));
    }
    for ray in rays {
        let gap = angular_distance(probe.angle(), ray.direction_angle);
        if gap < min_angle_gap {
            return Err(Error::PlacementFailure(format!(
                "probe ({}, {}) is {:.2}° from the ray through ({:.3}, {:.3}), need {:.2}°",
                probe.x,
                probe.y,
                gap.to_degrees(),
                ray.source_peak.x,
                ray.source_peak.y,
                min_angle_gap.to_degrees()
            )));
        }
    }
    Ok(probe)
}

/// Probe position `radius·(cos α, sin α)` where `α` maximizes the smallest
/// angular distance to every ray; ties go to the smallest `α` in `[0, 2π)`.
pub fn choose_probe(rays: &[RayLine], radius: f64, min_angle_gap: f64) -> Result<Vec2> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!(
            "probe radius must be positive, got {radius}"
        )));
    }
    if !(min_angle_gap >= 0.0 && min_angle_gap.is_finite()) {
        return Err(Error::invalid(format!(
            "minimum angle gap must be non-negative, got {min_angle_gap}"
        )));
    }
    if rays.is_empty() {
        return Ok(Vec2::new(radius, 0.0));
    }
    let mut angles: Vec<f64> = rays.iter().map(|r| wrap_angle(r.direction_angle)).collect();
    angles.sort_by(f64::total_cmp);

    // the optimum sits at the midpoint of the widest circular gap
    let mut best: Option<(f64, f64)> = None;
    for (k, &a) in angles.iter().enumerate() {
        let b = if k + 1 < angles.len() {
            angles[k + 1]
        } else {
            angles[0] + TAU
        };
        let alpha = wrap_angle(0.5 * (a + b));
        let gap = angles
            .iter()
            .map(|&r| angular_distance(alpha, r))
            .fold(f64::INFINITY, f64::min);
        best = match best {
            Some((g, al)) if gap < g - 1e-12 => Some((g, al)),
            Some((g, al)) if gap <= g + 1e-12 && al <= alpha => Some((g, al)),
            _ => Some((gap, alpha)),
        };
    }
    let (gap, alpha) = best.expect("at least one ray");
    if gap < min_angle_gap {
        return Err(Error::PlacementFailure(format!(
            "best probe direction is only {:.2}° from a crack ray, need {:.2}°",
            gap.to_degrees(),
            min_angle_gap.to_degrees()
        )));
    }
    Ok(Vec2::from_polar(radius, alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyEstimate {
    pub omega_est: f64,
    pub working_frequency: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_location: Option<Vec2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_peak: Option<Vec2>,
}

/// `ω ≈ ω̂ (ŷ·y) / |y|²`. The peak must lie within `angle_tolerance` of the
/// probe direction.
pub fn estimate_frequency(
    probe: Vec2,
    probe_peak: Vec2,
    omega_hat: f64,
    angle_tolerance: f64,
) -> Result<FrequencyEstimate> {
    if !(omega_hat > 0.0 && omega_hat.is_finite()) {
        return Err(Error::invalid(format!(
            "working frequency must be positive, got {omega_hat}"
        )));
    }
    if probe.norm() == 0.0 || !probe.is_finite() {
        return Err(Error::invalid("probe must be away from the origin"));
    }
    if probe_peak.norm() == 0.0 {
        return Err(Error::ProbeAssociation(
            "probe peak sits at the origin".into(),
        ));
    }
    let off = angular_distance(probe.angle(), probe_peak.angle());
    if off > angle_tolerance {
        return Err(Error::ProbeAssociation(format!(
            "probe peak is {:.2}° off the probe direction (tolerance {:.2}°)",
            off.to_degrees(),
            angle_tolerance.to_degrees()
        )));
    }
    let omega_est = omega_hat * probe_peak.dot(probe) / probe.norm_sq();
    if omega_est <= 0.0 {
        return Err(Error::ProbeAssociation(
            "non-positive frequency estimate".into(),
        ));
    }
    Ok(FrequencyEstimate {
        omega_est,
        working_frequency: omega_hat,
        probe_location: Some(probe),
        probe_peak: Some(probe_peak),
    })
}

/// Source of far-field data for a hidden scene.
pub trait MeasurementOracle {
    fn directions(&self) -> &DirectionSet;

    /// Far-field data of the hidden scene, with a probe scatterer at `probe`
    /// when given. Identical arguments must give identical data.
    fn measure(&self, probe: Option<Vec2>) -> Result<MsrMatrix>;
}

/// In-silico oracle: asymptotic far field plus seeded noise.
#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    scene: Scene,
    directions: DirectionSet,
    snr_db: f64,
    seed: u64,
}

impl SyntheticOracle {
    /// `snr_db = f64::INFINITY` gives noise-free data.
    pub fn new(scene: Scene, directions: DirectionSet, snr_db: f64, seed: u64) -> Self {
        SyntheticOracle {
            scene,
            directions,
            snr_db,
            seed,
        }
    }

    fn seed_for(&self, probe: Option<Vec2>) -> u64 {
        match probe {
            None => self.seed,
            Some(p) => {
                splitmix64(self.seed ^ p.x.to_bits().rotate_left(17) ^ splitmix64(p.y.to_bits()))
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl MeasurementOracle for SyntheticOracle {
    fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    fn measure(&self, probe: Option<Vec2>) -> Result<MsrMatrix> {
        let clean = match probe {
            None => assemble_msr(&self.scene, &self.directions)?,
            Some(y) => assemble_msr(&with_probe(&self.scene, y)?, &self.directions)?,
        };
        add_noise(&clean, self.snr_db, self.seed_for(probe))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocateConfig {
    pub rank_threshold: f64,
    pub peaks: PeakOptions,
    pub probe_radius: f64,
    pub min_angle_gap: f64,
    /// Treat `ω̂` as the true frequency and skip the probe stages.
    pub known_frequency: bool,
    /// Use this probe position instead of the automatic choice. It must
    /// still clear every crack ray by `min_angle_gap`.
    pub probe_location: Option<Vec2>,
}

impl Default for LocateConfig {
    fn default() -> Self {
        LocateConfig {
            rank_threshold: DEFAULT_RANK_THRESHOLD,
            peaks: PeakOptions::default(),
            probe_radius: DEFAULT_PROBE_RADIUS,
            min_angle_gap: DEFAULT_MIN_ANGLE_GAP,
            known_frequency: false,
            probe_location: None,
        }
    }
}

/// One measure → decompose → image → read-out pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImagingStage {
    pub omega_hat: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub realized_snr_db: Option<f64>,
    pub peaks: PeakList,
    #[serde(skip)]
    pub map: ImageMap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeStage {
    pub rays: Vec<RayLine>,
    pub skipped_peaks: Vec<Vec2>,
    pub probe: Vec2,
    pub imaging: ImagingStage,
    pub probe_peak: Peak,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub initial: ImagingStage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeStage>,
    pub estimate: FrequencyEstimate,
    #[serde(rename = "final")]
    pub final_stage: ImagingStage,
    pub centers: Vec<Vec2>,
}

fn image_stage(
    msr: &MsrMatrix,
    omega_hat: f64,
    grid: &ImagingGrid,
    config: &LocateConfig,
) -> Result<ImagingStage> {
    let dec = svd(msr)?;
    let rank = estimate_rank(dec.singular_values(), config.rank_threshold)?;
    if rank == 0 {
        return Err(Error::NoCracksDetected);
    }
    let map = compute_map(grid, omega_hat, &dec, rank, msr.directions())?;
    // one peak per detected scatterer; weaker maxima are direction-sampling sidelobes
    let opts = PeakOptions {
        max_peaks: Some(rank),
        ..config.peaks
    };
    let peaks = extract_peaks_with(&map, &opts)?;
    Ok(ImagingStage {
        omega_hat,
        singular_values: dec.singular_values().to_vec(),
        rank,
        realized_snr_db: msr.realized_snr_db(),
        peaks,
        map,
    })
}

/// Run the full unknown-frequency pipeline against `oracle`.
pub fn locate_cracks<O: MeasurementOracle + ?Sized>(
    oracle: &O,
    omega_hat: f64,
    grid: &ImagingGrid,
    config: &LocateConfig,
) -> Result<LocalizationReport> {
    grid.validate()?;
    let initial = image_stage(&oracle.measure(None)?, omega_hat, grid, config)?;
    debug!(
        "initial stage: rank {}, {} peaks",
        initial.rank,
        initial.peaks.len()
    );

    if config.known_frequency {
        return Ok(LocalizationReport {
            centers: initial.peaks.iter().map(|p| p.location).collect(),
            estimate: FrequencyEstimate {
                omega_est: omega_hat,
                working_frequency: omega_hat,
                probe_location: None,
                probe_peak: None,
            },
            final_stage: initial.clone(),
            initial,
            probe: None,
        });
    }

    let fit = fit_rays(&initial.peaks, grid.step);
    let probe = match config.probe_location {
        Some(y) => check_probe(y, &fit.rays, config.min_angle_gap)?,
        None => choose_probe(&fit.rays, config.probe_radius, config.min_angle_gap)?,
    };
    let probe_grid = grid.expanded_to_contain(probe.norm() * GRID_MARGIN);
    let probed = image_stage(
        &oracle.measure(Some(probe))?,
        omega_hat,
        &probe_grid,
        config,
    )?;

    let sep = config.peaks.min_separation;
    let probe_angle = probe.angle();
    let probe_peak = probed
        .peaks
        .iter()
        .filter(|p| {
            initial
                .peaks
                .iter()
                .all(|q| q.location.distance(p.location) > sep)
        })
        .filter(|p| p.location.norm() > 0.0)
        .min_by(|a, b| {
            angular_distance(a.location.angle(), probe_angle)
                .total_cmp(&angular_distance(b.location.angle(), probe_angle))
        })
        .copied()
        .ok_or_else(|| {
            let seen: Vec<String> = probed
                .peaks
                .iter()
                .map(|p| format!("({:.3}, {:.3})", p.location.x, p.location.y))
                .collect();
            Error::ProbePeakNotFound(format!(
                "probe at ({:.3}, {:.3}), rank {}, peaks [{}]",
                probe.x,
                probe.y,
                probed.rank,
                seen.join(", ")
            ))
        })?;

    let estimate = estimate_frequency(
        probe,
        probe_peak.location,
        omega_hat,
        0.5 * config.min_angle_gap,
    )?;
    debug!("frequency estimate {:.5}", estimate.omega_est);

    let final_stage = image_stage(&oracle.measure(None)?, estimate.omega_est, grid, config)?;
    Ok(LocalizationReport {
        centers: final_stage.peaks.iter().map(|p| p.location).collect(),
        initial,
        probe: Some(ProbeStage {
            rays: fit.rays,
            skipped_peaks: fit.skipped,
            probe,
            imaging: probed,
            probe_peak,
        }),
        estimate,
        final_stage,
    })
}

/// Worst distance from a true center to its nearest estimate
/// (`∞` if there are no estimates).
pub fn localization_error(estimates: &[Vec2], truth: &[Vec2]) -> f64 {
    truth
        .iter()
        .map(|t| {
            estimates
                .iter()
                .map(|e| e.distance(*t))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}
