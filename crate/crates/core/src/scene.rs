//! Scene geometry: cracks, illumination directions and imaging grids.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Default minimum center separation, in multiples of the half-length.
pub const DEFAULT_SEPARATION_FACTOR: f64 = 4.0;

/// A small linear crack of length `2 * half_length`.
///
/// The orientation never enters the far-field asymptotics; it is kept for
/// scene description and reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crack {
    pub center: Vec2,
    pub half_length: f64,
    /// Radians in `[0, π)`.
    pub orientation: f64,
}

impl Crack {
    pub fn new(center: Vec2, half_length: f64, orientation: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidScene("crack center must be finite".into()));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "crack half-length must be positive, got {half_length}"
            )));
        }
        if !orientation.is_finite() {
            return Err(Error::InvalidScene(
                "crack orientation must be finite".into(),
            ));
        }
        Ok(Crack {
            center,
            half_length,
            orientation: orientation.rem_euclid(PI),
        })
    }

    /// Segment endpoints `center ± half_length·(cos φ, sin φ)`.
    pub fn endpoints(&self) -> (Vec2, Vec2) {
        let d = Vec2::from_polar(self.half_length, self.orientation);
        (self.center - d, self.center + d)
    }
}

/// An ordered collection of cracks illuminated at one angular frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    cracks: Vec<Crack>,
    true_frequency: f64,
    min_separation: f64,
}

impl Scene {
    /// Build a scene using the default minimum separation of
    /// `4 × (largest half-length)`.
    pub fn new(cracks: Vec<Crack>, true_frequency: f64) -> Result<Self> {
        let ell = cracks.iter().map(|c| c.half_length).fold(0.0, f64::max);
        Self::with_min_separation(cracks, true_frequency, DEFAULT_SEPARATION_FACTOR * ell)
    }

    pub fn with_min_separation(
        cracks: Vec<Crack>,
        true_frequency: f64,
        min_separation: f64,
    ) -> Result<Self> {
        if !(true_frequency > 0.0 && true_frequency.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "angular frequency must be positive, got {true_frequency}"
            )));
        }
        if !(min_separation >= 0.0 && min_separation.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "minimum separation must be non-negative, got {min_separation}"
            )));
        }
        for (i, a) in cracks.iter().enumerate() {
            for (j, b) in cracks.iter().enumerate().skip(i + 1) {
                let d = a.center.distance(b.center);
                if d <= min_separation {
                    return Err(Error::InvalidScene(format!(
                        "cracks {i} and {j} are {d:.4} apart, minimum separation is {min_separation:.4}"
                    )));
                }
            }
        }
        Ok(Scene {
            cracks,
            true_frequency,
            min_separation,
        })
    }

    pub fn cracks(&self) -> &[Crack] {
        &self.cracks
    }

    pub fn true_frequency(&self) -> f64 {
        self.true_frequency
    }

    pub fn wavelength(&self) -> f64 {
        TAU / self.true_frequency
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn len(&self) -> usize {
        self.cracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cracks.is_empty()
    }

    /// Crack centers in scene order.
    pub fn crack_centers(&self) -> Vec<Vec2> {
        self.cracks.iter().map(|c| c.center).collect()
    }

    /// Check the small-crack regime `ℓ < ratio · λ` for every crack.
    pub fn check_small_cracks(&self, ratio: f64) -> Result<()> {
        let limit = ratio * self.wavelength();
        match self.cracks.iter().position(|c| c.half_length >= limit) {
            Some(i) => Err(Error::InvalidScene(format!(
                "crack {i} half-length {} is not small against the wavelength (limit {limit:.4})",
                self.cracks[i].half_length
            ))),
            None => Ok(()),
        }
    }

    /// The three-crack scene used throughout the reference experiment:
    /// `ℓ = 0.05`, `λ = 0.4`. Rotations are taken about each crack's center.
    pub fn reference_example() -> Self {
        let ell = 0.05;
        let cracks = vec![
            Crack::new(Vec2::new(-0.6, -0.2), ell, 0.0),
            Crack::new(Vec2::new(0.4, 0.35), ell, PI / 4.0 + PI / 4.0),
            Crack::new(Vec2::new(0.25, -0.6), ell, PI / 4.0 + 7.0 * PI / 6.0),
        ]
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .expect("reference cracks are valid");
        Scene::new(cracks, TAU / 0.4).expect("reference scene is valid")
    }
}

/// Incident directions `θ_n` on the unit circle; observation directions are `-θ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Vec2>,
}

impl DirectionSet {
    /// `θ_k = [cos(2πk/n), sin(2πk/n)]` for `k = 1..=n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!(
                "need at least 3 directions, got {n}"
            )));
        }
        let directions = (1..=n)
            .map(|k| Vec2::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        Ok(DirectionSet { directions })
    }

    /// Arbitrary unit directions. Each must have unit norm and all must be distinct.
    pub fn from_vectors(directions: Vec<Vec2>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::invalid("direction set is empty"));
        }
        for (i, d) in directions.iter().enumerate() {
            if (d.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("direction {i} is not unit-norm")));
            }
            if directions[..i].iter().any(|e| e.distance(*d) < 1e-12) {
                return Err(Error::invalid(format!("direction {i} is repeated")));
            }
        }
        Ok(DirectionSet { directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn as_slice(&self) -> &[Vec2] {
        &self.directions
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec2> {
        self.directions.iter()
    }
}

/// Shorthand for [`DirectionSet::uniform`].
pub fn uniform_directions(n: usize) -> Result<DirectionSet> {
    DirectionSet::uniform(n)
}

/// Rectangular sampling grid for image maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingGrid {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub step: f64,
}

impl Default for ImagingGrid {
    fn default() -> Self {
        ImagingGrid {
            x_range: [-1.0, 1.0],
            y_range: [-1.0, 1.0],
            step: 0.02,
        }
    }
}

impl ImagingGrid {
    /// A grid over `x_range × y_range`. Ranges may collapse to a single point.
    pub fn new(x_range: [f64; 2], y_range: [f64; 2], step: f64) -> Result<Self> {
        let grid = ImagingGrid {
            x_range,
            y_range,
            step,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn square(half_width: f64, step: f64) -> Result<Self> {
        Self::new([-half_width, half_width], [-half_width, half_width], step)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid(format!(
                "grid step must be positive, got {}",
                self.step
            )));
        }
        for (name, r) in [("x", self.x_range), ("y", self.y_range)] {
            if !(r[0].is_finite() && r[1].is_finite()) || r[1] < r[0] {
                return Err(Error::invalid(format!(
                    "grid {name} range [{}, {}] is empty or non-finite",
                    r[0], r[1]
                )));
            }
        }
        Ok(())
    }

    fn axis_count(range: [f64; 2], step: f64) -> usize {
        // tolerate representation error in (max - min) / step
        ((range[1] - range[0]) / step + 1e-9).floor() as usize + 1
    }

    pub fn nx(&self) -> usize {
        Self::axis_count(self.x_range, self.step)
    }

    pub fn ny(&self) -> usize {
        Self::axis_count(self.y_range, self.step)
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x_range[0] + i as f64 * self.step
    }

    pub fn y_at(&self, j: usize) -> f64 {
        self.y_range[0] + j as f64 * self.step
    }

    /// Point at column `i`, row `j`.
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.x_at(i), self.y_at(j))
    }

    /// Smallest concentric-step extension of this grid that contains the
    /// square `[-half_width, half_width]²`. Keeps the same lattice origin
    /// and step, so existing sample points are preserved.
    pub fn expanded_to_contain(&self, half_width: f64) -> ImagingGrid {
        let s = self.step;
        let grow = |r: [f64; 2]| {
            let lo = if r[0] > -half_width {
                r[0] - ((r[0] + half_width) / s).ceil() * s
            } else {
                r[0]
            };
            let hi = if r[1] < half_width {
                r[1] + ((half_width - r[1]) / s).ceil() * s
            } else {
                r[1]
            };
            [lo, hi]
        };
        ImagingGrid {
            x_range: grow(self.x_range),
            y_range: grow(self.y_range),
            step: s,
        }
    }
}
