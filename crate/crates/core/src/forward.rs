//! Far-field data synthesis from the small-crack asymptotic expansion.
//!
//! Each crack contributes `-(2π / ln(ℓ/2)) · exp(iω(θ - x̂)·z)` to the far
//! field; the `O(1/|ln ℓ|²)` remainder is dropped.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scene::{Crack, DirectionSet, Scene};

/// Half-length given to a probe added to a scene that has no cracks yet.
pub const DEFAULT_PROBE_HALF_LENGTH: f64 = 0.05;

/// Multi-static response matrix: entry `(j, l)` is the far field observed in
/// direction `-θ_j` for incidence `θ_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct MsrMatrix {
    entries: DMatrix<Complex64>,
    directions: DirectionSet,
    realized_snr_db: Option<f64>,
}

impl MsrMatrix {
    pub fn new(entries: DMatrix<Complex64>, directions: DirectionSet) -> Result<Self> {
        let n = directions.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::invalid(format!(
                "MSR matrix is {}x{}, direction set has {n} entries",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(MsrMatrix {
            entries,
            directions,
            realized_snr_db: None,
        })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// SNR actually realized by [`add_noise`], `None` for noise-free data.
    pub fn realized_snr_db(&self) -> Option<f64> {
        self.realized_snr_db
    }

    /// Largest `|K(j,l) - K(l,j)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.size();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for l in j + 1..n {
                worst = worst.max((self.entries[(j, l)] - self.entries[(l, j)]).norm());
            }
        }
        worst
    }
}

/// Coupling coefficient `-2π / ln(ℓ/2)`; requires `0 < ℓ < 2`.
pub fn coupling_coefficient(half_length: f64) -> Result<f64> {
    if !(half_length > 0.0 && half_length < 2.0) {
        return Err(Error::invalid(format!(
            "asymptotic far field needs 0 < ℓ < 2, got ℓ = {half_length}"
        )));
    }
    Ok(-TAU / (half_length / 2.0).ln())
}

/// Far-field pattern for one observation/incidence pair.
pub fn far_field(observation: Vec2, incident: Vec2, scene: &Scene) -> Result<Complex64> {
    let omega = scene.true_frequency();
    let shift = incident - observation;
    scene
        .cracks()
        .iter()
        .try_fold(Complex64::new(0.0, 0.0), |acc, crack| {
            let c = coupling_coefficient(crack.half_length)?;
            Ok(acc + c * Complex64::cis(omega * shift.dot(crack.center)))
        })
}

/// Noise-free MSR matrix of `scene` for the given direction set.
pub fn assemble_msr(scene: &Scene, directions: &DirectionSet) -> Result<MsrMatrix> {
    let n = directions.len();
    let omega = scene.true_frequency();
    let coeffs = scene
        .cracks()
        .iter()
        .map(|c| coupling_coefficient(c.half_length))
        .collect::<Result<Vec<_>>>()?;
    // entry(j,l) = Σ_m c_m e^{iωθ_j·z_m} e^{iωθ_l·z_m}
    let phases: Vec<Vec<Complex64>> = scene
        .cracks()
        .iter()
        .map(|crack| {
            directions
                .iter()
                .map(|theta| Complex64::cis(omega * theta.dot(crack.center)))
                .collect()
        })
        .collect();
    let entries = DMatrix::from_fn(n, n, |j, l| {
        phases
            .iter()
            .zip(&coeffs)
            .map(|(p, &c)| c * p[j] * p[l])
            .sum()
    });
    MsrMatrix::new(entries, directions.clone())
}

/// Add circular white Gaussian noise at `snr_db` (Frobenius-norm SNR, in
/// expectation). `f64::INFINITY` returns the input unchanged. Deterministic
/// for a given seed.
pub fn add_noise(msr: &MsrMatrix, snr_db: f64, seed: u64) -> Result<MsrMatrix> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::invalid(format!(
            "SNR must be finite or +inf, got {snr_db}"
        )));
    }
    if snr_db == f64::INFINITY {
        return Ok(msr.clone());
    }
    let n = msr.size();
    let signal = msr.frobenius_norm();
    // E‖E‖_F² = 2 n² σ² = ‖K‖_F² / 10^(snr/10)
    let sigma = signal / (2.0 * (n * n) as f64 * 10f64.powf(snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // column-major fill order is part of the determinism contract
    let noise = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(sigma * re, sigma * im)
    });
    let noise_power: f64 = noise.iter().map(|z| z.norm_sqr()).sum();
    let realized = if noise_power > 0.0 {
        Some(10.0 * (signal * signal / noise_power).log10())
    } else {
        None
    };
    Ok(MsrMatrix {
        entries: &msr.entries + noise,
        directions: msr.directions.clone(),
        realized_snr_db: realized,
    })
}

/// A copy of `scene` with a probe scatterer at `location`, sized like the
/// existing cracks.
pub fn with_probe(scene: &Scene, location: Vec2) -> Result<Scene> {
    if !location.is_finite() {
        return Err(Error::InvalidPlacement(
            "probe location must be finite".into(),
        ));
    }
    let min_sep = scene.min_separation();
    if let Some((i, c)) = scene
        .cracks()
        .iter()
        .enumerate()
        .find(|(_, c)| c.center.distance(location) <= min_sep)
    {
        return Err(Error::InvalidPlacement(format!(
            "probe at ({}, {}) overlaps crack {i} at ({}, {})",
            location.x, location.y, c.center.x, c.center.y
        )));
    }
    let half_length = scene
        .cracks()
        .first()
        .map_or(DEFAULT_PROBE_HALF_LENGTH, |c| c.half_length);
    let mut cracks = scene.cracks().to_vec();
    cracks.push(Crack::new(location, half_length, 0.0)?);
    Scene::with_min_separation(cracks, scene.true_frequency(), min_sep)
        .map_err(|e| Error::InvalidPlacement(e.to_string()))
}
