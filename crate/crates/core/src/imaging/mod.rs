//! Subspace-migration imaging.
//!
//! The imaging functional at a trial point `x` and working frequency `ω̂` is
//!
//! ```text
//! F(x; ω̂) = | Σ_{m<rank} ⟨W(x; ω̂), U_m⟩ · ⟨W(x; ω̂), conj(V_m)⟩ |,   ⟨a, b⟩ = conj(a)·b
//! ```
//!
//! where `W(x; ω̂)_n = exp(i ω̂ θ_n·x) / √N`. For uniform directions the map
//! is close to `Σ_m J₀(ω̂ |x - (ω/ω̂) z_m|)²`, so imaging at the wrong
//! frequency rescales every peak by `ω/ω̂` about the origin;
//! [`predicted_map`] evaluates that prediction directly.

mod peaks;

pub use peaks::{
    extract_peaks, extract_peaks_with, Peak, PeakList, PeakOptions, DEFAULT_MIN_PEAK_SEPARATION,
    DEFAULT_PEAK_THRESHOLD,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::bessel::j0_finite;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::par::{fill_grid, Execution};
use crate::scene::{DirectionSet, ImagingGrid, Scene};
use crate::spectral::SvdResult;

/// Normalized plane-wave steering vector `W(x; ω̂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Vec<Complex64>);

impl SteeringVector {
    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self, other⟩ = Σ conj(self_n) · other_n`.
    pub fn inner<'a, I>(&self, other: I) -> Complex64
    where
        I: IntoIterator<Item = &'a Complex64>,
    {
        self.0.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `W(x; ω̂)_n = exp(i ω̂ θ_n·x) / √N`.
pub fn steering_vector(x: Vec2, omega_hat: f64, directions: &DirectionSet) -> SteeringVector {
    let scale = 1.0 / (directions.len() as f64).sqrt();
    SteeringVector(
        directions
            .iter()
            .map(|theta| Complex64::from_polar(scale, omega_hat * theta.dot(x)))
            .collect(),
    )
}

/// Real-valued field sampled on an [`ImagingGrid`], row-major with `y` outer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageMap {
    grid: ImagingGrid,
    values: Vec<f64>,
    evaluation_frequency: f64,
}

impl ImageMap {
    pub fn new(grid: ImagingGrid, values: Vec<f64>, evaluation_frequency: f64) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "map has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(ImageMap {
            grid,
            values,
            evaluation_frequency,
        })
    }

    pub fn grid(&self) -> &ImagingGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn evaluation_frequency(&self) -> f64 {
        self.evaluation_frequency
    }

    pub fn nx(&self) -> usize {
        self.grid.nx()
    }

    pub fn ny(&self) -> usize {
        self.grid.ny()
    }

    /// Value at column `i`, row `j`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx() + i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Grid location of the global maximum (first in row-major order).
    pub fn argmax(&self) -> Vec2 {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        let nx = self.nx();
        self.grid.point(best % nx, best / nx)
    }

    /// Copy scaled so the maximum is 1. An all-zero map is returned as is.
    pub fn normalized(&self) -> ImageMap {
        let max = self.max();
        let values = if max > 0.0 {
            self.values.iter().map(|v| v / max).collect()
        } else {
            self.values.clone()
        };
        ImageMap {
            grid: self.grid,
            values,
            evaluation_frequency: self.evaluation_frequency,
        }
    }
}

fn check_omega(omega_hat: f64) -> Result<()> {
    if omega_hat > 0.0 && omega_hat.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "working frequency must be positive, got {omega_hat}"
        )))
    }
}

/// Precomputed signal-subspace projector for repeated map evaluation.
struct Migration<'a> {
    directions: &'a DirectionSet,
    omega_hat: f64,
    /// `U_m` for m < rank, each of length N.
    left: Vec<Vec<Complex64>>,
    /// `conj(V_m)` for m < rank.
    right_conj: Vec<Vec<Complex64>>,
}

impl<'a> Migration<'a> {
    fn new(
        omega_hat: f64,
        svd: &SvdResult,
        rank: usize,
        directions: &'a DirectionSet,
        allow_zero_rank: bool,
    ) -> Result<Self> {
        check_omega(omega_hat)?;
        let n = directions.len();
        if svd.left_vectors().nrows() != n {
            return Err(Error::invalid(format!(
                "SVD has length-{} vectors, direction set has {n}",
                svd.left_vectors().nrows()
            )));
        }
        let min_rank = usize::from(!allow_zero_rank);
        if rank < min_rank || rank > n || rank > svd.len() {
            return Err(Error::invalid(format!(
                "rank must lie in [{min_rank}, {n}], got {rank}"
            )));
        }
        let left = (0..rank)
            .map(|m| svd.left_vectors().column(m).iter().copied().collect())
            .collect();
        let right_conj = (0..rank)
            .map(|m| {
                svd.right_vectors()
                    .column(m)
                    .iter()
                    .map(|z| z.conj())
                    .collect()
            })
            .collect();
        Ok(Migration {
            directions,
            omega_hat,
            left,
            right_conj,
        })
    }

    fn value(&self, x: Vec2) -> f64 {
        if self.left.is_empty() {
            return 0.0;
        }
        let w = steering_vector(x, self.omega_hat, self.directions);
        self.left
            .iter()
            .zip(&self.right_conj)
            .map(|(u, v_bar)| w.inner(u) * w.inner(v_bar))
            .sum::<Complex64>()
            .norm()
    }
}

/// `F(x; ω̂)` using the leading `rank` singular triplets (`1 ≤ rank ≤ N`).
pub fn imaging_value(
    x: Vec2,
    omega_hat: f64,
    svd: &SvdResult,
    rank: usize,
    directions: &DirectionSet,
) -> Result<f64> {
    Ok(Migration::new(omega_hat, svd, rank, directions, false)?.value(x))
}

/// Raw (unnormalized) `F(·; ω̂)` over the grid. `rank = 0` yields an all-zero map.
pub fn compute_map(
    grid: &ImagingGrid,
    omega_hat: f64,
    svd: &SvdResult,
    rank: usize,
    directions: &DirectionSet,
) -> Result<ImageMap> {
    compute_map_with(grid, omega_hat, svd, rank, directions, Execution::default())
}

/// [`compute_map`] with an explicit execution strategy.
pub fn compute_map_with(
    grid: &ImagingGrid,
    omega_hat: f64,
    svd: &SvdResult,
    rank: usize,
    directions: &DirectionSet,
    exec: Execution,
) -> Result<ImageMap> {
    grid.validate()?;
    let mig = Migration::new(omega_hat, svd, rank, directions, true)?;
    let values = fill_grid(grid.nx(), grid.ny(), exec, |i, j| {
        mig.value(grid.point(i, j))
    });
    ImageMap::new(*grid, values, omega_hat)
}

/// Scaled peak positions `(ω/ω̂) z_m`.
pub fn scaled_centers(scene: &Scene, omega_hat: f64) -> Vec<Vec2> {
    let ratio = scene.true_frequency() / omega_hat;
    scene
        .crack_centers()
        .into_iter()
        .map(|z| ratio * z)
        .collect()
}

/// `Σ_m J₀(ω̂ |x - ẑ_m|)²` with `ẑ_m = (ω/ω̂) z_m`. Needs the true frequency,
/// so it is only usable as a reference against computed maps.
pub fn predicted_map(grid: &ImagingGrid, omega_hat: f64, scene: &Scene) -> Result<ImageMap> {
    predicted_map_with(grid, omega_hat, scene, Execution::default())
}

pub fn predicted_map_with(
    grid: &ImagingGrid,
    omega_hat: f64,
    scene: &Scene,
    exec: Execution,
) -> Result<ImageMap> {
    grid.validate()?;
    check_omega(omega_hat)?;
    let peaks = scaled_centers(scene, omega_hat);
    let values = fill_grid(grid.nx(), grid.ny(), exec, |i, j| {
        let x = grid.point(i, j);
        peaks
            .iter()
            .map(|&z| j0_finite(omega_hat * x.distance(z)).powi(2))
            .sum()
    });
    ImageMap::new(*grid, values, omega_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{assemble_msr, MsrMatrix};
    use crate::scene::{uniform_directions, Crack};
    use crate::spectral::svd;
    use nalgebra::DMatrix;

    fn single_crack(center: Vec2, omega: f64) -> Scene {
        Scene::new(vec![Crack::new(center, 0.05, 0.0).unwrap()], omega).unwrap()
    }

    #[test]
    fn steering_vector_basics() {
        let dirs = uniform_directions(20).unwrap();
        let w = steering_vector(Vec2::ZERO, 20.0, &dirs);
        let s = 1.0 / 20f64.sqrt();
        assert!(w
            .entries()
            .iter()
            .all(|z| (z.re - s).abs() < 1e-15 && z.im == 0.0));
        for x in [Vec2::new(0.3, -0.7), Vec2::new(5.0, 2.0)] {
            assert!((steering_vector(x, 13.0, &dirs).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_crack_peak_near_one() {
        let z = Vec2::new(0.3, -0.2);
        let omega = 15.0;
        let dirs = uniform_directions(20).unwrap();
        let s = svd(&assemble_msr(&single_crack(z, omega), &dirs).unwrap()).unwrap();
        let at = imaging_value(z, omega, &s, 1, &dirs).unwrap();
        assert!((at - 1.0).abs() < 0.05, "{at}");
        let far = imaging_value(z + Vec2::new(0.9, 0.0), omega, &s, 1, &dirs).unwrap();
        assert!(far < 0.2, "{far}");
    }

    #[test]
    fn rank_bounds() {
        let dirs = uniform_directions(8).unwrap();
        let s = svd(&assemble_msr(&single_crack(Vec2::ZERO, 10.0), &dirs).unwrap()).unwrap();
        assert!(imaging_value(Vec2::ZERO, 10.0, &s, 0, &dirs).is_err());
        assert!(imaging_value(Vec2::ZERO, 10.0, &s, 9, &dirs).is_err());
        assert!(imaging_value(Vec2::ZERO, 0.0, &s, 1, &dirs).is_err());
    }

    #[test]
    fn one_point_grid() {
        let dirs = uniform_directions(12).unwrap();
        let s =
            svd(&assemble_msr(&single_crack(Vec2::new(0.1, 0.1), 10.0), &dirs).unwrap()).unwrap();
        let grid = ImagingGrid::new([0.2, 0.2], [-0.3, -0.3], 0.02).unwrap();
        let map = compute_map(&grid, 10.0, &s, 1, &dirs).unwrap();
        assert_eq!(map.values().len(), 1);
        let direct = imaging_value(Vec2::new(0.2, -0.3), 10.0, &s, 1, &dirs).unwrap();
        assert_eq!(map.values()[0], direct);
    }

    #[test]
    fn zero_rank_map_is_zero() {
        let dirs = uniform_directions(10).unwrap();
        let k = MsrMatrix::new(DMatrix::zeros(10, 10), dirs.clone()).unwrap();
        let s = svd(&k).unwrap();
        let map = compute_map(&ImagingGrid::default(), 10.0, &s, 0, &dirs).unwrap();
        assert!(map.values().iter().all(|&v| v == 0.0));
        assert_eq!(map.normalized(), map);
    }

    #[test]
    fn predicted_map_peaks() {
        let z = Vec2::new(0.4, 0.2);
        let scene = single_crack(z, 15.0);
        let grid = ImagingGrid::new([0.3, 0.3], [0.15, 0.15], 0.1).unwrap();
        // single grid point at ẑ = 0.75·z
        let map = predicted_map(&grid, 20.0, &scene).unwrap();
        assert!((map.values()[0] - 1.0).abs() < 1e-12);
        let same = predicted_map(&ImagingGrid::default(), 15.0, &scene).unwrap();
        assert!(same.argmax().distance(z) < 1e-9);
    }

    #[test]
    fn reference_scaled_centers() {
        let got = scaled_centers(&Scene::reference_example(), 20.0);
        let want = [[-0.4712, -0.1571], [0.3142, 0.2749], [0.1963, -0.4712]];
        for (g, w) in got.iter().zip(want) {
            assert!(g.distance(w.into()) < 1e-4, "{g:?}");
        }
    }

    #[test]
    fn sequential_and_parallel_maps_match() {
        let dirs = uniform_directions(20).unwrap();
        let s = svd(&assemble_msr(&Scene::reference_example(), &dirs).unwrap()).unwrap();
        let grid = ImagingGrid::default();
        let a = compute_map_with(&grid, 20.0, &s, 3, &dirs, Execution::Sequential).unwrap();
        let b = compute_map_with(&grid, 20.0, &s, 3, &dirs, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
