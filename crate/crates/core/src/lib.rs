//! Subspace-migration imaging of small, perfectly conducting cracks from
//! far-field data, including recovery of an unknown illumination frequency
//! with a probe scatterer.
//!
//! The pieces, bottom-up:
//!
//! - [`bessel`]: `J₀`, the point spread of the imaging functional.
//! - [`scene`]: cracks, direction sets, imaging grids.
//! - [`forward`]: asymptotic far-field synthesis, noise, probe scatterers.
//! - [`spectral`]: SVD of the multi-static response matrix, rank estimate.
//! - [`imaging`]: steering vectors, migration maps, the `J₀²` reference map, peaks.
//! - [`locate`]: the unknown-frequency localization pipeline.
//!
//! Grid evaluation runs on rayon when the default `parallel` feature is on;
//! [`Execution::Sequential`] is always available.

pub mod bessel;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod imaging;
pub mod locate;
mod par;
pub mod scene;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use par::Execution;
