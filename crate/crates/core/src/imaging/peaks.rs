use serde::Serialize;

use super::ImageMap;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.5;
pub const DEFAULT_MIN_PEAK_SEPARATION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    /// Fraction of the global maximum a peak must reach, in `(0, 1)`.
    pub relative_threshold: f64,
    pub min_separation: f64,
    /// Quadratic sub-cell refinement over the 3×3 neighborhood.
    pub refine: bool,
    /// Keep at most this many peaks (the strongest).
    pub max_peaks: Option<usize>,
}

impl Default for PeakOptions {
    fn default() -> Self {
        PeakOptions {
            relative_threshold: DEFAULT_PEAK_THRESHOLD,
            min_separation: DEFAULT_MIN_PEAK_SEPARATION,
            refine: true,
            max_peaks: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub location: Vec2,
    /// Normalized map value at the grid maximum.
    pub value: f64,
    /// Grid cell `(column, row)` of the sampled maximum.
    #[serde(skip)]
    pub cell: (usize, usize),
}

/// Peaks in descending order of value.
pub type PeakList = Vec<Peak>;

/// Local maxima of the max-normalized map, with refinement enabled.
pub fn extract_peaks(
    map: &ImageMap,
    relative_threshold: f64,
    min_separation: f64,
) -> Result<PeakList> {
    extract_peaks_with(
        map,
        &PeakOptions {
            relative_threshold,
            min_separation,
            refine: true,
            max_peaks: None,
        },
    )
}

pub fn extract_peaks_with(map: &ImageMap, opts: &PeakOptions) -> Result<PeakList> {
    if !(opts.relative_threshold > 0.0 && opts.relative_threshold < 1.0) {
        return Err(Error::invalid(format!(
            "peak threshold must lie in (0, 1), got {}",
            opts.relative_threshold
        )));
    }
    if !(opts.min_separation > 0.0 && opts.min_separation.is_finite()) {
        return Err(Error::invalid(format!(
            "peak separation must be positive, got {}",
            opts.min_separation
        )));
    }
    if map.max() <= 0.0 {
        return Ok(Vec::new());
    }
    let map = map.normalized();
    let (nx, ny) = (map.nx(), map.ny());

    let mut candidates = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = map.at(i, j);
            if v >= opts.relative_threshold && is_strict_local_max(&map, i, j) {
                candidates.push((i, j, v));
            }
        }
    }
    // descending value; row-major index breaks ties
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.1, a.0).cmp(&(b.1, b.0))));

    let grid = map.grid();
    let mut peaks: PeakList = Vec::new();
    let limit = opts.max_peaks.unwrap_or(usize::MAX);
    for (i, j, value) in candidates {
        if peaks.len() >= limit {
            break;
        }
        let location = if opts.refine {
            let (du, dv) = refine_offset(&map, i, j);
            grid.point(i, j) + grid.step * Vec2::new(du, dv)
        } else {
            grid.point(i, j)
        };
        if peaks
            .iter()
            .all(|p| p.location.distance(location) >= opts.min_separation)
        {
            peaks.push(Peak {
                location,
                value,
                cell: (i, j),
            });
        }
    }
    Ok(peaks)
}

fn is_strict_local_max(map: &ImageMap, i: usize, j: usize) -> bool {
    let v = map.at(i, j);
    for dj in -1i64..=1 {
        for di in -1i64..=1 {
            if di == 0 && dj == 0 {
                continue;
            }
            let (ii, jj) = (i as i64 + di, j as i64 + dj);
            if ii < 0 || jj < 0 || ii >= map.nx() as i64 || jj >= map.ny() as i64 {
                continue;
            }
            if map.at(ii as usize, jj as usize) >= v {
                return false;
            }
        }
    }
    true
}

/// Sub-cell offset `(du, dv)` in grid units, each clamped to `[-0.5, 0.5]`.
///
/// Least-squares quadratic `a + b·u + c·v + d·u² + e·uv + f·v²` over the 3×3
/// stencil; its stationary point is used when the fitted Hessian is negative
/// definite, otherwise independent 1-D parabolas along each axis.
fn refine_offset(map: &ImageMap, i: usize, j: usize) -> (f64, f64) {
    if i == 0 || j == 0 || i + 1 >= map.nx() || j + 1 >= map.ny() {
        return (0.0, 0.0);
    }
    let mut s = [[0.0; 3]; 3];
    for (dv, row) in s.iter_mut().enumerate() {
        for (du, cell) in row.iter_mut().enumerate() {
            *cell = map.at(i + du - 1, j + dv - 1);
        }
    }
    let (mut b, mut c, mut d, mut e, mut f) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (dv, row) in s.iter().enumerate() {
        for (du, &val) in row.iter().enumerate() {
            let u = du as f64 - 1.0;
            let v = dv as f64 - 1.0;
            b += u * val / 6.0;
            c += v * val / 6.0;
            d += (u * u - 2.0 / 3.0) * val / 2.0;
            f += (v * v - 2.0 / 3.0) * val / 2.0;
            e += u * v * val / 4.0;
        }
    }
    // gradient zero: [2d e; e 2f]·[u v]ᵀ = -[b c]ᵀ
    let det = 4.0 * d * f - e * e;
    let (du, dv) = if d < 0.0 && det > 1e-14 {
        ((-b * 2.0 * f + c * e) / det, (-c * 2.0 * d + b * e) / det)
    } else {
        (
            parabola(s[1][0], s[1][1], s[1][2]),
            parabola(s[0][1], s[1][1], s[2][1]),
        )
    };
    (du.clamp(-0.5, 0.5), dv.clamp(-0.5, 0.5))
}

fn parabola(prev: f64, mid: f64, next: f64) -> f64 {
    let curv = prev - 2.0 * mid + next;
    if curv.abs() > 1e-12 {
        (prev - next) / (2.0 * curv)
    } else {
        0.0
    }
}
