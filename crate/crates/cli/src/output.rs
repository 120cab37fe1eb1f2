//! File writers: CSV maps, binary PGM images and JSON documents.
//!
//! Everything here is deterministic: numbers are printed in Rust's shortest
//! round-trip form and JSON keys follow struct declaration order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use crackloc::forward::MsrMatrix;
use crackloc::imaging::ImageMap;
use serde::Serialize;

/// `x,y,value` rows, `y` in the outer loop and `x` in the inner loop.
pub fn map_csv(map: &ImageMap) -> String {
    let grid = map.grid();
    let mut out = String::with_capacity(32 * map.values().len() + 16);
    out.push_str("x,y,value\n");
    for j in 0..map.ny() {
        let y = grid.y_at(j);
        for i in 0..map.nx() {
            writeln!(out, "{},{},{}", grid.x_at(i), y, map.at(i, j)).unwrap();
        }
    }
    out
}

pub fn write_map_csv(path: &Path, map: &ImageMap) -> Result<()> {
    fs::write(path, map_csv(map)).with_context(|| format!("writing {}", path.display()))
}

/// Rows of a map CSV as `[x, y, value]`.
pub fn read_map_csv(path: &Path) -> Result<Vec<[f64; 3]>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    if lines.next() != Some("x,y,value") {
        bail!("{}: missing `x,y,value` header", path.display());
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                bail!("{}:{}: expected 3 fields", path.display(), n + 2);
            }
            let mut row = [0.0; 3];
            for (slot, field) in row.iter_mut().zip(&fields) {
                *slot = field.parse().with_context(|| {
                    format!("{}:{}: bad number {field:?}", path.display(), n + 2)
                })?;
            }
            Ok(row)
        })
        .collect()
}

/// Binary greyscale PGM (`P5`, maxval 255). The top image row is the largest
/// `y`; pixels are `round(255 · v / max)`, all black for an all-zero map.
pub fn map_pgm(map: &ImageMap) -> Vec<u8> {
    let (nx, ny) = (map.nx(), map.ny());
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    let max = map.max();
    out.reserve(nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let level = if max > 0.0 {
                (255.0 * map.at(i, j) / max).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            out.push(level);
        }
    }
    out
}

pub fn write_map_pgm(path: &Path, map: &ImageMap) -> Result<()> {
    fs::write(path, map_pgm(map)).with_context(|| format!("writing {}", path.display()))
}

/// Matrix entries as `row,col,re,im` (zero-based indices).
pub fn msr_csv(msr: &MsrMatrix) -> String {
    let n = msr.size();
    let mut out = String::from("row,col,re,im\n");
    for r in 0..n {
        for c in 0..n {
            let k = msr.get(r, c);
            writeln!(out, "{r},{c},{},{}", k.re, k.im).unwrap();
        }
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// File-name tag for a frequency: `20` → `w20`, `15.75` → `w15p75`.
pub fn frequency_tag(omega_hat: f64) -> String {
    format!("w{omega_hat}").replace('.', "p")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crackloc::scene::ImagingGrid;

    fn tiny_map() -> ImageMap {
        // 3 columns (x = 0, 0.5, 1), 2 rows (y = 0, 0.5)
        let grid = ImagingGrid::new([0.0, 1.0], [0.0, 0.5], 0.5).unwrap();
        ImageMap::new(grid, vec![0.0, 1.0, 2.0, 3.0, 4.0, 0.1], 1.0).unwrap()
    }

    #[test]
    fn csv_layout() {
        let text = map_csv(&tiny_map());
        let expected = "x,y,value\n0,0,0\n0.5,0,1\n1,0,2\n0,0.5,3\n0.5,0.5,4\n1,0.5,0.1\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn pgm_layout() {
        let bytes = map_pgm(&tiny_map());
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        // top row is y = 0.5; 255·3/4 = 191.25, 255·0.1/4 = 6.375, 255·2/4 = 127.5
        assert_eq!(&bytes[header.len()..], &[191, 255, 6, 0, 64, 128]);
    }

    #[test]
    fn zero_map_pgm_is_black() {
        let grid = ImagingGrid::new([0.0, 0.0], [0.0, 0.0], 0.1).unwrap();
        let map = ImageMap::new(grid, vec![0.0], 1.0).unwrap();
        assert_eq!(map_pgm(&map), b"P5\n1 1\n255\n\0".to_vec());
    }

    #[test]
    fn tags() {
        assert_eq!(frequency_tag(20.0), "w20");
        assert_eq!(frequency_tag(15.75), "w15p75");
    }
}
