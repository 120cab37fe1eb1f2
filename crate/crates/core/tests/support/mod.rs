//! Reference computations kept independent of the library's own code paths.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;

const FRAC_BITS: u32 = 400;

/// `J₀(x)` from the Maclaurin series `Σ (−1)^k (x/2)^{2k} / (k!)²`, summed
/// in 400-bit fixed point so cancellation at large `x` costs nothing.
pub fn j0_power_series(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    assert!(x.is_finite() && x.is_normal());
    let bits = x.to_bits();
    let mantissa = BigInt::from((bits & ((1u64 << 52) - 1)) | (1u64 << 52));
    let exponent = ((bits >> 52) & 0x7ff) as i64 - 1075;
    // (x/2)² = mantissa² · 2^(2·exponent − 2)
    let m2 = &mantissa * &mantissa;
    let shift = 2 * exponent - 2;

    let one = BigInt::from(1) << FRAC_BITS;
    let mut term = one.clone();
    let mut sum = one;
    let floor = BigInt::from(1) << (FRAC_BITS - 100);
    let peak_k = (x / 2.0).ceil() as u64 + 1;
    let mut k: u64 = 1;
    loop {
        term *= &m2;
        term = if shift >= 0 {
            term << shift as u32
        } else {
            term >> (-shift) as u32
        };
        term /= BigInt::from(k * k);
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        if k > peak_k && term < floor {
            break;
        }
        k += 1;
    }
    let scaled: BigInt = sum >> (FRAC_BITS - 62);
    let as_i128: i128 = scaled.try_into().expect("result fits");
    as_i128 as f64 / (1u64 << 62) as f64
}

/// Eigenvalues (descending) of a Hermitian matrix via cyclic Jacobi on its
/// real symmetric embedding `[[A, −B], [B, A]]`.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut s = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            s[i][j] = z.re;
            s[i + n][j + n] = z.re;
            s[i][j + n] = -z.im;
            s[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i][j] * s[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if s[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let (a, b) = (s[k][p], s[k][q]);
                    s[k][p] = c * a - sn * b;
                    s[k][q] = sn * a + c * b;
                }
                for k in 0..m {
                    let (a, b) = (s[p][k], s[q][k]);
                    s[p][k] = c * a - sn * b;
                    s[q][k] = sn * a + c * b;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..m).map(|i| s[i][i]).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    // each eigenvalue of H appears twice in the embedding
    eig.into_iter().step_by(2).collect()
}

/// Angle (radians) maximizing the minimum angular distance to `ray_angles`,
/// searched on a grid of `step_deg` degrees; ties go to the smallest angle.
pub fn brute_force_probe_angle(ray_angles: &[f64], step_deg: f64) -> (f64, f64) {
    let tau = std::f64::consts::TAU;
    let dist = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(tau);
        d.min(tau - d)
    };
    let steps = (360.0 / step_deg).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..steps {
        let alpha = (k as f64 * step_deg).to_radians();
        let gap = ray_angles
            .iter()
            .map(|&r| dist(alpha, r))
            .fold(f64::INFINITY, f64::min);
        if gap > best.0 + 1e-9 {
            best = (gap, alpha);
        }
    }
    (best.1, best.0)
}

/// `(1/N) Σ_n exp(iω θ_n·x)` written out without the library's steering vectors.
pub fn direction_average(n: usize, omega: f64, x: [f64; 2]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=n {
        let a = std::f64::consts::TAU * k as f64 / n as f64;
        acc += Complex64::cis(omega * (a.cos() * x[0] + a.sin() * x[1]));
    }
    acc / n as f64
}

/// Pearson correlation of two equal-length samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Greedy nearest-neighbour pairing; returns the largest paired distance.
pub fn paired_max_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    assert_eq!(
        a.len(),
        b.len(),
        "point sets differ in size: {a:?} vs {b:?}"
    );
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for p in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, q)| (k, (p[0] - q[0]).hypot(p[1] - q[1])))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}
