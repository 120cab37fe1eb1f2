//! Singular value decomposition of MSR matrices and rank estimation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::MsrMatrix;

/// Default relative cut-off for [`estimate_rank`].
pub const DEFAULT_RANK_THRESHOLD: f64 = 0.1;

/// `K = U · diag(σ) · Vᴴ` with singular values in descending order.
///
/// Each `(U_m, V_m)` pair is phase-normalized so the largest-magnitude entry
/// of `U_m` is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    left: DMatrix<Complex64>,
    right: DMatrix<Complex64>,
    singular_values: Vec<f64>,
}

impl SvdResult {
    /// Assemble from raw factors without reordering or re-phasing.
    pub fn from_parts(
        left: DMatrix<Complex64>,
        right: DMatrix<Complex64>,
        singular_values: Vec<f64>,
    ) -> Result<Self> {
        let n = singular_values.len();
        if left.ncols() != n || right.ncols() != n || left.nrows() != right.nrows() {
            return Err(Error::invalid("inconsistent SVD factor shapes"));
        }
        Ok(SvdResult {
            left,
            right,
            singular_values,
        })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Matrix whose columns are the left singular vectors `U_m`.
    pub fn left_vectors(&self) -> &DMatrix<Complex64> {
        &self.left
    }

    /// Matrix whose columns are the right singular vectors `V_m`.
    pub fn right_vectors(&self) -> &DMatrix<Complex64> {
        &self.right
    }

    /// Number of singular triplets.
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    /// `Σ_{m<rank} σ_m U_m V_mᴴ`.
    pub fn reconstruct(&self, rank: usize) -> DMatrix<Complex64> {
        let rank = rank.min(self.len());
        let n = self.left.nrows();
        let mut out = DMatrix::zeros(n, self.right.nrows());
        for m in 0..rank {
            let s = Complex64::new(self.singular_values[m], 0.0);
            out += self.left.column(m) * s * self.right.column(m).adjoint();
        }
        out
    }
}

/// Full SVD of the MSR matrix (one-sided Jacobi).
pub fn svd(msr: &MsrMatrix) -> Result<SvdResult> {
    let k = msr.entries();
    if k.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::invalid("MSR matrix has non-finite entries"));
    }
    let (u, sigma, v) = jacobi_svd(k);

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

    let n = k.nrows();
    let mut left = DMatrix::zeros(n, order.len());
    let mut right = DMatrix::zeros(v.nrows(), order.len());
    let mut sorted = Vec::with_capacity(order.len());
    for (dst, &src) in order.iter().enumerate() {
        let u_col = u.column(src);
        // first index wins among equal magnitudes
        let pivot = u_col
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| {
                let mag = z.norm();
                if mag > best.1 {
                    (i, mag)
                } else {
                    best
                }
            })
            .0;
        let phase = if u_col[pivot].norm() > 0.0 {
            u_col[pivot].conj() / u_col[pivot].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        left.set_column(dst, &(u_col * phase));
        right.set_column(dst, &(v.column(src) * phase));
        sorted.push(sigma[src]);
    }
    SvdResult::from_parts(left, right, sorted)
}

const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Hestenes one-sided Jacobi: rotate column pairs of `A·V` until they are
/// mutually orthogonal, then `σ_j = ‖(AV)_j‖` and `U_j = (AV)_j / σ_j`.
/// Columns with negligible norm get `U_j` from Gram-Schmidt completion.
fn jacobi_svd(a: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>) {
    let (rows, cols) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<Complex64>::identity(cols, cols);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = w.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= JACOBI_TOL * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // strip the phase of γ, then a real rotation zeroes the pair's Gram entry
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, phase, c, s);
                rotate_pair(&mut v, p, q, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    let top = sigma.iter().copied().fold(0.0, f64::max);
    let mut u = DMatrix::<Complex64>::zeros(rows, cols);
    let mut missing = Vec::new();
    for (j, &sj) in sigma.iter().enumerate() {
        if sj > 1e-14 * top && sj > 0.0 {
            u.set_column(j, &(w.column(j) / Complex64::new(sj, 0.0)));
        } else {
            missing.push(j);
        }
    }
    complete_basis(&mut u, &missing);
    (u, sigma, v)
}

/// `[x_p, x_q] ← [c·x_p − s·e·x_q, s·x_p + c·e·x_q]` with `e` a unit phase.
fn rotate_pair(m: &mut DMatrix<Complex64>, p: usize, q: usize, phase: Complex64, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let xp = m[(r, p)];
        let xq = m[(r, q)] * phase;
        m[(r, p)] = xp * c - xq * s;
        m[(r, q)] = xp * s + xq * c;
    }
}

/// Fill the listed columns of `u` with unit vectors orthogonal to every other column.
fn complete_basis(u: &mut DMatrix<Complex64>, missing: &[usize]) {
    let rows = u.nrows();
    let mut filled: Vec<usize> = (0..u.ncols()).filter(|j| !missing.contains(j)).collect();
    let mut candidate = 0;
    for &j in missing {
        while candidate < rows {
            let mut e = nalgebra::DVector::<Complex64>::zeros(rows);
            e[candidate] = Complex64::new(1.0, 0.0);
            candidate += 1;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for &k in &filled {
                    let proj = u.column(k).dotc(&e);
                    e -= u.column(k) * proj;
                }
            }
            let norm = e.norm();
            if norm > 1e-8 {
                u.set_column(j, &(e / Complex64::new(norm, 0.0)));
                filled.push(j);
                break;
            }
        }
    }
}

/// Count of singular values at or above `threshold_ratio · σ₁`.
pub fn estimate_rank(singular_values: &[f64], threshold_ratio: f64) -> Result<usize> {
    if !(threshold_ratio > 0.0 && threshold_ratio < 1.0) {
        return Err(Error::invalid(format!(
            "rank threshold must lie in (0, 1), got {threshold_ratio}"
        )));
    }
    let Some(&top) = singular_values.first() else {
        return Ok(0);
    };
    if top <= 0.0 {
        return Ok(0);
    }
    let cut = threshold_ratio * top;
    Ok(singular_values.iter().filter(|&&s| s >= cut).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::assemble_msr;
    use crate::geometry::Vec2;
    use crate::scene::{uniform_directions, Crack, Scene};

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let dirs = uniform_directions(6).unwrap();
        let k = MsrMatrix::new(DMatrix::zeros(6, 6), dirs).unwrap();
        let s = svd(&k).unwrap();
        assert!(s.singular_values().iter().all(|&v| v == 0.0));
        assert_eq!(estimate_rank(s.singular_values(), 0.1).unwrap(), 0);
    }

    #[test]
    fn rank_one_for_single_crack() {
        let scene = Scene::new(
            vec![Crack::new(Vec2::new(0.2, -0.1), 0.05, 0.0).unwrap()],
            15.0,
        )
        .unwrap();
        let s = svd(&assemble_msr(&scene, &uniform_directions(20).unwrap()).unwrap()).unwrap();
        let sv = s.singular_values();
        assert!(sv[1] / sv[0] < 1e-10);
    }

    #[test]
    fn rank_examples() {
        let spectrum = [1.0, 0.9, 0.8, 0.05, 0.04, 0.01];
        assert_eq!(estimate_rank(&spectrum, 0.1).unwrap(), 3);
        assert_eq!(estimate_rank(&[0.0; 5], 0.1).unwrap(), 0);
        assert_eq!(estimate_rank(&[], 0.1).unwrap(), 0);
        // ties at the threshold count
        assert_eq!(estimate_rank(&[1.0, 0.5, 0.5, 0.1], 0.5).unwrap(), 3);
        assert!(estimate_rank(&spectrum, 0.0).is_err());
        assert!(estimate_rank(&spectrum, 1.0).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let dirs = uniform_directions(3).unwrap();
        let mut m = DMatrix::zeros(3, 3);
        m[(1, 2)] = Complex64::new(f64::NAN, 0.0);
        assert!(svd(&MsrMatrix::new(m, dirs).unwrap()).is_err());
    }

    #[test]
    fn phase_convention() {
        let k = assemble_msr(
            &Scene::reference_example(),
            &uniform_directions(20).unwrap(),
        )
        .unwrap();
        let s = svd(&k).unwrap();
        for m in 0..3 {
            let col = s.left_vectors().column(m);
            let pivot = col
                .iter()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap();
            assert!(pivot.im.abs() < 1e-12 && pivot.re > 0.0);
        }
    }
}
