//! Row-parallel grid evaluation, with a sequential path that is always
//! available for comparison.

/// How grid maps are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Row-parallel via rayon. Falls back to sequential without the
    /// `parallel` feature.
    #[default]
    Parallel,
}

/// Fill a row-major `ny × nx` buffer with `f(i, j)` (column `i`, row `j`).
pub(crate) fn fill_grid<F>(nx: usize, ny: usize, exec: Execution, f: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let mut out = vec![0.0; nx * ny];
    if nx == 0 {
        return out;
    }
    match exec {
        Execution::Sequential => fill_sequential(&mut out, nx, &f),
        Execution::Parallel => fill_parallel(&mut out, nx, &f),
    }
    out
}

fn fill_sequential<F: Fn(usize, usize) -> f64>(out: &mut [f64], nx: usize, f: &F) {
    for (j, row) in out.chunks_mut(nx).enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = f(i, j);
        }
    }
}

#[cfg(feature = "parallel")]
fn fill_parallel<F: Fn(usize, usize) -> f64 + Sync>(out: &mut [f64], nx: usize, f: &F) {
    use rayon::prelude::*;
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = f(i, j);
        }
    });
}

#[cfg(not(feature = "parallel"))]
fn fill_parallel<F: Fn(usize, usize) -> f64 + Sync>(out: &mut [f64], nx: usize, f: &F) {
    fill_sequential(out, nx, f)
}
