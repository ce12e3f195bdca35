//! Plain-loop matrix kernels.
//!
//! The solvers promise that tabulated quantities are bit-identical to their
//! on-demand counterparts, so every product in the crate goes through these
//! helpers: one fixed summation order, no blocked or vectorised kernels.

use ndarray::Array2;

/// `a * b` for square matrices of the same dimension.
pub(crate) fn mat_mul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), n);
    debug_assert_eq!(b.nrows(), n);
    debug_assert_eq!(b.ncols(), n);
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += a[[i, k]] * b[[k, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// Dot product of row `row` of `m` with the dense vector `v`.
pub(crate) fn row_dot(m: &Array2<f64>, row: usize, v: &[f64]) -> f64 {
    debug_assert_eq!(m.ncols(), v.len());
    let mut acc = 0.0;
    for (j, value) in v.iter().enumerate() {
        acc += m[[row, j]] * value;
    }
    acc
}
