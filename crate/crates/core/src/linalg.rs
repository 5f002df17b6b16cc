//! Small dense linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Minimum-norm least-squares solution of `A x = b` via SVD, with singular
/// values below `rtol * s_max` treated as zero. Handles rank-deficient and
/// non-square systems.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rtol: f64) -> DVector<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = if smax > 0.0 { rtol * smax } else { f64::MAX };
    svd.solve(b, eps).expect("svd computed with u and v_t")
}
