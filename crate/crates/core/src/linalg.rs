//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Pivot blocks with a 1-norm condition estimate above this are treated as singular.
pub const SINGULAR_COND: f64 = 1e12;

pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse via partially pivoted LU together with the 1-norm condition number.
pub fn inverse_with_cond(m: &CMatrix) -> Option<(CMatrix, f64)> {
    let inv = m.clone().lu().try_inverse()?;
    let cond = norm1(m) * norm1(&inv);
    if cond.is_finite() {
        Some((inv, cond))
    } else {
        None
    }
}

/// Orthonormal basis of the column space (thin Householder Q).
pub fn thin_q(m: CMatrix) -> CMatrix {
    m.qr().q()
}
