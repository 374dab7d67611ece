//! Dense matrix exponential by scaling and squaring.
//!
//! The matrices exponentiated here are coadjoint generators of dimension at
//! most a few dozen, so a Taylor core on a strongly scaled argument is both
//! simple and accurate: the argument is halved until its 1-norm is at most
//! [`SCALING_THRESHOLD`], the series is summed until the next term no longer
//! changes the result, and the partial sum is squared back up.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest 1-norm handed to the Taylor core.
pub const SCALING_THRESHOLD: f64 = 0.5;

const MAX_TAYLOR_TERMS: usize = 40;

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` for a square matrix with finite entries.
pub fn matrix_exp(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!(
            "matrix_exp needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix_exp input has non-finite entries".into(),
        ));
    }
    let n = a.nrows();
    let norm = norm1(a);
    if norm == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }

    let squarings = if norm > SCALING_THRESHOLD {
        (norm / SCALING_THRESHOLD).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);

    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut next = DMatrix::<f64>::zeros(n, n);
    for k in 1..=MAX_TAYLOR_TERMS {
        next.gemm(1.0 / k as f64, &term, &scaled, 0.0);
        std::mem::swap(&mut term, &mut next);
        sum += &term;
        if norm1(&term) <= f64::EPSILON * 0.5 * norm1(&sum) {
            break;
        }
    }

    let mut tmp = DMatrix::<f64>::zeros(n, n);
    for _ in 0..squarings {
        tmp.gemm(1.0, &sum, &sum, 0.0);
        std::mem::swap(&mut sum, &mut tmp);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_gives_identity() {
        let e = matrix_exp(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn quarter_turn() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, FRAC_PI_2, -FRAC_PI_2, 0.0]);
        let e = matrix_exp(&a).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((e - expected).amax() < 1e-15);
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(matrix_exp(&a), Err(Error::InvalidArgument(_))));
        assert!(matrix_exp(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn diagonal_matches_scalar_exp() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-30.0, 0.3, 12.5]));
        let e = matrix_exp(&a).unwrap();
        for (i, x) in [-30.0f64, 0.3, 12.5].iter().enumerate() {
            assert!(((e[(i, i)] - x.exp()) / x.exp()).abs() < 1e-13);
        }
    }
}
