//! Log-determinants by LU factorization with partial pivoting.
//!
//! Determinants are accumulated as sums of pivot logarithms so that large
//! graphs do not underflow.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `log det(m)` for a real matrix whose determinant must be strictly positive.
pub fn log_det_positive(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let lu = m.clone().lu();
    let mut sign: f64 = lu.p().determinant();
    let mut acc = 0.0;
    for d in lu.u().diagonal().iter() {
        if *d == 0.0 || !d.is_finite() {
            return Err(Error::SingularMatrix);
        }
        if *d < 0.0 {
            sign = -sign;
        }
        acc += d.abs().ln();
    }
    if sign <= 0.0 {
        return Err(Error::SingularMatrix);
    }
    Ok(acc)
}

/// Principal complex logarithm of `det(m)`; the imaginary part lies in (-pi, pi].
pub fn log_det_complex(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if m.nrows() == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lu = m.clone().lu();
    let perm: f64 = lu.p().determinant();
    let mut re = 0.0;
    let mut im = if perm < 0.0 { std::f64::consts::PI } else { 0.0 };
    for d in lu.u().diagonal().iter() {
        if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
            return Err(Error::SingularMatrix);
        }
        let l = d.ln();
        re += l.re;
        im += l.im;
    }
    Ok(Complex64::new(re, wrap_phase(im)))
}

fn wrap_phase(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_log_det_matches_product() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        assert!((log_det_positive(&m).unwrap() - 0.75f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn pivoting_sign_is_tracked() {
        // det = -1 after a row swap: must be rejected
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(log_det_positive(&m), Err(Error::SingularMatrix));
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(log_det_positive(&m).unwrap().abs() < 1e-15);
    }

    #[test]
    fn singular_is_an_error() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(log_det_positive(&m), Err(Error::SingularMatrix));
    }

    #[test]
    fn complex_log_det_phase_is_wrapped() {
        let i = Complex64::new(0.0, 1.0);
        // diag(i, i, i, i) has det 1 but the pivot phases sum to 2 pi
        let m = DMatrix::from_diagonal_element(4, 4, i);
        let l = log_det_complex(&m).unwrap();
        assert!(l.re.abs() < 1e-15 && l.im.abs() < 1e-12);
    }
}
