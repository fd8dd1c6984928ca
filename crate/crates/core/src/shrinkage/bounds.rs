//! Extremal-eigenvalue bounds computed from the trace and Frobenius norm.
//!
//! For a PSD `A` of order `n`, maximizing one eigenvalue subject to fixed
//! `sum(eta) = tr(A)` and `sum(eta^2) = ||A||_F^2` puts the remaining `n - 1`
//! eigenvalues at a common value, which gives
//!
//! ```text
//! kappa(A) <= (tr(A) + sqrt(n(n-1) ||A||_F^2 - (n-1) tr(A)^2)) / n
//! ```
//!
//! Applied to `A^{-1}` the same bound yields a lower bound on `lambda(A)`.
//! Both are exact for `n <= 2` and for scaled identities.

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::scalar::Scalar;

/// Upper bound on the largest eigenvalue from `(n, trace, ||.||_F^2)`.
pub fn upper_bound_from_moments<T: Scalar>(n: usize, trace: T, frobenius_sq: T) -> Result<T> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let nf = T::from_usize_lossy(n);
    let n1 = nf - T::one();
    let disc = nf * n1 * frobenius_sq - n1 * trace * trace;
    let slack = T::hermitian_tol() * (T::one() + n1 * trace * trace);
    let disc = if disc >= T::zero() {
        disc
    } else if disc >= -slack {
        T::zero()
    } else {
        return Err(Error::NegativeDiscriminant(disc.to_f64().unwrap_or(f64::NAN)));
    };
    Ok((trace + disc.sqrt()) / nf)
}

pub fn max_eig_upper_bound<T: Scalar>(a: &HermitianMatrix<T>) -> Result<T> {
    upper_bound_from_moments(a.dim(), a.trace(), a.frobenius_norm_sq())
}

/// Lower bound on the smallest eigenvalue of a positive-definite matrix.
pub fn min_eig_lower_bound<T: Scalar>(a: &HermitianMatrix<T>) -> Result<T> {
    let b = a.invert_pd()?;
    // n / (tr B + sqrt(...)) = 1 / bound(B)
    Ok(T::one() / max_eig_upper_bound(&b)?)
}
