//! Floating-point scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar type the linear algebra and receiver math are generic over.
///
/// Tolerances that the algorithms depend on are tied to the precision of the
/// type, so `f32` gets looser thresholds than `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Largest allowed asymmetry `|a_ij - conj(a_ji)|` relative to `1 + max |a|`.
    fn hermitian_tol() -> Self;

    /// Relative Cholesky pivot threshold, multiplied by `dim * trace`.
    fn pivot_tol() -> Self;

    /// Off-diagonal convergence threshold for the Jacobi eigensolver.
    fn jacobi_tol() -> Self;

    /// Converts an `f64` literal. Panics only if the literal is not representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Scalar for f64 {
    fn hermitian_tol() -> Self {
        1e-12
    }
    fn pivot_tol() -> Self {
        1e-14
    }
    fn jacobi_tol() -> Self {
        1e-15
    }
}

impl Scalar for f32 {
    fn hermitian_tol() -> Self {
        1e-5
    }
    fn pivot_tol() -> Self {
        1e-6
    }
    fn jacobi_tol() -> Self {
        1e-7
    }
}
