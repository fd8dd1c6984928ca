//! Minimum-eigenvalue shrinkage of interference-plus-noise covariance
//! estimates, and a Monte-Carlo IRC link simulator that scores them by
//! bitwise mutual information.
//!
//! The numerical core is generic over the real scalar type through
//! [`Scalar`] (implemented for `f32` and `f64`); the aliases below fix it to
//! `f64`, which is what the experiment harness uses.

pub mod airlink;
pub mod error;
pub mod harness;
pub mod hermitian;
pub mod receiver;
pub mod rng;
pub mod scalar;
pub mod shrinkage;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use airlink::{
    build_constellation, draw_channel, interference_noise_samples, received_symbol, true_covariance, LinkScales,
};
pub use hermitian::scaled_identity;
pub use receiver::{compute_llrs, detect_and_score, mmse_estimate, mutual_information, whiten};
pub use shrinkage::{
    calibrate_beta, max_eig_upper_bound, min_eig_lower_bound, min_eig_shrunk, rho_closed_form, rho_oracle_grid,
    rho_practical, rho_practical_with, sample_covariance, shrink, BetaCache, BetaCalibration, MinEigMethod, RhoSource,
};

pub type ComplexVector = hermitian::ComplexVector<f64>;
pub type HermitianMatrix = hermitian::HermitianMatrix<f64>;
pub type LowerTriangular = hermitian::LowerTriangular<f64>;
pub type SampleBlock = shrinkage::SampleBlock<f64>;
pub type ShrinkageEstimate = shrinkage::ShrinkageEstimate<f64>;
pub type Constellation = airlink::Constellation<f64>;
pub type ChannelRealization = airlink::ChannelRealization<f64>;
pub type WhitenedLink = receiver::WhitenedLink<f64>;
pub type LlrVector = receiver::LlrVector<f64>;
