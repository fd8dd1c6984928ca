//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator keyed directly by
//! `(master_seed, index, tag)`, so trial `k` sees the same numbers no matter
//! which worker runs it or in which order trials are scheduled.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

pub type SimRng = ChaCha8Rng;

/// Purpose of a stream; distinct tags never share numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamTag {
    Channel,
    Estimation,
    Symbols,
    Calibration,
    EigBias,
    Other(u32),
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::Channel => 1,
            StreamTag::Estimation => 2,
            StreamTag::Symbols => 3,
            StreamTag::Calibration => 4,
            StreamTag::EigBias => 5,
            StreamTag::Other(x) => 0x1_0000_0000 | u64::from(x),
        }
    }
}

pub fn stream_rng(master_seed: u64, index: u64, tag: StreamTag) -> SimRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(&tag.code().to_le_bytes());
    key[24..32].copy_from_slice(b"eigshrnk");
    ChaCha8Rng::from_seed(key)
}

/// One draw from CN(0, variance): real and imaginary parts are independent
/// N(0, variance / 2).
pub fn complex_gaussian<T, R>(rng: &mut R, variance: T) -> Complex<T>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let sd = (variance * T::lit(0.5)).sqrt();
    let re: T = StandardNormal.sample(rng);
    let im: T = StandardNormal.sample(rng);
    Complex::new(re * sd, im * sd)
}
