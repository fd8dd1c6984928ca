//! IRC detection chain: Cholesky whitening with the estimated covariance,
//! linear MMSE symbol estimate, exact per-bit LLRs, and the bitwise
//! mutual-information metric computed from `(bit, LLR)` pairs.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::airlink::{interference_noise_sample, received_symbol, ChannelRealization, Constellation};
use crate::error::{Error, Result};
use crate::hermitian::{ComplexVector, HermitianMatrix, LowerTriangular};
use crate::scalar::Scalar;
use crate::shrinkage::ShrinkageEstimate;
use crate::stats::pairwise_sum;

/// LLR magnitude limit, in nats.
pub const LLR_CLIP: f64 = 60.0;

/// Received vector and desired channel after whitening.
#[derive(Clone, Debug, PartialEq)]
pub struct WhitenedLink<T> {
    pub z: ComplexVector<T>,
    pub g: ComplexVector<T>,
    /// `g^H g = h_d^H R^{-1} h_d`.
    pub gamma_eff: T,
}

/// Whitening filter for one covariance estimate and desired channel, built
/// once per block and applied to every received symbol.
#[derive(Clone, Debug)]
pub struct Whitener<T> {
    l: LowerTriangular<T>,
    g: ComplexVector<T>,
    gamma_eff: T,
}

impl<T: Scalar> Whitener<T> {
    pub fn new(covariance: &HermitianMatrix<T>, h_d: &ComplexVector<T>) -> Result<Self> {
        let l = covariance.cholesky()?;
        let g = l.forward_solve(h_d)?;
        let gamma_eff = g.norm_sq();
        Ok(Self { l, g, gamma_eff })
    }

    pub fn gamma_eff(&self) -> T {
        self.gamma_eff
    }

    pub fn apply(&self, y: &ComplexVector<T>) -> Result<WhitenedLink<T>> {
        Ok(WhitenedLink {
            z: self.l.forward_solve(y)?,
            g: self.g.clone(),
            gamma_eff: self.gamma_eff,
        })
    }

    /// `g^H L^{-1} y`, the matched-filter output before MMSE scaling.
    fn matched(&self, y: &ComplexVector<T>) -> Result<Complex<T>> {
        Ok(self.g.dot(&self.l.forward_solve(y)?))
    }
}

/// `z = L^{-1} y`, `g = L^{-1} h_d` with `L L^H = est.matrix`.
pub fn whiten<T: Scalar>(
    est: &ShrinkageEstimate<T>,
    y: &ComplexVector<T>,
    h_d: &ComplexVector<T>,
) -> Result<WhitenedLink<T>> {
    Whitener::new(&est.matrix, h_d)?.apply(y)
}

/// `g^H z / (g^H g + 1)`.
pub fn mmse_estimate<T: Scalar>(link: &WhitenedLink<T>) -> Complex<T> {
    link.g.dot(&link.z).unscale(link.gamma_eff + T::one())
}

/// Per-bit LLRs, `ln P(b = 0) - ln P(b = 1)`, ordered from the most
/// significant label bit.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrVector<T>(pub Vec<T>);

impl<T> LlrVector<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

/// Exact log-sum-exp LLRs under the unbiased-equivalent model
/// `s_hat / mu = s + w'`, `w' ~ CN(0, 1/gamma)`, `mu = gamma / (gamma + 1)`.
pub fn compute_llrs<T: Scalar>(s_hat: Complex<T>, gamma_eff: T, cons: &Constellation<T>) -> LlrVector<T> {
    let bits = cons.bits_per_symbol();
    if !(gamma_eff > T::zero()) {
        return LlrVector(vec![T::zero(); bits]);
    }
    let x = s_hat.scale((gamma_eff + T::one()) / gamma_eff);
    llrs_for_observation(x, gamma_eff, cons)
}

fn llrs_for_observation<T: Scalar>(x: Complex<T>, gamma: T, cons: &Constellation<T>) -> LlrVector<T> {
    let bits = cons.bits_per_symbol();
    let metrics: Vec<T> = cons.points().iter().map(|p| -gamma * (x - p).norm_sqr()).collect();
    let peak = metrics.iter().copied().fold(T::neg_infinity(), T::max);
    let weights: Vec<T> = metrics.iter().map(|&m| (m - peak).exp()).collect();
    let clip = T::lit(LLR_CLIP);

    let llrs = (0..bits)
        .map(|i| {
            let (mut zero, mut one) = (T::zero(), T::zero());
            for (label, &w) in weights.iter().enumerate() {
                if cons.bit(label, i) == 0 {
                    zero += w;
                } else {
                    one += w;
                }
            }
            let llr = if one == T::zero() {
                clip
            } else if zero == T::zero() {
                -clip
            } else {
                zero.ln() - one.ln()
            };
            llr.max(-clip).min(clip)
        })
        .collect();
    LlrVector(llrs)
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Empirical bitwise mutual information in bits:
///
/// ```text
/// MI = log2 Q - sum_i mean_k log2(1 + exp(-(1 - 2 b_ik) L_ik))
/// ```
///
/// `records` are `(bit, llr)` pairs in transmission order, `log2 Q` per
/// symbol, so record `k` belongs to bit position `k mod log2 Q`.
pub fn mutual_information<T: Scalar>(records: &[(u8, T)], q: usize) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    if q < 2 || !q.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "alphabet size {q} is not a power of two"
        )));
    }
    let bits = q.trailing_zeros() as usize;
    if !records.len().is_multiple_of(bits) {
        return Err(Error::InvalidArgument(format!(
            "{} records do not divide into {bits}-bit symbols",
            records.len()
        )));
    }
    let symbols = records.len() / bits;
    let mut loss = 0.0;
    for pos in 0..bits {
        let terms = records
            .iter()
            .skip(pos)
            .step_by(bits)
            .map(|&(b, llr)| {
                let llr = llr.to_f64().filter(|v| v.is_finite()).ok_or(Error::NonFinite)?;
                let sign = if b == 0 { 1.0 } else { -1.0 };
                Ok(softplus(-sign * llr) / std::f64::consts::LN_2)
            })
            .collect::<Result<Vec<f64>>>()?;
        loss += pairwise_sum(&terms) / symbols as f64;
    }
    Ok(bits as f64 - loss)
}

/// Transmits `n_symbols` random desired symbols over fresh interference and
/// noise, detects each with the whitening MMSE chain built from
/// `covariance`, and returns `(bit, llr)` pairs in transmission order.
pub fn detect_and_score<T, R>(
    ch: &ChannelRealization<T>,
    covariance: &HermitianMatrix<T>,
    cons: &Constellation<T>,
    interferer: &Constellation<T>,
    n_symbols: usize,
    rng: &mut R,
) -> Result<Vec<(u8, T)>>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    if n_symbols == 0 {
        return Err(Error::InvalidArgument("symbol count must be positive".into()));
    }
    let whitener = Whitener::new(covariance, &ch.h_d)?;
    let gamma = whitener.gamma_eff();
    let bits = cons.bits_per_symbol();
    let mut records = Vec::with_capacity(n_symbols * bits);
    for _ in 0..n_symbols {
        let label = cons.random_label(rng);
        let u = interference_noise_sample(ch, interferer, rng);
        let y = received_symbol(ch, cons.point(label), &u)?;
        let s_hat = whitener.matched(&y)?.unscale(gamma + T::one());
        let llrs = compute_llrs(s_hat, gamma, cons);
        records.extend(llrs.0.into_iter().enumerate().map(|(i, l)| (cons.bit(label, i), l)));
    }
    Ok(records)
}
