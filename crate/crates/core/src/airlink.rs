//! Synthetic flat-fading link: Gray-labeled QAM, Rayleigh channel draws, and
//! interference-plus-noise sample streams with their per-block covariance.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hermitian::{ComplexVector, HermitianMatrix};
use crate::rng::complex_gaussian;
use crate::scalar::Scalar;
use crate::shrinkage::SampleBlock;

/// Unit-energy square QAM with a Gray labeling on each axis.
///
/// `points[label]` is the symbol carrying `label`; bit 0 is the most
/// significant bit of the label. The high half of the label selects the
/// in-phase level, the low half the quadrature level, and Gray index 0 sits
/// at the most positive amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation<T> {
    order: usize,
    bits: usize,
    points: Vec<Complex<T>>,
}

impl<T: Scalar> Constellation<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex<T> {
        self.points[label]
    }

    /// Bit `i` (0 = most significant) of `label`.
    #[inline]
    pub fn bit(&self, label: usize, i: usize) -> u8 {
        ((label >> (self.bits - 1 - i)) & 1) as u8
    }

    pub fn label_bits(&self, label: usize) -> Vec<u8> {
        (0..self.bits).map(|i| self.bit(label, i)).collect()
    }

    /// Uniformly random label.
    pub fn random_label<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.order)
    }

    pub fn average_energy(&self) -> T {
        self.points.iter().map(|p| p.norm_sqr()).sum::<T>() / T::from_usize_lossy(self.order)
    }
}

pub fn build_constellation<T: Scalar>(order: usize) -> Result<Constellation<T>> {
    let axis_bits = match order {
        4 => 1,
        16 => 2,
        64 => 3,
        _ => return Err(Error::UnsupportedOrder(order)),
    };
    let levels = 1usize << axis_bits;
    // average of (2j - L + 1)^2 over j is (L^2 - 1)/3; two axes
    let norm = (T::lit(2.0) * T::from_usize_lossy(levels * levels - 1) / T::lit(3.0)).sqrt();
    let amplitude = |gray: usize| {
        let j = gray_to_index(gray);
        T::from_usize_lossy(levels - 1) - T::lit(2.0) * T::from_usize_lossy(j)
    };
    let points = (0..order)
        .map(|label| {
            let gi = label >> axis_bits;
            let gq = label & (levels - 1);
            Complex::new(amplitude(gi) / norm, amplitude(gq) / norm)
        })
        .collect();
    Ok(Constellation {
        order,
        bits: 2 * axis_bits,
        points,
    })
}

fn gray_to_index(mut g: usize) -> usize {
    let mut j = g;
    g >>= 1;
    while g != 0 {
        j ^= g;
        g >>= 1;
    }
    j
}

/// Desired and interfering channel variances from SNR/INR in dB, with unit
/// noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkScales {
    pub snr_db: f64,
    pub inr_db: f64,
}

impl LinkScales {
    pub fn new(snr_db: f64, inr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() || !inr_db.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { snr_db, inr_db })
    }

    pub fn sigma2_d(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    pub fn sigma2_i(&self) -> f64 {
        db_to_linear(self.inr_db)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One flat-fading draw: the desired channel and the interferer columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    pub h_d: ComplexVector<T>,
    /// Columns of `H_I`, one per interfering stream.
    pub interferers: Vec<ComplexVector<T>>,
}

impl<T: Scalar> ChannelRealization<T> {
    pub fn n_r(&self) -> usize {
        self.h_d.dim()
    }

    pub fn n_i(&self) -> usize {
        self.interferers.len()
    }

    /// Same draw with the desired channel rescaled by `sqrt(factor)`.
    pub fn with_desired_power(&self, factor: T) -> Self {
        Self {
            h_d: self.h_d.scale(Complex::new(factor.sqrt(), T::zero())),
            interferers: self.interferers.clone(),
        }
    }
}

/// i.i.d. `CN(0, sigma2_d)` desired and `CN(0, sigma2_i)` interferer entries.
///
/// The underlying normals do not depend on the variances, so the same rng
/// state at different SNRs yields the same channel up to scale.
pub fn draw_channel<T, R>(n_r: usize, n_i: usize, scales: &LinkScales, rng: &mut R) -> ChannelRealization<T>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let var_d = T::lit(scales.sigma2_d());
    let var_i = T::lit(scales.sigma2_i());
    let h_d = gaussian_vector(n_r, var_d, rng);
    let interferers = (0..n_i).map(|_| gaussian_vector(n_r, var_i, rng)).collect();
    ChannelRealization { h_d, interferers }
}

fn gaussian_vector<T, R>(n: usize, variance: T, rng: &mut R) -> ComplexVector<T>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    ComplexVector::from_vec_unchecked((0..n).map(|_| complex_gaussian(rng, variance)).collect())
}

/// Per-block truth `H_I H_I^H + I`.
pub fn true_covariance<T: Scalar>(ch: &ChannelRealization<T>) -> HermitianMatrix<T> {
    let mut r = HermitianMatrix::identity(ch.n_r());
    for col in &ch.interferers {
        r.rank_one_update(T::one(), col);
    }
    r
}

/// One `u = H_I s_I + n` with unit-energy interferer symbols and `n ~ CN(0, I)`.
pub fn interference_noise_sample<T, R>(
    ch: &ChannelRealization<T>,
    interferer: &Constellation<T>,
    rng: &mut R,
) -> ComplexVector<T>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    let mut u = gaussian_vector(ch.n_r(), T::one(), rng);
    for col in &ch.interferers {
        let s = interferer.point(interferer.random_label(rng));
        u.axpy(s, col);
    }
    u
}

/// `m` consecutive interference-plus-noise samples.
pub fn interference_noise_samples<T, R>(
    ch: &ChannelRealization<T>,
    m: usize,
    interferer: &Constellation<T>,
    rng: &mut R,
) -> Result<SampleBlock<T>>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    if m == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    SampleBlock::new((0..m).map(|_| interference_noise_sample(ch, interferer, rng)).collect())
}

/// `m` white `CN(0, I_n)` samples.
pub fn gaussian_block<T, R>(n: usize, m: usize, rng: &mut R) -> SampleBlock<T>
where
    T: Scalar,
    R: Rng + ?Sized,
    StandardNormal: Distribution<T>,
{
    SampleBlock::new((0..m).map(|_| gaussian_vector(n, T::one(), rng)).collect())
        .expect("white block has positive size and common dimension")
}

/// `y = h_d s_d + u`.
pub fn received_symbol<T: Scalar>(
    ch: &ChannelRealization<T>,
    s_d: Complex<T>,
    u: &ComplexVector<T>,
) -> Result<ComplexVector<T>> {
    if u.dim() != ch.n_r() {
        return Err(Error::DimensionMismatch {
            expected: ch.n_r(),
            found: u.dim(),
        });
    }
    let mut y = u.clone();
    y.axpy(s_d, &ch.h_d);
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, StreamTag};
    use crate::shrinkage::sample_covariance;
    use approx::assert_abs_diff_eq;

    #[test]
    fn qpsk_points() {
        let c = build_constellation::<f64>(4).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (label, expected) in [
            (0b00, Complex::new(s, s)),
            (0b01, Complex::new(s, -s)),
            (0b10, Complex::new(-s, s)),
            (0b11, Complex::new(-s, -s)),
        ] {
            assert!((c.point(label) - expected).norm() < 1e-15);
        }
        assert_eq!(c.label_bits(0b10), vec![1, 0]);
    }

    #[test]
    fn qam16_grid_and_energy() {
        let c = build_constellation::<f64>(16).unwrap();
        let scale = 10f64.sqrt();
        for p in c.points() {
            for a in [p.re * scale, p.im * scale] {
                let r = a.round();
                assert!((a - r).abs() < 1e-12 && [-3.0, -1.0, 1.0, 3.0].contains(&r));
            }
        }
        assert_abs_diff_eq!(c.average_energy(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unsupported_orders() {
        for q in [2, 8, 32, 256] {
            assert_eq!(build_constellation::<f64>(q), Err(Error::UnsupportedOrder(q)));
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        for q in [4usize, 16, 64] {
            let c = build_constellation::<f64>(q).unwrap();
            assert_abs_diff_eq!(c.average_energy(), 1.0, epsilon = 1e-12);
            let step = 2.0 / ((2 * (q - 1)) as f64 / 3.0).sqrt();
            for a in 0..q {
                for b in 0..q {
                    let d = c.point(a) - c.point(b);
                    let axis_neighbors = (d.re.abs() - step).abs() < 1e-9 && d.im.abs() < 1e-9
                        || (d.im.abs() - step).abs() < 1e-9 && d.re.abs() < 1e-9;
                    if axis_neighbors {
                        assert_eq!((a ^ b).count_ones(), 1, "q={q} labels {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_snr_variance_gives_zero_desired_channel() {
        let scales = LinkScales {
            snr_db: f64::NEG_INFINITY,
            inr_db: 0.0,
        };
        let mut rng = stream_rng(1, 0, StreamTag::Channel);
        let ch = draw_channel::<f64, _>(4, 1, &scales, &mut rng);
        assert!(ch.h_d.iter().all(|z| z.norm() == 0.0));
        assert!(LinkScales::new(f64::NEG_INFINITY, 0.0).is_err());
    }

    #[test]
    fn channel_draw_is_deterministic_and_scaled() {
        let scales = LinkScales::new(10.0, 20.0).unwrap();
        let a = draw_channel::<f64, _>(4, 2, &scales, &mut stream_rng(5, 1, StreamTag::Channel));
        let b = draw_channel::<f64, _>(4, 2, &scales, &mut stream_rng(5, 1, StreamTag::Channel));
        assert_eq!(a, b);
        let lo = draw_channel::<f64, _>(
            4,
            2,
            &LinkScales::new(0.0, 20.0).unwrap(),
            &mut stream_rng(5, 1, StreamTag::Channel),
        );
        assert!(lo
            .with_desired_power(10.0)
            .h_d
            .as_slice()
            .iter()
            .zip(a.h_d.iter())
            .all(|(x, y)| (x - y).norm() < 1e-12));
        assert_eq!(lo.interferers, a.interferers);
    }

    #[test]
    fn interferer_entry_variance() {
        let scales = LinkScales::new(0.0, 20.0).unwrap();
        let mut rng = stream_rng(2, 0, StreamTag::Channel);
        let draws = 25_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let ch = draw_channel::<f64, _>(4, 1, &scales, &mut rng);
            acc += ch.interferers[0].norm_sq();
        }
        let var = acc / (4 * draws) as f64;
        assert!((var / 100.0 - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn true_covariance_examples() {
        let ch = ChannelRealization::<f64> {
            h_d: ComplexVector::zeros(3),
            interferers: vec![],
        };
        assert_eq!(true_covariance(&ch), HermitianMatrix::identity(3));

        let a = Complex::new(2.0, -1.0);
        let ch = ChannelRealization {
            h_d: ComplexVector::zeros(3),
            interferers: vec![ComplexVector::basis(3, 0).scale(a)],
        };
        assert_eq!(
            true_covariance(&ch),
            HermitianMatrix::from_diagonal(&[6.0, 1.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn sample_stream_converges_to_truth() {
        let scales = LinkScales::new(0.0, 10.0).unwrap();
        let ch = draw_channel::<f64, _>(4, 2, &scales, &mut stream_rng(3, 0, StreamTag::Channel));
        let qpsk = build_constellation(4).unwrap();
        let block =
            interference_noise_samples(&ch, 100_000, &qpsk, &mut stream_rng(3, 0, StreamTag::Estimation)).unwrap();
        let r = true_covariance(&ch);
        let scm = sample_covariance(&block);
        let worst = scm.max_abs_diff(&r) / r.max_abs();
        assert!(worst < 0.02, "relative deviation {worst}");

        let one = interference_noise_samples(&ch, 1, &qpsk, &mut stream_rng(3, 0, StreamTag::Estimation)).unwrap();
        assert_eq!(one.len(), 1);
        assert!(interference_noise_samples(&ch, 0, &qpsk, &mut stream_rng(3, 0, StreamTag::Estimation)).is_err());
    }

    #[test]
    fn received_symbol_is_linear() {
        let ch = ChannelRealization {
            h_d: ComplexVector::new(vec![Complex::new(1.0, 2.0), Complex::new(-1.0, 0.5)]).unwrap(),
            interferers: vec![],
        };
        let u = ComplexVector::new(vec![Complex::new(0.1, 0.0), Complex::new(0.0, -0.3)]).unwrap();
        let zero = Complex::new(0.0, 0.0);
        assert_eq!(received_symbol(&ch, zero, &u).unwrap(), u);
        assert_eq!(
            received_symbol(&ch, Complex::new(1.0, 0.0), &ComplexVector::zeros(2)).unwrap(),
            ch.h_d
        );
        let (s1, s2) = (Complex::new(0.3, 0.7), Complex::new(-1.1, 0.2));
        let half = u.scale(Complex::new(0.5, 0.0));
        let sum = &received_symbol(&ch, s1, &half).unwrap() + &received_symbol(&ch, s2, &half).unwrap();
        let direct = received_symbol(&ch, s1 + s2, &u).unwrap();
        assert!(sum.iter().zip(direct.iter()).all(|(a, b)| (a - b).norm() < 1e-14));
        assert!(received_symbol(&ch, zero, &ComplexVector::zeros(3)).is_err());
    }
}
