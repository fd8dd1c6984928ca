//! Sample covariance, shrinkage toward a scaled identity, and the rules that
//! pick the shrinkage weight from the minimum eigenvalue.
//!
//! The regularized estimate is
//!
//! ```text
//! R_se(rho) = (1 - rho) * R_ml + rho * tr(R_ml) / n * I,   rho in [0, 1]
//! ```
//!
//! Every eigenvalue of `R_ml` is mapped affinely by the same formula, so the
//! minimum eigenvalue of the shrunk matrix has a closed form and the weight
//! that makes it match the true minimum eigenvalue can be solved for directly.

mod beta;
mod bounds;

pub use beta::{calibrate_beta, BetaCache, BetaCalibration, MIN_BETA_TRIALS};
pub use bounds::{max_eig_upper_bound, min_eig_lower_bound, upper_bound_from_moments};

use crate::error::{Error, Result};
use crate::hermitian::{ComplexVector, HermitianMatrix};
use crate::scalar::Scalar;

/// Grid resolution used when no step is configured.
pub const DEFAULT_GRID_STEP: f64 = 0.01;

/// Denominator floor below which a closed-form ensemble is degenerate.
const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// `M` complex samples of common dimension from one estimation window.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBlock<T> {
    samples: Vec<ComplexVector<T>>,
}

impl<T: Scalar> SampleBlock<T> {
    pub fn new(samples: Vec<ComplexVector<T>>) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyInput)?.dim();
        if let Some(bad) = samples.iter().find(|s| s.dim() != first) {
            return Err(Error::DimensionMismatch {
                expected: first,
                found: bad.dim(),
            });
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    pub fn samples(&self) -> &[ComplexVector<T>] {
        &self.samples
    }

    /// The first `m` samples.
    pub fn head(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.len() {
            return Err(Error::InvalidArgument(format!(
                "window of {m} samples from a block of {}",
                self.len()
            )));
        }
        Ok(Self {
            samples: self.samples[..m].to_vec(),
        })
    }

    /// The most recent `m` samples.
    pub fn tail(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.len() {
            return Err(Error::InvalidArgument(format!(
                "window of {m} samples from a block of {}",
                self.len()
            )));
        }
        Ok(Self {
            samples: self.samples[self.len() - m..].to_vec(),
        })
    }
}

/// How the shrinkage weight of an estimate was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RhoSource {
    None,
    OracleGrid,
    MinEigClosedForm,
    Practical,
    FixedRho,
}

/// A regularized covariance together with the weight that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkageEstimate<T> {
    pub matrix: HermitianMatrix<T>,
    pub rho: T,
    pub source: RhoSource,
    /// The unshrunk sample covariance.
    pub scm: HermitianMatrix<T>,
}

/// How `lambda(R)` is estimated from the long-window covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinEigMethod {
    /// Full eigensolve.
    Exact,
    /// Trace/Frobenius lower bound evaluated on the inverse.
    #[default]
    LowerBound,
}

/// `(1/M) sum_m u(m) u(m)^H`.
pub fn sample_covariance<T: Scalar>(block: &SampleBlock<T>) -> HermitianMatrix<T> {
    let n = block.dim();
    let weight = T::one() / T::from_usize_lossy(block.len());
    let mut acc = HermitianMatrix::zeros(n);
    for u in block.samples() {
        acc.rank_one_update(weight, u);
    }
    acc
}

fn check_rho<T: Scalar>(rho: T) -> Result<()> {
    if !(rho >= T::zero() && rho <= T::one()) {
        return Err(Error::RhoOutOfRange(rho.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

fn mean_eigenvalue<T: Scalar>(m: &HermitianMatrix<T>) -> T {
    m.trace() / T::from_usize_lossy(m.dim())
}

/// Shrinks `scm` toward `tr(scm)/n * I` with weight `rho`.
pub fn shrink<T: Scalar>(scm: &HermitianMatrix<T>, rho: T) -> Result<ShrinkageEstimate<T>> {
    shrink_with_source(scm, rho, RhoSource::FixedRho)
}

pub fn shrink_with_source<T: Scalar>(
    scm: &HermitianMatrix<T>,
    rho: T,
    source: RhoSource,
) -> Result<ShrinkageEstimate<T>> {
    check_rho(rho)?;
    let matrix = if rho == T::zero() {
        scm.clone()
    } else {
        scm.affine(T::one() - rho, rho * mean_eigenvalue(scm))
    };
    Ok(ShrinkageEstimate {
        matrix,
        rho,
        source,
        scm: scm.clone(),
    })
}

/// Minimum eigenvalue of the shrunk matrix without forming it.
pub fn min_eig_shrunk<T: Scalar>(scm: &HermitianMatrix<T>, rho: T) -> Result<T> {
    check_rho(rho)?;
    Ok(shifted_min_eig(scm.min_eigenvalue()?, mean_eigenvalue(scm), rho))
}

#[inline]
fn shifted_min_eig<T: Scalar>(lambda: T, mean: T, rho: T) -> T {
    (T::one() - rho) * lambda + rho * mean
}

/// Ensemble estimate of the weight minimizing `E[lambda(R) - lambda(R_se(rho))]^2`.
///
/// The objective is a convex quadratic in `rho`; its stationary point is the
/// ratio of `E[(lambda_true - lambda_i)(mean_i - lambda_i)]` to
/// `E[(mean_i - lambda_i)^2]`, clamped to `[0, 1]`.
pub fn rho_closed_form<T: Scalar>(ensemble: &[HermitianMatrix<T>], lambda_true: T) -> Result<T> {
    if ensemble.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "closed-form ensemble needs at least 2 members, got {}",
            ensemble.len()
        )));
    }
    let n = ensemble[0].dim();
    let count = T::from_usize_lossy(ensemble.len());
    let mut num = T::zero();
    let mut den = T::zero();
    for m in ensemble {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
        let lambda = m.min_eigenvalue()?;
        let spread = mean_eigenvalue(m) - lambda;
        num += (lambda_true - lambda) * spread;
        den += spread * spread;
    }
    let (num, den) = (num / count, den / count);
    if den < T::lit(DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateEnsemble);
    }
    Ok(clamp_unit(num / den))
}

/// Grid points `{0, step, 2 step, ..., 1}`; `1` is always the last point.
pub fn rho_grid<T: Scalar>(step: T) -> Result<Vec<T>> {
    if !(step > T::zero() && step <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "grid step must lie in (0, 1], got {step}"
        )));
    }
    let mut grid = Vec::new();
    let mut k = 0usize;
    loop {
        let rho = step * T::from_usize_lossy(k);
        if rho >= T::one() - step * T::lit(1e-6) {
            break;
        }
        grid.push(rho);
        k += 1;
    }
    grid.push(T::one());
    Ok(grid)
}

/// Genie selection: the grid weight whose shrunk minimum eigenvalue is closest
/// to that of `r_true`. Ties go to the smaller weight.
pub fn rho_oracle_grid<T: Scalar>(scm: &HermitianMatrix<T>, r_true: &HermitianMatrix<T>, grid_step: T) -> Result<T> {
    if scm.dim() != r_true.dim() {
        return Err(Error::DimensionMismatch {
            expected: r_true.dim(),
            found: scm.dim(),
        });
    }
    if grid_step > T::lit(0.1) {
        return Err(Error::InvalidArgument(format!(
            "grid step must not exceed 0.1, got {grid_step}"
        )));
    }
    let grid = rho_grid(grid_step)?;
    let target = r_true.min_eigenvalue()?;
    let lambda = scm.min_eigenvalue()?;
    let mean = mean_eigenvalue(scm);

    let mut best = (T::zero(), T::infinity());
    for rho in grid {
        let err = target - shifted_min_eig(lambda, mean, rho);
        let obj = err * err;
        if obj < best.1 {
            best = (rho, obj);
        }
    }
    Ok(best.0)
}

/// Two-window practical weight: `beta * lambda(scm_large) / (tr(scm_small)/n)`,
/// clamped to `[0, 1]`, with `lambda` estimated by the trace/Frobenius lower
/// bound.
pub fn rho_practical<T: Scalar>(scm_small: &HermitianMatrix<T>, scm_large: &HermitianMatrix<T>, beta: T) -> Result<T> {
    rho_practical_with(scm_small, scm_large, beta, MinEigMethod::default())
}

pub fn rho_practical_with<T: Scalar>(
    scm_small: &HermitianMatrix<T>,
    scm_large: &HermitianMatrix<T>,
    beta: T,
    method: MinEigMethod,
) -> Result<T> {
    if scm_small.dim() != scm_large.dim() {
        return Err(Error::DimensionMismatch {
            expected: scm_small.dim(),
            found: scm_large.dim(),
        });
    }
    if !(beta > T::zero() && beta <= T::one()) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1], got {beta}")));
    }
    let mean = mean_eigenvalue(scm_small);
    if !(mean > T::zero()) {
        return Err(Error::ZeroTrace);
    }
    let lambda = match method {
        MinEigMethod::Exact => scm_large.min_eigenvalue()?.max(T::zero()),
        // A singular PSD matrix has minimum eigenvalue zero.
        MinEigMethod::LowerBound => match min_eig_lower_bound(scm_large) {
            Ok(v) => v,
            Err(Error::NotPositiveDefinite { .. }) => T::zero(),
            Err(e) => return Err(e),
        },
    };
    Ok(clamp_unit(beta * lambda / mean))
}

fn clamp_unit<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return T::zero();
    }
    x.max(T::zero()).min(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex;

    fn diag(d: &[f64]) -> HermitianMatrix<f64> {
        HermitianMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn sample_covariance_examples() {
        let e1 = ComplexVector::<f64>::basis(2, 0);
        let e2 = ComplexVector::<f64>::basis(2, 1);
        let one = SampleBlock::new(vec![e1.clone()]).unwrap();
        assert_eq!(sample_covariance(&one), diag(&[1.0, 0.0]));
        let two = SampleBlock::new(vec![e1, e2]).unwrap();
        assert_eq!(sample_covariance(&two), diag(&[0.5, 0.5]));
        // (1,1)(1,1)^T + (1,-1)(1,-1)^T = 2 I, over M = 2
        let pm = SampleBlock::new(vec![
            ComplexVector::from_real(&[1.0, 1.0]).unwrap(),
            ComplexVector::from_real(&[1.0, -1.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(sample_covariance(&pm), HermitianMatrix::identity(2));
    }

    #[test]
    fn sample_block_rejects_mixed_dims() {
        let r = SampleBlock::new(vec![ComplexVector::<f64>::zeros(2), ComplexVector::zeros(3)]);
        assert_eq!(r, Err(Error::DimensionMismatch { expected: 2, found: 3 }));
        assert_eq!(SampleBlock::<f64>::new(vec![]), Err(Error::EmptyInput));
    }

    #[test]
    fn sample_covariance_is_hermitian_for_complex_samples() {
        let u = ComplexVector::new(vec![Complex::new(1.0, 2.0), Complex::new(-0.5, 0.25)]).unwrap();
        let s = sample_covariance(&SampleBlock::new(vec![u.clone()]).unwrap());
        assert_eq!(s, HermitianMatrix::outer(&u));
        assert_eq!(s.get(0, 1), s.get(1, 0).conj());
    }

    #[test]
    fn shrink_examples() {
        let scm = HermitianMatrix::from_real_rows(&[vec![3.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(shrink(&scm, 0.0).unwrap().matrix, scm);
        assert_eq!(shrink(&scm, 1.0).unwrap().matrix, diag(&[2.0, 2.0]));
        assert_eq!(shrink(&diag(&[2.0, 0.0]), 0.5).unwrap().matrix, diag(&[1.5, 0.5]));
        assert_eq!(shrink(&scm, 1.5), Err(Error::RhoOutOfRange(1.5)));
        assert!(shrink(&scm, -0.1).is_err());
        assert!(shrink(&scm, f64::NAN).is_err());
    }

    #[test]
    fn shrink_regularizes_singular_scm() {
        let u = ComplexVector::new(vec![
            Complex::new(1.0, 0.5),
            Complex::new(0.2, -1.0),
            Complex::new(0.0, 1.0),
        ])
        .unwrap();
        let scm = HermitianMatrix::outer(&u);
        assert!(scm.cholesky().is_err());
        let est = shrink(&scm, 0.05).unwrap();
        assert!(est.matrix.cholesky().is_ok());
        assert_abs_diff_eq!(est.matrix.trace(), scm.trace(), epsilon = 1e-12);
    }

    #[test]
    fn min_eig_shrunk_examples() {
        let scm = diag(&[0.5, 1.0, 1.5, 2.0]);
        assert_abs_diff_eq!(min_eig_shrunk(&scm, 0.4).unwrap(), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(min_eig_shrunk(&scm, 0.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(min_eig_shrunk(&scm, 1.0).unwrap(), 1.25, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        let flat = vec![diag(&[1.0, 1.0]); 3];
        assert_eq!(rho_closed_form(&flat, 1.0), Err(Error::DegenerateEnsemble));

        let spread = vec![diag(&[2.0, 0.0]); 2];
        assert_abs_diff_eq!(rho_closed_form(&spread, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        // lambda_true = 0.25 lands inside: (0.25 - 0)(1 - 0) / 1
        assert_abs_diff_eq!(rho_closed_form(&spread, 0.25).unwrap(), 0.25, epsilon = 1e-12);
        // clamp above 1
        assert_eq!(rho_closed_form(&spread, 3.0).unwrap(), 1.0);

        assert!(rho_closed_form(&spread[..1], 1.0).is_err());
        let mixed = vec![diag(&[1.0, 2.0]), diag(&[1.0, 2.0, 3.0])];
        assert!(matches!(
            rho_closed_form(&mixed, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn grid_contains_endpoints() {
        let g = rho_grid(0.05f64).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = rho_grid(0.03f64).unwrap();
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(rho_grid(0.0f64).is_err());
    }

    #[test]
    fn oracle_grid_examples() {
        let id = diag(&[1.0, 1.0]);
        assert_eq!(rho_oracle_grid(&id, &id, 0.01).unwrap(), 0.0);

        let scm = diag(&[2.0, 0.0]);
        let r_half = diag(&[0.5, 3.0]);
        assert_abs_diff_eq!(rho_oracle_grid(&scm, &r_half, 0.05).unwrap(), 0.5, epsilon = 1e-12);

        let r_two = diag(&[2.0, 2.0]);
        assert_eq!(rho_oracle_grid(&scm, &r_two, 0.05).unwrap(), 1.0);

        assert!(matches!(
            rho_oracle_grid(&scm, &diag(&[1.0, 1.0, 1.0]), 0.05),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(rho_oracle_grid(&scm, &r_two, 0.2).is_err());
    }

    #[test]
    fn practical_examples() {
        let id = HermitianMatrix::<f64>::identity(4);
        assert_abs_diff_eq!(rho_practical(&id, &id, 0.25).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(
            rho_practical_with(&id, &id, 0.25, MinEigMethod::Exact).unwrap(),
            0.25,
            epsilon = 1e-12
        );

        let singular = HermitianMatrix::outer(&ComplexVector::from_real(&[1.0, 1.0, 0.0, 0.0]).unwrap());
        assert_eq!(rho_practical(&id, &singular, 0.25).unwrap(), 0.0);
        assert_abs_diff_eq!(
            rho_practical_with(&id, &singular, 0.25, MinEigMethod::Exact).unwrap(),
            0.0,
            epsilon = 1e-12
        );

        let big = id.scaled(8.0);
        assert_eq!(rho_practical(&id, &big, 0.5).unwrap(), 1.0);

        assert_eq!(
            rho_practical(&HermitianMatrix::zeros(4), &id, 0.5),
            Err(Error::ZeroTrace)
        );
        assert!(rho_practical(&id, &id, 0.0).is_err());
        assert!(rho_practical(&id, &id, 1.5).is_err());
        assert!(matches!(
            rho_practical(&id, &HermitianMatrix::identity(3), 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn head_and_tail_windows() {
        let samples: Vec<_> = (0..5)
            .map(|k| ComplexVector::from_real(&[k as f64, 0.0]).unwrap())
            .collect();
        let block = SampleBlock::new(samples).unwrap();
        assert_eq!(block.tail(2).unwrap().samples()[0][0].re, 3.0);
        assert_eq!(block.head(2).unwrap().samples()[1][0].re, 1.0);
        assert!(block.tail(6).is_err());
        assert!(block.head(0).is_err());
    }
}
