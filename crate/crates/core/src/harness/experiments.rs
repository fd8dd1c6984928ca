//! Monte-Carlo experiment runners.
//!
//! Per-trial structure: one channel draw, one estimation stream, then
//! `symbols_per_trial` desired symbols with fresh interference and noise.
//! Trial `k` draws only from streams keyed by `(seed, k, tag)`, and the same
//! symbol stream is replayed for every estimator, SNR and ρ, so the compared
//! curves share their random numbers. Results are merged by trial index,
//! which makes every aggregate independent of the worker count.

use std::collections::HashMap;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::airlink::{
    build_constellation, draw_channel, interference_noise_samples, true_covariance, Constellation, LinkScales,
};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::receiver::{detect_and_score, mutual_information};
use crate::rng::{stream_rng, StreamTag};
use crate::shrinkage::{
    calibrate_beta, rho_oracle_grid, rho_practical_with, sample_covariance, shrink, BetaCache, MinEigMethod,
};
use crate::stats::{mean_and_stderr, pairwise_sum};

use super::config::{RhoPolicy, ScenarioConfig};

/// Minimum trial count for the eigenvalue-bias study.
pub const MIN_EIG_BIAS_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `0` means one per available core.
    pub workers: usize,
    /// Where calibrated beta values are cached; `None` disables caching.
    pub beta_cache: Option<PathBuf>,
}

impl RunOptions {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers,
            beta_cache: None,
        }
    }
}

/// Aggregated mutual information for one curve point.
#[derive(Debug, Clone, PartialEq)]
pub struct MIResult {
    pub scenario_id: String,
    pub estimator: String,
    pub snr_db: f64,
    pub inr_db: f64,
    pub m: usize,
    /// The fixed ρ, or the mean selected ρ; NaN for the oracle.
    pub rho: f64,
    pub mean_mi: f64,
    pub stderr_mi: f64,
    pub trials: usize,
    pub whitening_failures: usize,
    pub seed: u64,
}

/// Outcome of one estimator in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub estimator: String,
    pub snr_db: f64,
    pub m: usize,
    pub rho: f64,
    pub mi: f64,
    pub whitening_failed: bool,
    /// `tr(R^{-1})`, the optimal-SINR proxy.
    pub trace_inv_true: f64,
    /// `tr(R_est^{-1})`; NaN when the estimate is singular.
    pub trace_inv_est: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub results: Vec<MIResult>,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigBiasRow {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub mean_min_eig: f64,
    pub stderr_min_eig: f64,
    pub mean_max_eig: f64,
    pub stderr_max_eig: f64,
    pub seed: u64,
}

fn run_parallel<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Mean and spread of the extreme eigenvalues of white `n x n` sample
/// covariances, for each window length in `m_list`.
pub fn run_eig_bias(n: usize, m_list: &[usize], trials: usize, seed: u64, workers: usize) -> Result<Vec<EigBiasRow>> {
    if trials < MIN_EIG_BIAS_TRIALS {
        return Err(Error::ConfigInvalid(format!(
            "eig-bias needs at least {MIN_EIG_BIAS_TRIALS} trials, got {trials}"
        )));
    }
    if n == 0 || m_list.is_empty() || m_list.contains(&0) {
        return Err(Error::ConfigInvalid("n and every m must be positive".into()));
    }
    m_list
        .iter()
        .map(|&m| {
            let pairs = run_parallel(workers, || {
                (0..trials)
                    .into_par_iter()
                    .map(|k| {
                        let mut rng = stream_rng(seed ^ (m as u64).rotate_left(32), k as u64, StreamTag::EigBias);
                        let block = crate::airlink::gaussian_block::<f64, _>(n, m, &mut rng);
                        sample_covariance(&block).eig_extremes()
                    })
                    .collect::<Result<Vec<(f64, f64)>>>()
            })??;
            let mins: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let maxs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let (mean_min, se_min) = mean_and_stderr(&mins);
            let (mean_max, se_max) = mean_and_stderr(&maxs);
            Ok(EigBiasRow {
                n,
                m,
                trials,
                mean_min_eig: mean_min,
                stderr_min_eig: se_min,
                mean_max_eig: mean_max,
                stderr_max_eig: se_max,
                seed,
            })
        })
        .collect()
}

/// Calibrated beta per window length, through the cache when configured.
pub fn betas_for(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<HashMap<usize, f64>> {
    let mut cache = opts.beta_cache.as_ref().map(BetaCache::open).transpose()?;
    let mut out = HashMap::new();
    for &m in &cfg.m_samples {
        let cal = match cache.as_mut() {
            Some(c) => c.get_or_calibrate(cfg.n_r, m, cfg.beta_trials, cfg.seed)?,
            None => calibrate_beta(cfg.n_r, m, cfg.beta_trials, cfg.seed)?,
        };
        out.insert(m, cal.beta);
    }
    Ok(out)
}

struct Link {
    desired: Constellation<f64>,
    interferer: Constellation<f64>,
}

impl Link {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            desired: build_constellation(cfg.q_desired)?,
            interferer: build_constellation(cfg.q_interferer)?,
        })
    }
}

/// An estimate ready for detection, or the reason it cannot whiten.
struct Candidate {
    matrix: Option<HermitianMatrix<f64>>,
    rho: f64,
}

impl Candidate {
    fn from_matrix(matrix: HermitianMatrix<f64>, rho: f64) -> Self {
        let usable = matrix.cholesky().is_ok();
        Self {
            matrix: usable.then_some(matrix),
            rho,
        }
    }
}

/// One desired-symbol burst scored by MI; whitening failures score zero.
fn score(
    cfg: &ScenarioConfig,
    link: &Link,
    ch: &crate::airlink::ChannelRealization<f64>,
    candidate: &Candidate,
    trial: usize,
) -> Result<(f64, bool)> {
    let Some(matrix) = &candidate.matrix else {
        return Ok((0.0, true));
    };
    let mut rng = stream_rng(cfg.seed, trial as u64, StreamTag::Symbols);
    match detect_and_score(
        ch,
        matrix,
        &link.desired,
        &link.interferer,
        cfg.symbols_per_trial,
        &mut rng,
    ) {
        Ok(records) => Ok((mutual_information(&records, cfg.q_desired)?, false)),
        Err(Error::NotPositiveDefinite { .. }) => Ok((0.0, true)),
        Err(e) => Err(e),
    }
}

fn trace_inverse(m: Option<&HermitianMatrix<f64>>) -> f64 {
    m.and_then(|m| m.invert_pd().ok()).map_or(f64::NAN, |inv| inv.trace())
}

fn base_channel(cfg: &ScenarioConfig, trial: usize) -> crate::airlink::ChannelRealization<f64> {
    // Unit desired variance; each SNR point rescales the same draw.
    let scales = LinkScales {
        snr_db: 0.0,
        inr_db: cfg.inr_db,
    };
    draw_channel(
        cfg.n_r,
        cfg.n_i,
        &scales,
        &mut stream_rng(cfg.seed, trial as u64, StreamTag::Channel),
    )
}

fn aggregate(cfg: &ScenarioConfig, records: &[TrialRecord], keys: Vec<(String, f64, usize, f64)>) -> Vec<MIResult> {
    keys.into_iter()
        .map(|(estimator, snr_db, m, fixed_rho)| {
            let cell: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| {
                    r.estimator == estimator
                        && r.snr_db == snr_db
                        && r.m == m
                        && (fixed_rho.is_nan() || r.rho == fixed_rho)
                })
                .collect();
            let mi: Vec<f64> = cell.iter().map(|r| r.mi).collect();
            let (mean_mi, stderr_mi) = mean_and_stderr(&mi);
            let rho = if fixed_rho.is_nan() {
                let rhos: Vec<f64> = cell.iter().map(|r| r.rho).collect();
                pairwise_sum(&rhos) / rhos.len() as f64
            } else {
                fixed_rho
            };
            MIResult {
                scenario_id: cfg.scenario_id.clone(),
                estimator,
                snr_db,
                inr_db: cfg.inr_db,
                m,
                rho,
                mean_mi,
                stderr_mi,
                trials: cell.len(),
                whitening_failures: cell.iter().filter(|r| r.whitening_failed).count(),
                seed: cfg.seed,
            }
        })
        .collect()
}

/// MI as a function of a fixed shrinkage weight, for every window length in
/// `m_samples` and every SNR in `snr_db`.
pub fn run_rho_sweep(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    let rhos = cfg.rho_values()?;
    let link = Link::new(cfg)?;
    let m_max = *cfg.m_samples.iter().max().expect("validated non-empty");

    let per_trial = run_parallel(opts.workers, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|k| {
                let ch = base_channel(cfg, k);
                let r_true = true_covariance(&ch);
                let trace_inv_true = trace_inverse(Some(&r_true));
                let mut est_rng = stream_rng(cfg.seed, k as u64, StreamTag::Estimation);
                let stream = interference_noise_samples(&ch, m_max, &link.interferer, &mut est_rng)?;
                let mut out = Vec::with_capacity(cfg.m_samples.len() * rhos.len() * cfg.snr_db.len());
                for &m in &cfg.m_samples {
                    let scm = sample_covariance(&stream.head(m)?);
                    for &rho in &rhos {
                        let cand = Candidate::from_matrix(shrink(&scm, rho)?.matrix, rho);
                        let trace_inv_est = trace_inverse(cand.matrix.as_ref());
                        for &snr in &cfg.snr_db {
                            let ch_s = ch.with_desired_power(crate::airlink::db_to_linear(snr));
                            let (mi, failed) = score(cfg, &link, &ch_s, &cand, k)?;
                            out.push(TrialRecord {
                                trial: k,
                                estimator: "fixed".into(),
                                snr_db: snr,
                                m,
                                rho,
                                mi,
                                whitening_failed: failed,
                                trace_inv_true,
                                trace_inv_est,
                            });
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();

    let mut keys = Vec::new();
    for &snr in &cfg.snr_db {
        for &m in &cfg.m_samples {
            for &rho in &rhos {
                keys.push(("fixed".to_string(), snr, m, rho));
            }
        }
    }
    let results = aggregate(cfg, &trials, keys);
    Ok(SweepOutput { results, trials })
}

/// MI versus SNR for each configured estimator at the first window length.
pub fn run_snr_sweep(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    let link = Link::new(cfg)?;
    let needs_beta = cfg.estimators.contains(&RhoPolicy::Practical);
    let betas = if needs_beta {
        betas_for(cfg, opts)?
    } else {
        HashMap::new()
    };
    let method: MinEigMethod = cfg.min_eig.into();
    let m_list = cfg.m_samples.clone();

    let per_trial = run_parallel(opts.workers, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|k| {
                let ch = base_channel(cfg, k);
                let r_true = true_covariance(&ch);
                let trace_inv_true = trace_inverse(Some(&r_true));
                let mut out = Vec::new();
                for &m in &m_list {
                    let m_large = if needs_beta { m * cfg.m_large_factor } else { m };
                    let mut est_rng = stream_rng(cfg.seed, k as u64, StreamTag::Estimation);
                    let stream = interference_noise_samples(&ch, m_large.max(m), &link.interferer, &mut est_rng)?;
                    let scm_small = sample_covariance(&stream.tail(m)?);
                    let scm_large = sample_covariance(&stream);

                    for policy in &cfg.estimators {
                        let cand = match *policy {
                            RhoPolicy::OracleTrue => Candidate::from_matrix(r_true.clone(), f64::NAN),
                            RhoPolicy::None => Candidate::from_matrix(scm_small.clone(), 0.0),
                            RhoPolicy::Fixed(rho) => Candidate::from_matrix(shrink(&scm_small, rho)?.matrix, rho),
                            RhoPolicy::OracleGridMI => {
                                let rho = rho_oracle_grid(&scm_small, &r_true, cfg.oracle_grid_step)?;
                                Candidate::from_matrix(shrink(&scm_small, rho)?.matrix, rho)
                            }
                            RhoPolicy::Practical => {
                                let beta = betas[&m];
                                let rho = match rho_practical_with(&scm_small, &scm_large, beta, method) {
                                    Ok(r) => r,
                                    Err(Error::ZeroTrace) => 0.0,
                                    Err(e) => return Err(e),
                                };
                                Candidate::from_matrix(shrink(&scm_small, rho)?.matrix, rho)
                            }
                        };
                        let trace_inv_est = trace_inverse(cand.matrix.as_ref());
                        for &snr in &cfg.snr_db {
                            let ch_s = ch.with_desired_power(crate::airlink::db_to_linear(snr));
                            let (mi, failed) = score(cfg, &link, &ch_s, &cand, k)?;
                            out.push(TrialRecord {
                                trial: k,
                                estimator: policy.label(),
                                snr_db: snr,
                                m,
                                rho: cand.rho,
                                mi,
                                whitening_failed: failed,
                                trace_inv_true,
                                trace_inv_est,
                            });
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let trials: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();

    let mut keys = Vec::new();
    for &m in &m_list {
        for policy in &cfg.estimators {
            for &snr in &cfg.snr_db {
                keys.push((policy.label(), snr, m, f64::NAN));
            }
        }
    }
    let results = aggregate(cfg, &trials, keys);
    Ok(SweepOutput { results, trials })
}

/// Number of (trial, curve point) evaluations a sweep will perform.
pub fn planned_evaluations(cfg: &ScenarioConfig, subcommand: &str) -> Result<usize> {
    Ok(match subcommand {
        "rho-sweep" => cfg.trials * cfg.m_samples.len() * cfg.rho_values()?.len() * cfg.snr_db.len(),
        "snr-sweep" => cfg.trials * cfg.m_samples.len() * cfg.estimators.len() * cfg.snr_db.len(),
        "eig-bias" => cfg.trials * cfg.m_samples.len(),
        "calibrate-beta" => cfg.beta_trials * cfg.m_samples.len(),
        other => return Err(Error::ConfigInvalid(format!("unknown subcommand '{other}'"))),
    })
}
