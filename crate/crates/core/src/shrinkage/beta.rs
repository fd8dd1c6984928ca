//! Monte-Carlo calibration of the small-sample minimum-eigenvalue scale
//! `beta_M ~ E[lambda(R_ml)] / lambda(R)`, and its on-disk cache.
//!
//! Cache format: plain text, one record per line,
//!
//! ```text
//! # n m trials seed beta
//! 4 8 10000 1 0.2473...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Floats use Rust's
//! shortest round-trip formatting, so a cached value reloads bit-exactly.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::airlink::gaussian_block;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamTag};
use crate::shrinkage::sample_covariance;
use crate::stats::mean;

pub const MIN_BETA_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCalibration {
    pub n: usize,
    pub m: usize,
    pub beta: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Mean minimum eigenvalue of the SCM of `m` white CN(0, I_n) samples.
///
/// Since `lambda(I) = 1` this is the scale factor directly. Trial `k` draws
/// from its own stream, so the result does not depend on the thread count.
pub fn calibrate_beta(n: usize, m: usize, trials: usize, seed: u64) -> Result<BetaCalibration> {
    if trials < MIN_BETA_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "beta calibration needs at least {MIN_BETA_TRIALS} trials, got {trials}"
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and m must be positive".into()));
    }
    let mins = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64, StreamTag::Calibration);
            let block = gaussian_block::<f64, _>(n, m, &mut rng);
            sample_covariance(&block).min_eigenvalue().map(|l| l.max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let beta = mean(&mins);
    // beta is a mean of values in [0, 1 + noise]; a zero would make every
    // practical weight vanish, which only happens for m < n.
    let beta = beta.clamp(f64::MIN_POSITIVE, 1.0);
    Ok(BetaCalibration {
        n,
        m,
        beta,
        trials,
        seed,
    })
}

/// Text-file cache of calibrations keyed by `(n, m, trials, seed)`.
#[derive(Debug, Clone)]
pub struct BetaCache {
    path: PathBuf,
    records: Vec<BetaCalibration>,
}

impl BetaCache {
    /// Loads the cache, treating a missing file as empty.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let records = match fs::read_to_string(&path) {
            Ok(text) => parse_records(&text, &path)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self { path, records })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn records(&self) -> &[BetaCalibration] {
        &self.records
    }

    pub fn lookup(&self, n: usize, m: usize, trials: usize, seed: u64) -> Option<BetaCalibration> {
        self.records
            .iter()
            .find(|r| r.n == n && r.m == m && r.trials == trials && r.seed == seed)
            .copied()
    }

    /// Returns the cached calibration, or computes and appends it.
    pub fn get_or_calibrate(&mut self, n: usize, m: usize, trials: usize, seed: u64) -> Result<BetaCalibration> {
        if let Some(hit) = self.lookup(n, m, trials, seed) {
            return Ok(hit);
        }
        let cal = calibrate_beta(n, m, trials, seed)?;
        self.append(cal)?;
        Ok(cal)
    }

    fn append(&mut self, cal: BetaCalibration) -> Result<()> {
        let fresh = !self.path.exists();
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        if fresh {
            writeln!(f, "# n m trials seed beta")?;
        }
        writeln!(f, "{}", format_record(&cal))?;
        self.records.push(cal);
        Ok(())
    }
}

pub(crate) fn format_record(c: &BetaCalibration) -> String {
    format!("{} {} {} {} {:?}", c.n, c.m, c.trials, c.seed, c.beta)
}

fn parse_records(text: &str, path: &Path) -> Result<Vec<BetaCalibration>> {
    let bad = |line: usize, why: &str| Error::ConfigInvalid(format!("{}:{}: {}", path.display(), line, why));
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(bad(i + 1, "expected 5 fields: n m trials seed beta"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(i + 1, "malformed integer"));
        let seed = fields[3].parse::<u64>().map_err(|_| bad(i + 1, "malformed seed"))?;
        let beta = fields[4].parse::<f64>().map_err(|_| bad(i + 1, "malformed beta"))?;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(bad(i + 1, "beta outside (0, 1]"));
        }
        out.push(BetaCalibration {
            n: int(fields[0])?,
            m: int(fields[1])?,
            trials: int(fields[2])?,
            seed,
            beta,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_scale_at_twice_the_dimension() {
        let cal = calibrate_beta(4, 8, 4000, 11).unwrap();
        assert!((cal.beta - 0.25).abs() <= 0.03, "beta = {}", cal.beta);
    }

    #[test]
    fn scalar_case_is_unbiased() {
        let cal = calibrate_beta(1, 100, 1000, 3).unwrap();
        assert!((cal.beta - 1.0).abs() <= 0.02, "beta = {}", cal.beta);
    }

    #[test]
    fn long_windows_are_consistent() {
        let cal = calibrate_beta(4, 10_000, 1000, 5).unwrap();
        assert!(cal.beta >= 0.9, "beta = {}", cal.beta);
    }

    #[test]
    fn calibration_is_deterministic_and_guarded() {
        assert_eq!(
            calibrate_beta(3, 5, 1000, 9).unwrap(),
            calibrate_beta(3, 5, 1000, 9).unwrap()
        );
        assert!(calibrate_beta(4, 8, 999, 0).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("beta.txt");
        let mut cache = BetaCache::open(&path).unwrap();
        assert!(cache.records().is_empty());
        let first = cache.get_or_calibrate(4, 8, 1000, 1).unwrap();

        let reopened = BetaCache::open(&path).unwrap();
        assert_eq!(reopened.lookup(4, 8, 1000, 1), Some(first));
        assert_eq!(reopened.lookup(4, 8, 1000, 2), None);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# n m trials seed beta\n4 8 1000 1 "));
    }

    #[test]
    fn cache_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("beta.txt");
        fs::write(&path, "4 8 1000\n").unwrap();
        assert!(matches!(BetaCache::open(&path), Err(Error::ConfigInvalid(_))));
        fs::write(&path, "4 8 1000 1 1.5\n").unwrap();
        assert!(BetaCache::open(&path).is_err());
    }
}
