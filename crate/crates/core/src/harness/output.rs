//! CSV artifacts and run manifests.
//!
//! Layout: `<out>/<scenario-id>/<subcommand>.csv`, an optional
//! `<subcommand>_trials.csv` with per-trial records, and `manifest.txt`.
//! Floats are written in shortest round-trip form, so identical inputs give
//! byte-identical files.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::shrinkage::BetaCalibration;

use super::experiments::{EigBiasRow, MIResult, TrialRecord};

pub const SNR_SWEEP_COLUMNS: [&str; 11] = [
    "scenario_id",
    "estimator",
    "snr_db",
    "inr_db",
    "m",
    "rho_mean",
    "mean_mi",
    "stderr_mi",
    "trials",
    "whitening_failures",
    "seed",
];

pub const RHO_SWEEP_COLUMNS: [&str; 11] = [
    "scenario_id",
    "estimator",
    "snr_db",
    "inr_db",
    "m",
    "rho",
    "mean_mi",
    "stderr_mi",
    "trials",
    "whitening_failures",
    "seed",
];

pub const TRIAL_COLUMNS: [&str; 11] = [
    "scenario_id",
    "trial",
    "estimator",
    "snr_db",
    "m",
    "rho",
    "mi",
    "whitening_failed",
    "trace_inv_true",
    "trace_inv_est",
    "seed",
];

pub const EIG_BIAS_COLUMNS: [&str; 9] = [
    "scenario_id",
    "n",
    "m",
    "trials",
    "mean_min_eig",
    "stderr_min_eig",
    "mean_max_eig",
    "stderr_max_eig",
    "seed",
];

pub const BETA_COLUMNS: [&str; 6] = ["scenario_id", "n", "m", "trials", "seed", "beta"];

/// A header plus rows of pre-formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

fn cell(v: impl Display) -> String {
    v.to_string()
}

pub fn mi_table(results: &[MIResult], columns: &[&str]) -> CsvTable {
    let mut t = CsvTable::new(columns);
    for r in results {
        t.push(vec![
            r.scenario_id.clone(),
            r.estimator.clone(),
            cell(r.snr_db),
            cell(r.inr_db),
            cell(r.m),
            cell(r.rho),
            cell(r.mean_mi),
            cell(r.stderr_mi),
            cell(r.trials),
            cell(r.whitening_failures),
            cell(r.seed),
        ]);
    }
    t
}

pub fn trial_table(scenario_id: &str, seed: u64, records: &[TrialRecord]) -> CsvTable {
    let mut t = CsvTable::new(&TRIAL_COLUMNS);
    for r in records {
        t.push(vec![
            scenario_id.to_string(),
            cell(r.trial),
            r.estimator.clone(),
            cell(r.snr_db),
            cell(r.m),
            cell(r.rho),
            cell(r.mi),
            cell(u8::from(r.whitening_failed)),
            cell(r.trace_inv_true),
            cell(r.trace_inv_est),
            cell(seed),
        ]);
    }
    t
}

pub fn eig_bias_table(scenario_id: &str, rows: &[EigBiasRow]) -> CsvTable {
    let mut t = CsvTable::new(&EIG_BIAS_COLUMNS);
    for r in rows {
        t.push(vec![
            scenario_id.to_string(),
            cell(r.n),
            cell(r.m),
            cell(r.trials),
            cell(r.mean_min_eig),
            cell(r.stderr_min_eig),
            cell(r.mean_max_eig),
            cell(r.stderr_max_eig),
            cell(r.seed),
        ]);
    }
    t
}

pub fn beta_table(scenario_id: &str, rows: &[BetaCalibration]) -> CsvTable {
    let mut t = CsvTable::new(&BETA_COLUMNS);
    for r in rows {
        t.push(vec![
            scenario_id.to_string(),
            cell(r.n),
            cell(r.m),
            cell(r.trials),
            cell(r.seed),
            cell(r.beta),
        ]);
    }
    t
}

/// Writes `<out>/<scenario>/<name>.csv` and returns its path.
pub fn write_table(out: &Path, scenario_id: &str, name: &str, table: &CsvTable) -> Result<PathBuf> {
    let dir = out.join(scenario_id);
    fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{name}.csv"));
    fs::write(&path, table.render())?;
    Ok(path)
}

/// Run metadata written next to the CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub subcommand: String,
    pub version: String,
    pub seed: u64,
    pub seed_override: bool,
    pub workers: usize,
    pub config_path: String,
    pub config_echo: String,
}

impl Manifest {
    pub fn render(&self) -> String {
        format!(
            "subcommand = {}\nversion = {}\nseed = {}\nseed_override = {}\nworkers = {}\nconfig_path = {}\n\n# effective configuration\n{}",
            self.subcommand, self.version, self.seed, self.seed_override, self.workers, self.config_path, self.config_echo
        )
    }

    pub fn write(&self, out: &Path, scenario_id: &str) -> Result<PathBuf> {
        let dir = out.join(scenario_id);
        fs::create_dir_all(&dir)?;
        let path = dir.join("manifest.txt");
        fs::write(&path, self.render())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_renders_header_and_rows() {
        let rows = vec![BetaCalibration {
            n: 4,
            m: 8,
            beta: 0.25,
            trials: 1000,
            seed: 3,
        }];
        let t = beta_table("s", &rows);
        assert_eq!(t.render(), "scenario_id,n,m,trials,seed,beta\ns,4,8,1000,3,0.25\n");
    }

    #[test]
    fn writes_under_scenario_directory() {
        let dir = tempfile::tempdir().unwrap();
        let t = CsvTable::new(&["a"]);
        let p = write_table(dir.path(), "sc", "eig-bias", &t).unwrap();
        assert_eq!(p, dir.path().join("sc").join("eig-bias.csv"));
        assert_eq!(fs::read_to_string(p).unwrap(), "a\n");
    }
}
