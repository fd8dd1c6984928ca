//! Scenario configuration: a flat TOML document, unknown keys rejected.
//!
//! ```toml
//! scenario_id = "fig2-16qam"
//! n_r = 4
//! n_i = 1
//! q_desired = 16
//! q_interferer = 4
//! snr_db = [0, 5, 10, 15, 20, 25, 30]
//! inr_db = 0
//! m_samples = 8                      # or a list, e.g. [6, 8, 12, 16]
//! estimators = ["oracle", "practical", "none"]
//! trials = 2000
//! symbols_per_trial = 200
//! seed = 1
//! ```
//!
//! Estimator names: `none`, `oracle`, `oracle-grid`, `practical`, and
//! `fixed:<rho>`. The ρ sweep uses `rho_grid` when given, otherwise the
//! uniform grid with step `rho_step`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::shrinkage::{rho_grid, MinEigMethod, MIN_BETA_TRIALS};

/// How a trial's covariance estimate is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoPolicy {
    /// Unregularized sample covariance.
    None,
    /// The true per-block covariance.
    OracleTrue,
    /// Shrinkage with the grid weight whose minimum eigenvalue best matches
    /// the true one.
    OracleGridMI,
    /// Two-window practical weight with calibrated beta.
    Practical,
    Fixed(f64),
}

impl RhoPolicy {
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RhoPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoPolicy::None => f.write_str("none"),
            RhoPolicy::OracleTrue => f.write_str("oracle"),
            RhoPolicy::OracleGridMI => f.write_str("oracle-grid"),
            RhoPolicy::Practical => f.write_str("practical"),
            RhoPolicy::Fixed(r) => write!(f, "fixed:{r}"),
        }
    }
}

impl FromStr for RhoPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(RhoPolicy::None),
            "oracle" => Ok(RhoPolicy::OracleTrue),
            "oracle-grid" => Ok(RhoPolicy::OracleGridMI),
            "practical" => Ok(RhoPolicy::Practical),
            _ => {
                let rho = s
                    .strip_prefix("fixed:")
                    .and_then(|r| r.parse::<f64>().ok())
                    .ok_or_else(|| Error::ConfigInvalid(format!("unknown estimator '{s}'")))?;
                Ok(RhoPolicy::Fixed(rho))
            }
        }
    }
}

impl Serialize for RhoPolicy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RhoPolicy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MinEigSetting {
    Exact,
    #[default]
    LowerBound,
}

impl From<MinEigSetting> for MinEigMethod {
    fn from(s: MinEigSetting) -> Self {
        match s {
            MinEigSetting::Exact => MinEigMethod::Exact,
            MinEigSetting::LowerBound => MinEigMethod::LowerBound,
        }
    }
}

/// One integer or a list of integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub n_r: usize,
    pub n_d: usize,
    pub n_i: usize,
    pub q_desired: usize,
    pub q_interferer: usize,
    pub snr_db: Vec<f64>,
    pub inr_db: f64,
    #[serde(deserialize_with = "one_or_many")]
    pub m_samples: Vec<usize>,
    pub estimators: Vec<RhoPolicy>,
    pub rho_grid: Option<Vec<f64>>,
    pub rho_step: f64,
    pub oracle_grid_step: f64,
    pub trials: usize,
    pub symbols_per_trial: usize,
    pub seed: u64,
    pub m_large_factor: usize,
    pub min_eig: MinEigSetting,
    pub beta_trials: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario_id: "scenario".into(),
            n_r: 4,
            n_d: 1,
            n_i: 1,
            q_desired: 16,
            q_interferer: 4,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            inr_db: 0.0,
            m_samples: vec![8],
            estimators: vec![RhoPolicy::OracleTrue, RhoPolicy::Practical, RhoPolicy::None],
            rho_grid: None,
            rho_step: 0.05,
            oracle_grid_step: crate::shrinkage::DEFAULT_GRID_STEP,
            trials: 2000,
            symbols_per_trial: 200,
            seed: 1,
            m_large_factor: 4,
            min_eig: MinEigSetting::LowerBound,
            beta_trials: 10_000,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read config '{}': {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The ρ values swept by `rho-sweep`.
    pub fn rho_values(&self) -> Result<Vec<f64>> {
        match &self.rho_grid {
            Some(g) => Ok(g.clone()),
            None => rho_grid(self.rho_step),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.scenario_id.is_empty()
            || !self
                .scenario_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return bad(format!(
                "scenario_id '{}' must be non-empty [A-Za-z0-9._-]",
                self.scenario_id
            ));
        }
        if self.n_d != 1 {
            return bad(format!("n_d must be 1, got {}", self.n_d));
        }
        if !(1..=8).contains(&self.n_r) {
            return bad(format!("n_r must lie in 1..=8, got {}", self.n_r));
        }
        for (name, q) in [("q_desired", self.q_desired), ("q_interferer", self.q_interferer)] {
            if ![4, 16, 64].contains(&q) {
                return bad(format!("{name} must be 4, 16 or 64, got {q}"));
            }
        }
        if self.snr_db.is_empty() || !self.snr_db.iter().all(|v| v.is_finite()) {
            return bad("snr_db must be a non-empty list of finite values".into());
        }
        if !self.inr_db.is_finite() {
            return bad("inr_db must be finite".into());
        }
        if self.m_samples.is_empty() || self.m_samples.contains(&0) {
            return bad("m_samples must be positive".into());
        }
        if self.trials == 0 || self.symbols_per_trial == 0 {
            return bad("trials and symbols_per_trial must be positive".into());
        }
        if self.m_large_factor == 0 {
            return bad("m_large_factor must be positive".into());
        }
        if self.beta_trials < MIN_BETA_TRIALS {
            return bad(format!("beta_trials must be at least {MIN_BETA_TRIALS}"));
        }
        if !(self.oracle_grid_step > 0.0 && self.oracle_grid_step <= 0.1) {
            return bad("oracle_grid_step must lie in (0, 0.1]".into());
        }
        if !(self.rho_step > 0.0 && self.rho_step <= 1.0) {
            return bad("rho_step must lie in (0, 1]".into());
        }
        let in_unit = |r: f64| (0.0..=1.0).contains(&r);
        if let Some(g) = &self.rho_grid {
            if g.is_empty() || !g.iter().all(|&r| in_unit(r)) {
                return bad("rho_grid values must lie in [0, 1]".into());
            }
        }
        if self.estimators.is_empty() {
            return bad("estimators must not be empty".into());
        }
        for e in &self.estimators {
            if let RhoPolicy::Fixed(r) = e {
                if !in_unit(*r) {
                    return bad(format!("fixed rho {r} outside [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let cfg = ScenarioConfig::from_toml_str(
            r#"
            scenario_id = "fig1"
            q_desired = 16
            snr_db = [10]
            inr_db = 20
            m_samples = [6, 8, 12, 16]
            estimators = ["oracle", "fixed:0.3", "practical"]
            min_eig = "exact"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.m_samples, vec![6, 8, 12, 16]);
        assert_eq!(cfg.estimators[1], RhoPolicy::Fixed(0.3));
        assert_eq!(cfg.min_eig, MinEigSetting::Exact);
        assert_eq!(cfg.rho_values().unwrap().len(), 21);
        assert_eq!(
            ScenarioConfig::from_toml_str("m_samples = 8").unwrap().m_samples,
            vec![8]
        );
    }

    #[test]
    fn echo_round_trips() {
        let cfg = ScenarioConfig::default();
        assert_eq!(ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        for text in [
            "trails = 10",
            "n_d = 2",
            "q_desired = 8",
            "estimators = [\"mmse\"]",
            "estimators = [\"fixed:1.5\"]",
            "rho_grid = [0.0, 2.0]",
            "trials = 0",
            "m_samples = []",
            "scenario_id = \"../escape\"",
            "beta_trials = 10",
            "snr_db = []",
        ] {
            assert!(
                matches!(ScenarioConfig::from_toml_str(text), Err(Error::ConfigInvalid(_))),
                "accepted: {text}"
            );
        }
    }
}
