//! Run configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest precision the f64 backend honours.
pub const MAX_PREC: u32 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Working precision in significant digits.
    pub prec: u32,
    /// Quadrature tolerance.
    pub tol: f64,
    /// Threshold below which a theta-null counts as vanishing.
    pub theta_threshold: f64,
    /// Threshold on the second Abel-Jacobi derivative.
    pub hyper_threshold: f64,
    pub rationality_tol: f64,
    pub rationality_bound: i64,
    pub eps_hyperelliptic: Vec<f64>,
    pub eps_soliton: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    /// Draws of p₀ before a non-generic point is kept anyway.
    pub resample_tries: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            prec: 15,
            tol: 1e-12,
            theta_threshold: 1e-8,
            hyper_threshold: 1e-8,
            rationality_tol: 1e-8,
            rationality_bound: 1_000_000,
            eps_hyperelliptic: vec![1e-5, 1e-4, 1e-3],
            eps_soliton: vec![0.0, 1e-6, 1e-5, 1e-4, 1e-3],
            seed: 7,
            out: PathBuf::from("out"),
            resample_tries: 10,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prec == 0 || self.prec > MAX_PREC {
            return Err(Error::Config(format!(
                "precision {} digits unsupported (1..={MAX_PREC})",
                self.prec
            )));
        }
        let positive = [
            ("tol", self.tol),
            ("theta_threshold", self.theta_threshold),
            ("hyper_threshold", self.hyper_threshold),
            ("rationality_tol", self.rationality_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.tol < 10.0 * f64::EPSILON {
            return Err(Error::Config(format!("tol {:e} below working precision", self.tol)));
        }
        if self.rationality_bound < 1 {
            return Err(Error::Config("rationality_bound must be at least 1".into()));
        }
        for (name, grid) in [
            ("eps_hyperelliptic", &self.eps_hyperelliptic),
            ("eps_soliton", &self.eps_soliton),
        ] {
            if grid.is_empty() || grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                return Err(Error::Config(format!(
                    "{name} must be a nonempty list of nonnegative numbers"
                )));
            }
        }
        if self.eps_hyperelliptic.contains(&0.0) {
            return Err(Error::Config("eps_hyperelliptic entries must be positive".into()));
        }
        if self.resample_tries == 0 {
            return Err(Error::Config("resample_tries must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"seed": 3, "tol": 1e-10}"#).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.prec, 15);
    }

    #[test]
    fn bad_values_are_rejected() {
        let c = RunConfig {
            prec: 30,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            tol: -1.0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 3}"#).is_err());
    }
}
