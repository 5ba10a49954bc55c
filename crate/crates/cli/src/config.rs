//! Run configuration: a TOML file, overridden by environment variables,
//! overridden by flags.
//!
//! ```toml
//! seed = 42
//! deterministic = true
//! jobs = 4
//! out_dir = "reports"
//! tol = 1e-9          # quadrature accuracy
//! tail = 1e-14        # truncation tail for thermal / coherent cutoffs
//! budget_cap = 1e-3   # reports with a larger tolerance budget exit 3
//! max_dim = 24
//! trials = 200
//! kappas = [2, 4, 8, 16, 32]
//! zs = [0.0, 0.3, 0.6, 0.9]
//! p = 2.0
//! q = 2.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::Usage;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub deterministic: Option<bool>,
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub tol: Option<f64>,
    pub tail: Option<f64>,
    pub budget_cap: Option<f64>,
    pub max_dim: Option<usize>,
    pub trials: Option<usize>,
    pub kappas: Option<Vec<f64>>,
    pub zs: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Usage(format!("bad config {}: {e}", path.display())).into())
    }
}

/// Settings shared by every subcommand, after all overrides.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub deterministic: bool,
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub tol: f64,
    pub tail: f64,
    pub budget_cap: f64,
    pub max_dim: usize,
    pub trials: Option<usize>,
    pub kappas: Vec<f64>,
    pub zs: Vec<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

/// The command-line half of the overrides; `None` defers to the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub tol: Option<f64>,
    pub tail: Option<f64>,
    pub budget_cap: Option<f64>,
}

impl RunConfig {
    pub fn resolve(file: ConfigFile, o: Overrides) -> anyhow::Result<Self> {
        let jobs = o
            .jobs
            .or(file.jobs)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let cfg = Self {
            seed: o.seed.or(file.seed).unwrap_or(42),
            deterministic: o.deterministic || file.deterministic.unwrap_or(false),
            jobs,
            out_dir: o
                .out_dir
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from("reports")),
            tol: o.tol.or(file.tol).unwrap_or(1e-9),
            tail: o.tail.or(file.tail).unwrap_or(1e-14),
            budget_cap: o.budget_cap.or(file.budget_cap).unwrap_or(1e-3),
            max_dim: file.max_dim.unwrap_or(24),
            trials: file.trials,
            kappas: file
                .kappas
                .unwrap_or_else(|| vec![2.0, 4.0, 8.0, 16.0, 32.0]),
            zs: file
                .zs
                .unwrap_or_else(|| (0..10).map(|i| i as f64 / 10.0).collect()),
            p: file.p,
            q: file.q,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        for (name, v) in [
            ("tol", self.tol),
            ("tail", self.tail),
            ("budget_cap", self.budget_cap),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Usage(format!("{name} must be a positive number, got {v}")).into());
            }
        }
        if self.jobs == 0 {
            return Err(Usage("jobs must be at least 1".into()).into());
        }
        if self.max_dim < 2 {
            return Err(Usage("max_dim must be at least 2".into()).into());
        }
        if self.kappas.is_empty() || self.zs.is_empty() {
            return Err(Usage("parameter grids must be nonempty".into()).into());
        }
        Ok(())
    }

    pub fn integration(&self) -> wehrl_core::IntegrationOptions {
        wehrl_core::IntegrationOptions::with_tol(self.tol)
    }
}
