use std::collections::BTreeMap;
use std::path::PathBuf;

use blaschke_core::Tolerances;
use serde::{Deserialize, Serialize};

use crate::RunError;

/// Where the immersion comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Catalog { id: String, params: BTreeMap<String, f64> },
    Grid { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Deriv {
    Exact,
    Fd,
}

/// Output destinations; not part of the echoed configuration so that the
/// report bytes do not depend on where they are written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: Source,
    pub samples: usize,
    pub seed: u64,
    pub deriv: Deriv,
    pub fd_step: f64,
    /// Overrides of the per-path defaults.
    pub tol_cluster: Option<f64>,
    pub tol_residual: Option<f64>,
    pub regularity: f64,
    #[serde(skip)]
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn catalog(id: &str, params: &[(&str, f64)]) -> Self {
        Self::default_for(Source::Catalog {
            id: id.to_string(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        })
    }

    pub fn default_for(source: Source) -> Self {
        RunConfig {
            source,
            samples: 20,
            seed: 0,
            deriv: Deriv::Exact,
            fd_step: 1e-2,
            tol_cluster: None,
            tol_residual: None,
            regularity: 1e-10,
            outputs: Outputs::default(),
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        let base = match self.deriv {
            Deriv::Exact => Tolerances::EXACT,
            Deriv::Fd => Tolerances::FD,
        };
        Tolerances {
            cluster: self.tol_cluster.unwrap_or(base.cluster),
            residual: self.tol_residual.unwrap_or(base.residual),
            trace_norm: base.trace_norm,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(RunError::Config(format!("{name} must be a positive number, got {v}")))
            }
        };
        if self.samples < 2 {
            return Err(RunError::Config("at least 2 samples are needed".into()));
        }
        positive("fd step", self.fd_step)?;
        positive("regularity", self.regularity)?;
        let t = self.tolerances();
        positive("cluster tolerance", t.cluster)?;
        positive("residual tolerance", t.residual)?;
        Ok(())
    }
}

/// Parses `name=value` pairs from the command line.
pub fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>, RunError> {
    let mut out = BTreeMap::new();
    for p in pairs {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| RunError::Config(format!("parameter `{p}` is not of the form name=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| RunError::Config(format!("parameter `{k}` has non-numeric value `{v}`")))?;
        if out.insert(k.trim().to_string(), v).is_some() {
            return Err(RunError::Config(format!("parameter `{k}` given twice")));
        }
    }
    Ok(out)
}
