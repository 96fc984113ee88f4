//! Sweep configuration and the flat `key = value` file format.

use std::collections::BTreeMap;
use std::path::PathBuf;

use super::emit::Format;
use super::registry::{compatibility, ExperimentId, SchemeId};
use crate::error::{Error, Result};
use crate::metrics::RhoInterp;
use crate::ode::Tolerances;

/// Largest `k` a sweep may request.
pub const K_LIMIT: u32 = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub scheme: SchemeId,
    pub kmin: u32,
    pub kmax: u32,
    pub tol: Tolerances,
    pub k0: u32,
    pub shifted: bool,
    /// Density reconstruction for finite-difference schemes (linear by default).
    pub rho_interp: Option<RhoInterp>,
    /// Timing repetitions; the median is reported.
    pub repeats: usize,
    pub parallel: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, scheme: SchemeId) -> Self {
        Self {
            experiment,
            scheme,
            kmin: 3,
            kmax: 8,
            tol: Tolerances { abs_tol: 1e-8, rel_tol: 1e-8 },
            k0: 10,
            shifted: false,
            rho_interp: None,
            repeats: 3,
            parallel: true,
            out: None,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        compatibility(self.experiment, self.scheme)?;
        if self.kmin > self.kmax {
            return Err(Error::Configuration(format!("kmin {} > kmax {}", self.kmin, self.kmax)));
        }
        if self.kmax > K_LIMIT {
            return Err(Error::Configuration(format!("kmax {} exceeds {K_LIMIT}", self.kmax)));
        }
        if self.scheme.spectral() && self.kmin == 0 {
            return Err(Error::Configuration("pseudospectral schemes need k >= 1".into()));
        }
        if self.k0 < self.kmax + 2 || self.k0 > 24 {
            return Err(Error::Configuration(format!(
                "reference grid k0 = {} must lie in [kmax + 2, 24]",
                self.k0
            )));
        }
        Tolerances::new(self.tol.abs_tol, self.tol.rel_tol)?;
        if self.repeats == 0 {
            return Err(Error::Configuration("repeats must be positive".into()));
        }
        Ok(())
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", no + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}
