//! Grid configuration files.
//!
//! A TOML file lists fixed parameters and the grid dimensions; [`GridConfig::cells`]
//! expands it into one [`SimConfig`] per cell in the order kind, mode, alpha,
//! pair probability.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{Mode, SimConfig};
use crate::error::{Error, Result};
use crate::landscape::MatrixKind;

fn default_replications() -> u32 {
    200
}
fn default_n() -> usize {
    15
}
fn default_m() -> usize {
    5
}
fn default_capacity() -> usize {
    5
}
fn default_horizon() -> u32 {
    150
}
fn default_tau() -> u32 {
    25
}
fn default_kinds() -> Vec<MatrixKind> {
    vec![MatrixKind::Decomposable2, MatrixKind::Nondecomposable5]
}
fn default_alphas() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn default_pair_probs() -> Vec<f64> {
    (0..=10)
        .map(|i| f64::from(i) * 0.05)
        .map(|p| (p * 100.0).round() / 100.0)
        .collect()
}
fn default_modes() -> Vec<Mode> {
    vec![Mode::TopDown, Mode::Emergent]
}
fn default_true() -> bool {
    true
}

/// Parsed grid configuration. `master_seed` has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub master_seed: Option<u64>,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default = "default_n")]
    pub n_decisions: usize,
    #[serde(default = "default_m")]
    pub m_agents: usize,
    /// Capacity shared by all agents unless `capacities` is given.
    #[serde(default = "default_capacity")]
    pub capacity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacities: Option<Vec<usize>>,
    #[serde(default = "default_horizon")]
    pub horizon: u32,
    /// Re-allocation interval of emergent cells.
    #[serde(default = "default_tau")]
    pub tau: u32,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<MatrixKind>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_pair_probs")]
    pub pair_probs: Vec<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default = "default_true")]
    pub pair_landscapes: bool,
}

impl GridConfig {
    /// The full parameter grid with the given seed and number of replications.
    pub fn standard_grid(master_seed: u64, replications: u32) -> Self {
        GridConfig {
            master_seed: Some(master_seed),
            replications,
            n_decisions: default_n(),
            m_agents: default_m(),
            capacity: default_capacity(),
            capacities: None,
            horizon: default_horizon(),
            tau: default_tau(),
            kinds: default_kinds(),
            alphas: default_alphas(),
            pair_probs: default_pair_probs(),
            modes: default_modes(),
            pair_landscapes: true,
        }
    }

    /// Parses and validates `text`. `origin` names the source in messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: GridConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start));
            Error::Config(match line {
                Some(l) => format!("{origin}, line {l}: {}", e.message()),
                None => format!("{origin}: {}", e.message()),
            })
        })?;
        cfg.validate_in(text, origin)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Checks every value; `text` is only used to locate the offending line.
    fn validate_in(&self, text: &str, origin: &str) -> Result<()> {
        let fail = |field: &str, msg: String| {
            let at = field_line(text, field).map_or(String::new(), |l| format!(", line {l}"));
            Err(Error::Config(format!(
                "{origin}{at}: field `{field}`: {msg}"
            )))
        };
        if self.master_seed.is_none() {
            return fail(
                "master_seed",
                "missing; a seed is required for reproducibility".into(),
            );
        }
        if self.replications == 0 {
            return fail("replications", "must be at least 1".into());
        }
        if self.n_decisions == 0 || self.n_decisions > crate::landscape::MAX_ENUMERABLE {
            return fail(
                "n_decisions",
                format!(
                    "{} outside 1..={}",
                    self.n_decisions,
                    crate::landscape::MAX_ENUMERABLE
                ),
            );
        }
        if self.m_agents == 0 {
            return fail("m_agents", "must be at least 1".into());
        }
        if !self.n_decisions.is_multiple_of(self.m_agents) {
            return fail(
                "m_agents",
                format!(
                    "n_decisions = {} is not divisible by m_agents = {}",
                    self.n_decisions, self.m_agents
                ),
            );
        }
        let share = self.n_decisions / self.m_agents;
        match &self.capacities {
            Some(c) if c.len() != self.m_agents => {
                return fail(
                    "capacities",
                    format!("{} entries for {} agents", c.len(), self.m_agents),
                );
            }
            Some(c) if c.iter().any(|&c| c < share) => {
                return fail(
                    "capacities",
                    format!("every capacity must be at least N/M = {share}"),
                );
            }
            None if self.capacity < share => {
                return fail(
                    "capacity",
                    format!("{} is below N/M = {share}", self.capacity),
                );
            }
            _ => {}
        }
        if self.horizon == 0 {
            return fail("horizon", "must be at least 1".into());
        }
        if self.tau == 0 {
            return fail("tau", "must be at least 1".into());
        }
        for (field, empty) in [
            ("kinds", self.kinds.is_empty()),
            ("alphas", self.alphas.is_empty()),
            ("pair_probs", self.pair_probs.is_empty()),
            ("modes", self.modes.is_empty()),
        ] {
            if empty {
                return fail(field, "must list at least one value".into());
            }
        }
        for kind in &self.kinds {
            if kind.k() + 1 > self.n_decisions {
                return fail("kinds", format!("{kind} needs K <= n_decisions - 1"));
            }
            if matches!(
                kind,
                MatrixKind::Decomposable2 | MatrixKind::Nondecomposable5
            ) && self.n_decisions != 15
            {
                return fail("kinds", format!("{kind} requires n_decisions = 15"));
            }
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return fail("alphas", format!("alpha = {a} outside [0, 1]"));
        }
        if let Some(p) = self.pair_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return fail("pair_probs", format!("pair probability {p} outside [0, 1]"));
        }
        for cell in self.cells()? {
            cell.validate()?;
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = Some(seed);
        self
    }

    pub fn with_replications(mut self, s: u32) -> Self {
        self.replications = s;
        self
    }

    pub fn seed(&self) -> Result<u64> {
        self.master_seed
            .ok_or_else(|| Error::Config("field `master_seed`: missing; a seed is required".into()))
    }

    /// Expands the grid: kind, then mode, then alpha, then pair probability.
    pub fn cells(&self) -> Result<Vec<SimConfig>> {
        let seed = self.seed()?;
        let capacities = self
            .capacities
            .clone()
            .unwrap_or_else(|| vec![self.capacity; self.m_agents]);
        let mut out = Vec::new();
        for &kind in &self.kinds {
            for &mode in &self.modes {
                for &alpha in &self.alphas {
                    for &pair_prob in &self.pair_probs {
                        out.push(SimConfig {
                            n_decisions: self.n_decisions,
                            m_agents: self.m_agents,
                            kind,
                            alpha,
                            pair_prob,
                            tau: match mode {
                                Mode::TopDown => None,
                                Mode::Emergent => Some(self.tau),
                            },
                            horizon: self.horizon,
                            capacities: capacities.clone(),
                            mode,
                            master_seed: seed,
                            replications: self.replications,
                            pair_landscapes: self.pair_landscapes,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Canonical JSON form, hashed into the manifest.
    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(
            self.canonical_json()?.as_bytes(),
        )))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("grid config serializes to TOML")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn field_line(text: &str, field: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(field)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}
