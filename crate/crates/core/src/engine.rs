//! Periods, runs and parameter grids.
//!
//! Every random draw is taken from a substream keyed by
//! `(master_seed, cell hash, run, period, label, agent)`, so a run's record
//! depends only on its configuration and run index.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{
    adjacent_step, assemble_vector, individual_step, pair_agents, split_vector, Allocation,
};
use crate::analysis::efficiency;
use crate::beliefs::{init_beliefs, BeliefState};
use crate::error::{Error, Result};
use crate::landscape::{
    build_influence_matrix, generate_landscape, DecisionVector, Landscape, MatrixKind, Provenance,
};
use crate::reallocation::{reallocate, Transfer};
use crate::rng::{hash_str, label, SeedKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Mirrored contiguous allocation, never re-allocated.
    TopDown,
    /// Random equal initial allocation, re-allocated every `tau` periods.
    Emergent,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::TopDown => "top_down",
            Mode::Emergent => "emergent",
        })
    }
}

/// One cell of the parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_decisions: usize,
    pub m_agents: usize,
    pub kind: MatrixKind,
    pub alpha: f64,
    pub pair_prob: f64,
    pub tau: Option<u32>,
    pub horizon: u32,
    pub capacities: Vec<usize>,
    pub mode: Mode,
    pub master_seed: u64,
    pub replications: u32,
    /// Share landscapes and initial vectors across cells with the same kind, by run index.
    pub pair_landscapes: bool,
}

impl SimConfig {
    /// N = 15, M = 5, C = 5, T = 150; tau = 25 in emergent mode.
    pub fn standard(
        kind: MatrixKind,
        mode: Mode,
        alpha: f64,
        pair_prob: f64,
        master_seed: u64,
    ) -> Self {
        SimConfig {
            n_decisions: 15,
            m_agents: 5,
            kind,
            alpha,
            pair_prob,
            tau: match mode {
                Mode::TopDown => None,
                Mode::Emergent => Some(25),
            },
            horizon: 150,
            capacities: vec![5; 5],
            mode,
            master_seed,
            replications: 1,
            pair_landscapes: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.n_decisions == 0 {
            return err("n_decisions must be at least 1".into());
        }
        if self.n_decisions > crate::landscape::MAX_ENUMERABLE {
            return err(format!(
                "n_decisions = {} exceeds the enumeration bound {}",
                self.n_decisions,
                crate::landscape::MAX_ENUMERABLE
            ));
        }
        if self.m_agents == 0 {
            return err("m_agents must be at least 1".into());
        }
        if !self.n_decisions.is_multiple_of(self.m_agents) {
            return err(format!(
                "n_decisions = {} is not divisible by m_agents = {}",
                self.n_decisions, self.m_agents
            ));
        }
        if self.kind.k() > self.n_decisions - 1 {
            return err(format!("kind {} needs K <= N - 1", self.kind));
        }
        if matches!(
            self.kind,
            MatrixKind::Decomposable2 | MatrixKind::Nondecomposable5
        ) && self.n_decisions != 15
        {
            return err(format!("kind {} requires n_decisions = 15", self.kind));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return err(format!("alpha = {} outside [0, 1]", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.pair_prob) {
            return err(format!("pair_prob = {} outside [0, 1]", self.pair_prob));
        }
        if self.horizon == 0 {
            return err("horizon must be at least 1".into());
        }
        if self.replications == 0 {
            return err("replications must be at least 1".into());
        }
        if self.capacities.len() != self.m_agents {
            return err(format!(
                "{} capacities for {} agents",
                self.capacities.len(),
                self.m_agents
            ));
        }
        let share = self.n_decisions / self.m_agents;
        if let Some(c) = self.capacities.iter().find(|&&c| c < share) {
            return err(format!(
                "capacity {c} is below the initial share N/M = {share}"
            ));
        }
        match (self.mode, self.tau) {
            (Mode::TopDown, Some(_)) => {
                err("top_down mode cannot re-allocate (tau must be none)".into())
            }
            (Mode::Emergent, None) => {
                err("emergent mode needs a re-allocation interval tau".into())
            }
            (Mode::Emergent, Some(0)) => err("tau must be at least 1".into()),
            _ => Ok(()),
        }
    }

    /// `"none"` or the re-allocation interval.
    pub fn tau_label(&self) -> String {
        tau_label(self.tau)
    }

    /// Stable hash of everything that determines a run except the master seed and `S`.
    pub fn cell_hash(&self) -> u64 {
        hash_str(&format!(
            "n={};m={};kind={};alpha={:?};prob={:?};tau={:?};T={};caps={:?};mode={};paired={}",
            self.n_decisions,
            self.m_agents,
            self.kind,
            self.alpha,
            self.pair_prob,
            self.tau,
            self.horizon,
            self.capacities,
            self.mode,
            self.pair_landscapes
        ))
    }

    fn run_key(&self, run: u32) -> SeedKey {
        SeedKey::new(self.master_seed).children(&[self.cell_hash(), u64::from(run)])
    }

    fn landscape_key(&self, run: u32) -> SeedKey {
        if self.pair_landscapes {
            SeedKey::new(self.master_seed).children(&[
                hash_str(&self.kind.to_string()),
                self.n_decisions as u64,
                u64::from(run),
            ])
        } else {
            self.run_key(run)
        }
    }

    /// Whether period `t` is a re-allocation period.
    pub fn is_reallocation_period(&self, t: u32) -> bool {
        matches!(self.tau, Some(tau) if tau > 0 && t.is_multiple_of(tau))
    }
}

pub fn tau_label(tau: Option<u32>) -> String {
    tau.map_or_else(|| "none".to_string(), |t| t.to_string())
}

/// Everything that changes from period to period.
#[derive(Debug, Clone, PartialEq)]
pub struct OrgState {
    /// Last completed period (0 before the first).
    pub period: u32,
    pub vector: DecisionVector,
    pub allocation: Allocation,
    pub beliefs: Vec<BeliefState>,
    /// Contribution of every decision under `vector`.
    pub contributions: Vec<f64>,
}

/// Metrics recorded after one period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub t: u32,
    pub vector: DecisionVector,
    pub perf: f64,
    pub perf_norm: f64,
    pub sizes: Vec<usize>,
    /// Allocation efficiency per agent; `None` when undefined (K = 0).
    pub eta: Vec<Option<f64>>,
    /// Decision flipped by each agent this period.
    pub flips: Vec<Option<usize>>,
    pub transfers: Vec<Transfer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config_id: usize,
    pub run: u32,
    pub optimum: f64,
    pub periods: Vec<PeriodRecord>,
    /// Per-period belief snapshots when requested.
    pub beliefs: Option<Vec<Vec<BeliefState>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFailure {
    pub config_id: usize,
    pub run: u32,
    pub message: String,
}

/// Builds the landscape and period-0 state of one run.
pub fn init_run(config: &SimConfig, run: u32) -> Result<(Landscape, OrgState)> {
    config.validate()?;
    let lkey = config.landscape_key(run);
    let mut lrng = lkey.child(label::LANDSCAPE).rng();
    let matrix = build_influence_matrix(config.kind, config.n_decisions, &mut lrng)?;
    let landscape = generate_landscape(matrix, &mut lrng)?.with_provenance(Provenance {
        seed: lkey.value(),
        kind: config.kind,
    });
    let vector = DecisionVector::random(
        config.n_decisions,
        &mut lkey.child(label::INIT_VECTOR).rng(),
    );
    let allocation = match config.mode {
        Mode::TopDown => Allocation::contiguous(config.n_decisions, config.m_agents)?,
        Mode::Emergent => Allocation::random_equal(
            config.n_decisions,
            config.m_agents,
            &mut config.run_key(run).child(label::ALLOCATION).rng(),
        )?,
    };
    let contributions = landscape.contributions(&vector);
    Ok((
        landscape,
        OrgState {
            period: 0,
            vector,
            allocation,
            beliefs: init_beliefs(config.n_decisions, config.m_agents),
            contributions,
        },
    ))
}

/// Advances `state` by one period.
///
/// Re-allocation periods only move ownership. Search periods pair agents,
/// let every pair and singleton choose against the previous vector, commit
/// the assembled vector and update the beliefs of agents that flipped.
pub fn run_period(
    state: &mut OrgState,
    landscape: &Landscape,
    config: &SimConfig,
    run: u32,
    t: u32,
) -> Result<PeriodRecord> {
    if t != state.period + 1 {
        return Err(Error::Internal(format!(
            "period {t} requested after period {}",
            state.period
        )));
    }
    let key = config.run_key(run).child(u64::from(t));
    let m_agents = config.m_agents;
    let mut flips = vec![None; m_agents];
    let mut transfers = Vec::new();

    if config.is_reallocation_period(t) {
        let (next, log) = reallocate(
            &state.allocation,
            &state.beliefs,
            &config.capacities,
            t,
            &mut key.child(label::REALLOC).rng(),
        )?;
        state.allocation = next;
        transfers = log;
    } else {
        let prev = &state.vector;
        let alloc = &state.allocation;
        let pairing = pair_agents(
            m_agents,
            config.pair_prob,
            &mut key.child(label::PAIRING).rng(),
        )?;
        let mut per_agent = split_vector(prev, alloc);
        let search_rng = |agent: usize| key.children(&[label::SEARCH, agent as u64]).rng();
        for &(a, b) in &pairing.pairs {
            let (ca, cb) = adjacent_step(
                (a, b),
                landscape,
                alloc,
                prev,
                config.alpha,
                &mut search_rng(a),
            )?;
            for c in [ca, cb] {
                flips[c.agent] = c.flipped;
                per_agent[c.agent] = c.decisions;
            }
        }
        for m in (0..m_agents).filter(|&m| pairing.partner_of(m).is_none()) {
            if alloc.area(m).is_empty() {
                continue;
            }
            let c = individual_step(m, landscape, alloc, prev, config.alpha, &mut search_rng(m))?;
            flips[m] = c.flipped;
            per_agent[m] = c.decisions;
        }
        let next = assemble_vector(&per_agent, alloc)?;
        let contribs_now = landscape.contributions(&next);
        for (m, flip) in flips.iter().enumerate() {
            if let Some(i) = *flip {
                state.beliefs[m].update(i, alloc.area(m), &state.contributions, &contribs_now)?;
            }
        }
        state.vector = next;
        state.contributions = contribs_now;
    }
    state.period = t;

    let perf = landscape.performance(&state.vector);
    let eta = (0..m_agents)
        .map(|m| efficiency(&state.allocation, landscape.matrix(), m).ok())
        .collect();
    Ok(PeriodRecord {
        t,
        vector: state.vector.clone(),
        perf,
        perf_norm: perf / landscape.optimum().1,
        sizes: state.allocation.sizes(),
        eta,
        flips,
        transfers,
    })
}

/// Executes periods `1..=T` of one run.
pub fn run_simulation(config: &SimConfig, config_id: usize, run: u32) -> Result<RunRecord> {
    run_simulation_with(config, config_id, run, false)
}

pub fn run_simulation_with(
    config: &SimConfig,
    config_id: usize,
    run: u32,
    keep_beliefs: bool,
) -> Result<RunRecord> {
    let (landscape, mut state) = init_run(config, run)?;
    let mut periods = Vec::with_capacity(config.horizon as usize);
    let mut beliefs = keep_beliefs.then(Vec::new);
    for t in 1..=config.horizon {
        periods.push(run_period(&mut state, &landscape, config, run, t)?);
        if let Some(b) = beliefs.as_mut() {
            b.push(state.beliefs.clone());
        }
    }
    Ok(RunRecord {
        config_id,
        run,
        optimum: landscape.optimum().1,
        periods,
        beliefs,
    })
}

pub type RunOutcome = std::result::Result<RunRecord, RunFailure>;

fn pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))
}

fn execute(cells: &[SimConfig], config_id: usize, run: u32, keep_beliefs: bool) -> RunOutcome {
    run_simulation_with(&cells[config_id], config_id, run, keep_beliefs).map_err(|e| RunFailure {
        config_id,
        run,
        message: e.to_string(),
    })
}

/// Runs arbitrary `(config_id, run)` jobs; results come back in job order.
pub fn run_jobs(
    cells: &[SimConfig],
    jobs: &[(usize, u32)],
    parallelism: usize,
) -> Result<Vec<RunOutcome>> {
    Ok(pool(parallelism)?.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| execute(cells, c, r, false))
            .collect()
    }))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GridOptions {
    pub parallelism: usize,
    pub keep_beliefs: bool,
}

/// Runs every replication of every cell. Cells are processed in order, runs
/// within a cell in parallel; `sink` receives outcomes in `(cell, run)` order.
/// `progress` is called once per finished cell.
pub fn run_grid_streaming(
    cells: &[SimConfig],
    options: GridOptions,
    mut sink: impl FnMut(RunOutcome) -> Result<()>,
    mut progress: impl FnMut(usize, &[RunOutcome]),
) -> Result<()> {
    let pool = pool(options.parallelism)?;
    for (config_id, cell) in cells.iter().enumerate() {
        let outcomes: Vec<RunOutcome> = pool.install(|| {
            (0..cell.replications)
                .into_par_iter()
                .map(|run| execute(cells, config_id, run, options.keep_beliefs))
                .collect()
        });
        progress(config_id, &outcomes);
        for outcome in outcomes {
            sink(outcome)?;
        }
    }
    Ok(())
}

/// In-memory results of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDataset {
    pub cells: Vec<SimConfig>,
    pub runs: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

impl RunDataset {
    /// Builds a dataset from outcomes in any order; records are sorted by `(config_id, run)`.
    pub fn from_outcomes(cells: Vec<SimConfig>, outcomes: Vec<RunOutcome>) -> Self {
        let mut runs = Vec::new();
        let mut failures = Vec::new();
        for o in outcomes {
            match o {
                Ok(r) => runs.push(r),
                Err(f) => failures.push(f),
            }
        }
        runs.sort_by_key(|r| (r.config_id, r.run));
        failures.sort_by_key(|f| (f.config_id, f.run));
        RunDataset {
            cells,
            runs,
            failures,
        }
    }
}

pub fn run_grid(cells: &[SimConfig], parallelism: usize) -> Result<RunDataset> {
    let mut outcomes = Vec::new();
    run_grid_streaming(
        cells,
        GridOptions {
            parallelism,
            keep_beliefs: false,
        },
        |o| {
            outcomes.push(o);
            Ok(())
        },
        |_, _| {},
    )?;
    Ok(RunDataset::from_outcomes(cells.to_vec(), outcomes))
}
