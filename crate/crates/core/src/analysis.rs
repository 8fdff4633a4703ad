//! Performance aggregates, partial dependence and allocation efficiency.
//!
//! Partial dependence is computed by direct marginalization over the
//! simulated grid: for every value of the scope variables, the mean response
//! of each complementary grid cell is averaged with equal weight.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ordered_float::OrderedFloat;
use rand::Rng;

use crate::agents::Allocation;
use crate::engine::{tau_label, RunDataset, RunRecord};
use crate::error::{Error, Result};
use crate::landscape::{InfluenceMatrix, MatrixKind};
use crate::rng::{label, SeedKey};

/// Share of the dependencies of an agent's decisions that lie inside its own area.
///
/// Counts ordered pairs `(n, j)`, `n != j`, both owned by `agent`, with `n`
/// depending on `j`, and divides by `|area| * K`.
pub fn efficiency(alloc: &Allocation, matrix: &InfluenceMatrix, agent: usize) -> Result<f64> {
    let k = matrix
        .uniform_k()
        .ok_or_else(|| Error::Domain("efficiency needs a uniform K".into()))?;
    if k == 0 {
        return Err(Error::Domain("efficiency is undefined for K = 0".into()));
    }
    let area = alloc.area(agent);
    if area.is_empty() {
        return Err(Error::Domain(format!("agent {agent} owns no decisions")));
    }
    let internal = area
        .iter()
        .map(|&n| {
            matrix
                .dependencies(n)
                .iter()
                .filter(|&&j| alloc.owner(j) == agent)
                .count()
        })
        .sum::<usize>();
    Ok(internal as f64 / (area.len() * k) as f64)
}

/// Independent variables of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Time,
    PairProb,
    Alpha,
    Kind,
    TauMode,
}

impl Var {
    pub const ALL: [Var; 5] = [
        Var::Time,
        Var::PairProb,
        Var::Alpha,
        Var::Kind,
        Var::TauMode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::Time => "t",
            Var::PairProb => "pair_prob",
            Var::Alpha => "alpha",
            Var::Kind => "kind",
            Var::TauMode => "tau_mode",
        }
    }

    /// Parses a comma-separated scope such as `"t,alpha"`.
    pub fn parse_scope(text: &str) -> Result<Vec<Var>> {
        let mut out: Vec<Var> = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let v: Var = part.parse()?;
            if out.contains(&v) {
                return Err(Error::Domain(format!("variable `{part}` listed twice")));
            }
            out.push(v);
        }
        if out.is_empty() {
            return Err(Error::Domain("empty scope".into()));
        }
        Ok(out)
    }
}

impl FromStr for Var {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Var::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            Error::Domain(format!(
                "`{s}` is not a simulated grid variable (t, pair_prob, alpha, kind, tau_mode)"
            ))
        })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value of one grid variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Int(u64),
    Real(OrderedFloat<f64>),
    Label(String),
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Int(v) => write!(f, "{v}"),
            Level::Real(v) => write!(f, "{}", v.0),
            Level::Label(s) => f.write_str(s),
        }
    }
}

/// Grid coordinates of a configuration cell (everything except time).
#[derive(Debug, Clone, PartialEq)]
pub struct CellInfo {
    pub kind: MatrixKind,
    pub alpha: f64,
    pub pair_prob: f64,
    pub tau: Option<u32>,
}

impl CellInfo {
    pub fn level(&self, var: Var, t: u32) -> Level {
        match var {
            Var::Time => Level::Int(u64::from(t)),
            Var::PairProb => Level::Real(OrderedFloat(self.pair_prob)),
            Var::Alpha => Level::Real(OrderedFloat(self.alpha)),
            Var::Kind => Level::Label(self.kind.to_string()),
            Var::TauMode => Level::Label(tau_label(self.tau)),
        }
    }
}

/// One per-period observation of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obs {
    pub config_id: u32,
    pub run: u32,
    pub t: u32,
    pub n_transfers: u32,
    pub perf: f64,
    pub perf_norm: f64,
}

/// Compact analysis view of a run dataset. Efficiency samples are kept as
/// value counts per configuration cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub cells: Vec<CellInfo>,
    pub obs: Vec<Obs>,
    pub eta_counts: Vec<BTreeMap<OrderedFloat<f64>, u64>>,
}

impl Dataset {
    pub fn with_cells(cells: Vec<CellInfo>) -> Self {
        let n = cells.len();
        Dataset {
            cells,
            obs: Vec::new(),
            eta_counts: vec![BTreeMap::new(); n],
        }
    }

    pub fn from_runs(ds: &RunDataset) -> Self {
        let cells = ds
            .cells
            .iter()
            .map(|c| CellInfo {
                kind: c.kind,
                alpha: c.alpha,
                pair_prob: c.pair_prob,
                tau: c.tau,
            })
            .collect();
        let mut out = Dataset::with_cells(cells);
        for r in &ds.runs {
            out.push_run(r);
        }
        out
    }

    pub fn push_run(&mut self, record: &RunRecord) {
        for p in &record.periods {
            self.obs.push(Obs {
                config_id: record.config_id as u32,
                run: record.run,
                t: p.t,
                n_transfers: p.transfers.len() as u32,
                perf: p.perf,
                perf_norm: p.perf_norm,
            });
            for eta in p.eta.iter().flatten() {
                self.add_eta(record.config_id, *eta, 1);
            }
        }
    }

    pub fn add_eta(&mut self, config_id: usize, eta: f64, count: u64) {
        *self.eta_counts[config_id]
            .entry(OrderedFloat(eta))
            .or_insert(0) += count;
    }

    fn level(&self, o: &Obs, var: Var) -> Level {
        self.cells[o.config_id as usize].level(var, o.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub seed: u64,
    /// Two-sided coverage, e.g. 0.95.
    pub level: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            resamples: 1000,
            seed: 0,
            level: 0.95,
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile interval of `estimates` (unsorted).
fn percentile_interval(mut estimates: Vec<f64>, level: f64) -> (f64, f64) {
    estimates.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile(&estimates, tail), quantile(&estimates, 1.0 - tail))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdRow {
    pub levels: Vec<Level>,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Complementary grid cells averaged.
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialDependenceTable {
    pub scope: Vec<Var>,
    pub rows: Vec<PdRow>,
}

impl PartialDependenceTable {
    pub fn file_name(&self) -> String {
        let names: Vec<&str> = self.scope.iter().map(|v| v.name()).collect();
        format!("pd_{}.csv", names.join("_"))
    }

    pub fn get(&self, levels: &[Level]) -> Option<&PdRow> {
        self.rows.iter().find(|r| r.levels == levels)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = self.scope.iter().map(|v| v.name().to_string()).collect();
        header.extend(["mean", "ci_lo", "ci_hi", "cells"].map(String::from));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.levels.iter().map(Level::to_string).collect();
            rec.extend([
                r.mean.to_string(),
                r.ci_lo.to_string(),
                r.ci_hi.to_string(),
                r.cells.to_string(),
            ]);
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Partial dependence of normalized performance on `scope`.
///
/// The point estimate averages per-cell means (over runs) across the
/// complementary cells. The band is a percentile bootstrap over run indices;
/// a resample is shared by all cells, which keeps paired landscapes paired.
pub fn partial_dependence(
    data: &Dataset,
    scope: &[Var],
    boot: BootstrapOptions,
) -> Result<PartialDependenceTable> {
    if scope.is_empty() {
        return Err(Error::Domain("empty scope".into()));
    }
    if data.obs.is_empty() {
        return Err(Error::Domain("dataset has no observations".into()));
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = scope.iter().find(|v| !seen.insert(**v)) {
        return Err(Error::Domain(format!("variable `{dup}` listed twice")));
    }

    // grid cell = (config, t)
    let mut cell_sums: HashMap<(u32, u32), (f64, u64)> = HashMap::new();
    let mut cell_scope: HashMap<(u32, u32), usize> = HashMap::new();
    let mut scope_ids: BTreeMap<Vec<Level>, usize> = BTreeMap::new();
    let runs: Vec<u32> = data
        .obs
        .iter()
        .map(|o| o.run)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let run_index: HashMap<u32, usize> = runs.iter().enumerate().map(|(i, &r)| (r, i)).collect();

    for o in &data.obs {
        let cell = (o.config_id, o.t);
        let e = cell_sums.entry(cell).or_insert((0.0, 0));
        e.0 += o.perf_norm;
        e.1 += 1;
        cell_scope.entry(cell).or_insert_with(|| {
            let key: Vec<Level> = scope.iter().map(|&v| data.level(o, v)).collect();
            let next = scope_ids.len();
            *scope_ids.entry(key).or_insert(next)
        });
    }
    let n_scopes = scope_ids.len();

    let mut scope_mean_sum = vec![0.0; n_scopes];
    let mut scope_cells = vec![0usize; n_scopes];
    let mut sorted_cells: Vec<_> = cell_sums.iter().collect();
    sorted_cells.sort_by_key(|(k, _)| **k);
    for (cell, (sum, count)) in sorted_cells {
        let id = cell_scope[cell];
        scope_mean_sum[id] += sum / *count as f64;
        scope_cells[id] += 1;
    }

    // per (scope, run): average over the complementary cells containing that run
    let mut y_sum = vec![0.0; n_scopes * runs.len()];
    let mut y_cnt = vec![0u32; n_scopes * runs.len()];
    for o in &data.obs {
        let id = cell_scope[&(o.config_id, o.t)];
        let k = id * runs.len() + run_index[&o.run];
        y_sum[k] += o.perf_norm;
        y_cnt[k] += 1;
    }
    let y: Vec<f64> = y_sum
        .iter()
        .zip(&y_cnt)
        .map(|(s, &c)| if c == 0 { f64::NAN } else { s / f64::from(c) })
        .collect();

    let mut rng = SeedKey::new(boot.seed).child(label::BOOTSTRAP).rng();
    let mut estimates = vec![Vec::with_capacity(boot.resamples); n_scopes];
    let mut draw = vec![0usize; runs.len()];
    for _ in 0..boot.resamples {
        for d in draw.iter_mut() {
            *d = rng.gen_range(0..runs.len());
        }
        for (id, est) in estimates.iter_mut().enumerate() {
            let row = &y[id * runs.len()..(id + 1) * runs.len()];
            let (s, c) = draw
                .iter()
                .map(|&r| row[r])
                .filter(|v| !v.is_nan())
                .fold((0.0, 0u32), |(s, c), v| (s + v, c + 1));
            if c > 0 {
                est.push(s / f64::from(c));
            }
        }
    }

    let mut rows = Vec::with_capacity(n_scopes);
    for (levels, id) in scope_ids {
        let mean = scope_mean_sum[id] / scope_cells[id] as f64;
        let (ci_lo, ci_hi) = if estimates[id].is_empty() {
            (mean, mean)
        } else {
            percentile_interval(std::mem::take(&mut estimates[id]), boot.level)
        };
        rows.push(PdRow {
            levels,
            mean,
            ci_lo,
            ci_hi,
            cells: scope_cells[id],
        });
    }
    Ok(PartialDependenceTable {
        scope: scope.to_vec(),
        rows,
    })
}

/// Empirical CDF of the efficiency metric within one group.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfGroup {
    pub levels: Vec<Level>,
    pub samples: u64,
    /// `(eta, P(eta' <= eta))` at every distinct observed value.
    pub points: Vec<(f64, f64)>,
}

impl CdfGroup {
    /// Fraction of samples with `eta >= threshold`.
    pub fn share_at_least(&self, threshold: f64) -> f64 {
        let below = self
            .points
            .iter()
            .take_while(|(v, _)| *v < threshold)
            .last()
            .map_or(0.0, |(_, f)| *f);
        1.0 - below
    }
}

/// Efficiency CDFs over all agents, periods and runs of each group.
pub fn efficiency_cdf(data: &Dataset, grouping: &[Var]) -> Result<Vec<CdfGroup>> {
    if grouping.contains(&Var::Time) {
        return Err(Error::Domain(
            "efficiency CDFs pool all periods; `t` cannot be a grouping variable".into(),
        ));
    }
    let mut groups: BTreeMap<Vec<Level>, BTreeMap<OrderedFloat<f64>, u64>> = BTreeMap::new();
    for (id, counts) in data.eta_counts.iter().enumerate() {
        if counts.is_empty() {
            continue;
        }
        let key: Vec<Level> = grouping
            .iter()
            .map(|&v| data.cells[id].level(v, 0))
            .collect();
        let g = groups.entry(key).or_default();
        for (v, c) in counts {
            *g.entry(*v).or_insert(0) += c;
        }
    }
    Ok(groups
        .into_iter()
        .map(|(levels, counts)| {
            let samples: u64 = counts.values().sum();
            let mut acc = 0u64;
            let points = counts
                .into_iter()
                .map(|(v, c)| {
                    acc += c;
                    (v.0, acc as f64 / samples as f64)
                })
                .collect();
            CdfGroup {
                levels,
                samples,
                points,
            }
        })
        .collect())
}

pub fn write_cdf_csv(grouping: &[Var], groups: &[CdfGroup], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = grouping.iter().map(|v| v.name().to_string()).collect();
    header.extend(["eta", "cdf", "samples"].map(String::from));
    w.write_record(&header)?;
    for g in groups {
        for (eta, f) in &g.points {
            let mut rec: Vec<String> = g.levels.iter().map(Level::to_string).collect();
            rec.extend([eta.to_string(), f.to_string(), g.samples.to_string()]);
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Periods reported by [`summarize`] when present.
pub const SUMMARY_PERIODS: [u32; 4] = [1, 50, 100, 150];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config_id: usize,
    pub t: u32,
    pub runs: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Mean number of transfers per run over the whole horizon.
    pub mean_transfers: f64,
}

/// Per configuration cell and selected period: mean, sample standard
/// deviation and bootstrap interval of normalized performance across runs.
pub fn summarize(data: &Dataset, periods: &[u32], boot: BootstrapOptions) -> Vec<SummaryRow> {
    let wanted: BTreeSet<u32> = periods.iter().copied().collect();
    let mut values: BTreeMap<(u32, u32), Vec<f64>> = BTreeMap::new();
    let mut transfers: BTreeMap<u32, BTreeMap<u32, u64>> = BTreeMap::new();
    for o in &data.obs {
        *transfers
            .entry(o.config_id)
            .or_default()
            .entry(o.run)
            .or_insert(0) += u64::from(o.n_transfers);
        if wanted.contains(&o.t) {
            values
                .entry((o.config_id, o.t))
                .or_default()
                .push(o.perf_norm);
        }
    }
    let mut rows = Vec::with_capacity(values.len());
    for ((config_id, t), xs) in values {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut rng = SeedKey::new(boot.seed)
            .children(&[label::BOOTSTRAP, u64::from(config_id), u64::from(t)])
            .rng();
        let estimates = (0..boot.resamples)
            .map(|_| (0..n).map(|_| xs[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
            .collect();
        let (ci_lo, ci_hi) = if boot.resamples == 0 {
            (mean, mean)
        } else {
            percentile_interval(estimates, boot.level)
        };
        let per_run = &transfers[&config_id];
        let mean_transfers = per_run.values().sum::<u64>() as f64 / per_run.len() as f64;
        rows.push(SummaryRow {
            config_id: config_id as usize,
            t,
            runs: n,
            mean,
            sd,
            ci_lo,
            ci_hi,
            mean_transfers,
        });
    }
    rows
}

pub fn write_summary_csv(data: &Dataset, rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "config_id",
        "kind",
        "alpha",
        "pair_prob",
        "tau_mode",
        "t",
        "runs",
        "mean",
        "sd",
        "ci_lo",
        "ci_hi",
        "mean_transfers",
    ])?;
    for r in rows {
        let c = &data.cells[r.config_id];
        w.write_record([
            r.config_id.to_string(),
            c.kind.to_string(),
            c.alpha.to_string(),
            c.pair_prob.to_string(),
            tau_label(c.tau),
            r.t.to_string(),
            r.runs.to_string(),
            r.mean.to_string(),
            r.sd.to_string(),
            r.ci_lo.to_string(),
            r.ci_hi.to_string(),
            r.mean_transfers.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{build_influence_matrix, MatrixKind};
    use crate::rng::SeedKey;

    fn matrix(kind: MatrixKind) -> InfluenceMatrix {
        build_influence_matrix(kind, 15, &mut SeedKey::new(0).rng()).unwrap()
    }

    #[test]
    fn mirrored_benchmarks() {
        let alloc = Allocation::contiguous(15, 5).unwrap();
        let d2 = matrix(MatrixKind::Decomposable2);
        let d5 = matrix(MatrixKind::Nondecomposable5);
        for m in 0..5 {
            assert_eq!(efficiency(&alloc, &d2, m).unwrap(), 1.0);
            assert_eq!(efficiency(&alloc, &d5, m).unwrap(), 0.4);
        }
    }

    #[test]
    fn no_internal_dependencies_gives_zero() {
        // agent m owns decisions m, m+5, m+10: one from each of three different blocks
        let areas = (0..5).map(|m| vec![m, m + 5, m + 10]).collect();
        let alloc = Allocation::from_areas(15, areas).unwrap();
        let d2 = matrix(MatrixKind::Decomposable2);
        // decisions 0,5,10 are in blocks 0,1,3
        assert_eq!(efficiency(&alloc, &d2, 0).unwrap(), 0.0);
    }

    #[test]
    fn k_zero_is_a_domain_error() {
        let alloc = Allocation::contiguous(4, 2).unwrap();
        assert!(matches!(
            efficiency(&alloc, &InfluenceMatrix::identity(4), 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn internal_plus_cross_equals_total() {
        let mut rng = SeedKey::new(4).rng();
        let d5 = matrix(MatrixKind::Nondecomposable5);
        for _ in 0..50 {
            let alloc = Allocation::random_equal(15, 5, &mut rng).unwrap();
            let internal: f64 = (0..5)
                .map(|m| efficiency(&alloc, &d5, m).unwrap() * (alloc.area(m).len() * 5) as f64)
                .sum();
            let cross = (0..15)
                .flat_map(|n| d5.dependencies(n).iter().map(move |&j| (n, j)))
                .filter(|&(n, j)| alloc.owner(n) != alloc.owner(j))
                .count();
            assert_eq!(internal.round() as usize + cross, 15 * 5);
        }
    }

    fn cell(kind: MatrixKind, alpha: f64, prob: f64, tau: Option<u32>) -> CellInfo {
        CellInfo {
            kind,
            alpha,
            pair_prob: prob,
            tau,
        }
    }

    fn push(ds: &mut Dataset, config_id: u32, run: u32, t: u32, v: f64) {
        ds.obs.push(Obs {
            config_id,
            run,
            t,
            n_transfers: 0,
            perf: v,
            perf_norm: v,
        });
    }

    #[test]
    fn two_complementary_cells_average() {
        let mut ds = Dataset::with_cells(vec![
            cell(MatrixKind::Decomposable2, 0.5, 0.0, None),
            cell(MatrixKind::Decomposable2, 0.5, 0.5, None),
        ]);
        push(&mut ds, 0, 0, 1, 0.4);
        push(&mut ds, 1, 0, 1, 0.6);
        let pd = partial_dependence(&ds, &[Var::Kind], BootstrapOptions::default()).unwrap();
        assert_eq!(pd.rows.len(), 1);
        assert!((pd.rows[0].mean - 0.5).abs() < 1e-15);
        assert_eq!(pd.rows[0].cells, 2);
        // a single run: the band collapses
        assert_eq!(pd.rows[0].ci_lo, pd.rows[0].mean);
    }

    #[test]
    fn full_scope_reproduces_cell_means() {
        let mut ds = Dataset::with_cells(vec![
            cell(MatrixKind::Decomposable2, 0.25, 0.0, None),
            cell(MatrixKind::Nondecomposable5, 0.25, 0.0, None),
        ]);
        for run in 0..4 {
            for t in 1..=2 {
                push(&mut ds, 0, run, t, 0.1 * f64::from(run + t));
                push(&mut ds, 1, run, t, 0.05 * f64::from(run * t));
            }
        }
        let pd = partial_dependence(&ds, &Var::ALL, BootstrapOptions::default()).unwrap();
        assert_eq!(pd.rows.len(), 4);
        for r in &pd.rows {
            assert_eq!(r.cells, 1);
            let config = if r.levels[3] == Level::Label("decomposable2".into()) {
                0
            } else {
                1
            };
            let Level::Int(t) = r.levels[0] else { panic!() };
            let direct: f64 = ds
                .obs
                .iter()
                .filter(|o| o.config_id == config && u64::from(o.t) == t)
                .map(|o| o.perf_norm)
                .sum::<f64>()
                / 4.0;
            assert!((r.mean - direct).abs() < 1e-15);
            assert!(r.ci_lo <= r.mean + 1e-12 && r.mean <= r.ci_hi + 1e-12);
        }
    }

    #[test]
    fn unknown_scope_variable() {
        assert!(matches!(Var::parse_scope("t,beta"), Err(Error::Domain(_))));
        assert!(Var::parse_scope("t,t").is_err());
        assert_eq!(
            Var::parse_scope("pair_prob, alpha").unwrap(),
            vec![Var::PairProb, Var::Alpha]
        );
    }

    #[test]
    fn constant_cdf_steps_once() {
        let mut ds =
            Dataset::with_cells(vec![cell(MatrixKind::Nondecomposable5, 0.5, 0.0, Some(25))]);
        ds.add_eta(0, 0.4, 30);
        let groups = efficiency_cdf(&ds, &[Var::Alpha, Var::Kind]).unwrap();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].points, vec![(0.4, 1.0)]);
        assert_eq!(groups[0].samples, 30);
        assert_eq!(groups[0].share_at_least(0.5), 0.0);
        assert_eq!(groups[0].share_at_least(0.4), 1.0);
        assert!(efficiency_cdf(&ds, &[Var::Time]).is_err());
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let mut ds = Dataset::with_cells(vec![
            cell(MatrixKind::Decomposable2, 0.5, 0.0, Some(25)),
            cell(MatrixKind::Decomposable2, 0.5, 0.5, Some(25)),
        ]);
        for (i, v) in [0.0, 1.0 / 3.0, 1.0, 0.5, 0.25].iter().enumerate() {
            ds.add_eta(i % 2, *v, i as u64 + 1);
        }
        let groups = efficiency_cdf(&ds, &[Var::Alpha]).unwrap();
        assert_eq!(groups.len(), 1);
        let pts = &groups[0].points;
        assert!(pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
        assert_eq!(pts.last().unwrap().1, 1.0);
        assert_eq!(groups[0].samples, 15);
        // eta >= 0.5: values 1.0 (3) and 0.5 (4)
        assert!((groups[0].share_at_least(0.5) - 7.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn summary_single_run_collapses() {
        let mut ds = Dataset::with_cells(vec![cell(MatrixKind::Decomposable2, 0.5, 0.0, None)]);
        for t in 1..=150 {
            push(&mut ds, 0, 0, t, 0.5 + f64::from(t) / 1000.0);
        }
        let rows = summarize(&ds, &SUMMARY_PERIODS, BootstrapOptions::default());
        assert_eq!(rows.len(), 4);
        for r in rows {
            assert_eq!(r.runs, 1);
            assert_eq!(r.sd, 0.0);
            assert_eq!((r.ci_lo, r.ci_hi), (r.mean, r.mean));
            assert!((0.0..=1.0).contains(&r.mean));
        }
    }
}
