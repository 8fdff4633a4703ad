//! On-disk datasets: per-period records, transfer log, optional belief dump
//! and a manifest with content hashes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{CellInfo, Dataset, Obs};
use crate::config::GridConfig;
use crate::engine::{RunFailure, RunRecord, SimConfig};
use crate::error::{Error, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const TRANSFERS_FILE: &str = "transfers.csv";
pub const BELIEFS_FILE: &str = "beliefs.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT: &str = "orgsearch-dataset/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub code_version: String,
    pub master_seed: u64,
    pub config_hash: String,
    pub config: GridConfig,
    pub cells: usize,
    pub runs_total: usize,
    pub runs_failed: usize,
    pub failures: Vec<RunFailure>,
    /// False when any run failed; the records then miss those runs.
    pub complete: bool,
    /// SHA-256 of every data file, by file name.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.format != FORMAT {
            return Err(Error::Parse {
                path: path.display().to_string(),
                message: format!("unsupported dataset format `{}`", m.format),
            });
        }
        Ok(m)
    }

    /// Re-hashes every listed file and fails on the first mismatch.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for (name, expected) in &self.files {
            let actual = sha256_file(&dir.join(name))?;
            if &actual != expected {
                return Err(Error::Domain(format!(
                    "{name} does not match the manifest (expected {expected}, found {actual}); refusing to analyze a mixed dataset"
                )));
            }
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

/// Streams run records to the dataset files of `dir`.
pub struct DatasetWriter {
    dir: PathBuf,
    cells: Vec<SimConfig>,
    m_agents: usize,
    records: csv::Writer<BufWriter<File>>,
    transfers: csv::Writer<BufWriter<File>>,
    beliefs: Option<csv::Writer<BufWriter<File>>>,
    runs: usize,
    failures: Vec<RunFailure>,
}

impl DatasetWriter {
    pub fn create(dir: &Path, cells: &[SimConfig], with_beliefs: bool) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let m_agents = cells.first().map_or(0, |c| c.m_agents);
        if cells.iter().any(|c| c.m_agents != m_agents) {
            return Err(Error::Config(
                "all cells of a dataset must have the same number of agents".into(),
            ));
        }
        let mut records = writer(&dir.join(RECORDS_FILE))?;
        let mut header: Vec<String> = [
            "config_id",
            "run",
            "t",
            "K_kind",
            "alpha",
            "pair_prob",
            "tau_mode",
            "perf",
            "perf_norm",
        ]
        .map(String::from)
        .to_vec();
        header.extend((1..=m_agents).map(|m| format!("eta_agent_{m}")));
        header.push("n_transfers".into());
        header.push("decisions".into());
        header.extend((1..=m_agents).map(|m| format!("size_agent_{m}")));
        records.write_record(&header)?;

        let mut transfers = writer(&dir.join(TRANSFERS_FILE))?;
        transfers.write_record([
            "config_id",
            "run",
            "period",
            "task",
            "seller",
            "buyer",
            "threshold",
            "signal",
            "rank",
        ])?;

        let beliefs = if with_beliefs {
            let mut w = writer(&dir.join(BELIEFS_FILE))?;
            w.write_record([
                "config_id",
                "run",
                "agent",
                "from",
                "to",
                "p",
                "q",
                "belief",
            ])?;
            Some(w)
        } else {
            None
        };
        Ok(DatasetWriter {
            dir: dir.to_path_buf(),
            cells: cells.to_vec(),
            m_agents,
            records,
            transfers,
            beliefs,
            runs: 0,
            failures: Vec::new(),
        })
    }

    pub fn write_failure(&mut self, failure: RunFailure) {
        self.failures.push(failure);
    }

    /// Agents, tasks and periods are written 1-based.
    pub fn write_run(&mut self, record: &RunRecord) -> Result<()> {
        let cell = &self.cells[record.config_id];
        let (kind, alpha, prob, tau) = (
            cell.kind.to_string(),
            cell.alpha.to_string(),
            cell.pair_prob.to_string(),
            cell.tau_label(),
        );
        let (cid, run) = (record.config_id.to_string(), record.run.to_string());
        let mut row: Vec<String> = Vec::with_capacity(11 + 2 * self.m_agents);
        for p in &record.periods {
            row.clear();
            row.extend([
                cid.clone(),
                run.clone(),
                p.t.to_string(),
                kind.clone(),
                alpha.clone(),
                prob.clone(),
                tau.clone(),
                p.perf.to_string(),
                p.perf_norm.to_string(),
            ]);
            row.extend(
                p.eta
                    .iter()
                    .map(|e| e.map_or(String::new(), |v| v.to_string())),
            );
            row.push(p.transfers.len().to_string());
            row.push(p.vector.to_string());
            row.extend(p.sizes.iter().map(ToString::to_string));
            self.records.write_record(&row)?;
            for tr in &p.transfers {
                self.transfers.write_record([
                    cid.clone(),
                    run.clone(),
                    tr.period.to_string(),
                    (tr.task + 1).to_string(),
                    (tr.seller + 1).to_string(),
                    (tr.buyer + 1).to_string(),
                    tr.threshold.to_string(),
                    tr.signal.to_string(),
                    tr.rank.to_string(),
                ])?;
            }
        }
        if let (Some(w), Some(snapshots)) = (self.beliefs.as_mut(), record.beliefs.as_ref()) {
            if let Some(last) = snapshots.last() {
                for (agent, state) in last.iter().enumerate() {
                    let n = state.n();
                    for i in 0..n {
                        for j in (0..n).filter(|&j| j != i) {
                            let (p, q) = state.counts(i, j);
                            w.write_record([
                                cid.clone(),
                                run.clone(),
                                (agent + 1).to_string(),
                                (i + 1).to_string(),
                                (j + 1).to_string(),
                                p.to_string(),
                                q.to_string(),
                                state.belief_unchecked(i, j).to_string(),
                            ])?;
                        }
                    }
                }
            }
        }
        self.runs += 1;
        Ok(())
    }

    /// Flushes all files and writes the manifest.
    pub fn finish(mut self, config: &GridConfig) -> Result<Manifest> {
        let flush = |w: &mut csv::Writer<BufWriter<File>>, name: &str, dir: &Path| {
            w.flush().map_err(|e| Error::io(dir.join(name), e))
        };
        flush(&mut self.records, RECORDS_FILE, &self.dir)?;
        flush(&mut self.transfers, TRANSFERS_FILE, &self.dir)?;
        let mut names = vec![RECORDS_FILE, TRANSFERS_FILE];
        if let Some(w) = self.beliefs.as_mut() {
            flush(w, BELIEFS_FILE, &self.dir)?;
            names.push(BELIEFS_FILE);
        }
        // dropping the writers closes the files before hashing
        drop(self.records);
        drop(self.transfers);
        drop(self.beliefs);
        let mut files = BTreeMap::new();
        for name in names {
            files.insert(name.to_string(), sha256_file(&self.dir.join(name))?);
        }
        self.failures.sort_by_key(|f| (f.config_id, f.run));
        let manifest = Manifest {
            format: FORMAT.into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            master_seed: config.seed()?,
            config_hash: config.hash()?,
            config: config.clone(),
            cells: self.cells.len(),
            runs_total: self.runs + self.failures.len(),
            runs_failed: self.failures.len(),
            complete: self.failures.is_empty(),
            failures: self.failures,
            files,
        };
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            message: format!("missing column `{name}`"),
        })
}

/// Loads the analysis view of a dataset directory after verifying its manifest.
pub fn load_dataset(dir: &Path) -> Result<(Manifest, Dataset)> {
    let manifest = Manifest::read(dir)?;
    manifest.verify(dir)?;
    let cells: Vec<CellInfo> = manifest
        .config
        .cells()?
        .into_iter()
        .map(|c| CellInfo {
            kind: c.kind,
            alpha: c.alpha,
            pair_prob: c.pair_prob,
            tau: c.tau,
        })
        .collect();
    let mut data = Dataset::with_cells(cells);

    let path = dir.join(RECORDS_FILE);
    let mut reader = csv::Reader::from_path(&path)?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| column(&headers, name, &path);
    let (c_cfg, c_run, c_t, c_perf, c_norm, c_tr) = (
        idx("config_id")?,
        idx("run")?,
        idx("t")?,
        idx("perf")?,
        idx("perf_norm")?,
        idx("n_transfers")?,
    );
    let eta_cols: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("eta_agent_"))
        .map(|(i, _)| i)
        .collect();
    let bad = |line: u64, what: &str| Error::Parse {
        path: path.display().to_string(),
        message: format!("record {line}: bad {what}"),
    };
    let mut rec = csv::StringRecord::new();
    let mut line = 1u64;
    while reader.read_record(&mut rec)? {
        line += 1;
        let num = |col: usize, what: &str| -> Result<f64> {
            rec[col].parse().map_err(|_| bad(line, what))
        };
        let int = |col: usize, what: &str| -> Result<u32> {
            rec[col].parse().map_err(|_| bad(line, what))
        };
        let config_id = int(c_cfg, "config_id")?;
        if config_id as usize >= data.cells.len() {
            return Err(bad(line, "config_id (not in the manifest grid)"));
        }
        data.obs.push(Obs {
            config_id,
            run: int(c_run, "run")?,
            t: int(c_t, "t")?,
            n_transfers: int(c_tr, "n_transfers")?,
            perf: num(c_perf, "perf")?,
            perf_norm: num(c_norm, "perf_norm")?,
        });
        for &c in &eta_cols {
            if !rec[c].is_empty() {
                let eta = num(c, "eta")?;
                data.add_eta(config_id as usize, eta, 1);
            }
        }
    }
    Ok((manifest, data))
}
