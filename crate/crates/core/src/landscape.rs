//! Interdependence structures and NK performance landscapes.
//!
//! A landscape assigns every decision `n` a contribution table indexed by the
//! bit pattern of `n` and the decisions it depends on. The own bit is the most
//! significant index bit; dependency bits follow in ascending decision index.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `N` for which the global optimum is found by enumeration.
pub const MAX_ENUMERABLE: usize = 25;

/// Decisions per block in the stylized 15-decision structures.
const BLOCK: usize = 3;
const STYLIZED_N: usize = 15;

/// Which interdependence pattern to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MatrixKind {
    /// Five 3x3 all-true diagonal blocks (K = 2).
    Decomposable2,
    /// Own block plus the cyclically next block (K = 5).
    Nondecomposable5,
    /// `k` distinct off-diagonal dependencies per row, drawn uniformly.
    Random { k: usize },
}

impl MatrixKind {
    pub fn k(self) -> usize {
        match self {
            MatrixKind::Decomposable2 => 2,
            MatrixKind::Nondecomposable5 => 5,
            MatrixKind::Random { k } => k,
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixKind::Decomposable2 => f.write_str("decomposable2"),
            MatrixKind::Nondecomposable5 => f.write_str("nondecomposable5"),
            MatrixKind::Random { k } => write!(f, "random:{k}"),
        }
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "decomposable2" => Ok(MatrixKind::Decomposable2),
            "nondecomposable5" => Ok(MatrixKind::Nondecomposable5),
            other => {
                let k = other
                    .strip_prefix("random:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "unknown matrix kind `{other}` (expected decomposable2, nondecomposable5 or random:<K>)"
                        ))
                    })?;
                Ok(MatrixKind::Random { k })
            }
        }
    }
}

impl TryFrom<String> for MatrixKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MatrixKind> for String {
    fn from(kind: MatrixKind) -> String {
        kind.to_string()
    }
}

/// `N x N` dependency grid: entry `(n, j)` is true when contribution `n` is affected by decision `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceMatrix {
    n: usize,
    cells: Vec<bool>,
    /// Off-diagonal dependencies of each row, ascending.
    deps: Vec<Vec<usize>>,
}

impl InfluenceMatrix {
    /// Builds a matrix from explicit rows. The diagonal must be all true.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Config(
                "influence matrix must have at least one row".into(),
            ));
        }
        let mut cells = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!(
                    "influence matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if !row[i] {
                return Err(Error::Config(format!(
                    "influence matrix diagonal entry {i} is false"
                )));
            }
            cells.extend_from_slice(row);
        }
        let deps = (0..n)
            .map(|i| (0..n).filter(|&j| j != i && cells[i * n + j]).collect())
            .collect();
        Ok(InfluenceMatrix { n, cells, deps })
    }

    pub fn identity(n: usize) -> Self {
        let rows: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
        Self::from_rows(&rows).expect("identity is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.n + col]
    }

    /// Off-diagonal decisions that contribution `row` depends on, ascending.
    pub fn dependencies(&self, row: usize) -> &[usize] {
        &self.deps[row]
    }

    pub fn row_sum(&self, row: usize) -> usize {
        self.deps[row].len() + 1
    }

    /// `Some(K)` when every row has exactly `K` off-diagonal dependencies.
    pub fn uniform_k(&self) -> Option<usize> {
        let k = self.deps[0].len();
        self.deps.iter().all(|d| d.len() == k).then_some(k)
    }

    pub fn off_diagonal_count(&self) -> usize {
        self.deps.iter().map(Vec::len).sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> {
        self.cells.chunks(self.n)
    }
}

/// Builds the interdependence structure for `kind` over `n_decisions` decisions.
pub fn build_influence_matrix<R: Rng + ?Sized>(
    kind: MatrixKind,
    n_decisions: usize,
    rng: &mut R,
) -> Result<InfluenceMatrix> {
    if n_decisions == 0 {
        return Err(Error::Config("n_decisions must be at least 1".into()));
    }
    let k = kind.k();
    if k > n_decisions - 1 {
        return Err(Error::Config(format!(
            "K = {k} exceeds N - 1 = {} for kind {kind}",
            n_decisions - 1
        )));
    }
    let n = n_decisions;
    let mut rows = vec![vec![false; n]; n];
    match kind {
        MatrixKind::Decomposable2 | MatrixKind::Nondecomposable5 => {
            if n != STYLIZED_N {
                return Err(Error::Config(format!(
                    "kind {kind} is defined for N = {STYLIZED_N} only (got N = {n})"
                )));
            }
            let blocks = n / BLOCK;
            for (i, row) in rows.iter_mut().enumerate() {
                let block = i / BLOCK;
                row[block * BLOCK..(block + 1) * BLOCK].fill(true);
                if kind == MatrixKind::Nondecomposable5 {
                    let next = (block + 1) % blocks;
                    row[next * BLOCK..(next + 1) * BLOCK].fill(true);
                }
            }
        }
        MatrixKind::Random { k } => {
            for (i, row) in rows.iter_mut().enumerate() {
                row[i] = true;
                // sample among the n-1 other decisions
                for pick in index::sample(rng, n - 1, k) {
                    let j = if pick >= i { pick + 1 } else { pick };
                    row[j] = true;
                }
            }
        }
    }
    InfluenceMatrix::from_rows(&rows)
}

/// A point in `{0,1}^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecisionVector(Vec<bool>);

impl DecisionVector {
    pub fn zeros(n: usize) -> Self {
        DecisionVector(vec![false; n])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        DecisionVector(bits)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        DecisionVector((0..n).map(|_| rng.gen::<bool>()).collect())
    }

    /// Decision 0 is the most significant bit.
    pub fn from_value(value: u64, n: usize) -> Self {
        DecisionVector((0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect())
    }

    pub fn value(&self) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.0[i] = bit;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.flip(i);
        out
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for DecisionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for DecisionVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!("invalid decision bit `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(DecisionVector)
    }
}

/// Where a landscape came from, recorded in the export header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub kind: MatrixKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    matrix: InfluenceMatrix,
    tables: Vec<Vec<f64>>,
    optimum: (DecisionVector, f64),
    provenance: Option<Provenance>,
}

impl Landscape {
    /// Assembles a landscape from explicit tables and caches its optimum.
    pub fn new(matrix: InfluenceMatrix, tables: Vec<Vec<f64>>) -> Result<Self> {
        if tables.len() != matrix.n() {
            return Err(Error::Config(format!(
                "{} contribution tables for {} decisions",
                tables.len(),
                matrix.n()
            )));
        }
        for (i, table) in tables.iter().enumerate() {
            let expected = 1usize << matrix.row_sum(i);
            if table.len() != expected {
                return Err(Error::Config(format!(
                    "table {i} has {} entries, expected {expected}",
                    table.len()
                )));
            }
            if let Some(v) = table.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Config(format!("table {i} value {v} outside [0, 1]")));
            }
        }
        let optimum = exhaustive_optimum(&matrix, &tables)?;
        Ok(Landscape {
            matrix,
            tables,
            optimum,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn matrix(&self) -> &InfluenceMatrix {
        &self.matrix
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    /// Global maximum and a vector attaining it (lowest binary value on ties).
    pub fn optimum(&self) -> (&DecisionVector, f64) {
        (&self.optimum.0, self.optimum.1)
    }

    pub fn contribution(&self, n: usize, d: &DecisionVector) -> f64 {
        self.tables[n][table_index(&self.matrix, n, d.bits())]
    }

    /// Every decision's contribution under `d`, by decision index.
    pub fn contributions(&self, d: &DecisionVector) -> Vec<f64> {
        (0..self.n()).map(|n| self.contribution(n, d)).collect()
    }

    /// Mean of all contributions.
    pub fn performance(&self, d: &DecisionVector) -> f64 {
        mean((0..self.n()).map(|n| self.contribution(n, d)), self.n())
    }

    /// Mean contribution over `subset`, always evaluated in the context of the full vector `d`.
    pub fn partial_performance(&self, subset: &[usize], d: &DecisionVector) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::Domain(
                "partial performance over an empty subset".into(),
            ));
        }
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.n()) {
            return Err(Error::Domain(format!("decision index {bad} out of range")));
        }
        Ok(mean(
            subset.iter().map(|&i| self.contribution(i, d)),
            subset.len(),
        ))
    }

    /// Structured text export. Reals are written with 17 significant digits so the
    /// round trip through [`Landscape::from_text`] is bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# orgsearch landscape v1\n");
        match self.provenance {
            Some(p) => {
                out.push_str(&format!("seed {}\nkind {}\n", p.seed, p.kind));
            }
            None => out.push_str("seed none\nkind custom\n"),
        }
        out.push_str(&format!("n {}\nmatrix\n", self.n()));
        for row in self.matrix.rows() {
            let line: String = row.iter().map(|&b| if b { '1' } else { '0' }).collect();
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("tables\n");
        for table in &self.tables {
            let line: Vec<String> = table.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out.push_str(&format!(
            "optimum {} {:.16e}\n",
            self.optimum.0, self.optimum.1
        ));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = TextLines::new(text);
        let seed = lines.field("seed")?;
        let kind = lines.field("kind")?;
        let n: usize = lines
            .field("n")?
            .parse()
            .map_err(|e| parse_error(format!("bad n: {e}")))?;
        lines.field("matrix")?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let row = lines
                .next_line("matrix row")?
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    c => Err(parse_error(format!("bad matrix character `{c}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let matrix = InfluenceMatrix::from_rows(&rows)?;
        lines.field("tables")?;
        let mut tables = Vec::with_capacity(n);
        for _ in 0..n {
            let table = lines
                .next_line("table row")?
                .split_whitespace()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| parse_error(format!("bad table value `{v}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            tables.push(table);
        }
        let optimum_line = lines.field("optimum")?;
        let mut landscape = Landscape::new(matrix, tables)?;
        let (bits, value) = optimum_line
            .split_once(' ')
            .ok_or_else(|| parse_error("malformed optimum line".into()))?;
        let stored = (
            bits.parse::<DecisionVector>()?,
            value
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_error(format!("bad optimum: {e}")))?,
        );
        if stored != landscape.optimum {
            return Err(parse_error(format!(
                "stored optimum {} {} disagrees with recomputed {} {}",
                stored.0, stored.1, landscape.optimum.0, landscape.optimum.1
            )));
        }
        if seed != "none" {
            let seed = seed
                .parse()
                .map_err(|e| parse_error(format!("bad seed: {e}")))?;
            let kind = kind.parse()?;
            landscape.provenance = Some(Provenance { seed, kind });
        }
        Ok(landscape)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }
}

fn parse_error(message: String) -> Error {
    Error::Parse {
        path: "<landscape>".into(),
        message,
    }
}

/// Non-empty, non-comment lines of a landscape file.
struct TextLines<'a> {
    inner: Box<dyn Iterator<Item = &'a str> + 'a>,
}

impl<'a> TextLines<'a> {
    fn new(text: &'a str) -> Self {
        TextLines {
            inner: Box::new(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#')),
            ),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<&'a str> {
        self.inner
            .next()
            .ok_or_else(|| parse_error(format!("truncated file: missing {what}")))
    }

    /// Reads `name value` (or a bare `name`) and returns the value.
    fn field(&mut self, name: &str) -> Result<String> {
        let line = self.next_line(name)?;
        match line.split_once(' ') {
            Some((key, value)) if key == name => Ok(value.trim().to_string()),
            None if line == name => Ok(String::new()),
            _ => Err(parse_error(format!("expected `{name}`, found `{line}`"))),
        }
    }
}

/// Draws every table entry i.i.d. uniform on [0, 1) and caches the optimum.
pub fn generate_landscape<R: Rng + ?Sized>(
    matrix: InfluenceMatrix,
    rng: &mut R,
) -> Result<Landscape> {
    if matrix.n() > MAX_ENUMERABLE {
        return Err(Error::Config(format!(
            "N = {} exceeds the enumeration bound {MAX_ENUMERABLE}",
            matrix.n()
        )));
    }
    let tables = (0..matrix.n())
        .map(|i| {
            (0..1usize << matrix.row_sum(i))
                .map(|_| rng.gen::<f64>())
                .collect()
        })
        .collect();
    Landscape::new(matrix, tables)
}

fn table_index(matrix: &InfluenceMatrix, n: usize, bits: &[bool]) -> usize {
    matrix
        .dependencies(n)
        .iter()
        .fold(usize::from(bits[n]), |idx, &j| {
            (idx << 1) | usize::from(bits[j])
        })
}

fn mean(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    values.sum::<f64>() / count as f64
}

/// Enumerates all `2^N` vectors in Gray-code order, updating only the table
/// indices a flip touches. Performance is summed in decision order so the value
/// equals [`Landscape::performance`] bit for bit.
pub fn exhaustive_optimum(
    matrix: &InfluenceMatrix,
    tables: &[Vec<f64>],
) -> Result<(DecisionVector, f64)> {
    let n = matrix.n();
    if n > MAX_ENUMERABLE {
        return Err(Error::Config(format!(
            "N = {n} exceeds the enumeration bound {MAX_ENUMERABLE}"
        )));
    }
    // For each decision j: the rows whose index contains j, and the bit mask of j in that index.
    let mut touches: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for row in 0..n {
        let deps = matrix.dependencies(row);
        touches[row].push((row, 1 << deps.len()));
        for (pos, &j) in deps.iter().enumerate() {
            touches[j].push((row, 1 << (deps.len() - 1 - pos)));
        }
    }
    let mut idx = vec![0usize; n];
    let mut contrib: Vec<f64> = (0..n).map(|i| tables[i][0]).collect();
    let mut best_perf = mean(contrib.iter().copied(), n);
    let mut best_value = 0u64;
    let mut gray = 0u64;
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let decision = n - 1 - bit;
        for &(row, mask) in &touches[decision] {
            idx[row] ^= mask;
            contrib[row] = tables[row][idx[row]];
        }
        let perf = mean(contrib.iter().copied(), n);
        if perf > best_perf || (perf == best_perf && gray < best_value) {
            best_perf = perf;
            best_value = gray;
        }
    }
    Ok((DecisionVector::from_value(best_value, n), best_perf))
}
