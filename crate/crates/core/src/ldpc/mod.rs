//! LDPC codes: construction, encoding, sum-product decoding, and the
//! forbidden-set inequalities that describe each check's parity polytope.

pub mod alist;
mod encoder;
mod fs;
mod spa;

use std::ops::Deref;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

pub use alist::{from_alist, read_alist, to_alist, write_alist};
pub use encoder::{derive_generator, GeneratorMatrix};
pub use fs::{enumerate_fs_constraints, FsConstraint, FsConstraintSet, FS_ENUMERATION_MAX_DEGREE};
pub use spa::{SpaDecoder, SpaOutput, SPA_LLR_CLAMP};

/// Sparse binary parity-check matrix stored as check and variable adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    checks: Vec<Vec<usize>>,
    vars: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-check variable lists. Indices are 0-based.
    pub fn from_checks(n: usize, mut checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut vars = vec![Vec::new(); n];
        for (m, row) in checks.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!("check {m} has a repeated edge")));
            }
            for &v in row.iter() {
                if v >= n {
                    return Err(Error::Dimension(format!("check {m} references variable {v} >= n = {n}")));
                }
                vars[v].push(m);
            }
        }
        Ok(Self { n, checks, vars })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.checks.len()
    }

    /// Variables taking part in check `m` (the set `N_m`).
    pub fn check(&self, m: usize) -> &[usize] {
        &self.checks[m]
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    /// Checks touching variable `v`.
    pub fn var(&self, v: usize) -> &[usize] {
        &self.vars[v]
    }

    pub fn column_weights(&self) -> Vec<usize> {
        self.vars.iter().map(Vec::len).collect()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.checks.iter().map(Vec::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.checks.iter().map(Vec::len).sum()
    }

    /// True iff `H c^T = 0` over GF(2).
    pub fn syndrome_check(&self, bits: &[u8]) -> bool {
        debug_assert_eq!(bits.len(), self.n);
        self.checks.iter().all(|row| row.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    /// Number of unsatisfied checks.
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        self.checks.iter().filter(|row| row.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) != 0).count()
    }

    /// Whether two columns share two or more checks.
    pub fn has_four_cycle(&self) -> bool {
        let m = self.m();
        let mut seen = vec![false; m * m];
        for col in &self.vars {
            for (a, &r1) in col.iter().enumerate() {
                for &r2 in &col[a + 1..] {
                    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
                    if std::mem::replace(&mut seen[lo * m + hi], true) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

const STRICT_ATTEMPTS: u64 = 100;
const RELAXED_ATTEMPTS: u64 = 100;

/// Random regular construction: every column gets `col_weight` distinct
/// checks, rows are filled to `n * col_weight / m` exactly. Rows are picked
/// greedily by remaining capacity with random tie-breaks; attempts that would
/// close a 4-cycle are retried, and only if every 4-cycle-free attempt fails
/// is the girth requirement dropped.
pub fn build_pcm(n: usize, k: usize, col_weight: usize, seed: u64) -> Result<ParityCheckMatrix> {
    if k >= n {
        return Err(Error::InfeasibleProfile(format!("k = {k} must be below n = {n}")));
    }
    let m = n - k;
    if col_weight == 0 || col_weight > m {
        return Err(Error::InfeasibleProfile(format!("column weight {col_weight} with {m} checks")));
    }
    if !(n * col_weight).is_multiple_of(m) {
        return Err(Error::InfeasibleProfile(format!(
            "n * col_weight = {} is not divisible by m = {m}",
            n * col_weight
        )));
    }
    let row_weight = n * col_weight / m;
    for attempt in 0..STRICT_ATTEMPTS + RELAXED_ATTEMPTS {
        let mut rng = stream_rng(seed, Stream::Code, attempt);
        let avoid_cycles = attempt < STRICT_ATTEMPTS;
        if let Some(checks) = try_regular(n, m, col_weight, row_weight, avoid_cycles, &mut rng) {
            return ParityCheckMatrix::from_checks(n, checks);
        }
    }
    Err(Error::InfeasibleProfile(format!("no ({n}, {k}) column-weight-{col_weight} matrix found")))
}

fn try_regular<R: Rng>(
    n: usize,
    m: usize,
    col_weight: usize,
    row_weight: usize,
    avoid_cycles: bool,
    rng: &mut R,
) -> Option<Vec<Vec<usize>>> {
    let mut capacity = vec![row_weight; m];
    let mut adjacent = vec![false; m * m];
    let mut checks = vec![Vec::with_capacity(row_weight); m];
    let mut order: Vec<usize> = (0..m).collect();
    for v in 0..n {
        let mut chosen: Vec<usize> = Vec::with_capacity(col_weight);
        for _ in 0..col_weight {
            order.shuffle(rng);
            let pick = order
                .iter()
                .copied()
                .filter(|&r| capacity[r] > 0 && !chosen.contains(&r))
                .filter(|&r| !avoid_cycles || chosen.iter().all(|&c| !adjacent[r * m + c]))
                .max_by_key(|&r| capacity[r])?;
            chosen.push(pick);
        }
        for (a, &r1) in chosen.iter().enumerate() {
            capacity[r1] -= 1;
            checks[r1].push(v);
            for &r2 in &chosen[a + 1..] {
                adjacent[r1 * m + r2] = true;
                adjacent[r2 * m + r1] = true;
            }
        }
    }
    Some(checks)
}

/// Which index space an LLR vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlrOrder {
    /// Interleaved order, as seen by the detector.
    Channel,
    /// Codeword order, as seen by the decoder.
    Decoder,
}

/// Log-likelihood ratios `log P(c=0)/P(c=1)`; positive favors bit 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlrFrame {
    pub values: Vec<f64>,
    pub order: LlrOrder,
}

impl LlrFrame {
    pub fn new(values: Vec<f64>, order: LlrOrder) -> Self {
        Self { values, order }
    }

    pub fn zeros(n: usize, order: LlrOrder) -> Self {
        Self { values: vec![0.0; n], order }
    }

    /// Hard decision with `L = 0` mapped to bit 0.
    pub fn hard_bits(&self) -> Vec<u8> {
        self.values.iter().map(|&l| u8::from(l < 0.0)).collect()
    }
}

impl Deref for LlrFrame {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}
