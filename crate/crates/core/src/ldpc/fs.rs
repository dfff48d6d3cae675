use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

/// Largest check degree whose `2^(deg-1)` odd subsets are enumerated.
pub const FS_ENUMERATION_MAX_DEGREE: usize = 16;

/// `sum_{n in F} f_n - sum_{n in N_m \ F} f_n <= |F| - 1` for an odd subset `F`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsConstraint {
    pub check: usize,
    pub subset: Vec<usize>,
    pub complement: Vec<usize>,
}

impl FsConstraint {
    pub fn rhs(&self) -> f64 {
        self.subset.len() as f64 - 1.0
    }

    pub fn lhs(&self, f: &[f64]) -> f64 {
        self.subset.iter().map(|&n| f[n]).sum::<f64>() - self.complement.iter().map(|&n| f[n]).sum::<f64>()
    }

    pub fn is_satisfied(&self, f: &[f64], tol: f64) -> bool {
        self.lhs(f) <= self.rhs() + tol
    }
}

fn odd_subsets(check: usize, vars: &[usize]) -> impl Iterator<Item = FsConstraint> + '_ {
    let deg = vars.len();
    (0u32..(1 << deg)).filter(|mask| mask.count_ones() % 2 == 1).map(move |mask| {
        let (subset, complement) = vars.iter().enumerate().fold((Vec::new(), Vec::new()), |(mut s, mut c), (j, &v)| {
            if (mask >> j) & 1 == 1 {
                s.push(v);
            } else {
                c.push(v);
            }
            (s, c)
        });
        FsConstraint { check, subset, complement }
    })
}

/// All forbidden-set rows of `h`, `2^(deg(m)-1)` per check, grouped by check.
pub fn enumerate_fs_constraints(h: &ParityCheckMatrix) -> Result<Vec<FsConstraint>> {
    FsConstraintSet::from_pcm(h).map(|set| set.rows())
}

/// The complete forbidden-set description of a code: for every check, all of
/// its odd subsets. Together with `0 <= f <= 1` this is the intersection of
/// the per-check parity polytopes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsConstraintSet {
    checks: Vec<Vec<usize>>,
}

impl FsConstraintSet {
    pub fn empty() -> Self {
        Self { checks: Vec::new() }
    }

    pub fn from_pcm(h: &ParityCheckMatrix) -> Result<Self> {
        Self::from_checks(h.checks().to_vec())
    }

    pub fn from_checks(checks: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(row) = checks.iter().find(|c| c.len() > FS_ENUMERATION_MAX_DEGREE) {
            return Err(Error::FsEnumerationGuard { degree: row.len() });
        }
        if checks.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter("empty check".into()));
        }
        Ok(Self { checks })
    }

    /// Regroups explicit rows by check. Every check must come with all of its
    /// odd subsets; a partial family does not describe a parity polytope.
    pub fn from_constraints(rows: &[FsConstraint]) -> Result<Self> {
        let mut grouped: BTreeMap<usize, (Vec<usize>, usize)> = BTreeMap::new();
        for row in rows {
            if row.subset.len() % 2 == 0 {
                return Err(Error::InvalidParameter(format!("check {} has an even forbidden set", row.check)));
            }
            let mut vars: Vec<usize> = row.subset.iter().chain(&row.complement).copied().collect();
            vars.sort_unstable();
            let entry = grouped.entry(row.check).or_insert_with(|| (vars.clone(), 0));
            if entry.0 != vars {
                return Err(Error::InvalidParameter(format!("check {} rows disagree on N_m", row.check)));
            }
            entry.1 += 1;
        }
        let mut checks = Vec::with_capacity(grouped.len());
        for (m, (vars, count)) in grouped {
            if count != 1 << (vars.len() - 1) {
                return Err(Error::InvalidParameter(format!(
                    "check {m} has {count} of {} forbidden-set rows",
                    1usize << (vars.len() - 1)
                )));
            }
            checks.push(vars);
        }
        Self::from_checks(checks)
    }

    /// Relabels variables through `map` (old index -> new index), e.g. from
    /// codeword order into channel order.
    pub fn permuted(&self, map: &[usize]) -> Self {
        let checks = self
            .checks
            .iter()
            .map(|row| {
                let mut r: Vec<usize> = row.iter().map(|&v| map[v]).collect();
                r.sort_unstable();
                r
            })
            .collect();
        Self { checks }
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn row_count(&self) -> usize {
        self.checks.iter().map(|c| 1usize << (c.len() - 1)).sum()
    }

    pub fn rows(&self) -> Vec<FsConstraint> {
        self.checks.iter().enumerate().flat_map(|(m, vars)| odd_subsets(m, vars)).collect()
    }

    /// Largest violation over all rows, without enumerating them: the most
    /// violated odd set takes every `f_n > 1/2`, fixing parity by toggling the
    /// entry closest to `1/2`.
    pub fn max_violation(&self, f: &[f64]) -> f64 {
        self.checks
            .iter()
            .map(|vars| {
                let mut value = 1.0 - vars.iter().map(|&v| f[v]).sum::<f64>();
                let mut count = 0;
                let mut weakest = f64::INFINITY;
                for &v in vars {
                    let gain = 2.0 * f[v] - 1.0;
                    if gain > 0.0 {
                        value += gain;
                        count += 1;
                    }
                    weakest = weakest.min(gain.abs());
                }
                if count % 2 == 0 {
                    value -= weakest;
                }
                value
            })
            .fold(0.0, f64::max)
    }
}
