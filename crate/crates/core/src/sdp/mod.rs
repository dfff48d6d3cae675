//! Block-structured semidefinite program
//!
//! ```text
//! minimize    sum_k tr(C_k X_k) + c^T f
//! subject to  X_k(i,i) = 1,  X_k PSD                    for every block k
//!             X_k(row, last) = 1 - 2 f_var              for every coupling
//!             forbidden-set rows of every check on f
//!             0 <= f <= 1
//! ```
//!
//! solved by ADMM ([`solve`]) and checked by [`residuals`], which recomputes
//! feasibility and a Lagrangian lower bound from the returned point and
//! multipliers without touching solver state.

mod admm;
mod dump;
pub mod parity_polytope;
mod residuals;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldpc::{FsConstraint, FsConstraintSet};

pub use admm::{solve, SolverSettings};
pub use dump::{load_problem, save_problem, PROBLEM_FORMAT_VERSION};
pub use residuals::{dual_bound, residuals, ResidualReport};

/// Ties `X_block(row, last) = 1 - 2 f_var`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coupling {
    pub block: usize,
    pub row: usize,
    pub var: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSdpProblem {
    costs: Vec<DMatrix<f64>>,
    linear: Vec<f64>,
    couplings: Vec<Coupling>,
    fs: FsConstraintSet,
    /// Coupling index of each f variable.
    var_coupling: Vec<usize>,
}

impl BlockSdpProblem {
    /// Validates and symmetrizes. Every f variable must be tied to exactly one
    /// off-diagonal entry of some block's last column.
    pub fn new(
        costs: Vec<DMatrix<f64>>,
        linear: Vec<f64>,
        couplings: Vec<Coupling>,
        fs: FsConstraintSet,
    ) -> Result<Self> {
        let costs: Vec<DMatrix<f64>> = costs
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                if !c.is_square() || c.nrows() < 2 {
                    return Err(Error::Dimension(format!("cost block {k} is {}x{}", c.nrows(), c.ncols())));
                }
                if c.iter().any(|x| !x.is_finite()) || linear.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidParameter(format!("non-finite cost in block {k}")));
                }
                Ok((&c + c.transpose()) * 0.5)
            })
            .collect::<Result<_>>()?;
        let n = linear.len();
        let mut var_coupling = vec![usize::MAX; n];
        let mut taken = std::collections::HashSet::new();
        for (idx, c) in couplings.iter().enumerate() {
            let dim = costs
                .get(c.block)
                .ok_or_else(|| Error::InfeasibleProblem(format!("coupling {idx} names missing block {}", c.block)))?
                .nrows();
            if c.row + 1 >= dim {
                return Err(Error::InfeasibleProblem(format!(
                    "coupling {idx} row {} outside block of size {dim}",
                    c.row
                )));
            }
            if c.var >= n {
                return Err(Error::InfeasibleProblem(format!("coupling {idx} names missing variable {}", c.var)));
            }
            if var_coupling[c.var] != usize::MAX {
                return Err(Error::InfeasibleProblem(format!("variable {} is coupled twice", c.var)));
            }
            if !taken.insert((c.block, c.row)) {
                return Err(Error::InfeasibleProblem(format!("entry ({}, {}) is coupled twice", c.block, c.row)));
            }
            var_coupling[c.var] = idx;
        }
        if let Some(v) = var_coupling.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InfeasibleProblem(format!("variable {v} is not coupled to any block")));
        }
        if fs.checks().iter().flatten().any(|&v| v >= n) {
            return Err(Error::Dimension("forbidden-set row references a missing variable".into()));
        }
        Ok(Self { costs, linear, couplings, fs, var_coupling })
    }

    pub fn costs(&self) -> &[DMatrix<f64>] {
        &self.costs
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn fs(&self) -> &FsConstraintSet {
        &self.fs
    }

    pub fn coupling_of(&self, var: usize) -> Coupling {
        self.couplings[self.var_coupling[var]]
    }

    pub fn n_blocks(&self) -> usize {
        self.costs.len()
    }

    pub fn n_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn diagonal_row_count(&self) -> usize {
        self.costs.iter().map(|c| c.nrows()).sum()
    }

    pub fn coupling_row_count(&self) -> usize {
        self.couplings.len()
    }

    pub fn fs_row_count(&self) -> usize {
        self.fs.row_count()
    }

    pub fn box_row_count(&self) -> usize {
        2 * self.n_vars()
    }

    pub fn fs_rows(&self) -> Vec<FsConstraint> {
        self.fs.rows()
    }

    /// `sum_k tr(C_k X_k) + c^T f`.
    pub fn objective(&self, blocks: &[DMatrix<f64>], f: &[f64]) -> f64 {
        let quad: f64 = self.costs.iter().zip(blocks).map(|(c, x)| c.dot(x)).sum();
        quad + self.linear.iter().zip(f).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Same problem with every cost scaled by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            costs: self.costs.iter().map(|c| c * alpha).collect(),
            linear: self.linear.iter().map(|c| c * alpha).collect(),
            ..self.clone()
        }
    }

    /// Rank-one lift of polarized bits: `X_k = [x; 1][x; 1]^T` with the
    /// coupled entries of `x` set from `f`, and `f = (1 - b) / 2`.
    pub fn lift_integral(&self, f: &[f64]) -> Vec<DMatrix<f64>> {
        self.costs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let d = c.nrows();
                let mut v = nalgebra::DVector::from_element(d, 1.0);
                for cp in self.couplings.iter().filter(|cp| cp.block == k) {
                    v[cp.row] = 1.0 - 2.0 * f[cp.var];
                }
                &v * v.transpose()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
}

/// Multipliers returned with a solution. Any values give a valid lower bound
/// through [`dual_bound`]; near-optimal ones make it tight.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    /// Dual slack of each PSD block.
    pub psd: Vec<DMatrix<f64>>,
    /// Multipliers of each check's copy of `f`.
    pub checks: Vec<Vec<f64>>,
    /// Multipliers of the box copy of `f`.
    pub boxes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub blocks: Vec<DMatrix<f64>>,
    pub f: Vec<f64>,
    pub objective: f64,
    pub residuals: ResidualReport,
    pub iterations: usize,
    pub status: SolveStatus,
    pub duals: DualCertificate,
}

impl SdpSolution {
    /// Ratio of the two largest eigenvalues of block `k`.
    pub fn eigen_ratio(&self, k: usize) -> f64 {
        let mut ev: Vec<f64> = self.blocks[k].clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev[0] / ev[1].abs().max(f64::MIN_POSITIVE)
    }
}
