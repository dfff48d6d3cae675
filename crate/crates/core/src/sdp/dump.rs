//! JSON container for problem instances, for reproducing a solve offline.
//!
//! ```json
//! { "format": "block-sdp", "version": 1,
//!   "blocks": [ { "dim": 9, "cost": [ ...row-major... ] } ],
//!   "linear": [ ... ],
//!   "couplings": [ { "block": 0, "row": 0, "var": 0 } ],
//!   "checks": [ [0, 5, 9], ... ] }
//! ```
//! `checks` lists the variables of each parity check; the forbidden-set rows
//! are all odd subsets of each list.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{BlockSdpProblem, Coupling};
use crate::error::{Error, Result};
use crate::ldpc::FsConstraintSet;

pub const PROBLEM_FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "block-sdp";

#[derive(Serialize, Deserialize)]
struct Block {
    dim: usize,
    cost: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    blocks: Vec<Block>,
    linear: Vec<f64>,
    couplings: Vec<Coupling>,
    checks: Vec<Vec<usize>>,
}

pub fn save_problem(problem: &BlockSdpProblem, path: impl AsRef<Path>) -> Result<()> {
    let container = Container {
        format: FORMAT_NAME.into(),
        version: PROBLEM_FORMAT_VERSION,
        blocks: problem
            .costs()
            .iter()
            .map(|c| Block { dim: c.nrows(), cost: c.transpose().as_slice().to_vec() })
            .collect(),
        linear: problem.linear().to_vec(),
        couplings: problem.couplings().to_vec(),
        checks: problem.fs().checks().to_vec(),
    };
    std::fs::write(path, serde_json::to_string(&container)?)?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<BlockSdpProblem> {
    let container: Container = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if container.format != FORMAT_NAME || container.version != PROBLEM_FORMAT_VERSION {
        return Err(Error::InvalidParameter(format!(
            "unsupported problem container {} v{}",
            container.format, container.version
        )));
    }
    let costs = container
        .blocks
        .into_iter()
        .map(|b| {
            if b.cost.len() != b.dim * b.dim {
                return Err(Error::Dimension(format!("block of dim {} has {} entries", b.dim, b.cost.len())));
            }
            Ok(DMatrix::from_row_slice(b.dim, b.dim, &b.cost))
        })
        .collect::<Result<Vec<_>>>()?;
    BlockSdpProblem::new(costs, container.linear, container.couplings, FsConstraintSet::from_checks(container.checks)?)
}
