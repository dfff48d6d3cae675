//! MacKay's alist text format.
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! col_degree_1 .. col_degree_n
//! row_degree_1 .. row_degree_m
//! <n lines: 1-based check indices of each column, zero padded>
//! <m lines: 1-based variable indices of each row, zero padded>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

pub fn to_alist(h: &ParityCheckMatrix) -> String {
    let cols = h.column_weights();
    let rows = h.row_weights();
    let max_col = cols.iter().copied().max().unwrap_or(0);
    let max_row = rows.iter().copied().max().unwrap_or(0);
    let mut out = String::new();
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{} {}", h.n(), h.m());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut cols.iter().copied()));
    let _ = writeln!(out, "{}", join(&mut rows.iter().copied()));
    for v in 0..h.n() {
        let padded = h.var(v).iter().map(|&c| c + 1).chain(std::iter::repeat(0)).take(max_col);
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    for m in 0..h.m() {
        let padded = h.check(m).iter().map(|&v| v + 1).chain(std::iter::repeat(0)).take(max_row);
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    out
}

pub fn from_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut tokens = text
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::Alist(format!("not a non-negative integer: {t:?}"))));
    let mut next = || tokens.next().unwrap_or_else(|| Err(Error::Alist("unexpected end of file".into())));

    let n = next()?;
    let m = next()?;
    let max_col = next()?;
    let max_row = next()?;
    let col_deg = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let row_deg = (0..m).map(|_| next()).collect::<Result<Vec<_>>>()?;
    if col_deg.iter().any(|&d| d > max_col) || row_deg.iter().any(|&d| d > max_row) {
        return Err(Error::Alist("degree exceeds the declared maximum".into()));
    }

    let mut col_lists = Vec::with_capacity(n);
    for (v, &d) in col_deg.iter().enumerate() {
        let entries = (0..max_col).map(|_| next()).collect::<Result<Vec<_>>>()?;
        col_lists.push(read_list(&entries, d, m, || format!("column {}", v + 1))?);
    }
    let mut checks = Vec::with_capacity(m);
    for (c, &d) in row_deg.iter().enumerate() {
        let entries = (0..max_row).map(|_| next()).collect::<Result<Vec<_>>>()?;
        checks.push(read_list(&entries, d, n, || format!("row {}", c + 1))?);
    }

    let h = ParityCheckMatrix::from_checks(n, checks)?;
    for (v, list) in col_lists.iter_mut().enumerate() {
        list.sort_unstable();
        if list.as_slice() != h.var(v) {
            return Err(Error::Alist(format!("column {} disagrees with the row lists", v + 1)));
        }
    }
    Ok(h)
}

fn read_list(entries: &[usize], degree: usize, bound: usize, what: impl Fn() -> String) -> Result<Vec<usize>> {
    let (used, pad) = entries.split_at(degree);
    if pad.iter().any(|&x| x != 0) {
        return Err(Error::Alist(format!("{} has more entries than its degree", what())));
    }
    used.iter()
        .map(|&x| match x {
            0 => Err(Error::Alist(format!("{} has fewer entries than its degree", what()))),
            x if x > bound => Err(Error::Alist(format!("{} references index {x} beyond {bound}", what()))),
            x => Ok(x - 1),
        })
        .collect()
}

pub fn read_alist(path: impl AsRef<Path>) -> Result<ParityCheckMatrix> {
    from_alist(&std::fs::read_to_string(path)?)
}

pub fn write_alist(h: &ParityCheckMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_alist(h))?;
    Ok(())
}
