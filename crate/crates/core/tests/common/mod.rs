#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sdr_turbo::mimo_model::{ComplexChannel, RealSnapshot};

/// Rayleigh snapshot carrying the given polarized bits, plus its noiseless
/// symbol vector.
pub fn snapshot_with_bits(rng: &mut ChaCha8Rng, n_t: usize, n_r: usize, sigma_n2: f64, b: &[f64]) -> RealSnapshot {
    let h = ComplexChannel::rayleigh(n_r, n_t, rng).to_real();
    let s = symbols(b, n_t);
    let noise = DVector::from_fn(2 * n_r, |_, _| sigma_n2.sqrt() * rng.sample::<f64, _>(StandardNormal));
    RealSnapshot { y: &h * s + noise, h, index: 0 }
}

pub fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Bit `j` drives real row `j/2` (even `j`) or `j/2 + n_t` (odd `j`).
pub fn symbols(b: &[f64], n_t: usize) -> DVector<f64> {
    let mut s = DVector::zeros(2 * n_t);
    for (j, &bit) in b.iter().enumerate() {
        let row = if j % 2 == 0 { j / 2 } else { j / 2 + n_t };
        s[row] = bit;
    }
    s
}

pub fn all_vectors(len: usize) -> Vec<Vec<f64>> {
    (0u32..(1 << len)).map(|m| (0..len).map(|j| if (m >> j) & 1 == 1 { -1.0 } else { 1.0 }).collect()).collect()
}

pub fn distance(snap: &RealSnapshot, b: &[f64]) -> f64 {
    (&snap.y - &snap.h * symbols(b, snap.h.ncols() / 2)).norm_squared()
}

/// Exhaustive ML: smallest `|y - H s|^2` and its argument.
pub fn exhaustive_ml(snap: &RealSnapshot) -> (f64, Vec<f64>) {
    all_vectors(snap.h.ncols()).into_iter().map(|b| (distance(snap, &b), b)).min_by(|a, b| a.0.total_cmp(&b.0)).unwrap()
}

/// Max-log extrinsic LLRs over the full candidate set, written out from
/// the definition with the bit's own prior left out of both maxima.
pub fn full_list_oracle(snap: &RealSnapshot, sigma_n2: f64, prior: &[f64]) -> Vec<f64> {
    let len = snap.h.ncols();
    let cands = all_vectors(len);
    (0..len)
        .map(|i| {
            let best = |sign: f64| {
                cands
                    .iter()
                    .filter(|b| b[i] == sign)
                    .map(|b| {
                        let others: f64 = (0..len).filter(|&j| j != i).map(|j| prior[j] * b[j]).sum();
                        -distance(snap, b) / (2.0 * sigma_n2) + others / 2.0
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            best(1.0) - best(-1.0)
        })
        .collect()
}

pub fn rank_one(b: &[f64], n_t: usize) -> DMatrix<f64> {
    let mut v = symbols(b, n_t).as_slice().to_vec();
    v.push(1.0);
    let v = DVector::from_vec(v);
    &v * v.transpose()
}
