//! Extrinsic-information transfer measurements for the detector.
//!
//! A priori LLRs follow the consistent Gaussian model `N(sigma^2/2 * b, sigma^2)`,
//! whose mutual information with the bits is `J(sigma)`. Output information
//! is measured with a histogram estimate of `I(L; B)`.

use std::io::Write;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ldpc::{GeneratorMatrix, LlrFrame, LlrOrder};
use crate::mimo_model::{generate_frame, polarize, snr_db_to_sigma2, FrameLayout};
use crate::rng::{stream_rng, sub_seed, Stream};
use crate::turbo::TurboReceiver;

pub const DEFAULT_BINS: usize = 64;

fn log2_one_plus_exp_neg(x: f64) -> f64 {
    let nat = if x > 0.0 { (-x).exp().ln_1p() } else { -x + x.exp().ln_1p() };
    nat / std::f64::consts::LN_2
}

/// `J(sigma) = 1 - E[log2(1 + e^{-L})]`, `L ~ N(sigma^2/2, sigma^2)`, by
/// composite Simpson quadrature over `mean +- 12 sigma`.
pub fn j_function(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let mean = sigma * sigma / 2.0;
    let (lo, hi) = (mean - 12.0 * sigma, mean + 12.0 * sigma);
    let steps = 4000;
    let h = (hi - lo) / steps as f64;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let integrand = |x: f64| {
        let z = (x - mean) / sigma;
        norm * (-0.5 * z * z).exp() * log2_one_plus_exp_neg(x)
    };
    let mut acc = integrand(lo) + integrand(hi);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(lo + i as f64 * h);
    }
    (1.0 - acc * h / 3.0).clamp(0.0, 1.0)
}

const J_TABLE_MAX_SIGMA: f64 = 60.0;
const J_TABLE_POINTS: usize = 3001;

fn j_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut best = 0.0f64;
        (0..J_TABLE_POINTS)
            .map(|i| {
                let s = J_TABLE_MAX_SIGMA * i as f64 / (J_TABLE_POINTS - 1) as f64;
                best = best.max(j_function(s));
                (s, best)
            })
            .collect()
    })
}

/// `J^{-1}(mi)` by monotone linear interpolation of a cached table.
pub fn j_inverse(mi: f64) -> f64 {
    let table = j_table();
    if mi <= 0.0 {
        return 0.0;
    }
    let idx = table.partition_point(|&(_, j)| j < mi);
    if idx == 0 {
        return 0.0;
    }
    if idx >= table.len() {
        return J_TABLE_MAX_SIGMA;
    }
    let (s0, j0) = table[idx - 1];
    let (s1, j1) = table[idx];
    if j1 > j0 {
        s0 + (mi - j0) * (s1 - s0) / (j1 - j0)
    } else {
        s1
    }
}

/// Consistent Gaussian a priori LLRs for polarized bits.
pub fn gen_apriori<R: Rng + ?Sized>(bits: &[f64], sigma_a: f64, rng: &mut R) -> LlrFrame {
    let sigma_a = sigma_a.max(0.0);
    let mean = sigma_a * sigma_a / 2.0;
    let values = bits
        .iter()
        .map(|&b| {
            let z: f64 = rng.sample(StandardNormal);
            mean * b + sigma_a * z
        })
        .collect();
    LlrFrame::new(values, LlrOrder::Channel)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Mutual information in bits, clamped to `[0, 1]`.
    pub value: f64,
    pub bins: usize,
    pub samples: usize,
    /// All LLRs were equal, so no information can be measured.
    pub degenerate: bool,
}

/// Histogram estimate of `I(L; B)` for polarized bits `B`. Bins are uniform
/// over `[-max |L|, max |L|]`.
pub fn mi_histogram(llrs: &[f64], bits: &[f64], n_bins: usize) -> Result<MiEstimate> {
    if llrs.len() != bits.len() {
        return Err(Error::Dimension("LLR and bit vectors differ in length".into()));
    }
    if n_bins < 2 {
        return Err(Error::InvalidParameter("at least two histogram bins are needed".into()));
    }
    let samples = llrs.len();
    let (lo, hi) = llrs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
    if samples == 0 || lo >= hi {
        return Ok(MiEstimate { value: 0.0, bins: n_bins, samples, degenerate: true });
    }
    let span = lo.abs().max(hi.abs());
    let mut counts = vec![[0usize; 2]; n_bins];
    let mut totals = [0usize; 2];
    for (&l, &b) in llrs.iter().zip(bits) {
        let bin = (((l + span) / (2.0 * span)) * n_bins as f64).floor().clamp(0.0, (n_bins - 1) as f64) as usize;
        let class = usize::from(b < 0.0);
        counts[bin][class] += 1;
        totals[class] += 1;
    }
    let n = samples as f64;
    let mut mi = 0.0;
    for row in &counts {
        let joint_bin = (row[0] + row[1]) as f64 / n;
        for class in 0..2 {
            if row[class] == 0 {
                continue;
            }
            let p_cond = row[class] as f64 / totals[class] as f64;
            let p_class = totals[class] as f64 / n;
            mi += p_class * p_cond * (p_cond / joint_bin).log2();
        }
    }
    Ok(MiEstimate { value: mi.clamp(0.0, 1.0), bins: n_bins, samples, degenerate: false })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitPoint {
    pub i_a: f64,
    pub i_e: f64,
    pub snr_db: f64,
    pub scheme: String,
    pub samples: usize,
}

/// What an EXIT measurement needs besides the receiver.
#[derive(Debug, Clone)]
pub struct ExitSetup<'a> {
    pub receiver: &'a TurboReceiver,
    pub generator: &'a GeneratorMatrix,
    pub layout: FrameLayout,
    pub seed: u64,
    pub bins: usize,
    pub parallel: bool,
}

/// Detector transfer curve at one SNR: for each requested a priori
/// information, priors with `sigma_A = J^{-1}(I_A)` go through one detection
/// pass over `trials` random codewords, and the output information of the
/// extrinsic LLRs is measured. The same codewords and channels are reused at
/// every grid point.
pub fn exit_curve(setup: &ExitSetup<'_>, snr_db: f64, i_a_grid: &[f64], trials: usize) -> Result<Vec<ExitPoint>> {
    if let Some(bad) = i_a_grid.iter().find(|&&x| !(0.0..1.0).contains(&x)) {
        return Err(Error::InvalidParameter(format!("a priori information {bad} outside [0, 1)")));
    }
    let sigma_n2 = snr_db_to_sigma2(snr_db, setup.layout.n_t);
    let interleaver = setup.receiver.interleaver();
    i_a_grid
        .iter()
        .enumerate()
        .map(|(a, &i_a)| {
            let sigma_a = j_inverse(i_a);
            let run = |t: usize| -> Result<(Vec<f64>, Vec<f64>)> {
                let mut msg_rng = stream_rng(setup.seed, Stream::Message, t as u64);
                let msg: Vec<u8> = (0..setup.generator.k()).map(|_| msg_rng.gen_range(0..2)).collect();
                let channel_bits = interleaver.interleave(&setup.generator.encode(&msg))?;
                let frame = generate_frame(
                    &setup.layout,
                    sub_seed(setup.seed, Stream::Channel, t as u64),
                    sigma_n2,
                    &channel_bits,
                )?;
                let b: Vec<f64> = channel_bits.iter().map(|&c| polarize(c)).collect();
                let mut prior_rng = stream_rng(setup.seed, Stream::Priors, (a * trials + t) as u64);
                let prior = gen_apriori(&b, sigma_a, &mut prior_rng);
                let det = setup.receiver.detect(&frame, sigma_n2, &prior, None)?;
                Ok((det.l_e1.values, b))
            };
            let per_trial: Vec<(Vec<f64>, Vec<f64>)> = if setup.parallel {
                (0..trials).into_par_iter().map(run).collect::<Result<_>>()?
            } else {
                (0..trials).map(run).collect::<Result<_>>()?
            };
            let (llrs, bits): (Vec<f64>, Vec<f64>) =
                per_trial.into_iter().flat_map(|(l, b)| l.into_iter().zip(b)).unzip();
            let est = mi_histogram(&llrs, &bits, setup.bins)?;
            Ok(ExitPoint {
                i_a,
                i_e: est.value,
                snr_db,
                scheme: setup.receiver.config().scheme.as_str().to_string(),
                samples: est.samples,
            })
        })
        .collect()
}

pub fn write_exit_csv<W: Write>(mut out: W, points: &[ExitPoint], header_comment: &str) -> Result<()> {
    writeln!(out, "# {header_comment}")?;
    writeln!(out, "I_A,I_E,snr_db,scheme,samples")?;
    for p in points {
        writeln!(out, "{:.6},{:.6},{},{},{}", p.i_a, p.i_e, p.snr_db, p.scheme, p.samples)?;
    }
    Ok(())
}
