//! Monte Carlo link simulation: configuration, per-frame sampling and BER
//! sweeps.
//!
//! Frame `f` of a sweep uses the message and channel streams with index `f`
//! at every SNR point, and the noise realization is scaled rather than
//! redrawn, so different SNR points and schemes see the same channel draws.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ldpc::{build_pcm, derive_generator, read_alist, GeneratorMatrix, ParityCheckMatrix};
use crate::mimo_model::{generate_frame, snr_db_to_sigma2, FrameLayout, RealSnapshot, SNR_CONVENTION};
use crate::rng::{stream_rng, sub_seed, Stream};
use crate::sdp::SolverSettings;
use crate::turbo::{Interleaver, IterationTrace, Scheme, TurboConfig, TurboReceiver};

pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Everything a sweep depends on. Missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub snr_grid_db: Vec<f64>,
    pub scheme: Scheme,
    /// Hamming radius of the candidate lists.
    pub radius: usize,
    pub clip: f64,
    pub turbo_iters: usize,
    pub decoder_iters: usize,
    /// A point stops once the final iteration has this many bit errors...
    pub min_errors: u64,
    /// ...or after this many frames.
    pub max_frames: u64,
    /// Frames simulated between checks of the stopping rule.
    pub batch_frames: u64,
    pub seed: u64,
    pub sdp_tol: f64,
    pub sdp_max_iters: usize,
    pub code_n: usize,
    pub code_k: usize,
    pub col_weight: usize,
    /// Parity-check matrix to load instead of constructing one.
    pub alist: Option<PathBuf>,
    /// Simulate the frames of a batch on the rayon pool.
    pub parallel: bool,
    /// Fill the wall-time column; off by default so repeated runs match
    /// byte for byte.
    pub record_wall_time: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_t: 4,
            n_r: 4,
            snr_grid_db: vec![0.0, 2.0, 4.0, 6.0],
            scheme: Scheme::MultiSdr,
            radius: 2,
            clip: 8.0,
            turbo_iters: 3,
            decoder_iters: 20,
            min_errors: 200,
            max_frames: 5000,
            batch_frames: 16,
            seed: 1,
            sdp_tol: 1e-3,
            sdp_max_iters: 2000,
            code_n: 256,
            code_k: 128,
            col_weight: 3,
            alist: None,
            parallel: false,
            record_wall_time: false,
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.into()));
        if self.n_t == 0 || self.n_r == 0 {
            return fail("antenna counts must be positive");
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return fail("snr_grid_db needs at least one finite value");
        }
        if self.max_frames == 0 || self.batch_frames == 0 {
            return fail("max_frames and batch_frames must be positive");
        }
        if [self.min_errors, self.max_frames, self.batch_frames, self.seed].iter().any(|&v| v > i64::MAX as u64) {
            return fail("integer settings must fit in a signed 64-bit TOML integer");
        }
        if self.sdp_tol.is_nan() || self.sdp_tol <= 0.0 || self.sdp_max_iters == 0 {
            return fail("SDP tolerance and iteration cap must be positive");
        }
        if self.alist.is_none() {
            if self.code_k == 0 || self.code_k >= self.code_n {
                return fail("code_k must lie in (0, code_n)");
            }
            if !self.code_n.is_multiple_of(2 * self.n_t) {
                return fail("code_n must be a multiple of 2 * n_t");
            }
        }
        self.turbo_config().validate()
    }

    pub fn turbo_config(&self) -> TurboConfig {
        TurboConfig {
            max_turbo_iters: self.turbo_iters,
            radius: self.radius,
            clip: self.clip,
            scheme: self.scheme,
            sdp: SolverSettings { tol: self.sdp_tol, max_iters: self.sdp_max_iters, ..SolverSettings::default() },
            decoder_iters: self.decoder_iters,
            record_llrs: false,
        }
    }

    /// Hex SHA-256 of the canonical TOML form with the seed and the execution
    /// switches (`parallel`, `record_wall_time`) reset, so that `(hash, seed)`
    /// identifies the numbers a run produces.
    pub fn hash(&self) -> String {
        let canonical = Self { seed: 0, parallel: false, record_wall_time: false, ..self.clone() }.to_toml();
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `a:b:step` (inclusive of `b` up to rounding) or a single value.
pub fn parse_snr_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad SNR range {text:?}"))))
        .collect::<Result<_>>()?;
    match parts[..] {
        [a] => Ok(vec![a]),
        [a, b, step] if step > 0.0 && b >= a => {
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(Error::Config(format!("bad SNR range {text:?}; expected a:b:step with step > 0"))),
    }
}

/// One sampled transmission.
#[derive(Debug, Clone)]
pub struct FrameSample {
    pub message: Vec<u8>,
    /// Codeword order.
    pub codeword: Vec<u8>,
    pub snapshots: Vec<RealSnapshot>,
    pub sigma_n2: f64,
}

/// Code, interleaver and receiver built from a configuration.
#[derive(Debug, Clone)]
pub struct Link {
    pub layout: FrameLayout,
    pub generator: GeneratorMatrix,
    pub receiver: TurboReceiver,
    seed: u64,
}

impl Link {
    pub fn build(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let pcm = match &cfg.alist {
            Some(path) => read_alist(path)?,
            None => build_pcm(cfg.code_n, cfg.code_k, cfg.col_weight, cfg.seed)?,
        };
        Self::from_parts(cfg.n_t, cfg.n_r, pcm, cfg.turbo_config(), cfg.seed)
    }

    pub fn from_parts(n_t: usize, n_r: usize, pcm: ParityCheckMatrix, turbo: TurboConfig, seed: u64) -> Result<Self> {
        let layout = FrameLayout::for_codeword(n_t, n_r, pcm.n())?;
        let generator = derive_generator(&pcm);
        let interleaver = Interleaver::random(pcm.n(), seed);
        let receiver = TurboReceiver::new(pcm, interleaver, turbo)?;
        Ok(Self { layout, generator, receiver, seed })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_turbo(&self, turbo: TurboConfig) -> Result<Self> {
        Ok(Self { receiver: self.receiver.with_config(turbo)?, ..self.clone() })
    }

    /// Frame `index` at the given SNR.
    pub fn frame(&self, index: u64, snr_db: f64) -> Result<FrameSample> {
        let mut msg_rng = stream_rng(self.seed, Stream::Message, index);
        let message: Vec<u8> = (0..self.generator.k()).map(|_| msg_rng.gen_range(0..2)).collect();
        let codeword = self.generator.encode(&message);
        let channel_bits = self.receiver.interleaver().interleave(&codeword)?;
        let sigma_n2 = snr_db_to_sigma2(snr_db, self.layout.n_t);
        let snapshots =
            generate_frame(&self.layout, sub_seed(self.seed, Stream::Channel, index), sigma_n2, &channel_bits)?;
        Ok(FrameSample { message, codeword, snapshots, sigma_n2 })
    }

    /// Runs the receiver on frame `index`.
    pub fn simulate(&self, index: u64, snr_db: f64) -> Result<(FrameSample, IterationTrace)> {
        let sample = self.frame(index, snr_db)?;
        let trace = self.receiver.run(&sample.snapshots, sample.sigma_n2, Some(&sample.codeword))?;
        Ok((sample, trace))
    }

    /// Information-bit errors of the decision in effect after iteration `t`.
    pub fn info_errors(&self, sample: &FrameSample, trace: &IterationTrace, t: usize) -> u64 {
        let decided = self.generator.extract_message(&trace.decision_at(t).hard_bits);
        decided.iter().zip(&sample.message).filter(|(a, b)| a != b).count() as u64
    }
}

/// Error counts of one SNR point after one turbo iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRecord {
    pub snr_db: f64,
    pub iteration: usize,
    pub bit_errors: u64,
    pub bits: u64,
    pub frame_errors: u64,
    pub frames: u64,
    pub ber: f64,
    pub fer: f64,
    pub wall_time_s: f64,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    bit_errors: u64,
    frame_errors: u64,
}

/// Runs every SNR point of `cfg` and returns one record per (SNR,
/// iteration). Frames that stop early keep their final decision for the
/// remaining iterations. BER counts information bits.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    let link = Link::build(cfg)?;
    run_ber_sweep_on(&link, cfg)
}

/// [`run_ber_sweep`] with an already built link.
pub fn run_ber_sweep_on(link: &Link, cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let hash = cfg.hash();
    let iters = cfg.turbo_iters;
    let k = link.generator.k() as u64;
    let mut records = Vec::with_capacity(cfg.snr_grid_db.len() * iters);
    for &snr in &cfg.snr_grid_db {
        let start = Instant::now();
        let mut tallies = vec![Tally::default(); iters];
        let mut frames = 0u64;
        while frames < cfg.max_frames && tallies[iters - 1].bit_errors < cfg.min_errors {
            let batch = frames..(frames + cfg.batch_frames).min(cfg.max_frames);
            let per_frame = |f: u64| -> Result<Vec<u64>> {
                let (sample, trace) = link.simulate(f, snr)?;
                Ok((1..=iters).map(|t| link.info_errors(&sample, &trace, t)).collect())
            };
            let results: Vec<Vec<u64>> = if cfg.parallel {
                batch.clone().into_par_iter().map(per_frame).collect::<Result<_>>()?
            } else {
                batch.clone().map(per_frame).collect::<Result<_>>()?
            };
            for errs in results {
                for (tally, e) in tallies.iter_mut().zip(errs) {
                    tally.bit_errors += e;
                    tally.frame_errors += u64::from(e > 0);
                }
            }
            frames = batch.end;
        }
        let wall = if cfg.record_wall_time { start.elapsed().as_secs_f64() } else { 0.0 };
        for (t, tally) in tallies.into_iter().enumerate() {
            let bits = frames * k;
            records.push(BerRecord {
                snr_db: snr,
                iteration: t + 1,
                bit_errors: tally.bit_errors,
                bits,
                frame_errors: tally.frame_errors,
                frames,
                ber: tally.bit_errors as f64 / bits as f64,
                fer: tally.frame_errors as f64 / frames as f64,
                wall_time_s: wall,
                seed: cfg.seed,
                config_hash: hash.clone(),
            });
        }
    }
    Ok(records)
}

/// Header comment lines shared by the CSV outputs.
pub fn csv_header(kind: &str, cfg: &SimConfig) -> String {
    let mut out = format!(
        "# sdr-turbo {kind} csv v{CSV_SCHEMA_VERSION} config_hash={} seed={}\n# snr convention: {SNR_CONVENTION}\n",
        cfg.hash(),
        cfg.seed
    );
    for line in cfg.to_toml().lines() {
        out.push_str("# config: ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

pub fn write_ber_csv<W: Write>(mut out: W, cfg: &SimConfig, records: &[BerRecord]) -> Result<()> {
    out.write_all(csv_header("ber", cfg).as_bytes())?;
    writeln!(out, "snr_db,iteration,bit_errors,bits,frame_errors,frames,ber,fer,wall_time_s,seed,config_hash")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6e},{:.6e},{:.3},{},{}",
            r.snr_db,
            r.iteration,
            r.bit_errors,
            r.bits,
            r.frame_errors,
            r.frames,
            r.ber,
            r.fer,
            r.wall_time_s,
            r.seed,
            r.config_hash
        )?;
    }
    Ok(())
}
