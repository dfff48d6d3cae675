//! Detector/decoder message passing.
//!
//! Each iteration runs the detector on the current prior `L_A1`, hands its
//! clipped extrinsic output through the de-interleaver to the SPA decoder,
//! and feeds the decoder's extrinsic output back through the interleaver as
//! the next prior. The loop ends when the decoder's hard decision satisfies
//! every check or the iteration budget is spent.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::detector::{full_list_detect, joint_map_sdr_detect, list_detect, simplified_anchor, SdpSummary};
use crate::error::{Error, Result};
use crate::ldpc::{FsConstraintSet, LlrFrame, LlrOrder, ParityCheckMatrix, SpaDecoder};
use crate::mimo_model::RealSnapshot;
use crate::rng::{stream_rng, Stream};
use crate::sdp::SolverSettings;

/// `min(max(L, -c), c)` elementwise.
pub fn clip_llr(llrs: &[f64], c: f64) -> Vec<f64> {
    assert!(c > 0.0, "clip value must be positive");
    llrs.iter().map(|l| l.clamp(-c, c)).collect()
}

/// Fixed permutation between codeword order and channel order:
/// `channel[i] = codeword[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Interleaver {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect(), inverse: (0..n).collect() }
    }

    /// Uniformly random permutation drawn from the interleaver stream of `seed`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut stream_rng(seed, Stream::Interleaver, 0));
        Self::from_permutation(perm).expect("shuffle yields a permutation")
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut inverse = vec![usize::MAX; n];
        for (i, &p) in perm.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::InvalidParameter("interleaver is not a permutation".into()));
            }
            inverse[p] = i;
        }
        Ok(Self { perm, inverse })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Channel position of each codeword position.
    pub fn channel_positions(&self) -> &[usize] {
        &self.inverse
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        Ok(self.perm.iter().map(|&p| x[p]).collect())
    }

    pub fn deinterleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        Ok(self.inverse.iter().map(|&i| x[i]).collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.perm.len() {
            return Err(Error::Dimension(format!("interleaver length {} applied to {len} values", self.perm.len())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Joint MAP-SDR solved in every iteration.
    MultiSdr,
    /// Joint MAP-SDR in the first iteration only; later anchors come from
    /// the first-iteration LLRs plus the decoder feedback.
    SingleSdr,
    /// Exhaustive max-log detection.
    FullList,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::MultiSdr => "multi-sdr",
            Scheme::SingleSdr => "single-sdr",
            Scheme::FullList => "full-list",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multi-sdr" => Ok(Scheme::MultiSdr),
            "single-sdr" => Ok(Scheme::SingleSdr),
            "full-list" => Ok(Scheme::FullList),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurboConfig {
    pub max_turbo_iters: usize,
    /// Hamming radius `P` of the candidate lists.
    pub radius: usize,
    /// Clip applied to the detector's extrinsic output.
    pub clip: f64,
    pub scheme: Scheme,
    pub sdp: SolverSettings,
    pub decoder_iters: usize,
    /// Keep every LLR vector in the trace.
    pub record_llrs: bool,
}

impl Default for TurboConfig {
    fn default() -> Self {
        Self {
            max_turbo_iters: 3,
            radius: 2,
            clip: 8.0,
            scheme: Scheme::MultiSdr,
            sdp: SolverSettings { tol: 1e-3, max_iters: 2000, ..SolverSettings::default() },
            decoder_iters: 20,
            record_llrs: false,
        }
    }
}

impl TurboConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_turbo_iters == 0 || self.decoder_iters == 0 {
            return Err(Error::Config("iteration counts must be at least 1".into()));
        }
        if self.radius == 0 {
            return Err(Error::Config("radius P must be at least 1".into()));
        }
        if self.clip.is_nan() || self.clip <= 0.0 {
            return Err(Error::Config("clip must be positive".into()));
        }
        Ok(())
    }
}

/// One turbo iteration as seen from outside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Decoder hard decision, codeword order.
    pub hard_bits: Vec<u8>,
    pub parity_ok: bool,
    /// Codeword bit errors against the supplied truth.
    pub bit_errors: Option<usize>,
    pub decoder_iterations: usize,
    pub sdp: Option<SdpSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub llrs: Option<IterationLlrs>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLlrs {
    pub l_a1: LlrFrame,
    pub l_e1: LlrFrame,
    pub l_a2: LlrFrame,
    pub l_e2: LlrFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub scheme: Scheme,
    pub iterations: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn last(&self) -> &IterationRecord {
        self.iterations.last().expect("a trace holds at least one iteration")
    }

    /// Hard decision in effect after iteration `t` (1-based); a frame that
    /// stopped early keeps its final decision.
    pub fn decision_at(&self, t: usize) -> &IterationRecord {
        let idx = t.clamp(1, self.iterations.len()) - 1;
        &self.iterations[idx]
    }

    /// Writes one JSON object per iteration.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for rec in &self.iterations {
            #[derive(Serialize)]
            struct Line<'a> {
                scheme: Scheme,
                #[serde(flatten)]
                record: &'a IterationRecord,
            }
            serde_json::to_writer(&mut out, &Line { scheme: self.scheme, record: rec })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Code-side state shared by every frame of a simulation.
#[derive(Debug, Clone)]
pub struct TurboReceiver {
    pcm: ParityCheckMatrix,
    decoder: SpaDecoder,
    interleaver: Interleaver,
    channel_fs: FsConstraintSet,
    config: TurboConfig,
}

impl TurboReceiver {
    pub fn new(pcm: ParityCheckMatrix, interleaver: Interleaver, config: TurboConfig) -> Result<Self> {
        config.validate()?;
        if interleaver.len() != pcm.n() {
            return Err(Error::Dimension("interleaver and code lengths differ".into()));
        }
        let channel_fs = FsConstraintSet::from_pcm(&pcm)?.permuted(interleaver.channel_positions());
        let decoder = SpaDecoder::new(&pcm);
        Ok(Self { pcm, decoder, interleaver, channel_fs, config })
    }

    pub fn config(&self) -> &TurboConfig {
        &self.config
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    pub fn pcm(&self) -> &ParityCheckMatrix {
        &self.pcm
    }

    /// Forbidden-set description with variables in channel order.
    pub fn channel_fs(&self) -> &FsConstraintSet {
        &self.channel_fs
    }

    pub fn with_config(&self, config: TurboConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, ..self.clone() })
    }

    /// One detection pass with prior `l_a1` (channel order). Under
    /// `SingleSdr`, `first_pass` holds the first-iteration output and the
    /// anchors come from it instead of a new relaxation.
    pub fn detect(
        &self,
        frame: &[RealSnapshot],
        sigma_n2: f64,
        l_a1: &[f64],
        first_pass: Option<&LlrFrame>,
    ) -> Result<crate::detector::DetectorOutput> {
        let cfg = &self.config;
        match (cfg.scheme, first_pass) {
            (Scheme::FullList, _) => full_list_detect(frame, sigma_n2, l_a1, cfg.clip),
            (Scheme::SingleSdr, Some(init)) => {
                let anchors = simplified_anchor(init, l_a1)?;
                let l_e1 = list_detect(frame, &anchors, cfg.radius, sigma_n2, l_a1, cfg.clip)?;
                Ok(crate::detector::DetectorOutput { l_e1, anchors: Some(anchors), sdp: None })
            }
            _ => joint_map_sdr_detect(frame, sigma_n2, l_a1, &self.channel_fs, cfg.radius, cfg.clip, &cfg.sdp),
        }
    }

    /// Runs the turbo loop on one received frame. `truth` (codeword order)
    /// is used only to count errors.
    pub fn run(&self, frame: &[RealSnapshot], sigma_n2: f64, truth: Option<&[u8]>) -> Result<IterationTrace> {
        let n = self.pcm.n();
        if frame.iter().map(|s| 2 * s.n_t()).sum::<usize>() != n {
            return Err(Error::Dimension("frame does not carry one codeword".into()));
        }
        if truth.is_some_and(|t| t.len() != n) {
            return Err(Error::Dimension("truth codeword length differs from n".into()));
        }
        let cfg = &self.config;
        let mut l_a1 = vec![0.0; n];
        let mut first_pass: Option<LlrFrame> = None;
        let mut iterations = Vec::with_capacity(cfg.max_turbo_iters);
        for t in 1..=cfg.max_turbo_iters {
            let det = self.detect(frame, sigma_n2, &l_a1, first_pass.as_ref())?;
            let l_a2 = self.interleaver.deinterleave(&det.l_e1)?;
            let dec = self.decoder.decode(&l_a2, cfg.decoder_iters);
            let bit_errors = truth.map(|tr| tr.iter().zip(&dec.hard_bits).filter(|(a, b)| a != b).count());
            let next_prior = self.interleaver.interleave(&dec.extrinsic)?;
            let llrs = cfg.record_llrs.then(|| IterationLlrs {
                l_a1: LlrFrame::new(l_a1.clone(), LlrOrder::Channel),
                l_e1: det.l_e1.clone(),
                l_a2: LlrFrame::new(l_a2.clone(), LlrOrder::Decoder),
                l_e2: LlrFrame::new(dec.extrinsic.clone(), LlrOrder::Decoder),
            });
            iterations.push(IterationRecord {
                iteration: t,
                hard_bits: dec.hard_bits,
                parity_ok: dec.parity_ok,
                bit_errors,
                decoder_iterations: dec.iterations,
                sdp: det.sdp,
                llrs,
            });
            if first_pass.is_none() && cfg.scheme == Scheme::SingleSdr {
                first_pass = Some(det.l_e1);
            }
            if dec.parity_ok {
                break;
            }
            l_a1 = next_prior;
        }
        Ok(IterationTrace { scheme: cfg.scheme, iterations })
    }
}

/// Free-function form of [`TurboReceiver::run`].
pub fn run_turbo(
    receiver: &TurboReceiver,
    frame: &[RealSnapshot],
    sigma_n2: f64,
    truth: Option<&[u8]>,
) -> Result<IterationTrace> {
    receiver.run(frame, sigma_n2, truth)
}
