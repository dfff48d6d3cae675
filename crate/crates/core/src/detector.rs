//! Soft MIMO detection: the joint MAP semidefinite relaxation, Hamming-ball
//! candidate lists around its rounded solution, and max-log extrinsic LLRs.
//!
//! Polarized bits are `b = 1 - 2c` stored as `+-1.0`; per-frame vectors are in
//! channel order, `2 N_t` consecutive entries per snapshot.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ldpc::{FsConstraintSet, LlrFrame, LlrOrder};
use crate::mimo_model::{FrameLayout, RealSnapshot};
use crate::sdp::{self, BlockSdpProblem, Coupling, SdpSolution, SolveStatus, SolverSettings};
use crate::turbo::clip_llr;

/// Largest full list accepted by [`full_list_detect`].
pub const FULL_LIST_GUARD: usize = 4096;

/// `[[H^T H, -H^T y], [-y^T H, |y|^2]]`, so that `tr(C X) = |y - H x|^2` at
/// `X = [x; 1][x; 1]^T`.
pub fn cost_matrix(snapshot: &RealSnapshot) -> DMatrix<f64> {
    let h = &snapshot.h;
    let y = &snapshot.y;
    let d = h.ncols();
    let hty = h.tr_mul(y);
    let mut c = DMatrix::zeros(d + 1, d + 1);
    c.view_mut((0, 0), (d, d)).copy_from(&h.tr_mul(h));
    for i in 0..d {
        c[(i, d)] = -hty[i];
        c[(d, i)] = -hty[i];
    }
    c[(d, d)] = y.norm_squared();
    c
}

/// Layout implied by a frame's snapshots.
pub fn frame_layout(frame: &[RealSnapshot]) -> Result<FrameLayout> {
    let first = frame.first().ok_or_else(|| Error::Dimension("empty frame".into()))?;
    if frame.iter().any(|s| s.h.shape() != first.h.shape() || s.y.len() != first.h.nrows()) {
        return Err(Error::Dimension("snapshots disagree on dimensions".into()));
    }
    FrameLayout::new(first.n_t(), first.n_r(), frame.len())
}

/// Builds the joint MAP relaxation: one lifted block per snapshot, the
/// coupling of each block's last column to the bit variables, the
/// forbidden-set rows of `fs` (channel-order indices) and the prior term
/// `2 sigma_n^2 L_A1^T f`.
pub fn assemble_joint_map_sdr(
    frame: &[RealSnapshot],
    l_a1: &[f64],
    sigma_n2: f64,
    fs: &FsConstraintSet,
) -> Result<BlockSdpProblem> {
    let layout = frame_layout(frame)?;
    if l_a1.len() != layout.codeword_len() {
        return Err(Error::Dimension(format!(
            "prior has {} entries, frame carries {} bits",
            l_a1.len(),
            layout.codeword_len()
        )));
    }
    let bps = layout.bits_per_snapshot();
    let costs = frame.iter().map(cost_matrix).collect();
    let couplings = (0..layout.k)
        .flat_map(|k| (0..bps).map(move |j| Coupling { block: k, row: layout.symbol_row(j), var: k * bps + j }))
        .collect();
    let linear = l_a1.iter().map(|l| 2.0 * sigma_n2 * l).collect();
    BlockSdpProblem::new(costs, linear, couplings, fs.clone())
}

/// Polarized anchor per channel-order bit: `+1` iff `f_n <= 1/2`.
pub fn round_solution(solution: &SdpSolution) -> Vec<f64> {
    solution.f.iter().map(|&f| if f <= 0.5 { 1.0 } else { -1.0 }).collect()
}

/// `sign(L_E1_init + L_A1)` with `sign(0) = +1`.
pub fn simplified_anchor(l_e1_init: &[f64], l_a1: &[f64]) -> Result<Vec<f64>> {
    if l_e1_init.len() != l_a1.len() {
        return Err(Error::Dimension("LLR frames differ in length".into()));
    }
    Ok(l_e1_init.iter().zip(l_a1).map(|(e, a)| if e + a >= 0.0 { 1.0 } else { -1.0 }).collect())
}

/// All polarized vectors within Hamming distance `radius` of an anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub snapshot: usize,
    pub anchor: Vec<f64>,
    pub radius: usize,
    pub members: Vec<Vec<f64>>,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members whose bit `i` equals `sign`.
    pub fn partition(&self, i: usize, sign: f64) -> impl Iterator<Item = &Vec<f64>> {
        self.members.iter().filter(move |b| b[i] == sign)
    }
}

/// Enumerates the ball in order of distance, anchor first.
pub fn hamming_ball_list(snapshot: usize, anchor: &[f64], radius: usize) -> Result<CandidateList> {
    let len = anchor.len();
    if radius > len {
        return Err(Error::InvalidParameter(format!("radius {radius} exceeds vector length {len}")));
    }
    if len >= 32 {
        return Err(Error::InvalidParameter("candidate vectors longer than 31 bits".into()));
    }
    let mut masks: Vec<u32> = (0u32..(1 << len)).filter(|m| m.count_ones() as usize <= radius).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let members = masks
        .into_iter()
        .map(|mask| anchor.iter().enumerate().map(|(j, &b)| if (mask >> j) & 1 == 1 { -b } else { b }).collect())
        .collect();
    Ok(CandidateList { snapshot, anchor: anchor.to_vec(), radius, members })
}

/// Max-log extrinsic LLRs of one snapshot's bits over a candidate list:
/// for each bit, the best metric with the bit at `+1` minus the best with it
/// at `-1`, where a candidate's metric is `-|y - H s|^2 / (2 sigma_n^2)` plus
/// half the prior correlation over the other bits.
pub fn maxlog_extrinsic_llr(
    list: &CandidateList,
    snapshot: &RealSnapshot,
    sigma_n2: f64,
    prior: &[f64],
) -> Result<Vec<f64>> {
    let layout = FrameLayout::new(snapshot.n_t(), snapshot.n_r(), 1)?;
    let bps = layout.bits_per_snapshot();
    if prior.len() != bps || list.anchor.len() != bps {
        return Err(Error::Dimension(format!("expected {bps} bits per snapshot")));
    }
    let scored: Vec<(f64, &Vec<f64>)> = list
        .members
        .iter()
        .map(|b| {
            let residual = &snapshot.y - &snapshot.h * layout.modulate(b);
            let prior_corr: f64 = prior.iter().zip(b).map(|(l, x)| l * x).sum::<f64>() / 2.0;
            (-residual.norm_squared() / (2.0 * sigma_n2) + prior_corr, b)
        })
        .collect();
    (0..bps)
        .map(|i| {
            let mut best = [f64::NEG_INFINITY; 2];
            for (metric, b) in &scored {
                let excl = metric - prior[i] * b[i] / 2.0;
                let slot = usize::from(b[i] < 0.0);
                best[slot] = best[slot].max(excl);
            }
            if best.contains(&f64::NEG_INFINITY) {
                return Err(Error::EmptyPartition { bit: i });
            }
            Ok(best[0] - best[1])
        })
        .collect()
}

/// Extrinsic LLRs of a whole frame from Hamming balls around `anchors`,
/// clipped to `+-clip`.
pub fn list_detect(
    frame: &[RealSnapshot],
    anchors: &[f64],
    radius: usize,
    sigma_n2: f64,
    l_a1: &[f64],
    clip: f64,
) -> Result<LlrFrame> {
    let layout = frame_layout(frame)?;
    let bps = layout.bits_per_snapshot();
    if anchors.len() != layout.codeword_len() || l_a1.len() != layout.codeword_len() {
        return Err(Error::Dimension("anchors and priors must cover the frame".into()));
    }
    let mut out = Vec::with_capacity(layout.codeword_len());
    for (k, snap) in frame.iter().enumerate() {
        let list = hamming_ball_list(k, &anchors[k * bps..(k + 1) * bps], radius)?;
        out.extend(maxlog_extrinsic_llr(&list, snap, sigma_n2, &l_a1[k * bps..(k + 1) * bps])?);
    }
    Ok(LlrFrame::new(clip_llr(&out, clip), LlrOrder::Channel))
}

/// Summary of the relaxation solved for a detection pass.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SdpSummary {
    pub status: SolveStatus,
    pub iterations: usize,
    pub residual: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutput {
    /// Clipped extrinsic LLRs in channel order.
    pub l_e1: LlrFrame,
    /// Polarized anchors used for the candidate lists, if any.
    pub anchors: Option<Vec<f64>>,
    pub sdp: Option<SdpSummary>,
}

/// Exhaustive max-log detection over all `4^N_t` candidates per snapshot.
pub fn full_list_detect(frame: &[RealSnapshot], sigma_n2: f64, l_a1: &[f64], clip: f64) -> Result<DetectorOutput> {
    let layout = frame_layout(frame)?;
    if 1usize.checked_shl(2 * layout.n_t as u32).is_none_or(|size| size > FULL_LIST_GUARD) {
        return Err(Error::FullListGuard { n_t: layout.n_t });
    }
    let anchors = vec![1.0; layout.codeword_len()];
    let l_e1 = list_detect(frame, &anchors, layout.bits_per_snapshot(), sigma_n2, l_a1, clip)?;
    Ok(DetectorOutput { l_e1, anchors: None, sdp: None })
}

/// One pass of the joint MAP-SDR detector: solve the relaxation with the
/// current priors, round it, and evaluate list LLRs around the rounding.
/// A solve that stops at its iteration limit is still rounded.
pub fn joint_map_sdr_detect(
    frame: &[RealSnapshot],
    sigma_n2: f64,
    l_a1: &[f64],
    fs: &FsConstraintSet,
    radius: usize,
    clip: f64,
    settings: &SolverSettings,
) -> Result<DetectorOutput> {
    let problem = assemble_joint_map_sdr(frame, l_a1, sigma_n2, fs)?;
    let solution = sdp::solve(&problem, settings)?;
    let anchors = round_solution(&solution);
    let l_e1 = list_detect(frame, &anchors, radius, sigma_n2, l_a1, clip)?;
    let summary = SdpSummary {
        status: solution.status,
        iterations: solution.iterations,
        residual: solution.residuals.max(),
        objective: solution.objective,
    };
    Ok(DetectorOutput { l_e1, anchors: Some(anchors), sdp: Some(summary) })
}

/// Polarized vector of a lifted block's last column, `x_i = X(i, last)`.
pub fn lifted_vector(x: &DMatrix<f64>) -> DVector<f64> {
    let last = x.nrows() - 1;
    DVector::from_fn(last, |i, _| x[(i, last)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mimo_model::generate_frame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_snapshot(rng: &mut ChaCha8Rng, n_t: usize) -> RealSnapshot {
        let layout = FrameLayout::new(n_t, n_t, 1).unwrap();
        let bits: Vec<u8> = (0..2 * n_t).map(|_| rng.gen_range(0..2)).collect();
        generate_frame(&layout, rng.gen(), 0.5, &bits).unwrap().remove(0)
    }

    #[test]
    fn trace_identity_and_sign_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let snap = random_snapshot(&mut rng, 4);
            let c = cost_matrix(&snap);
            assert_eq!(c, c.transpose());
            let x = DVector::from_fn(8, |_, _| if rng.gen() { 1.0 } else { -1.0 });
            let lifted = x.clone().insert_row(8, 1.0);
            let xx = &lifted * lifted.transpose();
            let direct = (&snap.y - &snap.h * &x).norm_squared();
            assert!((c.dot(&xx) - direct).abs() < 1e-9);
            let neg = -lifted;
            assert!((c.dot(&(&neg * neg.transpose())) - c.dot(&xx)).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_trace_is_zero() {
        let layout = FrameLayout::new(2, 2, 1).unwrap();
        let frame = generate_frame(&layout, 3, 1e-30, &[0, 1, 1, 0]).unwrap();
        let x = layout.modulate(&[1.0, -1.0, -1.0, 1.0]).insert_row(4, 1.0);
        assert!(cost_matrix(&frame[0]).dot(&(&x * x.transpose())).abs() < 1e-12);
    }

    #[test]
    fn ball_sizes() {
        let anchor = vec![1.0; 8];
        assert_eq!(hamming_ball_list(0, &anchor, 2).unwrap().len(), 37);
        assert_eq!(hamming_ball_list(0, &anchor, 8).unwrap().len(), 256);
        let single = hamming_ball_list(0, &anchor, 0).unwrap();
        assert_eq!(single.members, vec![anchor.clone()]);
        assert_eq!(hamming_ball_list(0, &anchor, 3).unwrap().members[0], anchor);
        assert!(hamming_ball_list(0, &anchor, 9).is_err());
    }

    #[test]
    fn scalar_llr() {
        // One real dimension: H = [[1, 0], [0, 1]] with the imaginary part
        // carrying no information about bit 0.
        let snap = RealSnapshot {
            y: DVector::from_vec(vec![0.9, 0.0]),
            h: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            index: 0,
        };
        let list = hamming_ball_list(0, &[1.0, 1.0], 2).unwrap();
        let llr = maxlog_extrinsic_llr(&list, &snap, 0.5, &[0.0, 0.0]).unwrap();
        assert!((llr[0] - 3.6).abs() < 1e-12);
        assert!(llr[1].abs() < 1e-12);
    }

    #[test]
    fn radius_zero_is_rejected_at_llr_stage() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let snap = random_snapshot(&mut rng, 2);
        let list = hamming_ball_list(0, &[1.0; 4], 0).unwrap();
        assert!(matches!(maxlog_extrinsic_llr(&list, &snap, 0.5, &[0.0; 4]), Err(Error::EmptyPartition { bit: 0 })));
    }

    #[test]
    fn rounding_and_simplified_anchor() {
        let sol_f = [0.0, 1.0, 0.5, 0.49, 0.51];
        let b: Vec<f64> = sol_f.iter().map(|&f| if f <= 0.5 { 1.0 } else { -1.0 }).collect();
        assert_eq!(b, vec![1.0, -1.0, 1.0, 1.0, -1.0]);
        let init = [2.0, -1.0, 0.5, 0.0];
        assert_eq!(simplified_anchor(&init, &[0.0; 4]).unwrap(), vec![1.0, -1.0, 1.0, 1.0]);
        let doubled: Vec<f64> = init.iter().map(|x| -2.0 * x).collect();
        assert_eq!(simplified_anchor(&init, &doubled).unwrap(), vec![-1.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn full_list_guard() {
        let layout = FrameLayout::new(7, 7, 1).unwrap();
        let frame = generate_frame(&layout, 1, 0.1, &[0; 14]).unwrap();
        assert!(matches!(full_list_detect(&frame, 0.1, &[0.0; 14], 8.0), Err(Error::FullListGuard { n_t: 7 })));
    }
}
