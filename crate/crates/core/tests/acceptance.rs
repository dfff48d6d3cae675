//! One verdict line per acceptance criterion, written straight to stderr so it
//! survives output capture. Run with `cargo test --release --test acceptance`.

mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdr_turbo::detector::{
    assemble_joint_map_sdr, cost_matrix, hamming_ball_list, list_detect, maxlog_extrinsic_llr, round_solution,
};
use sdr_turbo::exit::{exit_curve, ExitPoint, ExitSetup, DEFAULT_BINS};
use sdr_turbo::ldpc::{build_pcm, derive_generator, enumerate_fs_constraints, SpaDecoder};
use sdr_turbo::mimo_model::{generate_frame, FrameLayout};
use sdr_turbo::sdp::{residuals, solve, BlockSdpProblem, SdpSolution, SolveStatus, SolverSettings};
use sdr_turbo::sim::{run_ber_sweep, Link, SimConfig};
use sdr_turbo::turbo::{IterationRecord, Scheme, TurboConfig};

use common::*;

const LLR_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-9;
const DOMINANCE_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-6;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const TIGHT_SIGMA2: f64 = 1e-4;
const TIGHT_MIN_FRAMES: usize = 99;
const SPA_ITERS: usize = 20;

/// Operating point of the BER criteria, chosen so that the first multi-SDR
/// iteration sits inside the required BER window.
const BER_SNR_DB: f64 = 4.0;
const BER_WINDOW: (f64, f64) = (1e-2, 1e-1);
const BER_FRAMES: u64 = 500;
/// One-sided 95% normal quantile.
const Z_95: f64 = 1.6449;
const SINGLE_VS_MULTI_FACTOR: f64 = 3.0;

const EXIT_GRID: [f64; 4] = [0.0, 0.25, 0.5, 0.75];
const EXIT_SNRS: [f64; 3] = [3.0, 5.0, 7.0];
const EXIT_TRIALS: usize = 40;
const EXIT_NOISE: f64 = 0.02;

fn verdict(n: usize, name: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "acceptance {n:>2} {status} {name}: {detail}");
}

fn tight() -> SolverSettings {
    SolverSettings { tol: RESIDUAL_TOL, max_iters: 20_000, ..SolverSettings::default() }
}

/// Converged solutions of criteria 3 and 4, kept for the residual audit.
static AUDIT: OnceLock<std::sync::Mutex<Vec<(BlockSdpProblem, SdpSolution)>>> = OnceLock::new();

fn audit() -> &'static std::sync::Mutex<Vec<(BlockSdpProblem, SdpSolution)>> {
    AUDIT.get_or_init(Default::default)
}

fn dominance_instances() -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut ok = 0;
    let instances = 50;
    for _ in 0..instances {
        let sigma_n2 = rng.gen_range(0.05..2.0);
        let b = random_bits(&mut rng, 8);
        let snap = snapshot_with_bits(&mut rng, 4, 4, sigma_n2, &b);
        let problem = assemble_joint_map_sdr(
            std::slice::from_ref(&snap),
            &[0.0; 8],
            sigma_n2,
            &sdr_turbo::ldpc::FsConstraintSet::empty(),
        )
        .unwrap();
        let sol = solve(&problem, &tight()).unwrap();
        let (ml, _) = exhaustive_ml(&snap);
        let excess = sol.objective - ml;
        worst_excess = worst_excess.max(excess);
        if excess <= DOMINANCE_TOL * (1.0 + ml) && sol.residuals.dual_bound <= ml + DOMINANCE_TOL {
            ok += 1;
        }
        if sol.status == SolveStatus::Converged {
            audit().lock().unwrap().push((problem, sol));
        }
    }
    verdict(
        3,
        "relaxation dominance",
        ok == instances,
        format!("{ok}/{instances} instances with SDR objective <= ML (tol {DOMINANCE_TOL:e}), worst excess {worst_excess:.3e}"),
    );
    (ok, instances)
}

fn tightness_frames() -> usize {
    let layout = FrameLayout::new(4, 4, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let mut recovered = 0;
    for f in 0..100u64 {
        let c: Vec<u8> = (0..layout.codeword_len()).map(|_| rng.gen_range(0..2)).collect();
        let frame = generate_frame(&layout, 4000 + f, TIGHT_SIGMA2, &c).unwrap();
        let problem = assemble_joint_map_sdr(
            &frame,
            &vec![0.0; c.len()],
            TIGHT_SIGMA2,
            &sdr_turbo::ldpc::FsConstraintSet::empty(),
        )
        .unwrap();
        let sol = solve(&problem, &tight()).unwrap();
        let sent: Vec<f64> = c.iter().map(|&x| 1.0 - 2.0 * f64::from(x)).collect();
        if round_solution(&sol) == sent {
            recovered += 1;
        }
        if sol.status == SolveStatus::Converged {
            audit().lock().unwrap().push((problem, sol));
        }
    }
    recovered
}

static CRIT_3_4: OnceLock<((usize, usize), usize)> = OnceLock::new();

fn criteria_3_and_4() -> &'static ((usize, usize), usize) {
    CRIT_3_4.get_or_init(|| {
        let dominance = dominance_instances();
        let recovered = tightness_frames();
        verdict(
            4,
            "high-SNR tightness",
            recovered >= TIGHT_MIN_FRAMES,
            format!("disjoint SDR rounding recovered {recovered}/100 frames of 32 snapshots at sigma_n^2 = {TIGHT_SIGMA2:e}"),
        );
        (dominance, recovered)
    })
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sigma_n2 = rng.gen_range(0.1..2.0);
        let b = random_bits(&mut rng, 8);
        let snap = snapshot_with_bits(&mut rng, 4, 4, sigma_n2, &b);
        let prior: Vec<f64> = (0..8).map(|_| rng.gen_range(-6.0..6.0)).collect();
        let anchor = random_bits(&mut rng, 8);
        let list = hamming_ball_list(0, &anchor, 8).unwrap();
        let got = maxlog_extrinsic_llr(&list, &snap, sigma_n2, &prior).unwrap();
        let oracle = full_list_oracle(&snap, sigma_n2, &prior);
        for (g, o) in got.iter().zip(&oracle) {
            worst = worst.max((g - o).abs());
        }
        // The frame-level path, unclipped, must agree as well.
        let frame_llrs = list_detect(std::slice::from_ref(&snap), &anchor, 8, sigma_n2, &prior, f64::INFINITY).unwrap();
        for (g, o) in frame_llrs.iter().zip(&oracle) {
            worst = worst.max((g - o).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst < LLR_TOL && elapsed < ORACLE_BUDGET;
    verdict(
        1,
        "oracle equivalence",
        pass,
        format!(
            "max |LLR - oracle| = {worst:.2e} over 100 snapshots (tol {LLR_TOL:e}), {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_trace_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let sent = random_bits(&mut rng, 8);
        let sigma_n2 = rng.gen_range(0.01..4.0);
        let snap = snapshot_with_bits(&mut rng, 4, 4, sigma_n2, &sent);
        let x = random_bits(&mut rng, 8);
        let lhs = cost_matrix(&snap).dot(&rank_one(&x, 4));
        worst = worst.max((lhs - distance(&snap, &x)).abs());
    }
    let pass = worst < TRACE_TOL;
    verdict(2, "trace identity", pass, format!("max |tr(CX) - |y - Hx|^2| = {worst:.2e} over 1000 draws"));
    assert!(pass);
}

#[test]
fn criterion_03_relaxation_dominance() {
    let ((ok, instances), _) = *criteria_3_and_4();
    assert_eq!(ok, instances);
}

#[test]
fn criterion_04_high_snr_tightness() {
    let (_, recovered) = *criteria_3_and_4();
    assert!(recovered >= TIGHT_MIN_FRAMES);
}

#[test]
fn criterion_05_fs_correctness() {
    let h = build_pcm(256, 128, 3, 1).unwrap();
    let rows = enumerate_fs_constraints(&h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut mismatches = 0;
    let mut row_counts = Vec::new();
    for _ in 0..10 {
        let m = rng.gen_range(0..h.m());
        let vars = h.check(m);
        let own: Vec<_> = rows.iter().filter(|r| r.check == m).collect();
        row_counts.push(own.len());
        let mut f = vec![0.0; h.n()];
        for mask in 0u32..(1 << vars.len()) {
            for (j, &v) in vars.iter().enumerate() {
                f[v] = f64::from((mask >> j) & 1);
            }
            let even = mask.count_ones() % 2 == 0;
            if own.iter().all(|r| r.is_satisfied(&f, 0.0)) != even {
                mismatches += 1;
            }
        }
    }
    let pass = mismatches == 0 && row_counts.iter().all(|&c| c == 32);
    verdict(
        5,
        "FS correctness",
        pass,
        format!("10 random degree-6 checks, 64 points each, {mismatches} mismatches, rows per check {row_counts:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_decoder_sanity() {
    let h = build_pcm(256, 128, 3, 1).unwrap();
    let g = derive_generator(&h);
    let dec = SpaDecoder::new(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let mut corrected = 0;
    let mut most_iters = 0;
    for _ in 0..100 {
        let msg: Vec<u8> = (0..g.k()).map(|_| rng.gen_range(0..2)).collect();
        let c = g.encode(&msg);
        let mut llr: Vec<f64> = c.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        let flip = rng.gen_range(0..c.len());
        llr[flip] = -llr[flip];
        let out = dec.decode(&llr, SPA_ITERS);
        most_iters = most_iters.max(out.iterations);
        if out.parity_ok && out.hard_bits == c {
            corrected += 1;
        }
    }
    let pass = corrected == 100;
    verdict(
        6,
        "decoder sanity",
        pass,
        format!("{corrected}/100 single flips corrected within {SPA_ITERS} iterations (most used {most_iters})"),
    );
    assert!(pass);
}

/// Per-frame information-bit errors at iterations 1..=3 plus the first
/// iteration record, for one scheme at the BER operating point.
struct SchemeRun {
    errors: Vec<[u64; 3]>,
    first: Vec<IterationRecord>,
    bits_per_frame: u64,
}

impl SchemeRun {
    fn ber(&self, t: usize) -> f64 {
        let e: u64 = self.errors.iter().map(|e| e[t - 1]).sum();
        e as f64 / (self.bits_per_frame * self.errors.len() as u64) as f64
    }

    fn bits(&self) -> f64 {
        (self.bits_per_frame * self.errors.len() as u64) as f64
    }
}

fn run_scheme(scheme: Scheme) -> SchemeRun {
    let link = Link::build(&SimConfig { scheme, ..SimConfig::default() }).unwrap();
    let mut errors = Vec::new();
    let mut first = Vec::new();
    for f in 0..BER_FRAMES {
        let (sample, trace) = link.simulate(f, BER_SNR_DB).unwrap();
        errors.push([1, 2, 3].map(|t| link.info_errors(&sample, &trace, t)));
        first.push(trace.iterations[0].clone());
    }
    SchemeRun { errors, first, bits_per_frame: link.generator.k() as u64 }
}

struct BerRuns {
    multi: SchemeRun,
    single: SchemeRun,
    full: SchemeRun,
}

static BER_RUNS: OnceLock<BerRuns> = OnceLock::new();

fn ber_runs() -> &'static BerRuns {
    BER_RUNS.get_or_init(|| BerRuns {
        multi: run_scheme(Scheme::MultiSdr),
        single: run_scheme(Scheme::SingleSdr),
        full: run_scheme(Scheme::FullList),
    })
}

/// Pooled two-proportion z statistic for `p_a > p_b` with `n` trials each.
fn two_proportion_z(p_a: f64, p_b: f64, n: f64) -> f64 {
    let pooled = (p_a + p_b) / 2.0;
    let se = (pooled * (1.0 - pooled) * 2.0 / n).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (p_a - p_b) / se
    }
}

/// Paired statistic for `mean(a - b) > 0` over frames, which respects the
/// dependence of bit errors inside a frame and the shared channels.
fn paired_z(a: &[u64], b: &[u64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x as f64 - y as f64).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        0.0
    } else {
        mean / (var / n).sqrt()
    }
}

fn column(run: &SchemeRun, t: usize) -> Vec<u64> {
    run.errors.iter().map(|e| e[t - 1]).collect()
}

#[test]
fn criterion_07_turbo_gain() {
    let runs = ber_runs();
    let m = &runs.multi;
    let (b1, b3) = (m.ber(1), m.ber(3));
    let in_window = (BER_WINDOW.0..=BER_WINDOW.1).contains(&b1);
    let z = two_proportion_z(b1, b3, m.bits());
    let paired = paired_z(&column(m, 1), &column(m, 3));
    let pass = in_window && z > Z_95 && m.errors.len() >= 200;
    verdict(
        7,
        "turbo gain",
        pass,
        format!(
            "multi-SDR at {BER_SNR_DB} dB over {} frames: BER it1 {b1:.4e} (window {:?}), it3 {b3:.4e}, z = {z:.2} (need > {Z_95}), frame-paired z = {paired:.2}",
            m.errors.len(),
            BER_WINDOW
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_first_iteration_ordering() {
    let runs = ber_runs();
    let (m, f) = (&runs.multi, &runs.full);
    let (bm, bf) = (m.ber(1), f.ber(1));
    let z = two_proportion_z(bf, bm, m.bits());
    let paired = paired_z(&column(f, 1), &column(m, 1));
    // Frames share channels and noise across schemes, so the paired statistic
    // is the one that decides; the pooled bit-level z is printed alongside.
    let separated = paired > Z_95;
    let detail = format!(
        "iteration-1 BER joint MAP-SDR {bm:.4e} vs full list {bf:.4e} over {} frames at {BER_SNR_DB} dB: frame-paired z = {paired:.2}, bit-level z = {z:.2} (need > {Z_95}){}",
        m.errors.len(),
        if separated { "" } else { "; not statistically separated" }
    );
    verdict(8, "first-iteration ordering", separated, detail);
    // Reported rather than asserted: an inconclusive comparison is a result.
}

#[test]
fn criterion_09_single_vs_multi() {
    let runs = ber_runs();
    let (m, s) = (&runs.multi, &runs.single);
    let (bm, bs) = (m.ber(3), s.ber(3));
    let identical = m.first == s.first && column(m, 1) == column(s, 1);
    let pass = bs <= SINGLE_VS_MULTI_FACTOR * bm && identical && m.errors.len() >= 500;
    verdict(
        9,
        "single vs multi SDR",
        pass,
        format!(
            "iteration-3 BER single {bs:.4e} vs multi {bm:.4e} (ratio {:.2}, limit {SINGLE_VS_MULTI_FACTOR}), first-iteration records identical on all {} frames: {identical}",
            bs / bm,
            m.errors.len()
        ),
    );
    assert!(pass);
}

fn exit_points(scheme: Scheme, snr: f64, grid: &[f64]) -> Vec<ExitPoint> {
    let cfg = SimConfig::default();
    let turbo = TurboConfig { scheme, ..cfg.turbo_config() };
    let link = Link::build(&cfg).unwrap().with_turbo(turbo).unwrap();
    let setup = ExitSetup {
        receiver: &link.receiver,
        generator: &link.generator,
        layout: link.layout,
        seed: link.seed(),
        bins: DEFAULT_BINS,
        parallel: false,
    };
    exit_curve(&setup, snr, grid, EXIT_TRIALS).unwrap()
}

#[test]
fn criterion_10_exit_trends() {
    let curves: Vec<Vec<f64>> = EXIT_SNRS
        .iter()
        .map(|&s| exit_points(Scheme::MultiSdr, s, &EXIT_GRID).iter().map(|p| p.i_e).collect())
        .collect();
    let mut violations = Vec::new();
    for (si, curve) in curves.iter().enumerate() {
        for a in 1..EXIT_GRID.len() {
            if curve[a] < curve[a - 1] - EXIT_NOISE {
                violations.push(format!("I_A {} at {} dB", EXIT_GRID[a], EXIT_SNRS[si]));
            }
        }
    }
    for a in 0..EXIT_GRID.len() {
        for si in 1..EXIT_SNRS.len() {
            if curves[si][a] < curves[si - 1][a] - EXIT_NOISE {
                violations.push(format!("SNR {} dB at I_A {}", EXIT_SNRS[si], EXIT_GRID[a]));
            }
        }
    }
    let joint0 = curves[1][0];
    let full0 = exit_points(Scheme::FullList, 5.0, &[0.0])[0].i_e;
    let pass = violations.is_empty() && joint0 > full0;
    let table: Vec<String> = curves
        .iter()
        .zip(EXIT_SNRS)
        .map(|(c, s)| format!("{s} dB [{}]", c.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ")))
        .collect();
    verdict(
        10,
        "EXIT trends",
        pass,
        format!(
            "joint MAP-SDR I_E {}; monotonicity violations beyond {EXIT_NOISE}: {violations:?}; I_E at I_A = 0, 5 dB: joint {joint0:.3} vs full list {full0:.3}",
            table.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_solver_contract() {
    criteria_3_and_4();
    let solved = audit().lock().unwrap();
    let mut worst: f64 = 0.0;
    for (problem, sol) in solved.iter() {
        worst = worst.max(residuals(problem, sol).max());
    }

    // Determinism: block projections on the pool, and whole frames on the pool.
    let (problem, sol) = &solved[solved.len() - 1];
    let again = solve(problem, &SolverSettings { parallel: true, ..tight() }).unwrap();
    let solver_same = &again == sol;
    let cfg = SimConfig {
        snr_grid_db: vec![3.0],
        max_frames: 8,
        min_errors: 1 << 40,
        batch_frames: 4,
        turbo_iters: 2,
        ..SimConfig::default()
    };
    let serial = run_ber_sweep(&cfg).unwrap();
    let pooled = run_ber_sweep(&SimConfig { parallel: true, ..cfg.clone() }).unwrap();
    let sweep_same =
        serial.iter().zip(&pooled).all(|(a, b)| (a.bit_errors, a.frame_errors) == (b.bit_errors, b.frame_errors))
            && serial.len() == pooled.len();

    let pass = worst <= RESIDUAL_TOL && solver_same && sweep_same && !solved.is_empty();
    verdict(
        11,
        "solver contract",
        pass,
        format!(
            "{} converged solves from criteria 3-4, worst recomputed residual {worst:.2e} (tol {RESIDUAL_TOL:e}); parallel solve identical: {solver_same}; parallel sweep identical: {sweep_same}",
            solved.len()
        ),
    );
    assert!(pass);
}
