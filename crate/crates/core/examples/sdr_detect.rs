// Uncoded SDR detection of 4x4 snapshots against exhaustive ML.

use sdr_turbo::detector::{assemble_joint_map_sdr, round_solution};
use sdr_turbo::ldpc::FsConstraintSet;
use sdr_turbo::mimo_model::{generate_frame, polarize, snr_db_to_sigma2, FrameLayout, RealSnapshot};
use sdr_turbo::sdp::{residuals, solve, SolverSettings};

fn exhaustive_ml(layout: &FrameLayout, snap: &RealSnapshot) -> (f64, Vec<f64>) {
    (0u32..256)
        .map(|m| {
            let b: Vec<f64> = (0..8).map(|j| polarize(((m >> j) & 1) as u8)).collect();
            ((&snap.y - &snap.h * layout.modulate(&b)).norm_squared(), b)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
}

fn main() -> sdr_turbo::Result<()> {
    let layout = FrameLayout::new(4, 4, 1)?;
    let sigma_n2 = snr_db_to_sigma2(8.0, 4);
    let bits = [0, 1, 1, 0, 1, 0, 0, 0];
    let (mut tight, mut hits) = (0, 0);
    for seed in 0..20 {
        let frame = generate_frame(&layout, seed, sigma_n2, &bits)?;
        let problem = assemble_joint_map_sdr(&frame, &[0.0; 8], sigma_n2, &FsConstraintSet::empty())?;
        let sol = solve(&problem, &SolverSettings::default())?;
        let report = residuals(&problem, &sol);
        let (ml, ml_bits) = exhaustive_ml(&layout, &frame[0]);
        let rounded_is_ml = round_solution(&sol) == ml_bits;
        hits += rounded_is_ml as usize;
        tight += (ml - sol.objective < 1e-4 * ml) as usize;
        println!(
            "seed {seed:>2}: {:?} in {:>4} iterations, SDR {:8.4} >= bound {:8.4}, ML {:8.4}, eigen ratio {:8.1e}, rounded = ML: {rounded_is_ml}",
            sol.status,
            sol.iterations,
            sol.objective,
            report.dual_bound,
            ml,
            sol.eigen_ratio(0)
        );
    }
    println!("relaxation tight on {tight}/20 snapshots, rounding found ML on {hits}/20");
    Ok(())
}
