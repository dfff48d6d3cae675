// Max-log extrinsic LLRs from Hamming-ball lists of growing radius.

use sdr_turbo::detector::{full_list_detect, list_detect};
use sdr_turbo::mimo_model::{generate_frame, snr_db_to_sigma2, FrameLayout};

fn main() -> sdr_turbo::Result<()> {
    let layout = FrameLayout::new(4, 4, 1)?;
    let sigma_n2 = snr_db_to_sigma2(4.0, 4);
    let bits = [1, 1, 0, 0, 1, 0, 1, 0];
    let frame = generate_frame(&layout, 5, sigma_n2, &bits)?;
    let prior = [0.5, -1.0, 0.0, 2.0, 0.0, 0.0, -0.3, 1.2];

    let full = full_list_detect(&frame, sigma_n2, &prior, 8.0)?;
    println!("full list:  {:6.2?}", full.l_e1.values);
    // Anchor one bit off the transmitted vector.
    let anchor = [-1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, -1.0];
    for radius in [1, 2, 4, 8] {
        let l = list_detect(&frame, &anchor, radius, sigma_n2, &prior, 8.0)?;
        let gap = l.iter().zip(full.l_e1.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("radius {radius}: {:6.2?}  max gap to full list {gap:.2e}", l.values);
    }
    Ok(())
}
