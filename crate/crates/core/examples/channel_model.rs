// Real-valued view of a QPSK MIMO frame and the SNR convention.

use sdr_turbo::mimo_model::{generate_frame, sigma2_to_snr_db, snr_db_to_sigma2, FrameLayout};

fn main() -> sdr_turbo::Result<()> {
    let layout = FrameLayout::new(4, 4, 2)?;
    let sigma_n2 = snr_db_to_sigma2(6.0, layout.n_t);
    println!("6 dB with N_t = 4 -> sigma_n^2 = {sigma_n2:.4} (back: {:.2} dB)", sigma2_to_snr_db(sigma_n2, 4));

    let bits: Vec<u8> = (0..layout.codeword_len()).map(|i| (i % 3 == 0) as u8).collect();
    let frame = generate_frame(&layout, 7, sigma_n2, &bits)?;
    for snap in &frame {
        println!(
            "snapshot {}: H is {}x{}, complex structure: {}",
            snap.index,
            snap.h.nrows(),
            snap.h.ncols(),
            snap.has_complex_structure(1e-12)
        );
        println!("  y = {:.3?}", snap.y.as_slice());
    }
    for j in 0..layout.bits_per_snapshot() {
        println!("bit {j} -> real row {}", layout.symbol_row(j));
    }
    Ok(())
}
