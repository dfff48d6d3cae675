// Build the regular (256,128) code, encode, corrupt, decode, and round-trip alist.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdr_turbo::ldpc::{build_pcm, derive_generator, from_alist, to_alist, SpaDecoder};

fn main() -> sdr_turbo::Result<()> {
    let h = build_pcm(256, 128, 3, 1)?;
    let g = derive_generator(&h);
    println!("n = {}, m = {}, rank = {}, k = {}, four-cycles: {}", h.n(), h.m(), g.rank(), g.k(), h.has_four_cycle());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let msg: Vec<u8> = (0..g.k()).map(|_| rng.gen_range(0..2)).collect();
    let c = g.encode(&msg);
    assert!(h.syndrome_check(&c));

    // Channel LLRs with five wrong signs.
    let mut llr: Vec<f64> = c.iter().map(|&b| if b == 0 { 2.5 } else { -2.5 }).collect();
    for _ in 0..5 {
        let i = rng.gen_range(0..llr.len());
        llr[i] *= -0.8;
    }
    let out = SpaDecoder::new(&h).decode(&llr, 20);
    println!(
        "SPA: parity {} after {} iterations, message recovered: {}",
        out.parity_ok,
        out.iterations,
        g.extract_message(&out.hard_bits) == msg
    );

    let text = to_alist(&h);
    println!("alist header: {}", text.lines().take(2).collect::<Vec<_>>().join(" | "));
    assert_eq!(from_alist(&text)?, h);
    Ok(())
}
