// A short BER/FER sweep from a TOML config, written as CSV.

use sdr_turbo::sim::{run_ber_sweep, write_ber_csv, SimConfig};

const CONFIG: &str = r#"
scheme = "full-list"
snr_grid_db = [2.0, 3.0, 4.0]
max_frames = 16
min_errors = 100
batch_frames = 8
seed = 7
"#;

fn main() -> sdr_turbo::Result<()> {
    let cfg = SimConfig::from_toml_str(CONFIG)?;
    println!("config hash {}", cfg.hash());
    let records = run_ber_sweep(&cfg)?;
    for r in records.iter().filter(|r| r.iteration == cfg.turbo_iters) {
        println!("{:>4} dB: BER {:.3e} over {} frames", r.snr_db, r.ber, r.frames);
    }
    write_ber_csv(std::io::stdout().lock(), &cfg, &records)?;
    Ok(())
}
