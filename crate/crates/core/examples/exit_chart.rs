// Detector transfer curves of joint MAP-SDR and the full list at one SNR.

use sdr_turbo::exit::{exit_curve, j_function, j_inverse, write_exit_csv, ExitSetup, DEFAULT_BINS};
use sdr_turbo::sim::{Link, SimConfig};
use sdr_turbo::turbo::Scheme;

fn main() -> sdr_turbo::Result<()> {
    println!("J(1) = {:.4}, J^-1(0.5) = {:.4}", j_function(1.0), j_inverse(0.5));

    let grid = [0.0, 0.3, 0.6, 0.9];
    let mut points = Vec::new();
    for scheme in [Scheme::MultiSdr, Scheme::FullList] {
        let link = Link::build(&SimConfig { scheme, ..SimConfig::default() })?;
        let setup = ExitSetup {
            receiver: &link.receiver,
            generator: &link.generator,
            layout: link.layout,
            seed: 1,
            bins: DEFAULT_BINS,
            parallel: false,
        };
        points.extend(exit_curve(&setup, 5.0, &grid, 4)?);
    }
    write_exit_csv(std::io::stdout().lock(), &points, "5 dB, 4 frames per point")?;
    Ok(())
}
