// Per-iteration behaviour of the three receiver schedules on one frame.

use sdr_turbo::sim::{Link, SimConfig};
use sdr_turbo::turbo::Scheme;

fn main() -> sdr_turbo::Result<()> {
    for scheme in [Scheme::MultiSdr, Scheme::SingleSdr, Scheme::FullList] {
        let link = Link::build(&SimConfig { scheme, ..SimConfig::default() })?;
        let (sample, trace) = link.simulate(3, 4.0)?;
        println!("{}:", scheme.as_str());
        for rec in &trace.iterations {
            let sdp = rec.sdp.map(|s| format!(", relaxation {} iterations", s.iterations)).unwrap_or_default();
            println!(
                "  iteration {}: parity {}, coded errors {:?}, info errors {}{sdp}",
                rec.iteration,
                rec.parity_ok,
                rec.bit_errors,
                link.info_errors(&sample, &trace, rec.iteration)
            );
        }
    }
    Ok(())
}
