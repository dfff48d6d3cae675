// One joint MAP-SDR pass over a coded frame: the relaxation couples all 32
// snapshots through the code's forbidden-set rows.

use sdr_turbo::detector::{assemble_joint_map_sdr, round_solution};
use sdr_turbo::sdp::{load_problem, residuals, save_problem, solve, SolverSettings};
use sdr_turbo::sim::{Link, SimConfig};

fn main() -> sdr_turbo::Result<()> {
    let link = Link::build(&SimConfig::default())?;
    let sample = link.frame(0, 3.0)?;
    let fs = link.receiver.channel_fs();
    let prior = vec![0.0; link.layout.codeword_len()];

    let problem = assemble_joint_map_sdr(&sample.snapshots, &prior, sample.sigma_n2, fs)?;
    println!(
        "{} blocks of {}x{}, {} FS rows, {} box rows, {} couplings",
        problem.n_blocks(),
        link.layout.block_dim(),
        link.layout.block_dim(),
        problem.fs_row_count(),
        problem.box_row_count(),
        problem.coupling_row_count()
    );

    let settings = SolverSettings { tol: 1e-4, ..SolverSettings::default() };
    let sol = solve(&problem, &settings)?;
    let report = residuals(&problem, &sol);
    println!(
        "{:?} in {} iterations; primal {:.1e}, dual {:.1e}, gap {:.1e}",
        sol.status, sol.iterations, report.primal, report.dual, report.gap
    );

    let channel = link.receiver.interleaver().interleave(&sample.codeword)?;
    let wrong = round_solution(&sol).iter().zip(&channel).filter(|(b, &c)| (**b < 0.0) != (c == 1)).count();
    println!("rounded anchors: {wrong} of {} bits differ from the transmitted ones", channel.len());

    // Problems can be written out and solved again elsewhere.
    let path = std::env::temp_dir().join("joint_map_sdr_problem.json");
    save_problem(&problem, &path)?;
    let again = solve(&load_problem(&path)?, &settings)?;
    println!("reloaded problem gives the same objective: {}", again.objective == sol.objective);
    std::fs::remove_file(path)?;
    Ok(())
}
