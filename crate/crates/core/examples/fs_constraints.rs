// Forbidden-set inequalities of one check and the parity polytope projection.

use sdr_turbo::ldpc::{enumerate_fs_constraints, FsConstraintSet, ParityCheckMatrix};
use sdr_turbo::sdp::parity_polytope;

fn main() -> sdr_turbo::Result<()> {
    let h = ParityCheckMatrix::from_checks(4, vec![vec![0, 1, 2, 3]])?;
    let rows = enumerate_fs_constraints(&h)?;
    println!("{} rows for a degree-4 check", rows.len());

    for f in [[0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.5, 0.5, 0.5, 0.5], [1.0, 1.0, 1.0, 0.4]] {
        let ok = rows.iter().all(|r| r.is_satisfied(&f, 0.0));
        println!("f = {f:?}: inside = {ok}");
    }

    let set = FsConstraintSet::from_pcm(&h)?;
    let v = [0.9, 0.8, 0.95, 0.1];
    let mut p = [0.0; 4];
    parity_polytope::project(&v, &mut p);
    println!("violation of {v:?}: {:.3}", set.max_violation(&v));
    println!("projection onto the polytope: {p:.4?} (violation {:.1e})", set.max_violation(&p));
    Ok(())
}
