use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdr_turbo::ldpc::*;

fn default_code() -> (ParityCheckMatrix, GeneratorMatrix) {
    let h = build_pcm(256, 128, 3, 1).unwrap();
    let g = derive_generator(&h);
    (h, g)
}

fn random_message(rng: &mut ChaCha8Rng, k: usize) -> Vec<u8> {
    (0..k).map(|_| rng.gen_range(0..2)).collect()
}

#[test]
fn default_code_profile() {
    let (h, g) = default_code();
    assert_eq!((h.n(), h.m()), (256, 128));
    assert!(h.column_weights().iter().all(|&w| w == 3));
    assert!(h.row_weights().iter().all(|&w| w == 6));
    assert!(!h.has_four_cycle());
    assert_eq!(g.k(), 256 - g.rank());
    assert!(g.k() >= 128);
}

#[test]
fn random_messages_encode_to_codewords() {
    let (h, g) = default_code();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let msg = random_message(&mut rng, g.k());
        let c = g.encode(&msg);
        assert!(h.syndrome_check(&c));
        assert_eq!(g.extract_message(&c), msg);
    }
    assert!(g.encode(&vec![0; g.k()]).iter().all(|&b| b == 0));
}

#[test]
fn fs_rows_agree_with_parity_on_every_integral_point() {
    // Exhaustive over each degree-6 check of the default code, 64 points each.
    let (h, _) = default_code();
    let rows = enumerate_fs_constraints(&h).unwrap();
    assert_eq!(rows.len(), 4096);
    for m in 0..h.m() {
        let vars = h.check(m);
        let own: Vec<&FsConstraint> = rows.iter().filter(|r| r.check == m).collect();
        assert_eq!(own.len(), 32);
        let mut f = vec![0.0; h.n()];
        for mask in 0u32..64 {
            for (j, &v) in vars.iter().enumerate() {
                f[v] = f64::from((mask >> j) & 1);
            }
            let even = mask.count_ones() % 2 == 0;
            assert_eq!(own.iter().all(|r| r.is_satisfied(&f, 0.0)), even, "check {m} mask {mask:06b}");
        }
    }
}

#[test]
fn fs_rows_hold_fractionally_inside_the_polytope() {
    // Midpoints of two even-parity words of a check lie in its polytope.
    let h = ParityCheckMatrix::from_checks(4, vec![vec![0, 1, 2, 3]]).unwrap();
    let rows = enumerate_fs_constraints(&h).unwrap();
    let f = [0.5, 0.5, 0.5, 0.5];
    assert!(rows.iter().all(|r| r.is_satisfied(&f, 0.0)));
    let g = [1.0, 0.0, 0.0, 0.2];
    assert!(rows.iter().any(|r| !r.is_satisfied(&g, 0.0)));
}

#[test]
fn spa_corrects_single_flips_on_default_code() {
    let (h, g) = default_code();
    let dec = SpaDecoder::new(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let c = g.encode(&random_message(&mut rng, g.k()));
        let mut llr: Vec<f64> = c.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect();
        let flip = rng.gen_range(0..256);
        llr[flip] = -llr[flip];
        let out = dec.decode(&llr, 20);
        assert!(out.parity_ok);
        assert_eq!(out.hard_bits, c);
    }
}

#[test]
fn spa_extrinsic_is_posterior_minus_prior() {
    let (h, _) = default_code();
    let dec = SpaDecoder::new(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let prior: Vec<f64> = (0..256).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let out = dec.decode(&prior, 5);
    for ((e, p), a) in out.extrinsic.iter().zip(&out.posterior).zip(&prior) {
        assert!((p - a - e).abs() < 1e-9);
    }
}

#[test]
fn alist_file_round_trip() {
    let (h, _) = default_code();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("code.alist");
    write_alist(&h, &path).unwrap();
    assert_eq!(read_alist(&path).unwrap(), h);
    assert!(read_alist(dir.path().join("missing.alist")).is_err());
}

#[test]
fn permuted_fs_follows_the_map() {
    let h = ParityCheckMatrix::from_checks(4, vec![vec![0, 1], vec![1, 2, 3]]).unwrap();
    let fs = FsConstraintSet::from_pcm(&h).unwrap();
    let map = [3, 2, 1, 0];
    let p = fs.permuted(&map);
    // A word satisfies the original set iff its mapped copy satisfies the permuted one.
    for mask in 0u32..16 {
        let f: Vec<f64> = (0..4).map(|j| f64::from((mask >> j) & 1)).collect();
        let mut g = vec![0.0; 4];
        for (i, &t) in map.iter().enumerate() {
            g[t] = f[i];
        }
        assert_eq!(fs.max_violation(&f) <= 0.0, p.max_violation(&g) <= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encoding_is_linear_over_gf2(seed in any::<u64>()) {
        let h = build_pcm(48, 24, 3, 3).unwrap();
        let g = derive_generator(&h);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_message(&mut rng, g.k());
        let b = random_message(&mut rng, g.k());
        let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let sum: Vec<u8> = g.encode(&a).iter().zip(g.encode(&b)).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(g.encode(&ab), sum);
    }

    #[test]
    fn fast_violation_matches_rows(f in proptest::collection::vec(0.0f64..1.0, 12)) {
        let h = build_pcm(12, 6, 2, 5).unwrap();
        let set = FsConstraintSet::from_pcm(&h).unwrap();
        let brute = set.rows().iter().map(|r| r.lhs(&f) - r.rhs()).fold(0.0, f64::max);
        prop_assert!((set.max_violation(&f) - brute).abs() < 1e-12);
    }
}
