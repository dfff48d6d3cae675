use super::ParityCheckMatrix;

type Row = Vec<u64>;

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn get(row: &[u64], i: usize) -> bool {
    (row[i / 64] >> (i % 64)) & 1 == 1
}

fn set(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Systematic generator for the code of a parity-check matrix.
///
/// The information bits sit at `info_positions` (the non-pivot columns of the
/// reduced row echelon form of `H`), where `G` restricted to those columns is
/// the identity. When `H` is rank deficient, `k = n - rank(H)` exceeds the
/// nominal `n - m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    n: usize,
    rank: usize,
    info_positions: Vec<usize>,
    rows: Vec<Row>,
}

/// Gaussian elimination over GF(2).
pub fn derive_generator(h: &ParityCheckMatrix) -> GeneratorMatrix {
    let n = h.n();
    let w = words(n);
    let mut rows: Vec<Row> = h
        .checks()
        .iter()
        .map(|check| {
            let mut r = vec![0u64; w];
            check.iter().for_each(|&v| set(&mut r, v));
            r
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| get(&rows[i], col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && get(row, col) {
                xor_into(row, &pivot_row);
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);

    let is_pivot = {
        let mut flags = vec![false; n];
        pivots.iter().for_each(|&c| flags[c] = true);
        flags
    };
    let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();

    // Unit message at each information position; pivot bits follow from the
    // reduced rows, whose only pivot entry is their own.
    let g_rows = info_positions
        .iter()
        .map(|&q| {
            let mut cw = vec![0u64; w];
            set(&mut cw, q);
            for (row, &p) in rows.iter().zip(&pivots) {
                if get(row, q) {
                    set(&mut cw, p);
                }
            }
            cw
        })
        .collect();

    GeneratorMatrix { n, rank: r, info_positions, rows: g_rows }
}

impl GeneratorMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Message length `n - rank(H)`.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Row `t` of `G` as 0/1 bytes.
    pub fn row(&self, t: usize) -> Vec<u8> {
        (0..self.n).map(|i| u8::from(get(&self.rows[t], i))).collect()
    }

    /// `msg * G` over GF(2).
    pub fn encode(&self, msg: &[u8]) -> Vec<u8> {
        assert_eq!(msg.len(), self.k(), "message length must equal k");
        let mut acc = vec![0u64; words(self.n)];
        for (row, &bit) in self.rows.iter().zip(msg) {
            if bit & 1 == 1 {
                xor_into(&mut acc, row);
            }
        }
        (0..self.n).map(|i| u8::from(get(&acc, i))).collect()
    }

    /// Reads the message back out of a codeword.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&i| codeword[i]).collect()
    }
}
