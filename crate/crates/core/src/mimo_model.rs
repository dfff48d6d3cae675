//! Flat-fading spatial-multiplexing MIMO model with QPSK.
//!
//! Complex quantities are carried into the real field by stacking real parts
//! over imaginary parts, so a real symbol vector is laid out as
//! `(Re s_1 .. Re s_Nt, Im s_1 .. Im s_Nt)`. Coded bits fill one snapshot at a
//! time: bit `2i` of a snapshot drives `Re s_i`, bit `2i + 1` drives `Im s_i`
//! (0-based), with the polarity `b = 1 - 2c`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// `N_r x N_t` complex channel with circularly symmetric unit-variance entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChannel {
    pub entries: DMatrix<Complex64>,
}

impl ComplexChannel {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("channel entries must be finite".into()));
        }
        Ok(Self { entries })
    }

    /// Rayleigh draw: real and imaginary parts are each `N(0, 1/2)`.
    pub fn rayleigh<R: Rng + ?Sized>(n_r: usize, n_t: usize, rng: &mut R) -> Self {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let entries = DMatrix::from_fn(n_r, n_t, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        });
        Self { entries }
    }

    pub fn n_r(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.entries.ncols()
    }

    /// `[[Re, -Im], [Im, Re]]`.
    pub fn to_real(&self) -> DMatrix<f64> {
        let (n_r, n_t) = self.entries.shape();
        let mut h = DMatrix::zeros(2 * n_r, 2 * n_t);
        for r in 0..n_r {
            for c in 0..n_t {
                let z = self.entries[(r, c)];
                h[(r, c)] = z.re;
                h[(r, c + n_t)] = -z.im;
                h[(r + n_r, c)] = z.im;
                h[(r + n_r, c + n_t)] = z.re;
            }
        }
        h
    }
}

/// Stacks `(Re v, Im v)`.
pub fn stack_complex(v: &DVector<Complex64>) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// One channel use in the real domain: `y = H s + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSnapshot {
    pub y: DVector<f64>,
    pub h: DMatrix<f64>,
    /// 0-based position of the snapshot inside its frame.
    pub index: usize,
}

impl RealSnapshot {
    pub fn n_r(&self) -> usize {
        self.h.nrows() / 2
    }

    pub fn n_t(&self) -> usize {
        self.h.ncols() / 2
    }

    /// Whether `h` has the `[[A, -B], [B, A]]` structure of a transformed
    /// complex matrix, up to `tol`.
    pub fn has_complex_structure(&self, tol: f64) -> bool {
        let (n_r, n_t) = (self.n_r(), self.n_t());
        (0..n_r).all(|r| {
            (0..n_t).all(|c| {
                (self.h[(r, c)] - self.h[(r + n_r, c + n_t)]).abs() <= tol
                    && (self.h[(r, c + n_t)] + self.h[(r + n_r, c)]).abs() <= tol
            })
        })
    }
}

/// Transforms a complex channel and received vector into the real field.
pub fn complex_to_real(hc: &ComplexChannel, yc: &DVector<Complex64>, index: usize) -> Result<RealSnapshot> {
    if yc.len() != hc.n_r() {
        return Err(Error::Dimension(format!(
            "received vector has {} entries, channel has {} rows",
            yc.len(),
            hc.n_r()
        )));
    }
    Ok(RealSnapshot { y: stack_complex(yc), h: hc.to_real(), index })
}

/// Per-real-component noise variance `sigma_n^2`; complex noise entries are
/// `CN(0, 2 sigma_n^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma_n2: f64,
}

impl NoiseModel {
    pub fn new(sigma_n2: f64) -> Result<Self> {
        if !(sigma_n2 > 0.0 && sigma_n2.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise variance must be positive, got {sigma_n2}")));
        }
        Ok(Self { sigma_n2 })
    }

    /// Uses the convention `SNR = N_t * E_s / (2 sigma_n^2)` with `E_s = 2`.
    pub fn from_snr_db(snr_db: f64, n_t: usize) -> Result<Self> {
        Self::new(snr_db_to_sigma2(snr_db, n_t))
    }

    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }
}

/// Human-readable statement of the SNR convention, echoed into result files.
pub const SNR_CONVENTION: &str = "SNR_dB = 10*log10(N_t*E_s/(2*sigma_n^2)), E_s = 2, unit-variance channel entries";

pub fn snr_db_to_sigma2(snr_db: f64, n_t: usize) -> f64 {
    let es = 2.0;
    n_t as f64 * es / (2.0 * 10f64.powf(snr_db / 10.0))
}

pub fn sigma2_to_snr_db(sigma_n2: f64, n_t: usize) -> f64 {
    10.0 * (n_t as f64 * 2.0 / (2.0 * sigma_n2)).log10()
}

/// Dimensions of one codeword's worth of channel uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub n_t: usize,
    pub n_r: usize,
    pub k: usize,
}

impl FrameLayout {
    pub fn new(n_t: usize, n_r: usize, k: usize) -> Result<Self> {
        if n_t == 0 || n_r == 0 || k == 0 {
            return Err(Error::InvalidParameter("N_t, N_r and K must be positive".into()));
        }
        Ok(Self { n_t, n_r, k })
    }

    /// Layout carrying a codeword of length `n`.
    pub fn for_codeword(n_t: usize, n_r: usize, n: usize) -> Result<Self> {
        if n_t == 0 || !n.is_multiple_of(2 * n_t) {
            return Err(Error::Dimension(format!("codeword length {n} is not a multiple of 2*N_t = {}", 2 * n_t)));
        }
        Self::new(n_t, n_r, n / (2 * n_t))
    }

    pub fn bits_per_snapshot(&self) -> usize {
        2 * self.n_t
    }

    pub fn codeword_len(&self) -> usize {
        2 * self.n_t * self.k
    }

    /// Dimension of the lifted matrix `[x; t][x; t]^T`.
    pub fn block_dim(&self) -> usize {
        2 * self.n_t + 1
    }

    /// `(snapshot, bit within snapshot)` for channel-order bit `n`.
    pub fn locate(&self, n: usize) -> (usize, usize) {
        (n / self.bits_per_snapshot(), n % self.bits_per_snapshot())
    }

    /// Row of the real symbol vector driven by bit `j` of a snapshot.
    pub fn symbol_row(&self, j: usize) -> usize {
        if j.is_multiple_of(2) {
            j / 2
        } else {
            j / 2 + self.n_t
        }
    }

    /// Inverse of [`symbol_row`](Self::symbol_row).
    pub fn bit_of_row(&self, row: usize) -> usize {
        if row < self.n_t {
            2 * row
        } else {
            2 * (row - self.n_t) + 1
        }
    }

    /// Real symbol vector for polarized bits `b` (`+-1`) of one snapshot.
    pub fn modulate(&self, b: &[f64]) -> DVector<f64> {
        let mut s = DVector::zeros(self.bits_per_snapshot());
        for (j, &bj) in b.iter().enumerate() {
            s[self.symbol_row(j)] = bj;
        }
        s
    }
}

/// Maps one snapshot's coded bits onto the real symbol vector, `1 - 2c`.
pub fn map_bits_to_symbols(coded_bits: &[u8], layout: &FrameLayout) -> Result<DVector<f64>> {
    if coded_bits.len() != layout.bits_per_snapshot() {
        return Err(Error::Dimension(format!(
            "expected {} bits per snapshot, got {}",
            layout.bits_per_snapshot(),
            coded_bits.len()
        )));
    }
    if coded_bits.iter().any(|&c| c > 1) {
        return Err(Error::InvalidParameter("coded bits must be 0 or 1".into()));
    }
    let b: Vec<f64> = coded_bits.iter().map(|&c| polarize(c)).collect();
    Ok(layout.modulate(&b))
}

/// `1 - 2c`.
pub fn polarize(c: u8) -> f64 {
    1.0 - 2.0 * f64::from(c)
}

/// Complex symbols `s_i = Re + j Im` from a real symbol vector.
pub fn to_complex_symbols(s: &DVector<f64>) -> Vec<Complex64> {
    let n_t = s.len() / 2;
    (0..n_t).map(|i| Complex64::new(s[i], s[i + n_t])).collect()
}

/// Draws `K` snapshots carrying `codeword` (channel order) through
/// independent Rayleigh channels with AWGN of variance `sigma_n2` per real
/// component. Channel and noise come from separate streams of `seed`.
pub fn generate_frame(layout: &FrameLayout, seed: u64, sigma_n2: f64, codeword: &[u8]) -> Result<Vec<RealSnapshot>> {
    let noise = NoiseModel::new(sigma_n2)?;
    if codeword.len() != layout.codeword_len() {
        return Err(Error::Dimension(format!(
            "codeword length {} does not match layout length {}",
            codeword.len(),
            layout.codeword_len()
        )));
    }
    let mut channel_rng = stream_rng(seed, Stream::Channel, 0);
    let mut noise_rng = stream_rng(seed, Stream::Noise, 0);
    let sd = noise.sigma_n2().sqrt();
    let bps = layout.bits_per_snapshot();
    codeword
        .chunks(bps)
        .enumerate()
        .map(|(k, bits)| {
            let h = ComplexChannel::rayleigh(layout.n_r, layout.n_t, &mut channel_rng).to_real();
            let s = map_bits_to_symbols(bits, layout)?;
            let n = DVector::from_fn(2 * layout.n_r, |_, _| sd * noise_rng.sample::<f64, _>(StandardNormal));
            let y = &h * s + n;
            Ok(RealSnapshot { y, h, index: k })
        })
        .collect()
}
