//! Spreading codes, QPSK symbols, burst assembly, and transfer blocks.
//!
//! The transmit side builds a burst as two spread data fields around a known
//! midamble, trailed by a guard period. The receive-side model is captured by
//! the `TransferBlocks` type: per oversampling phase, the SF-by-K blocks
//! `B(0)..B(L)` whose block-Toeplitz stacking is the tall system matrix `A`
//! mapping interleaved symbols to field chips.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cmat::CMat;
use crate::config::SlotConfig;
use crate::error::{Error, Result};
use crate::Cpx;

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Gray-mapped QPSK point for one bit pair. Bit 0 drives the real axis,
/// bit 1 the imaginary axis; a zero bit maps to the positive half-plane.
pub fn qpsk_symbol(b0: u8, b1: u8) -> Cpx {
    let re = if b0 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if b1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Cpx::new(re, im)
}

/// Hard decision inverse of `qpsk_symbol`. Works on soft estimates.
pub fn qpsk_bits(sym: Cpx) -> (u8, u8) {
    (u8::from(sym.re < 0.0), u8::from(sym.im < 0.0))
}

/// Seeded unit-modulus QPSK chip sequence. Serves as the common scrambling
/// overlay and as midamble content; the receiver regenerates it from the
/// same seed.
pub fn pseudo_qpsk_chips(len: usize, seed: u64) -> Vec<Cpx> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| qpsk_symbol(rng.random_range(0..2u8), rng.random_range(0..2u8))).collect()
}

/// Row `r` of the order-`sf` Walsh-Hadamard matrix (`sf` a power of two).
fn hadamard_row(sf: usize, r: usize) -> Vec<Cpx> {
    (0..sf)
        .map(|c| {
            let sign = if (r & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            Cpx::new(sign, 0.0)
        })
        .collect()
}

/// The active short codes, one unit-modulus chip vector per code.
#[derive(Clone, Debug)]
pub struct CodeSet {
    sf: usize,
    codes: Vec<Vec<Cpx>>,
}

impl CodeSet {
    /// `k` Walsh-Hadamard rows of order `sf`, no scrambling. The all-ones
    /// row is skipped while `k < sf` leaves room to do so; at full load all
    /// `sf` rows are needed.
    pub fn walsh(sf: usize, k: usize) -> Result<Self> {
        if !sf.is_power_of_two() {
            return Err(Error::InvalidConfig("spreading factor must be a power of two".into()));
        }
        if k == 0 || k > sf {
            return Err(Error::InvalidConfig("code count must satisfy 1 <= k <= sf".into()));
        }
        let first = if k < sf { 1 } else { 0 };
        let codes = (first..first + k).map(|r| hadamard_row(sf, r)).collect();
        Ok(CodeSet { sf, codes })
    }

    /// Walsh rows under a common seeded QPSK scrambling overlay. Chip-wise
    /// multiplication by one shared unit-modulus sequence preserves the
    /// Gram matrix, so orthogonality survives.
    pub fn walsh_scrambled(sf: usize, k: usize, scramble_seed: u64) -> Result<Self> {
        let mut set = CodeSet::walsh(sf, k)?;
        let overlay = pseudo_qpsk_chips(sf, scramble_seed);
        for code in set.codes.iter_mut() {
            for (chip, s) in code.iter_mut().zip(overlay.iter()) {
                *chip *= s;
            }
        }
        Ok(set)
    }

    /// Wraps explicit code vectors. Every chip must have modulus 1.
    pub fn from_rows(sf: usize, codes: Vec<Vec<Cpx>>) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::InvalidConfig("need at least one code".into()));
        }
        for code in &codes {
            if code.len() != sf {
                return Err(Error::InvalidConfig("every code must have sf chips".into()));
            }
            if code.iter().any(|c| (c.norm() - 1.0).abs() > 1e-9) {
                return Err(Error::InvalidConfig("code chips must be unit modulus".into()));
            }
        }
        Ok(CodeSet { sf, codes })
    }

    pub fn sf(&self) -> usize {
        self.sf
    }

    pub fn k(&self) -> usize {
        self.codes.len()
    }

    pub fn code(&self, k: usize) -> &[Cpx] {
        &self.codes[k]
    }

    /// Gram matrix of the code vectors; `sf * I` for an orthogonal set.
    pub fn gram(&self) -> CMat {
        let k = self.k();
        CMat::from_fn(k, k, |i, j| {
            self.codes[i].iter().zip(self.codes[j].iter()).map(|(a, b)| a.conj() * b).sum()
        })
    }
}

/// Interleaved data symbols for both fields of one burst.
///
/// Field `f`'s symbols live at `d[f * k * n_s ..][i * k + kk]`: symbol `i`
/// of code `kk`, code-major within each symbol block.
#[derive(Clone, Debug)]
pub struct SymbolFrame {
    pub d: Vec<Cpx>,
    k: usize,
    n_s: usize,
}

impl SymbolFrame {
    /// Maps bit pairs to QPSK symbols. Expects `4 * k * n_s` bits: two per
    /// symbol, fields concatenated, same interleaved order as `d`.
    pub fn from_bits(bits: &[u8], k: usize, n_s: usize) -> Result<Self> {
        if bits.len() != 4 * k * n_s {
            return Err(Error::InvalidInput("bit count must be 4 * k * n_s".into()));
        }
        let d = bits.chunks_exact(2).map(|p| qpsk_symbol(p[0], p[1])).collect();
        Ok(SymbolFrame { d, k, n_s })
    }

    pub fn random(k: usize, n_s: usize, rng: &mut impl Rng) -> (Vec<u8>, SymbolFrame) {
        let bits: Vec<u8> = (0..4 * k * n_s).map(|_| rng.random_range(0..2u8)).collect();
        let frame = SymbolFrame::from_bits(&bits, k, n_s).expect("sized by construction");
        (bits, frame)
    }

    pub fn field(&self, f: usize) -> &[Cpx] {
        assert!(f < 2);
        let n = self.k * self.n_s;
        &self.d[f * n..(f + 1) * n]
    }
}

/// Sum of all code streams spread to chips: `n_s * sf` chips where chip
/// `i * sf + q` accumulates `d[i * k + kk] * code_kk[q]`.
pub fn spread_field(symbols: &[Cpx], codes: &CodeSet) -> Vec<Cpx> {
    let k = codes.k();
    let sf = codes.sf();
    assert!(symbols.len() % k == 0, "symbol count must be a multiple of the code count");
    let n_s = symbols.len() / k;
    let mut chips = vec![Cpx::new(0.0, 0.0); n_s * sf];
    for i in 0..n_s {
        for (kk, code) in codes.codes.iter().enumerate() {
            let s = symbols[i * k + kk];
            for (q, &c) in code.iter().enumerate() {
                chips[i * sf + q] += s * c;
            }
        }
    }
    chips
}

/// Correlates each spreading code against its symbol-period chips.
///
/// Unnormalized: on a clean unit-gain channel with orthogonal codes the
/// output is `sf` times the sent symbol. Output is code-major interleaved,
/// matching [`spread_field`].
pub fn despread_field(chips: &[Cpx], codes: &CodeSet) -> Vec<Cpx> {
    let k = codes.k();
    let sf = codes.sf();
    assert!(chips.len() % sf == 0, "chip count must be a multiple of the spreading factor");
    let n_s = chips.len() / sf;
    let mut symbols = vec![Cpx::new(0.0, 0.0); n_s * k];
    for i in 0..n_s {
        for (kk, code) in codes.codes.iter().enumerate() {
            let mut acc = Cpx::new(0.0, 0.0);
            for (q, &c) in code.iter().enumerate() {
                acc += c.conj() * chips[i * sf + q];
            }
            symbols[i * k + kk] = acc;
        }
    }
    symbols
}

/// Full transmit burst: `[field 1 | midamble | field 2 | guard zeros]`.
pub fn spread_and_assemble(
    frame: &SymbolFrame,
    codes: &CodeSet,
    midamble: &[Cpx],
    cfg: &SlotConfig,
) -> Result<Vec<Cpx>> {
    if frame.k != cfg.k || frame.n_s != cfg.n_s {
        return Err(Error::InvalidConfig("frame shape does not match slot config".into()));
    }
    if codes.k() != cfg.k || codes.sf() != cfg.sf {
        return Err(Error::InvalidConfig("code set does not match slot config".into()));
    }
    if midamble.len() != crate::config::MIDAMBLE_CHIPS {
        return Err(Error::InvalidConfig("midamble length must be 512 chips".into()));
    }
    let mut burst = Vec::with_capacity(cfg.burst_chips());
    burst.extend_from_slice(&spread_field(frame.field(0), codes));
    burst.extend_from_slice(midamble);
    burst.extend_from_slice(&spread_field(frame.field(1), codes));
    burst.resize(cfg.burst_chips(), Cpx::new(0.0, 0.0));
    Ok(burst)
}

/// Linear convolution, length `a.len() + b.len() - 1`.
pub fn convolve(a: &[Cpx], b: &[Cpx]) -> Vec<Cpx> {
    let mut out = vec![Cpx::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// The SF-by-K blocks `B(0)..B(L)` of the system matrix, one set per
/// oversampling phase. Column `k` of the vertical stack is the convolution
/// of code `k` with its user's channel for that phase, zero-padded to
/// `(L+1) * sf` chips.
#[derive(Clone, Debug)]
pub struct TransferBlocks {
    sf: usize,
    k: usize,
    l: usize,
    /// `phases[n][i]` is `B_n(i)`.
    phases: Vec<Vec<CMat>>,
}

/// Builds transfer blocks from per-user, per-phase channel taps.
/// `user_taps[u][n]` holds the `w` taps of phase `n` for user `u`; codes are
/// routed to users through the slot's code allocation.
pub fn build_transfer_blocks(
    codes: &CodeSet,
    user_taps: &[Vec<Vec<Cpx>>],
    cfg: &SlotConfig,
) -> Result<TransferBlocks> {
    if codes.k() != cfg.k || codes.sf() != cfg.sf {
        return Err(Error::InvalidConfig("code set does not match slot config".into()));
    }
    if user_taps.len() != cfg.num_users() {
        return Err(Error::InvalidConfig("need one tap set per user".into()));
    }
    for taps in user_taps {
        if taps.len() != cfg.n_over {
            return Err(Error::InvalidConfig("need one tap vector per oversampling phase".into()));
        }
        if taps.iter().any(|h| h.len() != cfg.w) {
            return Err(Error::InvalidConfig("each tap vector must have w entries".into()));
        }
    }
    let l = cfg.delay_blocks();
    let sf = cfg.sf;
    let padded = (l + 1) * sf;
    let mut phases = Vec::with_capacity(cfg.n_over);
    for n in 0..cfg.n_over {
        let mut blocks = vec![CMat::zeros(sf, cfg.k); l + 1];
        for kk in 0..cfg.k {
            let h = &user_taps[cfg.code_allocation[kk]][n];
            let col = convolve(codes.code(kk), h);
            debug_assert!(col.len() <= padded);
            for (row, &v) in col.iter().enumerate() {
                blocks[row / sf].set(row % sf, kk, v);
            }
        }
        phases.push(blocks);
    }
    Ok(TransferBlocks { sf, k: cfg.k, l, phases })
}

impl TransferBlocks {
    pub fn sf(&self) -> usize {
        self.sf
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Largest possibly-nonzero block delay; blocks run `B(0)..B(l)`.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn num_phases(&self) -> usize {
        self.phases.len()
    }

    pub fn block(&self, phase: usize, i: usize) -> &CMat {
        &self.phases[phase][i]
    }

    /// Column `k` of the vertical stack `[B(0); ...; B(L)]`.
    pub fn stacked_column(&self, phase: usize, k: usize) -> Vec<Cpx> {
        let mut col = Vec::with_capacity((self.l + 1) * self.sf);
        for b in &self.phases[phase] {
            for q in 0..self.sf {
                col.push(b.get(q, k));
            }
        }
        col
    }

    /// Dense `(n_s * sf + w' - 1)` by `(n_s * k)` system matrix for one
    /// phase, where `w' - 1` is the tail beyond the last symbol block.
    /// Oracle and test use only; the fast path never materializes it.
    pub fn dense_system_matrix(&self, phase: usize, n_s: usize, n_c: usize) -> CMat {
        let mut a = CMat::zeros(n_c, n_s * self.k);
        for i in 0..n_s {
            for (bi, b) in self.phases[phase].iter().enumerate() {
                let row0 = (i + bi) * self.sf;
                for q in 0..self.sf {
                    if row0 + q >= n_c {
                        break;
                    }
                    for kk in 0..self.k {
                        a.add_to(row0 + q, i * self.k + kk, b.get(q, kk));
                    }
                }
            }
        }
        a
    }

    /// Noiseless received field for one phase: `A d` of length `n_c`,
    /// computed block-wise without forming `A`.
    pub fn apply(&self, phase: usize, d: &[Cpx], n_c: usize) -> Vec<Cpx> {
        assert!(d.len() % self.k == 0);
        let n_s = d.len() / self.k;
        let mut out = vec![Cpx::new(0.0, 0.0); n_c];
        for i in 0..n_s {
            let di = &d[i * self.k..(i + 1) * self.k];
            for (bi, b) in self.phases[phase].iter().enumerate() {
                let row0 = (i + bi) * self.sf;
                if row0 >= n_c {
                    break;
                }
                for q in 0..self.sf.min(n_c - row0) {
                    let mut acc = Cpx::new(0.0, 0.0);
                    for (kk, &dv) in di.iter().enumerate() {
                        acc += b.get(q, kk) * dv;
                    }
                    out[row0 + q] += acc;
                }
            }
        }
        out
    }
}
