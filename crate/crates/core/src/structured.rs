//! Banded block-Toeplitz correlation structure and its circulant spectra.
//!
//! The normal-equations matrix `R = sum_n A_n^H A_n + sigma^2 I` of the
//! burst model is Hermitian, block-Toeplitz with K-by-K blocks, and banded:
//! only bands `R_0..R_L` are nonzero. Extending it to a block-circulant
//! matrix `R_c` of `p` block rows makes it diagonalizable by the block DFT:
//! `R_c = (1/p) D Lambda D^H` with `D^H D = p I`, where the bin blocks
//! `Lambda^(k)` are scalar DFTs of the two-sided band sequence. The same
//! trick applied one-sidedly to the transfer blocks `B(0)..B(L)` yields the
//! per-bin `Lambda_1^(k)` used by the frequency-domain matched filter.
//!
//! Spectra are always computed from the bands; the dense circulant builders
//! exist only for tests and oracles and refuse large sizes.

use alloc::vec;
use alloc::vec::Vec;

// Unused whenever std is in the crate graph (tests): inherent float methods
// shadow the trait ones. The pure no_std build resolves sqrt/log2 through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::cmat::{CMat, OpTally};
use crate::error::{Error, Result};
use crate::fft::{block_transform, FftPlan};
use crate::signal::TransferBlocks;
use crate::Cpx;

/// Row limit for the dense circulant builders.
const DENSE_GUARD_ROWS: usize = 512;

/// Bands `R_0..R_L` of the correlation matrix, noise variance folded into
/// the diagonal of `R_0`.
#[derive(Clone, Debug)]
pub struct BlockBandSet {
    bands: Vec<CMat>,
    sigma2: f64,
}

impl BlockBandSet {
    /// Wraps explicit bands; `sigma2` must already be folded into `R_0`,
    /// which has to be Hermitian. Band 0 is the diagonal block.
    pub fn from_blocks(bands: Vec<CMat>, sigma2: f64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidInput("need at least the diagonal band".into()));
        }
        let k = bands[0].rows();
        if bands.iter().any(|b| b.rows() != k || b.cols() != k) {
            return Err(Error::InvalidInput("all bands must be square and same size".into()));
        }
        if bands[0].hermitian_defect() > 1e-12 * bands[0].frob().max(1.0) {
            return Err(Error::InvalidInput("diagonal band must be Hermitian".into()));
        }
        Ok(BlockBandSet { bands, sigma2 })
    }

    pub fn k(&self) -> usize {
        self.bands[0].rows()
    }

    /// Number of nonzero off-diagonal bands.
    pub fn l(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn band(&self, m: usize) -> &CMat {
        &self.bands[m]
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Dense `n_blocks`-row correlation matrix rebuilt from the bands;
    /// block `(i, j)` is `R_{i-j}`, `R_{j-i}^H`, or zero. Test use.
    pub fn dense(&self, n_blocks: usize) -> CMat {
        let k = self.k();
        let l = self.l();
        let mut r = CMat::zeros(n_blocks * k, n_blocks * k);
        for bi in 0..n_blocks {
            for bj in 0..n_blocks {
                let (m, adj) =
                    if bi >= bj { (bi - bj, false) } else { (bj - bi, true) };
                if m > l {
                    continue;
                }
                for a in 0..k {
                    for b in 0..k {
                        let v = if adj {
                            self.bands[m].get(b, a).conj()
                        } else {
                            self.bands[m].get(a, b)
                        };
                        r.set(bi * k + a, bj * k + b, v);
                    }
                }
            }
        }
        r
    }
}

/// Correlation bands from transfer blocks:
/// `R_m = sum_n sum_i B_n(i)^H B_n(i+m)` plus `sigma2 I` on `R_0`.
/// Equals the bands of the dense `sum_n A_n^H A_n + sigma2 I`.
pub fn correlation_bands(tb: &TransferBlocks, sigma2: f64, tally: &mut OpTally) -> BlockBandSet {
    let k = tb.k();
    let sf = tb.sf();
    let l = tb.l();
    let mut bands = vec![CMat::zeros(k, k); l + 1];
    for phase in 0..tb.num_phases() {
        for m in 0..=l {
            for i in 0..=(l - m) {
                let lo = tb.block(phase, i);
                let hi = tb.block(phase, i + m);
                for a in 0..k {
                    for b in 0..k {
                        let mut acc = Cpx::new(0.0, 0.0);
                        for q in 0..sf {
                            acc += lo.get(q, a).conj() * hi.get(q, b);
                        }
                        bands[m].add_to(a, b, acc);
                        tally.other += sf as u64;
                    }
                }
            }
        }
    }
    // R_0 is Hermitian by construction up to rounding; make it exact.
    bands[0].hermitize();
    bands[0].add_diag(sigma2);
    BlockBandSet { bands, sigma2 }
}

/// Per-bin blocks diagonalizing the block-circulant extension.
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    p: usize,
    blocks: Vec<CMat>,
}

impl BlockSpectrum {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn block(&self, bin: usize) -> &CMat {
        &self.blocks[bin]
    }
}

/// Spectrum of the correlation bands: `Lambda^(k)` is the length-`p` DFT of
/// the two-sided sequence `{R_0 at 0, R_m at m, R_m^H at p-m}`, evaluated by
/// `K^2` scalar FFTs. Needs `p >= 2L+1` so the bands do not alias.
pub fn correlation_spectrum(
    bands: &BlockBandSet,
    p: usize,
    tally: &mut OpTally,
) -> Result<BlockSpectrum> {
    let l = bands.l();
    if p < 2 * l + 1 {
        return Err(Error::InvalidConfig(alloc::format!(
            "processing length {p} aliases bands; need at least {}",
            2 * l + 1
        )));
    }
    let k = bands.k();
    let plan = FftPlan::new(p);
    let mut blocks = vec![CMat::zeros(k, k); p];
    let mut seq = vec![Cpx::new(0.0, 0.0); p];
    for a in 0..k {
        for b in 0..k {
            for v in seq.iter_mut() {
                *v = Cpx::new(0.0, 0.0);
            }
            seq[0] = bands.band(0).get(a, b);
            for m in 1..=l {
                seq[m] = bands.band(m).get(a, b);
                seq[p - m] = bands.band(m).get(b, a).conj();
            }
            plan.transform(&mut seq, false, tally);
            for (bin, block) in blocks.iter_mut().enumerate() {
                block.set(a, b, seq[bin]);
            }
        }
    }
    Ok(BlockSpectrum { p, blocks })
}

/// Per-bin one-sided transfer spectra, one list per oversampling phase.
#[derive(Clone, Debug)]
pub struct TransferSpectrum {
    p: usize,
    /// `phases[n][bin]` is the SF-by-K block of phase `n` at that bin.
    phases: Vec<Vec<CMat>>,
}

impl TransferSpectrum {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_phases(&self) -> usize {
        self.phases.len()
    }

    pub fn block(&self, phase: usize, bin: usize) -> &CMat {
        &self.phases[phase][bin]
    }
}

/// One-sided spectrum of the transfer blocks:
/// `Lambda_1^(k) = sum_i B(i) exp(-2 pi j i k / p)`, via `SF*K` scalar FFTs
/// per phase. Needs `p >= L+1`.
pub fn transfer_spectrum(tb: &TransferBlocks, p: usize, tally: &mut OpTally) -> Result<TransferSpectrum> {
    let l = tb.l();
    if p < l + 1 {
        return Err(Error::InvalidConfig(alloc::format!(
            "processing length {p} cannot hold {} transfer blocks",
            l + 1
        )));
    }
    let sf = tb.sf();
    let k = tb.k();
    let plan = FftPlan::new(p);
    let mut phases = Vec::with_capacity(tb.num_phases());
    let mut seq = vec![Cpx::new(0.0, 0.0); p];
    for phase in 0..tb.num_phases() {
        let mut blocks = vec![CMat::zeros(sf, k); p];
        for q in 0..sf {
            for col in 0..k {
                for v in seq.iter_mut() {
                    *v = Cpx::new(0.0, 0.0);
                }
                for i in 0..=l {
                    seq[i] = tb.block(phase, i).get(q, col);
                }
                plan.transform(&mut seq, false, tally);
                for (bin, block) in blocks.iter_mut().enumerate() {
                    block.set(q, col, seq[bin]);
                }
            }
        }
        phases.push(blocks);
    }
    Ok(TransferSpectrum { p, phases })
}

/// Forward block DFT (`D^H x`): `lane`-strided scalar FFTs over the `p`
/// blocks of `x`, negative-exponent kernel, no scaling.
pub fn block_dft(x: &mut [Cpx], lanes: usize, plan: &FftPlan, tally: &mut OpTally) {
    block_transform(x, lanes, plan, false, tally);
}

/// Inverse block DFT (`(1/p) D x`): conjugate kernel scaled by `1/p`, so
/// `block_idft(block_dft(x)) = x`.
pub fn block_idft(x: &mut [Cpx], lanes: usize, plan: &FftPlan, tally: &mut OpTally) {
    block_transform(x, lanes, plan, true, tally);
}

/// Dense block DFT matrix `D` with `p` block rows of `lane`-sized identity
/// blocks scaled by `exp(+2 pi j r c / p)`; the forward transform above
/// multiplies by `D^H`. Test use.
pub fn dense_block_dft_matrix(p: usize, lanes: usize) -> CMat {
    CMat::from_fn(p * lanes, p * lanes, |r, c| {
        let (br, ir) = (r / lanes, r % lanes);
        let (bc, ic) = (c / lanes, c % lanes);
        if ir != ic {
            return Cpx::new(0.0, 0.0);
        }
        let theta = 2.0 * core::f64::consts::PI * ((br * bc) % p) as f64 / p as f64;
        Cpx::new(theta.cos(), theta.sin())
    })
}

/// Dense block-circulant extension of the correlation bands, `p` block rows.
/// Test/oracle use only; refuses more than 512 scalar rows.
pub fn dense_circulant_r(bands: &BlockBandSet, p: usize) -> Result<CMat> {
    let k = bands.k();
    if p * k > DENSE_GUARD_ROWS {
        return Err(Error::SizeGuard { requested: p * k, limit: DENSE_GUARD_ROWS });
    }
    if p < 2 * bands.l() + 1 {
        return Err(Error::InvalidConfig("circulant extension would alias bands".into()));
    }
    let l = bands.l();
    let mut r = CMat::zeros(p * k, p * k);
    for bi in 0..p {
        for bj in 0..p {
            let m = (bi + p - bj) % p;
            for a in 0..k {
                for b in 0..k {
                    let v = if m <= l {
                        bands.band(m).get(a, b)
                    } else if p - m <= l {
                        bands.band(p - m).get(b, a).conj()
                    } else {
                        continue;
                    };
                    r.set(bi * k + a, bj * k + b, v);
                }
            }
        }
    }
    Ok(r)
}

/// Dense block-circulant extension of one phase's transfer blocks:
/// `p*sf` rows by `p*k` columns, block `(i, j) = B((i-j) mod p)`.
/// Test/oracle use only.
pub fn dense_circulant_a(tb: &TransferBlocks, phase: usize, p: usize) -> Result<CMat> {
    let sf = tb.sf();
    let k = tb.k();
    if p * sf > DENSE_GUARD_ROWS {
        return Err(Error::SizeGuard { requested: p * sf, limit: DENSE_GUARD_ROWS });
    }
    if p < tb.l() + 1 {
        return Err(Error::InvalidConfig("circulant extension cannot hold the blocks".into()));
    }
    let l = tb.l();
    let mut a = CMat::zeros(p * sf, p * k);
    for bi in 0..p {
        for bj in 0..p {
            let m = (bi + p - bj) % p;
            if m > l {
                continue;
            }
            let b = tb.block(phase, m);
            for q in 0..sf {
                for col in 0..k {
                    a.set(bi * sf + q, bj * k + col, b.get(q, col));
                }
            }
        }
    }
    Ok(a)
}
