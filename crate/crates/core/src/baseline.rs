//! Reference detectors the fast frequency-domain path is measured against.
//!
//! Four families: a dense MMSE solve used as ground truth, a banded block
//! Cholesky joint detector with stationary-row extension, chip-level
//! single-user equalizers (banded Cholesky and scalar-circulant FFT forms)
//! followed by despreading, and a plain matched filter. All of them share
//! the per-field window layout produced by `extend_window`.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::ChannelRealization;
use crate::cmat::{
    cholesky_factor, solve_hermitian, solve_lower, solve_lower_adjoint, solve_right_adjoint,
    CMat, OpTally,
};
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::signal::{despread_field, CodeSet, TransferBlocks};
use crate::structured::BlockBandSet;
use crate::Cpx;

/// Largest unknown count `dense_mmse_oracle` accepts. The oracle is O(n^3);
/// anything bigger than a full-size burst is a caller bug.
pub const ORACLE_GUARD_COLS: usize = 1024;

/// Exact MMSE reference: solves `(sum_n A_n^H A_n + sigma2 I) d = sum_n A_n^H r_n`
/// by dense Hermitian factorization. Ground truth for every fast method here.
pub fn dense_mmse_oracle(
    a_phases: &[CMat],
    r_phases: &[Vec<Cpx>],
    sigma2: f64,
) -> Result<Vec<Cpx>> {
    if a_phases.is_empty() || a_phases.len() != r_phases.len() {
        return Err(Error::InvalidInput(
            "need one system matrix per received phase".into(),
        ));
    }
    let n = a_phases[0].cols();
    if n > ORACLE_GUARD_COLS {
        return Err(Error::SizeGuard { requested: n, limit: ORACLE_GUARD_COLS });
    }
    let mut gram = CMat::zeros(n, n);
    let mut rhs = vec![Cpx::new(0.0, 0.0); n];
    for (a, r) in a_phases.iter().zip(r_phases) {
        if a.cols() != n || a.rows() != r.len() {
            return Err(Error::InvalidInput(
                "system matrix and window dimensions disagree".into(),
            ));
        }
        gram.add_assign(&a.adjoint().mul(a));
        for (dst, v) in rhs.iter_mut().zip(a.adjoint_matvec(r)) {
            *dst += v;
        }
    }
    gram.add_diag(sigma2);
    gram.hermitize();
    solve_hermitian(&gram, &rhs)
}

/// How many leading block rows of the Cholesky factor to compute exactly
/// before replicating the last one down the rest of the matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CholDepth {
    /// Factor every block row: exact Cholesky of the banded matrix.
    Full,
    /// Factor this many leading block rows, then replicate. Values below
    /// `L + 1` are raised to `L + 1` so the replicated row has full width.
    Blocks(usize),
}

impl CholDepth {
    /// The stock choice: one full-width row plus one settled row to copy.
    pub fn standard(l: usize) -> Self {
        CholDepth::Blocks(l + 2)
    }
}

/// Banded lower block-triangular Cholesky factor of a block-Toeplitz banded
/// Hermitian matrix, stored as rows of offset blocks. Row `i` holds
/// `G[i, i-a]` for `a = 0..=min(i, L)`; rows past the computed depth reuse
/// the last computed (stationary) row.
pub struct BandedCholesky {
    rows: Vec<Vec<CMat>>,
    k: usize,
    l: usize,
}

/// Factor the leading `depth` block rows of the matrix described by `bands`
/// exactly; the factor is extended to any length by replicating the last row.
///
/// The factor rows of a positive-definite banded block-Toeplitz matrix
/// converge geometrically to a stationary row, so a shallow exact head plus
/// replication approximates the full factor; `CholDepth::Full` keeps it exact.
pub fn banded_cholesky(
    bands: &BlockBandSet,
    n_blocks: usize,
    depth: CholDepth,
    tally: &mut OpTally,
) -> Result<BandedCholesky> {
    let k = bands.k();
    let l = bands.l();
    if n_blocks == 0 {
        return Err(Error::InvalidInput("matrix must have at least one block row".into()));
    }
    let m = match depth {
        CholDepth::Full => n_blocks,
        CholDepth::Blocks(m) => m.max(l + 1).min(n_blocks),
    };
    let mut rows: Vec<Vec<CMat>> = Vec::with_capacity(m);
    for i in 0..m {
        let width = i.min(l);
        // Offsets are filled largest-first: G[i, i-a] needs all G[i, i-b]
        // with b > a already known.
        let mut row = vec![CMat::zeros(0, 0); width + 1];
        for a in (1..=width).rev() {
            // G[i, i-a] = (R_a - sum_{b>a} G[i, i-b] G[i-a, i-b]^H) G[i-a, i-a]^-H
            let mut s = bands.band(a).clone();
            for b in (a + 1)..=width {
                s = s.sub(&row[b].mul(&rows[i - a][b - a].adjoint()));
            }
            row[a] = solve_right_adjoint(&rows[i - a][0], &s);
            tally.other += (k * k * k) as u64 * (width - a + 1) as u64;
        }
        let mut diag = bands.band(0).clone();
        for a in 1..=width {
            diag = diag.sub(&row[a].mul(&row[a].adjoint()));
            tally.other += (k * k * k) as u64;
        }
        diag.hermitize();
        row[0] = cholesky_factor(&diag, tally).map_err(|e| match e {
            Error::NotPositiveDefinite { row: r, pivot } => {
                Error::NotPositiveDefinite { row: i * k + r, pivot }
            }
            other => other,
        })?;
        rows.push(row);
    }
    Ok(BandedCholesky { rows, k, l })
}

impl BandedCholesky {
    fn row(&self, i: usize) -> &[CMat] {
        if i < self.rows.len() {
            &self.rows[i]
        } else {
            self.rows.last().unwrap()
        }
    }

    /// Solve `G G^H d = v` by forward then backward banded block substitution.
    /// `v.len()` may cover any number of block rows; rows beyond the factored
    /// depth use the stationary row.
    pub fn solve(&self, v: &[Cpx], tally: &mut OpTally) -> Vec<Cpx> {
        let k = self.k;
        assert!(v.len() % k == 0, "right-hand side must be whole blocks");
        let n = v.len() / k;
        let mut y = v.to_vec();
        for i in 0..n {
            let row = self.row(i);
            let mut blk: Vec<Cpx> = y[i * k..(i + 1) * k].to_vec();
            for a in 1..=i.min(self.l) {
                let prev = &y[(i - a) * k..(i - a + 1) * k];
                for (dst, v) in blk.iter_mut().zip(row[a].matvec(prev)) {
                    *dst -= v;
                }
                tally.other += (k * k) as u64;
            }
            solve_lower(&row[0], &mut blk);
            tally.other += (k * k) as u64;
            y[i * k..(i + 1) * k].copy_from_slice(&blk);
        }
        for i in (0..n).rev() {
            let mut blk: Vec<Cpx> = y[i * k..(i + 1) * k].to_vec();
            for a in 1..=self.l {
                if i + a >= n {
                    break;
                }
                let below = self.row(i + a);
                let next = &y[(i + a) * k..(i + a + 1) * k];
                for (dst, v) in blk.iter_mut().zip(below[a].adjoint_matvec(next)) {
                    *dst -= v;
                }
                tally.other += (k * k) as u64;
            }
            solve_lower_adjoint(&self.row(i)[0], &mut blk);
            tally.other += (k * k) as u64;
            y[i * k..(i + 1) * k].copy_from_slice(&blk);
        }
        y
    }
}

/// Joint detection by approximate banded Cholesky: factor the leading
/// `depth` block rows of the banded correlation matrix, extend by stationary
/// replication, and solve against the matched-filter output `v`.
pub fn jd_chol(
    bands: &BlockBandSet,
    v: &[Cpx],
    depth: CholDepth,
    tally: &mut OpTally,
) -> Result<Vec<Cpx>> {
    let k = bands.k();
    if v.is_empty() || v.len() % k != 0 {
        return Err(Error::InvalidInput(
            "matched filter output must be a nonzero whole number of blocks".into(),
        ));
    }
    let factor = banded_cholesky(bands, v.len() / k, depth, tally)?;
    Ok(factor.solve(v, tally))
}

/// Downlink chip-level model: every user's chips pass through one common
/// channel, so equalization happens once at chip rate and users separate by
/// despreading afterwards.
pub struct ChipEqualizerModel {
    /// Scalar bands of `sum_n H_n^H H_n + sigma2 I` (1x1 blocks, band 0 is
    /// the diagonal). `H_n` is tall Toeplitz, so the bands are exact for
    /// every row: band `m` holds `sum_n sum_t conj(h_n[t]) h_n[t+m]`.
    pub bands: BlockBandSet,
    /// Channel taps per sampling phase, straight from the realization.
    pub taps: Vec<Vec<Cpx>>,
}

/// Build the chip equalizer model for a common downlink channel.
pub fn chip_equalizer_model(real: &ChannelRealization, sigma2: f64) -> Result<ChipEqualizerModel> {
    if real.phases.is_empty() || real.phases[0].is_empty() {
        return Err(Error::InvalidInput("channel realization has no taps".into()));
    }
    let w = real.phases[0].len();
    let mut bands = vec![CMat::zeros(1, 1); w];
    for taps in &real.phases {
        if taps.len() != w {
            return Err(Error::InvalidInput("all phases must share one tap length".into()));
        }
        for m in 0..w {
            let mut acc = Cpx::new(0.0, 0.0);
            for t in 0..(w - m) {
                acc += taps[t].conj() * taps[t + m];
            }
            bands[m].add_to(0, 0, acc);
        }
    }
    // The zero-lag autocorrelation is real by construction; drop rounding dust
    // so the band set passes its Hermitian check.
    let e = bands[0].get(0, 0).re + sigma2;
    bands[0].set(0, 0, Cpx::new(e, 0.0));
    Ok(ChipEqualizerModel { bands: BlockBandSet::from_blocks(bands, sigma2)?, taps: real.phases.clone() })
}

/// Chip-rate matched filter `sum_n H_n^H r_n`. The window must hold the
/// field's chips plus the channel tail (`n_field + w - 1` samples per phase).
pub fn chip_matched_filter(
    model: &ChipEqualizerModel,
    window_phases: &[Vec<Cpx>],
    tally: &mut OpTally,
) -> Vec<Cpx> {
    let w = model.taps[0].len();
    assert_eq!(window_phases.len(), model.taps.len(), "phase counts must match");
    let n_field = window_phases[0].len() + 1 - w;
    let mut corr = vec![Cpx::new(0.0, 0.0); n_field];
    for (taps, window) in model.taps.iter().zip(window_phases) {
        assert_eq!(window.len(), n_field + w - 1, "window must cover field plus channel tail");
        for i in 0..n_field {
            let mut acc = Cpx::new(0.0, 0.0);
            for (t, &h) in taps.iter().enumerate() {
                acc += h.conj() * window[i + t];
            }
            corr[i] += acc;
            tally.matched_filter += w as u64;
        }
    }
    corr
}

/// Single-user detection, Cholesky form: chip-level MMSE equalization via
/// the same banded factor-and-replicate scheme as `jd_chol` (scalar blocks),
/// then despreading with every active code.
pub fn sd_chol(
    model: &ChipEqualizerModel,
    window_phases: &[Vec<Cpx>],
    codes: &CodeSet,
    depth: CholDepth,
    tally: &mut OpTally,
) -> Result<Vec<Cpx>> {
    let corr = chip_matched_filter(model, window_phases, tally);
    if corr.len() % codes.sf() != 0 {
        return Err(Error::InvalidInput(
            "field length must be a whole number of symbol periods".into(),
        ));
    }
    let factor = banded_cholesky(&model.bands, corr.len(), depth, tally)?;
    let chips = factor.solve(&corr, tally);
    Ok(despread_field(&chips, codes))
}

/// Solve the `m`-point circulant system whose first column is the wrapped
/// band sequence of `bands`, against the (already wrapped or zero-padded)
/// chip matched-filter output `corr`. Scalar bands only.
///
/// Returns the full `m`-point solution; callers truncate as needed. A
/// spectral bin below `1e-12` of the largest is reported, not divided by.
pub fn circulant_chip_equalize(
    bands: &BlockBandSet,
    corr: &[Cpx],
    m: usize,
    tally: &mut OpTally,
) -> Result<Vec<Cpx>> {
    assert_eq!(bands.k(), 1, "chip equalization uses scalar bands");
    let l = bands.l();
    if m < 2 * l + 1 {
        return Err(Error::InvalidConfig(
            "circulant length must cover the two-sided band".into(),
        ));
    }
    if corr.len() > m {
        return Err(Error::InvalidInput("correlation output longer than the circulant".into()));
    }
    let plan = FftPlan::new(m);
    let mut spectrum = vec![Cpx::new(0.0, 0.0); m];
    spectrum[0] = bands.band(0).get(0, 0);
    for a in 1..=l {
        let v = bands.band(a).get(0, 0);
        spectrum[a] = v;
        spectrum[m - a] = v.conj();
    }
    plan.transform(&mut spectrum, false, tally);
    let peak = spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if let Some(bin) = spectrum.iter().position(|v| v.norm() < 1e-12 * peak) {
        return Err(Error::SpectralNull { bin });
    }
    let mut hat = vec![Cpx::new(0.0, 0.0); m];
    hat[..corr.len()].copy_from_slice(corr);
    plan.transform(&mut hat, false, tally);
    for (v, s) in hat.iter_mut().zip(&spectrum) {
        *v /= s;
    }
    tally.other += m as u64;
    plan.transform(&mut hat, true, tally);
    Ok(hat)
}

/// Single-user detection, FFT form: approximate the chip correlation matrix
/// by a circulant (FFT length: next power of two covering field plus band),
/// equalize per frequency bin, then despread.
pub fn sd_fft(
    model: &ChipEqualizerModel,
    window_phases: &[Vec<Cpx>],
    codes: &CodeSet,
    tally: &mut OpTally,
) -> Result<Vec<Cpx>> {
    let corr = chip_matched_filter(model, window_phases, tally);
    if corr.len() % codes.sf() != 0 {
        return Err(Error::InvalidInput(
            "field length must be a whole number of symbol periods".into(),
        ));
    }
    let w = model.taps[0].len();
    let m = (corr.len() + w - 1).next_power_of_two();
    let hat = circulant_chip_equalize(&model.bands, &corr, m, tally)?;
    Ok(despread_field(&hat[..corr.len()], codes))
}

/// Matched filter detector: correlate with each composite code waveform and
/// normalize by that waveform's energy (plus the noise floor), ignoring all
/// cross-code structure.
pub fn matched_filter_detector(
    tb: &TransferBlocks,
    window_phases: &[Vec<Cpx>],
    n_sym: usize,
    sigma2: f64,
    tally: &mut OpTally,
) -> Vec<Cpx> {
    let k = tb.k();
    let v = crate::detector::matched_filter_direct(tb, window_phases, n_sym, tally);
    let mut diag = vec![sigma2; k];
    for phase in 0..tb.num_phases() {
        for (kk, d) in diag.iter_mut().enumerate() {
            *d += tb
                .stacked_column(phase, kk)
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>();
        }
    }
    let mut out = v;
    for (i, v) in out.iter_mut().enumerate() {
        *v /= diag[i % k];
    }
    out
}
