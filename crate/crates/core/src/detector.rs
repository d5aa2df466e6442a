//! Fast frequency-domain joint detector.
//!
//! Pipeline per burst: extend each data field's window past its end using
//! the known-midamble-cancelled samples, build the correlation bands and
//! their circulant spectra, run a matched filter (exact time-domain form or
//! the folded FFT form), transform to the frequency domain, solve one K-by-K
//! system per bin, transform back, and keep the first `n_s` symbol blocks.
//!
//! With noise regularization the per-bin systems are Hermitian positive
//! definite; they are still solved with partial pivoting, and a pivot
//! collapsing below `1e-12` of the bin norm is reported as an error carrying
//! the bin index rather than silently regularized.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::ChannelRealization;
use crate::cmat::{gauss_jordan_inverse, lu_factor, CMat, LuFactors, OpTally};
use crate::config::SlotConfig;
use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::signal::{build_transfer_blocks, qpsk_bits, CodeSet, TransferBlocks};
use crate::structured::{
    block_dft, block_idft, correlation_bands, correlation_spectrum, transfer_spectrum,
    BlockSpectrum, TransferSpectrum,
};
use crate::Cpx;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchedFilterMode {
    /// Exact time-domain correlation with the composite waveforms.
    Direct,
    /// Folded circulant form evaluated per frequency bin.
    Fft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinSolveMode {
    /// Factor each bin once per burst, substitute once per field.
    Lu,
    /// Invert each bin once per burst, multiply once per field.
    ExplicitInverse,
}

#[derive(Clone, Copy, Debug)]
pub struct JdfftOptions {
    /// Processing length in symbol periods; `n_s` or the next FFT-friendly
    /// length (64 for the standard burst).
    pub p: usize,
    pub matched_filter: MatchedFilterMode,
    pub bin_solve: BinSolveMode,
    /// Extend each field window by `w - 1` chips of midamble-cancelled
    /// samples; off means raw field chips only, zero-padded.
    pub window_extension: bool,
}

impl JdfftOptions {
    pub fn standard(p: usize) -> Self {
        JdfftOptions {
            p,
            matched_filter: MatchedFilterMode::Direct,
            bin_solve: BinSolveMode::ExplicitInverse,
            window_extension: true,
        }
    }
}

/// Per-burst numeric health and cost counters.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub tally: OpTally,
    /// Smallest per-bin reciprocal-condition estimate seen this burst.
    pub min_rcond: f64,
    pub bins_solved: usize,
}

#[derive(Clone, Debug)]
pub struct DetectionResult {
    /// Soft symbol estimates per data field, `k * n_s` each, frame order.
    pub soft: [Vec<Cpx>; 2],
    /// Hard bits per data field, `2 * k * n_s` each, frame order.
    pub hard_bits: [Vec<u8>; 2],
    pub diagnostics: Diagnostics,
}

/// Per-field, per-phase detection windows of `p * sf + w - 1` chips.
#[derive(Clone, Debug)]
pub struct FieldWindows {
    pub windows: [Vec<Vec<Cpx>>; 2],
}

/// Cuts the two data-field windows out of the received burst.
///
/// With extension on, each window runs from the field start across the
/// following midamble/guard samples, and the known midamble's received
/// contribution (its convolution with the channel) is subtracted wherever
/// it lands inside the window, including the spill into the second field's
/// head. With extension off the window holds the field's own `sf * n_s`
/// chips untouched, zero-padded to length; no samples beyond the field and
/// no cancellation are used.
pub fn extend_window(
    r_phases: &[Vec<Cpx>],
    midamble: &[Cpx],
    real: &ChannelRealization,
    cfg: &SlotConfig,
    p: usize,
    extension: bool,
) -> Result<FieldWindows> {
    cfg.check_processing_length(p)?;
    if midamble.len() != crate::config::MIDAMBLE_CHIPS {
        return Err(Error::InvalidInput("midamble must be 512 chips".into()));
    }
    if r_phases.len() != real.phases.len() {
        return Err(Error::InvalidInput("one received vector per channel phase".into()));
    }
    let win_len = cfg.window_chips(p);
    let starts = cfg.field_starts();
    let needed = starts[1] + if extension { win_len } else { cfg.field_chips() };
    if r_phases.iter().any(|r| r.len() < needed) {
        return Err(Error::InvalidInput(alloc::format!(
            "received phases must span {needed} chips to cut field windows"
        )));
    }
    let mid_start = cfg.midamble_start();
    let mut windows: [Vec<Vec<Cpx>>; 2] = [Vec::new(), Vec::new()];
    for (f, &start) in starts.iter().enumerate() {
        for (n, r) in r_phases.iter().enumerate() {
            let mut w = vec![Cpx::new(0.0, 0.0); win_len];
            let take = if extension { win_len } else { cfg.field_chips() };
            w[..take].copy_from_slice(&r[start..start + take]);
            if extension {
                // Remove the known midamble's echo from every window chip
                // it reaches: absolute chips [mid_start, mid_start + 512 + w).
                let h = &real.phases[n];
                for (j, &m) in midamble.iter().enumerate() {
                    if m == Cpx::new(0.0, 0.0) {
                        continue;
                    }
                    let chip0 = mid_start + j;
                    for (t, &hv) in h.iter().enumerate() {
                        let abs = chip0 + t;
                        if abs >= start && abs < start + win_len {
                            w[abs - start] -= m * hv;
                        }
                    }
                }
            }
            windows[f].push(w);
        }
    }
    Ok(FieldWindows { windows })
}

/// Exact matched filter `v = sum_n A_n^H r_n` over `p` symbol periods.
/// Output length `p * k`; entry `(i, kk)` correlates the window against
/// code `kk`'s composite waveform starting at chip `i * sf`.
pub fn matched_filter_direct(
    tb: &TransferBlocks,
    window_phases: &[Vec<Cpx>],
    p: usize,
    tally: &mut OpTally,
) -> Vec<Cpx> {
    let k = tb.k();
    let sf = tb.sf();
    // Correlation span per symbol: the window holds p symbol periods plus
    // the channel tail, so the last symbol's full span just fits.
    let span = window_phases[0].len() - (p - 1) * sf;
    let mut v = vec![Cpx::new(0.0, 0.0); p * k];
    for (phase, window) in window_phases.iter().enumerate() {
        assert_eq!(window.len(), (p - 1) * sf + span);
        for kk in 0..k {
            let col = tb.stacked_column(phase, kk);
            for i in 0..p {
                let base = i * sf;
                let mut acc = Cpx::new(0.0, 0.0);
                for (t, cv) in col.iter().take(span).enumerate() {
                    acc += cv.conj() * window[base + t];
                }
                tally.matched_filter += span as u64;
                v[i * k + kk] += acc;
            }
        }
    }
    v
}

/// Frequency-domain matched filter: folds each window onto `p * sf` chips
/// (the tail wraps to the front), block-DFTs it over sf-chip blocks, and
/// multiplies each bin by `Lambda_1^H`. Output is `block_dft` of the
/// circulant matched filter `A_c^H r`, length `p * k`, bin-major.
pub fn matched_filter_fft(
    ts: &TransferSpectrum,
    window_phases: &[Vec<Cpx>],
    tb_sf: usize,
    tb_k: usize,
    plan: &FftPlan,
    tally: &mut OpTally,
) -> Vec<Cpx> {
    let p = plan.len();
    let folded_len = p * tb_sf;
    let mut out = vec![Cpx::new(0.0, 0.0); p * tb_k];
    for (phase, window) in window_phases.iter().enumerate() {
        let mut folded = vec![Cpx::new(0.0, 0.0); folded_len];
        for (j, &v) in window.iter().enumerate() {
            folded[j % folded_len] += v;
        }
        tally.other += (window.len() - folded_len) as u64;
        block_dft(&mut folded, tb_sf, plan, tally);
        for bin in 0..p {
            let l1 = ts.block(phase, bin);
            let fr = &folded[bin * tb_sf..(bin + 1) * tb_sf];
            for kk in 0..tb_k {
                let mut acc = Cpx::new(0.0, 0.0);
                for (q, &fv) in fr.iter().enumerate() {
                    acc += l1.get(q, kk).conj() * fv;
                }
                tally.matched_filter += tb_sf as u64;
                out[bin * tb_k + kk] += acc;
            }
        }
    }
    out
}

/// Factored (or inverted) per-bin systems, built once per burst.
pub enum BinSolver {
    Lu(Vec<LuFactors>),
    Inverse(Vec<CMat>),
}

impl BinSolver {
    /// Prepares every bin of the spectrum. A pivot below `1e-12` of the
    /// bin's norm surfaces as an error naming the offending bin.
    pub fn prepare(
        spectrum: &BlockSpectrum,
        mode: BinSolveMode,
        tally: &mut OpTally,
        diag: &mut Diagnostics,
    ) -> Result<Self> {
        let p = spectrum.p();
        diag.min_rcond = f64::INFINITY;
        match mode {
            BinSolveMode::Lu => {
                let mut factors = Vec::with_capacity(p);
                for bin in 0..p {
                    let f = lu_factor(spectrum.block(bin), tally).map_err(|e| match e {
                        Error::Singular { pivot, .. } => Error::SingularBin { bin, pivot },
                        other => other,
                    })?;
                    let rcond = if f.pivot_max > 0.0 { f.pivot_min / f.pivot_max } else { 0.0 };
                    diag.min_rcond = diag.min_rcond.min(rcond);
                    factors.push(f);
                }
                diag.bins_solved = p;
                Ok(BinSolver::Lu(factors))
            }
            BinSolveMode::ExplicitInverse => {
                let mut inverses = Vec::with_capacity(p);
                for bin in 0..p {
                    let inv = gauss_jordan_inverse(spectrum.block(bin), tally).map_err(|e| {
                        match e {
                            Error::Singular { pivot, .. } => Error::SingularBin { bin, pivot },
                            other => other,
                        }
                    })?;
                    let denom = spectrum.block(bin).frob() * inv.frob();
                    let rcond = if denom > 0.0 { 1.0 / denom } else { 0.0 };
                    diag.min_rcond = diag.min_rcond.min(rcond);
                    inverses.push(inv);
                }
                diag.bins_solved = p;
                Ok(BinSolver::Inverse(inverses))
            }
        }
    }

    /// Solves all bins in place: `rhs` holds `p` contiguous K-vectors.
    pub fn solve(&self, rhs: &mut [Cpx], k: usize, tally: &mut OpTally) {
        match self {
            BinSolver::Lu(factors) => {
                for (bin, f) in factors.iter().enumerate() {
                    f.solve(&mut rhs[bin * k..(bin + 1) * k], tally);
                }
            }
            BinSolver::Inverse(inverses) => {
                let mut scratch = vec![Cpx::new(0.0, 0.0); k];
                for (bin, inv) in inverses.iter().enumerate() {
                    let x = &mut rhs[bin * k..(bin + 1) * k];
                    for (r, s) in scratch.iter_mut().enumerate() {
                        let mut acc = Cpx::new(0.0, 0.0);
                        for c in 0..k {
                            acc += inv.get(r, c) * x[c];
                        }
                        tally.bin_apply += k as u64;
                        *s = acc;
                    }
                    x.copy_from_slice(&scratch);
                }
            }
        }
    }
}

/// Hard-decision bits for one field of soft symbols, frame bit order.
pub fn demap_soft(soft: &[Cpx]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(2 * soft.len());
    for &s in soft {
        let (b0, b1) = qpsk_bits(s);
        bits.push(b0);
        bits.push(b1);
    }
    bits
}

/// Regroups one field's soft symbols per user: each user's codes are
/// concatenated in code-index order, `n_s` symbols per code.
pub fn group_by_user(soft: &[Cpx], cfg: &SlotConfig) -> Vec<Vec<Cpx>> {
    let n_s = soft.len() / cfg.k;
    let mut out = vec![Vec::new(); cfg.num_users()];
    for (u, stream) in out.iter_mut().enumerate() {
        for kk in cfg.codes_of_user(u) {
            for i in 0..n_s {
                stream.push(soft[i * cfg.k + kk]);
            }
        }
    }
    out
}

/// Core pipeline on prepared windows. Bands, spectra and bin factorizations
/// are built once; each field then runs matched filter, forward block DFT
/// (already folded in for the FFT matched filter), per-bin solve, inverse
/// block DFT, and truncation to `n_s` symbol blocks.
pub fn detect_fields(
    field_windows: &FieldWindows,
    tb: &TransferBlocks,
    sigma2: f64,
    cfg: &SlotConfig,
    options: &JdfftOptions,
) -> Result<DetectionResult> {
    cfg.check_processing_length(options.p)?;
    let p = options.p;
    let k = cfg.k;
    let mut diag = Diagnostics::default();
    let tally = &mut diag.tally;

    let bands = correlation_bands(tb, sigma2, tally);
    let spectrum = correlation_spectrum(&bands, p, tally)?;
    let plan = FftPlan::new(p);
    let ts = match options.matched_filter {
        MatchedFilterMode::Fft => Some(transfer_spectrum(tb, p, tally)?),
        MatchedFilterMode::Direct => None,
    };

    let mut diag2 = Diagnostics::default();
    let solver = BinSolver::prepare(&spectrum, options.bin_solve, tally, &mut diag2)?;
    diag.min_rcond = diag2.min_rcond;
    diag.bins_solved = diag2.bins_solved;

    let mut soft: [Vec<Cpx>; 2] = [Vec::new(), Vec::new()];
    for f in 0..2 {
        let windows = &field_windows.windows[f];
        let mut freq = match (&ts, options.matched_filter) {
            (Some(ts), MatchedFilterMode::Fft) => {
                matched_filter_fft(ts, windows, cfg.sf, k, &plan, tally)
            }
            _ => {
                let mut v = matched_filter_direct(tb, windows, p, tally);
                block_dft(&mut v, k, &plan, tally);
                v
            }
        };
        solver.solve(&mut freq, k, tally);
        block_idft(&mut freq, k, &plan, tally);
        freq.truncate(cfg.n_s * k);
        soft[f] = freq;
    }
    let hard_bits = [demap_soft(&soft[0]), demap_soft(&soft[1])];
    Ok(DetectionResult { soft, hard_bits, diagnostics: diag })
}

/// Full receiver for one burst: cuts windows from the received phases,
/// builds transfer blocks from the per-user channels, and runs the field
/// pipeline.
pub fn detect_burst(
    r_phases: &[Vec<Cpx>],
    midamble: &[Cpx],
    user_reals: &[ChannelRealization],
    codes: &CodeSet,
    sigma2: f64,
    cfg: &SlotConfig,
    options: &JdfftOptions,
) -> Result<DetectionResult> {
    if user_reals.is_empty() {
        return Err(Error::InvalidInput("need at least one channel realization".into()));
    }
    let windows =
        extend_window(r_phases, midamble, &user_reals[0], cfg, options.p, options.window_extension)?;
    let taps: Vec<Vec<Vec<Cpx>>> = user_reals.iter().map(|r| r.phases.clone()).collect();
    let tb = build_transfer_blocks(codes, &taps, cfg)?;
    detect_fields(&windows, &tb, sigma2, cfg, options)
}
