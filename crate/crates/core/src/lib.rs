//! Joint detection for short-code CDMA bursts.
//!
//! The library models a TDD burst in which several spreading codes share one
//! timeslot: two data fields of `n_s` symbols around a known midamble, each
//! code spread by `sf` chips and filtered by a common multipath channel of
//! `w` chips. Stacking the despread symbols of all `k` codes gives the linear
//! model `r = A d + n` with a banded block-Toeplitz system matrix `A`, and
//! MMSE joint detection solves `(A^H A + sigma^2 I) d = A^H r`.
//!
//! The crate provides:
//!
//! * [`signal`] — spreading codes, symbol frames, burst assembly and the
//!   block impulse responses (`transfer blocks`) that generate `A`;
//! * [`channel`] — multipath profiles, fading realizations and propagation;
//! * [`structured`] — block correlation bands, block DFTs and the
//!   block-circulant spectra that diagonalize the circulant extension of
//!   `A^H A + sigma^2 I`;
//! * [`detector`] — the block-FFT joint detector: windows are extended into
//!   midamble and guard, matched-filtered, transformed bin-by-bin, solved
//!   with one small Hermitian system per frequency bin and transformed back;
//! * [`baseline`] — reference detectors: a dense MMSE oracle, approximate
//!   block-Cholesky joint detection, chip-rate MMSE equalizers (Cholesky and
//!   FFT variants) with despreading, and a plain matched filter;
//! * [`complexity`] — a closed-form operation-count model (MROPS) of every
//!   detector plus measured operation tallies for cross-checking.
//!
//! All algorithms are deterministic, allocation-only (`no_std` + `alloc`),
//! and keep their numeric conventions consistent: a forward block DFT uses
//! the negative-exponent kernel, the inverse is scaled by `1/p`, and all
//! spectra are validated against dense constructions in the test suite.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod channel;
pub mod cmat;
pub mod complexity;
pub mod config;
pub mod detector;
pub mod error;
pub mod fft;
pub mod signal;
pub mod structured;

pub use config::SlotConfig;
pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type Cpx = num_complex::Complex64;
