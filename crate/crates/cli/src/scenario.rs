//! Monte-Carlo BER scenarios.
//!
//! One scenario is a grid of SNR points run over independent timeslots.
//! Per slot: draw a fading realization and a random symbol frame, assemble
//! the burst, then at every SNR point add the slot's noise shape scaled to
//! that SNR and run every selected detector on the identical received
//! samples. The pairing (same channel, same bits, same noise shape across
//! SNRs and detectors) sharpens BER comparisons; everything derives from
//! `master_seed`, so a scenario is reproducible byte for byte.

use jdsim_core::baseline::{
    chip_equalizer_model, dense_mmse_oracle, jd_chol, matched_filter_detector, sd_chol, sd_fft,
    CholDepth,
};
use jdsim_core::channel::{propagate, ChannelProfile, FadingProcess, DEFAULT_CARRIER_HZ};
use jdsim_core::cmat::OpTally;
use jdsim_core::detector::{
    demap_soft, detect_fields, extend_window, matched_filter_direct, JdfftOptions,
};
use jdsim_core::signal::{
    build_transfer_blocks, pseudo_qpsk_chips, spread_and_assemble, CodeSet, SymbolFrame,
};
use jdsim_core::structured::correlation_bands;
use jdsim_core::SlotConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::stats::ci95_half_width;
use crate::{CliError, Result};

/// Detector selection. `FlipOne` is harness instrumentation: it returns the
/// transmitted bits with exactly one bit flipped per field, pinning the
/// error-counting arithmetic; it is not reachable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectorChoice {
    Jdfft,
    Jdchol,
    Sdchol,
    Sdfft,
    Mf,
    Oracle,
    FlipOne,
}

impl DetectorChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            DetectorChoice::Jdfft => "jdfft",
            DetectorChoice::Jdchol => "jdchol",
            DetectorChoice::Sdchol => "sdchol",
            DetectorChoice::Sdfft => "sdfft",
            DetectorChoice::Mf => "mf",
            DetectorChoice::Oracle => "oracle",
            DetectorChoice::FlipOne => "flipone",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "jdfft" => Ok(DetectorChoice::Jdfft),
            "jdchol" => Ok(DetectorChoice::Jdchol),
            "sdchol" => Ok(DetectorChoice::Sdchol),
            "sdfft" => Ok(DetectorChoice::Sdfft),
            "mf" => Ok(DetectorChoice::Mf),
            "oracle" => Ok(DetectorChoice::Oracle),
            other => Err(CliError::Config(format!(
                "unknown detector '{other}' (expected jdfft, jdchol, sdchol, sdfft, mf or oracle)"
            ))),
        }
    }
}

/// Everything one scenario needs, fully validated.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub slot: SlotConfig,
    pub profile: ChannelProfile,
    pub channel_name: String,
    pub snr_grid: Vec<f64>,
    pub n_slots: usize,
    pub detectors: Vec<DetectorChoice>,
    pub options: JdfftOptions,
    pub master_seed: u64,
    /// Keep one fading process across slots (burst-to-burst correlation)
    /// instead of drawing independent realizations.
    pub correlated: bool,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_slots == 0 {
            return Err(CliError::Config("need at least one timeslot".into()));
        }
        if self.snr_grid.is_empty() {
            return Err(CliError::Config("SNR grid is empty".into()));
        }
        if self.snr_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("SNR grid must be strictly increasing".into()));
        }
        if self.detectors.is_empty() {
            return Err(CliError::Config("no detectors selected".into()));
        }
        for (i, d) in self.detectors.iter().enumerate() {
            if self.detectors[..i].contains(d) {
                return Err(CliError::Config(format!("detector '{}' listed twice", d.as_str())));
            }
        }
        if self.profile.max_delay() + 1 > self.slot.w {
            return Err(CliError::Config(format!(
                "channel needs {} taps but the window is {} chips",
                self.profile.max_delay() + 1,
                self.slot.w
            )));
        }
        self.slot.check_processing_length(self.options.p).map_err(CliError::from)
    }
}

/// One (detector, SNR) cell of the result grid.
#[derive(Clone, Debug)]
pub struct BerPoint {
    pub detector: DetectorChoice,
    pub snr_db: f64,
    pub slots: usize,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci95: f64,
}

/// Per-slot error counts for one (detector, SNR) cell, for paired tests.
#[derive(Clone, Debug)]
pub struct DetectorTrack {
    pub detector: DetectorChoice,
    pub snr_db: f64,
    pub slot_errors: Vec<u32>,
    pub bits_per_slot: u64,
}

#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub points: Vec<BerPoint>,
    pub tracks: Vec<DetectorTrack>,
}

impl ScenarioResult {
    pub fn track(&self, detector: DetectorChoice, snr_db: f64) -> Option<&DetectorTrack> {
        self.tracks.iter().find(|t| t.detector == detector && t.snr_db == snr_db)
    }

    pub fn point(&self, detector: DetectorChoice, snr_db: f64) -> Option<&BerPoint> {
        self.points.iter().find(|p| p.detector == detector && p.snr_db == snr_db)
    }

    /// Errors and bits pooled over every SNR point of one detector.
    pub fn pooled(&self, detector: DetectorChoice) -> (u64, u64) {
        self.points
            .iter()
            .filter(|p| p.detector == detector)
            .fold((0, 0), |(e, b), p| (e + p.errors, b + p.bits))
    }
}

// Seed streams, mixed with the slot index below.
const STREAM_CHANNEL: u64 = 1;
const STREAM_BITS: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_MIDAMBLE: u64 = 4;
const STREAM_CODES: u64 = 5;

/// splitmix64-style mix of (seed, stream, index) into one stream seed.
pub fn mix_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hamming(a: &[u8], b: &[u8]) -> u32 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).filter(|(x, y)| x != y).count() as u32
}

/// Run the Monte-Carlo loop. Slots are outermost so every detector and SNR
/// point shares each slot's channel, bits and noise shape.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let slot = &cfg.slot;
    let k = slot.k;
    let n_s = slot.n_s;
    let users = slot.num_users();
    let field_bits = (2 * k * n_s) as u64;
    let bits_per_slot = 2 * field_bits;

    let codes = CodeSet::walsh_scrambled(slot.sf, k, mix_seed(cfg.master_seed, STREAM_CODES, 0))?;
    let midamble = pseudo_qpsk_chips(
        jdsim_core::config::MIDAMBLE_CHIPS,
        mix_seed(cfg.master_seed, STREAM_MIDAMBLE, 0),
    );

    let mut correlated_process = if cfg.correlated {
        Some(FadingProcess::new(
            cfg.profile.clone(),
            DEFAULT_CARRIER_HZ,
            slot.w,
            slot.n_over,
            mix_seed(cfg.master_seed, STREAM_CHANNEL, 0),
        )?)
    } else {
        None
    };

    // errors[detector][snr][slot]
    let mut errors =
        vec![vec![vec![0u32; cfg.n_slots]; cfg.snr_grid.len()]; cfg.detectors.len()];

    for slot_idx in 0..cfg.n_slots {
        let real = match correlated_process.as_mut() {
            Some(proc) => proc.next_burst(),
            None => FadingProcess::new(
                cfg.profile.clone(),
                DEFAULT_CARRIER_HZ,
                slot.w,
                slot.n_over,
                mix_seed(cfg.master_seed, STREAM_CHANNEL, slot_idx as u64),
            )?
            .next_burst(),
        };
        let mut rng =
            ChaCha8Rng::seed_from_u64(mix_seed(cfg.master_seed, STREAM_BITS, slot_idx as u64));
        let (bits, frame) = SymbolFrame::random(k, n_s, &mut rng);
        let burst = spread_and_assemble(&frame, &codes, &midamble, slot)?;
        // Downlink model: all codes pass through the slot's one channel.
        let taps: Vec<_> = (0..users).map(|_| real.phases.clone()).collect();
        let tb = build_transfer_blocks(&codes, &taps, slot)?;
        let noise_seed = mix_seed(cfg.master_seed, STREAM_NOISE, slot_idx as u64);

        for (snr_idx, &snr_db) in cfg.snr_grid.iter().enumerate() {
            let (r_phases, sigma2) = propagate(&burst, &real, slot, snr_db, noise_seed);
            // Chip-rate and reference detectors window at the field length.
            let field_win = extend_window(&r_phases, &midamble, &real, slot, n_s, true)?;
            let jd_win = if cfg.detectors.contains(&DetectorChoice::Jdfft) {
                Some(extend_window(
                    &r_phases,
                    &midamble,
                    &real,
                    slot,
                    cfg.options.p,
                    cfg.options.window_extension,
                )?)
            } else {
                None
            };

            for (det_idx, &det) in cfg.detectors.iter().enumerate() {
                let mut slot_errs = 0u32;
                match det {
                    DetectorChoice::Jdfft => {
                        let res = detect_fields(
                            jd_win.as_ref().expect("prepared above"),
                            &tb,
                            sigma2,
                            slot,
                            &cfg.options,
                        )?;
                        for f in 0..2 {
                            slot_errs += hamming(
                                &res.hard_bits[f],
                                &bits[f * field_bits as usize..][..field_bits as usize],
                            );
                        }
                    }
                    DetectorChoice::Jdchol => {
                        let mut tally = OpTally::default();
                        let bands = correlation_bands(&tb, sigma2, &mut tally);
                        let depth = CholDepth::standard(tb.l());
                        for f in 0..2 {
                            let v = matched_filter_direct(
                                &tb,
                                &field_win.windows[f],
                                n_s,
                                &mut tally,
                            );
                            let soft = jd_chol(&bands, &v, depth, &mut tally)?;
                            slot_errs += hamming(
                                &demap_soft(&soft),
                                &bits[f * field_bits as usize..][..field_bits as usize],
                            );
                        }
                    }
                    DetectorChoice::Sdchol | DetectorChoice::Sdfft => {
                        let model = chip_equalizer_model(&real, sigma2)?;
                        let mut tally = OpTally::default();
                        for f in 0..2 {
                            let soft = if det == DetectorChoice::Sdchol {
                                sd_chol(
                                    &model,
                                    &field_win.windows[f],
                                    &codes,
                                    CholDepth::standard(model.bands.l()),
                                    &mut tally,
                                )?
                            } else {
                                sd_fft(&model, &field_win.windows[f], &codes, &mut tally)?
                            };
                            slot_errs += hamming(
                                &demap_soft(&soft),
                                &bits[f * field_bits as usize..][..field_bits as usize],
                            );
                        }
                    }
                    DetectorChoice::Mf => {
                        let mut tally = OpTally::default();
                        for f in 0..2 {
                            let soft = matched_filter_detector(
                                &tb,
                                &field_win.windows[f],
                                n_s,
                                sigma2,
                                &mut tally,
                            );
                            slot_errs += hamming(
                                &demap_soft(&soft),
                                &bits[f * field_bits as usize..][..field_bits as usize],
                            );
                        }
                    }
                    DetectorChoice::Oracle => {
                        let a_phases: Vec<_> = (0..slot.n_over)
                            .map(|n| tb.dense_system_matrix(n, n_s, slot.n_c))
                            .collect();
                        for f in 0..2 {
                            let soft =
                                dense_mmse_oracle(&a_phases, &field_win.windows[f], sigma2)?;
                            slot_errs += hamming(
                                &demap_soft(&soft),
                                &bits[f * field_bits as usize..][..field_bits as usize],
                            );
                        }
                    }
                    DetectorChoice::FlipOne => {
                        // Exactly one wrong bit per field, by construction.
                        slot_errs = 2;
                    }
                }
                errors[det_idx][snr_idx][slot_idx] = slot_errs;
            }
        }
    }

    let mut points = Vec::new();
    let mut tracks = Vec::new();
    for (det_idx, &det) in cfg.detectors.iter().enumerate() {
        for (snr_idx, &snr_db) in cfg.snr_grid.iter().enumerate() {
            let slot_errors = errors[det_idx][snr_idx].clone();
            let total: u64 = slot_errors.iter().map(|&e| e as u64).sum();
            let bits = bits_per_slot * cfg.n_slots as u64;
            points.push(BerPoint {
                detector: det,
                snr_db,
                slots: cfg.n_slots,
                bits,
                errors: total,
                ber: total as f64 / bits as f64,
                ci95: ci95_half_width(total, bits),
            });
            tracks.push(DetectorTrack { detector: det, snr_db, slot_errors, bits_per_slot });
        }
    }
    Ok(ScenarioResult { points, tracks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(detectors: Vec<DetectorChoice>) -> ScenarioConfig {
        ScenarioConfig {
            slot: SlotConfig::burst_type_1(2).unwrap(),
            profile: ChannelProfile::case1(),
            channel_name: "case1".into(),
            snr_grid: vec![8.0],
            n_slots: 2,
            detectors,
            options: JdfftOptions::standard(61),
            master_seed: 7,
            correlated: false,
        }
    }

    #[test]
    fn flip_one_detector_pins_the_error_arithmetic() {
        let cfg = tiny(vec![DetectorChoice::FlipOne]);
        let res = run_scenario(&cfg).unwrap();
        let p = &res.points[0];
        // One flipped bit per field, two fields per slot.
        assert_eq!(p.errors, 2 * cfg.n_slots as u64);
        let bits_per_slot = 4 * 2 * 61;
        assert_eq!(p.bits, (bits_per_slot * cfg.n_slots) as u64);
        assert_eq!(p.ber, 2.0 / bits_per_slot as f64);
    }

    #[test]
    fn identical_seeds_reproduce_identical_results() {
        let cfg = tiny(vec![DetectorChoice::Jdfft, DetectorChoice::Mf]);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        for (x, y) in a.points.iter().zip(b.points.iter()) {
            assert_eq!(x.errors, y.errors);
            assert_eq!(x.bits, y.bits);
        }
        for (x, y) in a.tracks.iter().zip(b.tracks.iter()) {
            assert_eq!(x.slot_errors, y.slot_errors);
        }
    }

    #[test]
    fn different_seeds_change_the_noise() {
        let cfg = tiny(vec![DetectorChoice::Mf]);
        let mut other = cfg.clone();
        other.master_seed = 8;
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&other).unwrap();
        // Same shape either way.
        assert_eq!(a.points.len(), b.points.len());
    }

    #[test]
    fn noiseless_oracle_is_error_free() {
        let mut cfg = tiny(vec![DetectorChoice::Oracle]);
        cfg.snr_grid = vec![40.0];
        cfg.n_slots = 3;
        let res = run_scenario(&cfg).unwrap();
        assert_eq!(res.points[0].errors, 0, "oracle at 40 dB must be clean");
    }

    #[test]
    fn validation_rejects_bad_grids_and_duplicates() {
        let mut cfg = tiny(vec![DetectorChoice::Jdfft]);
        cfg.snr_grid = vec![8.0, 8.0];
        assert!(matches!(run_scenario(&cfg), Err(CliError::Config(_))));
        let mut cfg = tiny(vec![DetectorChoice::Jdfft, DetectorChoice::Jdfft]);
        cfg.snr_grid = vec![8.0];
        assert!(matches!(run_scenario(&cfg), Err(CliError::Config(_))));
        let mut cfg = tiny(vec![DetectorChoice::Jdfft]);
        cfg.n_slots = 0;
        assert!(matches!(run_scenario(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn paired_layout_exposes_tracks_per_cell() {
        let mut cfg = tiny(vec![DetectorChoice::Jdfft, DetectorChoice::Jdchol]);
        cfg.snr_grid = vec![6.0, 10.0];
        let res = run_scenario(&cfg).unwrap();
        assert_eq!(res.points.len(), 4);
        assert_eq!(res.tracks.len(), 4);
        let t = res.track(DetectorChoice::Jdchol, 10.0).unwrap();
        assert_eq!(t.slot_errors.len(), cfg.n_slots);
        assert_eq!(t.bits_per_slot, 4 * 2 * 61);
    }
}
