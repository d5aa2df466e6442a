//! Run outputs: BER CSV, a canonical manifest and complexity listings.
//!
//! Every byte written here is a pure function of the scenario settings and
//! the results. No timestamps, no hostnames, no float formatting that
//! depends on locale, so identical runs produce identical files.

use std::fmt::Write as _;
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use jdsim_core::complexity::{mrops, DetectorKind, MropsReport};
use jdsim_core::detector::{BinSolveMode, JdfftOptions};
use jdsim_core::SlotConfig;

use crate::config_file::ScenarioSettings;
use crate::scenario::ScenarioResult;
use crate::{CliError, Result};

/// BER results as CSV, rows in (detector, SNR) order as produced.
pub fn ber_csv(result: &ScenarioResult) -> String {
    let mut out = String::from("detector,snr_db,slots,bits,errors,ber,ci95\n");
    for p in &result.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6e},{:.6e}",
            p.detector.as_str(),
            p.snr_db,
            p.slots,
            p.bits,
            p.errors,
            p.ber,
            p.ci95
        );
    }
    out
}

/// Canonical `key = value` rendering of the settings, sorted by key.
pub fn canonical_config(settings: &ScenarioSettings) -> String {
    let snr: Vec<String> = settings.snr.iter().map(|s| s.to_string()).collect();
    let detectors: Vec<&str> = settings.detectors.iter().map(|d| d.as_str()).collect();
    let mut pairs = vec![
        ("channel", settings.channel.clone()),
        ("codes", settings.codes.to_string()),
        ("correlated", settings.correlated.to_string()),
        ("detectors", detectors.join(",")),
        ("oversample", settings.oversample.to_string()),
        ("p", settings.p.to_string()),
        ("seed", settings.seed.to_string()),
        ("slots", settings.slots.to_string()),
        ("snr", snr.join(",")),
    ];
    pairs.sort_by(|a, b| a.0.cmp(b.0));
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

fn fnv64_hex(text: &str) -> String {
    let mut h = FnvHasher::default();
    h.write(text.as_bytes());
    format!("{:016x}", h.finish())
}

/// Manifest describing one run: the canonical settings plus a hash over
/// settings and results, so two runs can be compared at a glance.
pub fn manifest(settings: &ScenarioSettings, csv: &str) -> String {
    let config = canonical_config(settings);
    let mut out = String::from("jdsim run manifest\n\n[config]\n");
    out.push_str(&config);
    out.push_str("\n[digest]\n");
    let _ = writeln!(out, "config_fnv64 = {}", fnv64_hex(&config));
    let _ = writeln!(out, "results_fnv64 = {}", fnv64_hex(csv));
    out
}

/// Write `ber.csv` and `manifest.txt` under `dir`, creating it if needed.
pub fn write_run(dir: &Path, settings: &ScenarioSettings, result: &ScenarioResult) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create '{}': {e}", dir.display())))?;
    let csv = ber_csv(result);
    let write = |name: &str, text: &str| {
        std::fs::write(dir.join(name), text).map_err(|e| {
            CliError::Config(format!("cannot write '{}': {e}", dir.join(name).display()))
        })
    };
    write("ber.csv", &csv)?;
    write("manifest.txt", &manifest(settings, &csv))?;
    Ok(())
}

/// Per-detector operation-count reports for one slot configuration.
pub fn complexity_reports(cfg: &SlotConfig, options: JdfftOptions) -> Vec<MropsReport> {
    DetectorKind::ALL.iter().map(|&kind| mrops(cfg, kind, options)).collect()
}

/// Totals rows: every detector at the given options, plus the block FFT
/// detector at its lean settings (LU bin solves), which is the figure the
/// comparison tables quote.
fn total_rows(cfg: &SlotConfig, options: JdfftOptions) -> Vec<(String, f64)> {
    let mut rows: Vec<(String, f64)> = complexity_reports(cfg, options)
        .iter()
        .map(|r| (r.detector.as_str().to_string(), r.total()))
        .collect();
    if options.bin_solve != BinSolveMode::Lu {
        let lean = JdfftOptions { bin_solve: BinSolveMode::Lu, ..options };
        let total = mrops(cfg, DetectorKind::Jdfft, lean).total();
        rows.insert(1, ("jdfft (lu bins)".to_string(), total));
    }
    rows
}

/// Concatenated CSV: every detector's stage rows plus a totals block.
pub fn complexity_csv(cfg: &SlotConfig, options: JdfftOptions) -> String {
    let mut out = String::new();
    for r in complexity_reports(cfg, options) {
        let _ = writeln!(out, "# {}", r.detector.as_str());
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out.push_str("detector,total_mrops\n");
    for (label, total) in total_rows(cfg, options) {
        let _ = writeln!(out, "{label},{total:.4}");
    }
    out
}

/// Human-readable tables plus a totals summary.
pub fn complexity_table(cfg: &SlotConfig, options: JdfftOptions) -> String {
    let mut out = String::new();
    for r in complexity_reports(cfg, options) {
        out.push_str(&r.to_table());
        out.push('\n');
    }
    out.push_str("totals (MROPS)\n");
    for (label, total) in total_rows(cfg, options) {
        let _ = writeln!(out, "  {label:<16} {total:>10.2}");
    }
    out
}
