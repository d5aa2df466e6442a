//! Built-in numerical self-checks, runnable in the field via `jdsim selftest`.
//!
//! Each check exercises one identity the detector relies on and reports
//! pass or fail with a short reason. They run on small fixed inputs in a
//! few seconds, so they double as a smoke test for ports and new targets.

use jdsim_core::channel::{propagate, ChannelProfile, FadingProcess, DEFAULT_CARRIER_HZ};
use jdsim_core::cmat::OpTally;
use jdsim_core::detector::{detect_fields, extend_window, BinSolveMode, JdfftOptions};
use jdsim_core::fft::FftPlan;
use jdsim_core::Cpx;
use jdsim_core::signal::{
    build_transfer_blocks, pseudo_qpsk_chips, spread_and_assemble, CodeSet, SymbolFrame,
};
use jdsim_core::structured::{correlation_bands, correlation_spectrum};
use jdsim_core::SlotConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config_file::ScenarioSettings;
use crate::output::ber_csv;
use crate::scenario::run_scenario;

type Check = fn() -> Result<(), String>;

fn fail(msg: String) -> Result<(), String> {
    Err(msg)
}

fn check<T>(r: Result<T, jdsim_core::Error>) -> Result<T, String> {
    r.map_err(|e| format!("setup failed: {e}"))
}

/// Deterministic burst fixture shared by several checks.
struct Fixture {
    cfg: SlotConfig,
    tb: jdsim_core::signal::TransferBlocks,
    windows: jdsim_core::detector::FieldWindows,
    sigma2: f64,
    bits: Vec<u8>,
}

fn fixture(k: usize, p: usize, ebn0_db: f64, extension: bool) -> Result<Fixture, String> {
    let cfg = check(SlotConfig::burst_type_1(k))?;
    let profile = ChannelProfile::case1();
    let real = check(FadingProcess::new(profile, DEFAULT_CARRIER_HZ, cfg.w, cfg.n_over, 11))?
        .next_burst();
    let codes = check(CodeSet::walsh_scrambled(cfg.sf, k, 5))?;
    let midamble = pseudo_qpsk_chips(jdsim_core::config::MIDAMBLE_CHIPS, 17);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (bits, frame) = SymbolFrame::random(k, cfg.n_s, &mut rng);
    let burst = check(spread_and_assemble(&frame, &codes, &midamble, &cfg))?;
    let taps: Vec<_> = (0..cfg.num_users()).map(|_| real.phases.clone()).collect();
    let tb = check(build_transfer_blocks(&codes, &taps, &cfg))?;
    let (r_phases, sigma2) = propagate(&burst, &real, &cfg, ebn0_db, 29);
    let windows = check(extend_window(&r_phases, &midamble, &real, &cfg, p, extension))?;
    Ok(Fixture { cfg, tb, windows, sigma2, bits })
}

/// Forward/inverse transform round trip and energy conservation at the
/// two processing lengths the detector actually uses.
fn parseval() -> Result<(), String> {
    for len in [61usize, 64] {
        let plan = FftPlan::new(len);
        let x: Vec<Cpx> = (0..len)
            .map(|i| Cpx::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut buf = x.clone();
        let mut tally = OpTally::default();
        plan.transform(&mut buf, false, &mut tally);
        let ex: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        let ef: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
        if (ef - len as f64 * ex).abs() > 1e-9 * ef.max(1.0) {
            return fail(format!("length {len}: spectrum energy {ef} != {} * {ex}", len));
        }
        plan.transform(&mut buf, true, &mut tally);
        let err: f64 = buf
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if err > 1e-11 {
            return fail(format!("length {len}: round trip error {err}"));
        }
    }
    Ok(())
}

/// Every bin of the correlation spectrum must be Hermitian.
fn hermitian_bins() -> Result<(), String> {
    let fx = fixture(4, 61, 10.0, true)?;
    let mut tally = OpTally::default();
    let bands = correlation_bands(&fx.tb, fx.sigma2, &mut tally);
    let spectrum = check(correlation_spectrum(&bands, 61, &mut tally))?;
    for bin in 0..61 {
        let b = spectrum.block(bin);
        let bh = b.adjoint();
        let err = b.sub(&bh).frob();
        if err > 1e-10 * b.frob().max(1.0) {
            return fail(format!("bin {bin} departs from Hermitian by {err}"));
        }
    }
    Ok(())
}

/// The two per-bin solvers must agree on the same spectrum.
fn lu_matches_inverse() -> Result<(), String> {
    let fx = fixture(4, 61, 8.0, true)?;
    let mut opts = JdfftOptions::standard(61);
    opts.bin_solve = BinSolveMode::ExplicitInverse;
    let a = check(detect_fields(&fx.windows, &fx.tb, fx.sigma2, &fx.cfg, &opts))?;
    opts.bin_solve = BinSolveMode::Lu;
    let b = check(detect_fields(&fx.windows, &fx.tb, fx.sigma2, &fx.cfg, &opts))?;
    for f in 0..2 {
        let scale = a.soft[f].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let err = a.soft[f]
            .iter()
            .zip(b.soft[f].iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        if err > 1e-10 * scale.max(1.0) {
            return fail(format!("field {f}: solvers disagree by {err}"));
        }
    }
    Ok(())
}

/// Doubling the received window must exactly double the soft outputs.
fn scaling_equivariance() -> Result<(), String> {
    let fx = fixture(3, 61, 12.0, true)?;
    let opts = JdfftOptions::standard(61);
    let base = check(detect_fields(&fx.windows, &fx.tb, fx.sigma2, &fx.cfg, &opts))?;
    let mut scaled = fx.windows.clone();
    for f in 0..2 {
        for phase in scaled.windows[f].iter_mut() {
            for c in phase.iter_mut() {
                *c *= 2.0;
            }
        }
    }
    let twice = check(detect_fields(&scaled, &fx.tb, fx.sigma2, &fx.cfg, &opts))?;
    for f in 0..2 {
        let scale = base.soft[f].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let err = base.soft[f]
            .iter()
            .zip(twice.soft[f].iter())
            .map(|(x, y)| (x * 2.0 - y).norm())
            .fold(0.0, f64::max);
        if err > 1e-9 * scale.max(1.0) {
            return fail(format!("field {f}: scaling broke linearity by {err}"));
        }
    }
    Ok(())
}

/// With the midamble-cancelled tail folded in, the last symbols of a
/// noiseless burst come out clean; without it they are the weak spot.
fn window_extension_tail() -> Result<(), String> {
    let k = 1;
    let last = |fx: &Fixture, soft: &[Cpx]| -> f64 {
        let n_s = fx.cfg.n_s;
        let frame = fx
            .bits
            .chunks(2 * k * n_s)
            .next()
            .expect("field bits");
        // Late symbols feel the truncated tail most.
        let sym = n_s - 1;
        let want = Cpx::new(
            1.0 - 2.0 * frame[2 * (sym * k)] as f64,
            1.0 - 2.0 * frame[2 * (sym * k) + 1] as f64,
        );
        let got = soft[sym * k];
        (got / got.norm() - want / want.norm()).norm()
    };
    let with = fixture(k, 61, f64::INFINITY, true)?;
    let opts = JdfftOptions::standard(61);
    let res_with = check(detect_fields(&with.windows, &with.tb, with.sigma2, &with.cfg, &opts))?;
    let without = fixture(k, 61, f64::INFINITY, false)?;
    let res_wo =
        check(detect_fields(&without.windows, &without.tb, without.sigma2, &without.cfg, &opts))?;
    let err_with = last(&with, &res_with.soft[0]);
    let err_wo = last(&without, &res_wo.soft[0]);
    if err_with >= 0.1 {
        return fail(format!("extended window still misses the last symbol by {err_with}"));
    }
    if err_with > err_wo {
        return fail(format!(
            "extension made the tail worse: {err_with} with vs {err_wo} without"
        ));
    }
    Ok(())
}

/// A tiny scenario run twice must come out byte-identical.
fn determinism() -> Result<(), String> {
    let mut settings = ScenarioSettings::default();
    for (k, v) in [("codes", "2"), ("slots", "2"), ("snr", "6,10"), ("detectors", "jdfft,mf")] {
        settings.set(k, v).map_err(|e| e.to_string())?;
    }
    let cfg = settings.build().map_err(|e| e.to_string())?;
    let a = ber_csv(&run_scenario(&cfg).map_err(|e| e.to_string())?);
    let b = ber_csv(&run_scenario(&cfg).map_err(|e| e.to_string())?);
    if a != b {
        return fail("repeated runs differ".into());
    }
    if a.lines().count() != 1 + 4 {
        return fail(format!("expected 4 result rows, got:\n{a}"));
    }
    Ok(())
}

/// All checks with stable names, in execution order.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    let checks: [(&'static str, Check); 6] = [
        ("parseval", parseval),
        ("hermitian_bins", hermitian_bins),
        ("lu_matches_inverse", lu_matches_inverse),
        ("scaling_equivariance", scaling_equivariance),
        ("window_extension_tail", window_extension_tail),
        ("determinism", determinism),
    ];
    checks.iter().map(|&(name, f)| (name, f())).collect()
}
