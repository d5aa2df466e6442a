//! Black-box tests of the `jdsim` binary: flag handling, output shapes,
//! exit codes and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn jdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jdsim"))
        .args(args)
        .output()
        .expect("binary must spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn ber_grid_yields_one_row_per_detector_and_snr() {
    let out = jdsim(&[
        "ber",
        "--channel",
        "case2",
        "--detectors",
        "jdfft,jdchol",
        "--snr",
        "0:14:2",
        "--slots",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "detector,snr_db,slots,bits,errors,ber,ci95");
    assert_eq!(lines.len(), 1 + 2 * 8, "2 detectors x 8 SNR points");
    assert_eq!(lines.iter().filter(|l| l.starts_with("jdfft,")).count(), 8);
    assert_eq!(lines.iter().filter(|l| l.starts_with("jdchol,")).count(), 8);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 7, "schema: {line}");
    }
}

#[test]
fn identical_invocations_are_byte_identical_and_match_the_out_dir() {
    let args = [
        "ber", "--channel", "case1", "--detectors", "jdfft,mf", "--snr", "6,10", "--slots", "3",
        "--seed", "12",
    ];
    let first = jdsim(&args);
    let second = jdsim(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "same config and seed must reproduce");

    let dir = tmp("run-out");
    let mut with_out: Vec<&str> = args.to_vec();
    let dir_s = dir.to_str().unwrap();
    with_out.extend_from_slice(&["--out", dir_s]);
    let third = jdsim(&with_out);
    assert_eq!(third.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("ber.csv")).unwrap();
    assert_eq!(csv, stdout(&first), "file copy equals stdout");
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 12"), "{manifest}");
    assert!(manifest.contains("results_fnv64 = "), "{manifest}");
}

#[test]
fn changing_the_seed_changes_the_results() {
    let base = ["ber", "--channel", "case1", "--detectors", "mf", "--snr", "6", "--slots", "3"];
    let a = jdsim(&[&base[..], &["--seed", "1"]].concat());
    let b = jdsim(&[&base[..], &["--seed", "2"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn noiseless_oracle_counts_zero_errors() {
    let out = jdsim(&[
        "ber", "--channel", "case1", "--detectors", "oracle", "--snr", "40", "--slots", "10",
        "--codes", "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let row = text.lines().nth(1).expect("one data row");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "oracle");
    assert_eq!(fields[4], "0", "errors: {row}");
    assert_eq!(fields[5].parse::<f64>().unwrap(), 0.0, "ber: {row}");
}

#[test]
fn bad_usage_exits_one_not_two() {
    for args in [
        &["ber", "--bogus-flag"][..],
        &["ber", "--detectors", "warp"],
        &["ber", "--snr", "9:1:2"],
        &["ber", "--channel", "case7"],
        &["ber", "--slots", "0"],
        &["frobnicate"],
    ] {
        let out = jdsim(args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "{args:?} -> {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(jdsim(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let path = tmp("scenario.conf");
    std::fs::write(
        &path,
        "[scenario]\nchannel = case1\nslots = 5\nsnr = 8\ndetectors = mf\nseed = 3\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let from_file = jdsim(&["ber", "--config", p]);
    assert_eq!(from_file.status.code(), Some(0));
    let row = stdout(&from_file).lines().nth(1).unwrap().to_string();
    assert!(row.starts_with("mf,8,5,"), "file settings applied: {row}");

    let overridden = jdsim(&["ber", "--config", p, "--slots", "2"]);
    let row = stdout(&overridden).lines().nth(1).unwrap().to_string();
    assert!(row.starts_with("mf,8,2,"), "flag wins over file: {row}");

    std::fs::write(&path, "slots = 5\nslots = 6\n").unwrap();
    let dup = jdsim(&["ber", "--config", p]);
    assert_eq!(dup.status.code(), Some(1), "duplicate keys are config errors");
    let missing = jdsim(&["ber", "--config", tmp("no-such-file.conf").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn complexity_table_carries_the_reference_totals() {
    let out = jdsim(&["complexity"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let total = |label: &str| -> f64 {
        text.lines()
            .skip_while(|l| !l.starts_with("totals"))
            .find(|l| l.trim_start().starts_with(label))
            .and_then(|l| l.split_whitespace().last())
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| panic!("missing '{label}' in:\n{text}"))
    };
    assert!((total("jdfft (lu bins)") / 54.87 - 1.0).abs() <= 0.005);
    assert_eq!((total("jdchol") * 10.0).round() / 10.0, 82.7);
    assert_eq!(total("sdchol"), 205.23);
    assert_eq!(total("sdfft").round(), 69.0);

    let twelve = stdout(&jdsim(&["complexity", "--codes", "12"]));
    let total12 = |label: &str| -> f64 {
        twelve
            .lines()
            .skip_while(|l| !l.starts_with("totals"))
            .find(|l| l.trim_start().starts_with(label))
            .and_then(|l| l.split_whitespace().last())
            .and_then(|v| v.parse().ok())
            .unwrap()
    };
    assert_eq!(total12("jdchol").round(), 177.0);
    assert!((total12("jdfft (lu bins)") / 90.0 - 1.0).abs() <= 0.10);

    // Cost grows with the number of codes for every detector.
    let one = stdout(&jdsim(&["complexity", "--codes", "1"]));
    for label in ["jdfft", "jdchol", "sdchol", "sdfft", "mf"] {
        let t1: f64 = one
            .lines()
            .skip_while(|l| !l.starts_with("totals"))
            .find(|l| l.trim_start().starts_with(label))
            .and_then(|l| l.split_whitespace().last())
            .and_then(|v| v.parse().ok())
            .unwrap();
        assert!(t1 < total(label), "{label}: {t1} at one code vs {}", total(label));
    }
}

#[test]
fn complexity_csv_mode_is_machine_readable() {
    let out = jdsim(&["complexity", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("label,count,rate,MROPS"), "{text}");
    assert!(text.contains("detector,total_mrops"));
    for kind in ["jdfft", "jdchol", "sdchol", "sdfft", "mf"] {
        assert!(text.contains(&format!("# {kind}")), "missing section {kind}");
    }
}

#[test]
fn selftest_reports_every_check_and_exits_zero() {
    let out = jdsim(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for check in [
        "parseval",
        "hermitian_bins",
        "lu_matches_inverse",
        "scaling_equivariance",
        "window_extension_tail",
        "determinism",
    ] {
        assert!(text.contains(&format!("{check}: ok")), "{text}");
    }
}
