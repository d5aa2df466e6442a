//! Run configuration from a small INI-style file.
//!
//! ```text
//! [scenario]
//! channel = case2      # case1, case2, case2mod, case3
//! slots = 100
//! snr = 0:14:2         ; or a comma list: 0,2,4
//! detectors = jdfft,jdchol
//! seed = 1
//! ```
//!
//! One section, `[scenario]`, which may be omitted. `#` and `;` start
//! comments. Unknown keys, unknown sections and duplicate keys are errors
//! that carry the offending line number. Command-line flags are applied on
//! top through the same [`ScenarioSettings::set`] entry point.

use jdsim_core::channel::ChannelProfile;
use jdsim_core::detector::JdfftOptions;
use jdsim_core::SlotConfig;

use crate::scenario::{DetectorChoice, ScenarioConfig};
use crate::{CliError, Result};

#[derive(Clone, Debug)]
pub struct ScenarioSettings {
    pub channel: String,
    pub slots: usize,
    pub snr: Vec<f64>,
    pub seed: u64,
    pub detectors: Vec<DetectorChoice>,
    pub p: usize,
    pub oversample: usize,
    pub correlated: bool,
    pub codes: usize,
}

impl Default for ScenarioSettings {
    fn default() -> Self {
        ScenarioSettings {
            channel: "case1".into(),
            slots: 100,
            snr: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0],
            seed: 1,
            detectors: vec![DetectorChoice::Jdfft, DetectorChoice::Jdchol],
            p: 61,
            oversample: 1,
            correlated: false,
            codes: 8,
        }
    }
}

fn parse_num<T: core::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

/// Parse an SNR grid: either `start:stop:step` (step optional, default 1)
/// or a comma list. The result must come out strictly increasing.
pub fn parse_snr(value: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() > 3 {
            return Err(CliError::Config(format!(
                "snr: expected start:stop[:step], got '{value}'"
            )));
        }
        let start: f64 = parse_num("snr", parts[0].trim())?;
        let stop: f64 = parse_num("snr", parts[1].trim())?;
        let step: f64 =
            if parts.len() == 3 { parse_num("snr", parts[2].trim())? } else { 1.0 };
        if step <= 0.0 {
            return Err(CliError::Config(format!("snr: step must be positive in '{value}'")));
        }
        if stop < start {
            return Err(CliError::Config(format!("snr: empty range '{value}'")));
        }
        let n = ((stop - start) / step + 0.5).floor() as usize;
        (0..=n).map(|i| start + step * i as f64).filter(|&s| s <= stop + 1e-9).collect()
    } else {
        value
            .split(',')
            .map(|s| parse_num("snr", s.trim()))
            .collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() {
        return Err(CliError::Config("snr: grid came out empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!("snr: values must strictly increase in '{value}'")));
    }
    Ok(grid)
}

fn parse_detectors(value: &str) -> Result<Vec<DetectorChoice>> {
    value.split(',').map(DetectorChoice::parse).collect()
}

impl ScenarioSettings {
    /// Apply one `key = value` pair. Shared by the file parser and the
    /// command-line override path so both validate identically.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "channel" => self.channel = value.to_string(),
            "slots" => self.slots = parse_num(key, value)?,
            "snr" => self.snr = parse_snr(value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "detectors" => self.detectors = parse_detectors(value)?,
            "p" => self.p = parse_num(key, value)?,
            "oversample" => self.oversample = parse_num(key, value)?,
            "correlated" => self.correlated = parse_bool(key, value)?,
            "codes" => self.codes = parse_num(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parse file text on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut settings = ScenarioSettings::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find(['#', ';']) {
                Some(cut) => &raw[..cut],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        CliError::Config(format!("line {line_no}: unterminated section header"))
                    })?
                    .trim();
                if name != "scenario" {
                    return Err(CliError::Config(format!(
                        "line {line_no}: unknown section '[{name}]'"
                    )));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {line_no}: expected 'key = value'"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(CliError::Config(format!("line {line_no}: duplicate key '{key}'")));
            }
            seen.push(key.to_string());
            settings
                .set(key, value)
                .map_err(|e| CliError::Config(format!("line {line_no}: {e}")))?;
        }
        Ok(settings)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read '{}': {e}", path.display()))
        })?;
        Self::parse_str(&text)
    }

    /// Turn the settings into a validated scenario.
    pub fn build(&self) -> Result<ScenarioConfig> {
        let profile = ChannelProfile::by_name(&self.channel)?;
        let slot = SlotConfig::new(16, self.codes, 61, 57, self.oversample, (0..self.codes).collect())?;
        let cfg = ScenarioConfig {
            slot,
            profile,
            channel_name: self.channel.clone(),
            snr_grid: self.snr.clone(),
            n_slots: self.slots,
            detectors: self.detectors.clone(),
            options: JdfftOptions::standard(self.p),
            master_seed: self.seed,
            correlated: self.correlated,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_a_standard_burst() {
        let cfg = ScenarioSettings::default().build().unwrap();
        assert_eq!(cfg.slot.sf, 16);
        assert_eq!(cfg.slot.k, 8);
        assert_eq!(cfg.slot.n_s, 61);
        assert_eq!(cfg.slot.w, 57);
        assert_eq!(cfg.snr_grid.len(), 8);
        assert_eq!(cfg.options.p, 61);
    }

    #[test]
    fn full_file_round_trips_every_key() {
        let text = "\
[scenario]
channel = case2   # profile
slots = 7
snr = 4:8:2
seed = 99
detectors = jdfft,sdchol,mf
p = 64
oversample = 1
correlated = yes
codes = 4
";
        let s = ScenarioSettings::parse_str(text).unwrap();
        assert_eq!(s.channel, "case2");
        assert_eq!(s.slots, 7);
        assert_eq!(s.snr, vec![4.0, 6.0, 8.0]);
        assert_eq!(s.seed, 99);
        assert_eq!(
            s.detectors,
            vec![DetectorChoice::Jdfft, DetectorChoice::Sdchol, DetectorChoice::Mf]
        );
        assert_eq!(s.p, 64);
        assert!(s.correlated);
        assert_eq!(s.codes, 4);
        let cfg = s.build().unwrap();
        assert_eq!(cfg.slot.k, 4);
        assert_eq!(cfg.options.p, 64);
    }

    #[test]
    fn comments_sections_and_blank_lines_are_ignored() {
        let text = "; leading comment\n\n[scenario]\nslots = 3 ; trailing\n# another\n";
        let s = ScenarioSettings::parse_str(text).unwrap();
        assert_eq!(s.slots, 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = ScenarioSettings::parse_str("slots = 1\nbogus = 2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.to_string().contains("bogus"), "{err}");

        let err = ScenarioSettings::parse_str("slots = 1\nslots = 2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.to_string().contains("duplicate"), "{err}");

        let err = ScenarioSettings::parse_str("[other]\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");

        let err = ScenarioSettings::parse_str("just some words\n").unwrap_err();
        assert!(err.to_string().contains("key = value"), "{err}");
    }

    #[test]
    fn snr_grammar_accepts_ranges_and_lists() {
        assert_eq!(parse_snr("0:14:2").unwrap(), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0]);
        assert_eq!(parse_snr("3:5").unwrap(), vec![3.0, 4.0, 5.0]);
        assert_eq!(parse_snr(": 7 :").unwrap_err().exit_code(), 1);
        assert_eq!(parse_snr("-2,0,2.5").unwrap(), vec![-2.0, 0.0, 2.5]);
        assert_eq!(parse_snr("8").unwrap(), vec![8.0]);
        assert!(parse_snr("5,5").is_err());
        assert!(parse_snr("9:1:2").is_err());
        assert!(parse_snr("0:8:0").is_err());
        assert!(parse_snr("0:8:-1").is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        let mut s = ScenarioSettings::default();
        assert!(s.set("slots", "many").is_err());
        assert!(s.set("correlated", "maybe").is_err());
        assert!(s.set("detectors", "jdfft,warp").is_err());
        assert!(s.set("seed", "-1").is_err());
        s.set("channel", "case9").unwrap();
        assert!(s.build().is_err(), "unknown channel must fail at build time");
    }
}
