//! Slot-level configuration: burst geometry and code-to-user allocation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Chips in the midamble of a burst (type-I burst layout).
pub const MIDAMBLE_CHIPS: usize = 512;
/// Chips in the trailing guard period.
pub const GUARD_CHIPS: usize = 96;

/// Static description of one timeslot.
///
/// A burst carries two data fields of `n_s` symbols per code around a known
/// midamble: `[field 1 | midamble | field 2 | guard]`. Each of the `k` active
/// codes spreads one symbol over `sf` chips; the channel spans `w` chips, and
/// the receiver may sample `n_over` phases per chip.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotConfig {
    /// Spreading factor (chips per symbol); must be a power of two.
    pub sf: usize,
    /// Number of active codes.
    pub k: usize,
    /// Symbols per data field and per code.
    pub n_s: usize,
    /// Channel impulse-response length in chips.
    pub w: usize,
    /// Oversampling factor (received phases per chip).
    pub n_over: usize,
    /// Received chips spanned by one data field: `sf * n_s + w - 1`.
    pub n_c: usize,
    /// Code-to-user map: entry `c` is the 0-based user owning code `c`.
    pub code_allocation: Vec<usize>,
}

impl SlotConfig {
    pub fn new(
        sf: usize,
        k: usize,
        n_s: usize,
        w: usize,
        n_over: usize,
        code_allocation: Vec<usize>,
    ) -> Result<Self> {
        if sf == 0 || !sf.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("sf must be a power of two, got {sf}")));
        }
        if k == 0 || k > sf {
            return Err(Error::InvalidConfig(format!("codes must satisfy 1 <= k <= sf, got {k}")));
        }
        if n_s == 0 {
            return Err(Error::InvalidConfig("n_s must be positive".into()));
        }
        if w == 0 {
            return Err(Error::InvalidConfig("w must be positive".into()));
        }
        if n_over == 0 {
            return Err(Error::InvalidConfig("n_over must be positive".into()));
        }
        if code_allocation.len() != k {
            return Err(Error::InvalidConfig(format!(
                "code_allocation has {} entries for {k} codes",
                code_allocation.len()
            )));
        }
        let num_users = code_allocation.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; num_users];
        for &u in &code_allocation {
            seen[u] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidConfig(
                "code_allocation must map onto users 0..num_users without gaps".into(),
            ));
        }
        let n_c = sf * n_s + w - 1;
        Ok(SlotConfig { sf, k, n_s, w, n_over, n_c, code_allocation })
    }

    /// Standard burst geometry used throughout the simulator: `sf = 16`,
    /// 61 symbols per field, a 57-chip channel window, chip-rate sampling,
    /// one code per user.
    pub fn burst_type_1(k: usize) -> Result<Self> {
        Self::new(16, k, 61, 57, 1, (0..k).collect())
    }

    /// Number of distinct users in the allocation.
    pub fn num_users(&self) -> usize {
        self.code_allocation.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Codes owned by user `u`, in code order.
    pub fn codes_of_user(&self, u: usize) -> Vec<usize> {
        self.code_allocation
            .iter()
            .enumerate()
            .filter(|(_, &owner)| owner == u)
            .map(|(c, _)| c)
            .collect()
    }

    /// Chips in one data field before the channel tail: `sf * n_s`.
    pub fn field_chips(&self) -> usize {
        self.sf * self.n_s
    }

    /// Total chips in one burst including midamble and guard.
    pub fn burst_chips(&self) -> usize {
        2 * self.field_chips() + MIDAMBLE_CHIPS + GUARD_CHIPS
    }

    /// Start chip of each data field within the burst.
    pub fn field_starts(&self) -> [usize; 2] {
        [0, self.field_chips() + MIDAMBLE_CHIPS]
    }

    /// Start chip of the midamble within the burst.
    pub fn midamble_start(&self) -> usize {
        self.field_chips()
    }

    /// Number of nonzero block impulse responses beyond block 0:
    /// `ceil((sf + w - 1) / sf) - 1`.
    pub fn delay_blocks(&self) -> usize {
        (self.sf + self.w - 1).div_ceil(self.sf) - 1
    }

    /// Received window length for a processing length of `p` symbols:
    /// `p * sf + w - 1`.
    pub fn window_chips(&self, p: usize) -> usize {
        p * self.sf + self.w - 1
    }

    /// Validate a block-FFT processing length for this slot.
    pub fn check_processing_length(&self, p: usize) -> Result<()> {
        if p < self.n_s {
            return Err(Error::InvalidConfig(format!(
                "processing length {p} is shorter than the field ({} symbols)",
                self.n_s
            )));
        }
        if p < 2 * self.delay_blocks() + 1 {
            return Err(Error::InvalidConfig(format!(
                "processing length {p} cannot hold both band wings (need >= {})",
                2 * self.delay_blocks() + 1
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burst_type_1_geometry() {
        let cfg = SlotConfig::burst_type_1(8).unwrap();
        assert_eq!(cfg.n_c, 16 * 61 + 56, "window spans field plus channel tail");
        assert_eq!(cfg.burst_chips(), 2560);
        assert_eq!(cfg.field_starts(), [0, 976 + 512]);
        assert_eq!(cfg.delay_blocks(), 4);
        assert_eq!(cfg.num_users(), 8);
    }

    #[test]
    fn delay_blocks_short_channel() {
        let cfg = SlotConfig::new(16, 2, 10, 16, 1, vec![0, 1]).unwrap();
        // Response of one symbol spans at most two symbol periods.
        assert_eq!(cfg.delay_blocks(), 1);
        let cfg = SlotConfig::new(16, 2, 10, 1, 1, vec![0, 1]).unwrap();
        assert_eq!(cfg.delay_blocks(), 0);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SlotConfig::new(12, 2, 10, 5, 1, vec![0, 1]).is_err(), "sf not a power of two");
        assert!(SlotConfig::new(16, 0, 10, 5, 1, vec![]).is_err(), "no codes");
        assert!(SlotConfig::new(16, 17, 10, 5, 1, (0..17).collect()).is_err(), "k > sf");
        assert!(SlotConfig::new(16, 2, 10, 5, 1, vec![0]).is_err(), "allocation length");
        assert!(SlotConfig::new(16, 2, 10, 5, 1, vec![0, 2]).is_err(), "user gap");
    }

    #[test]
    fn multicode_allocation_lookup() {
        let cfg = SlotConfig::new(16, 6, 10, 5, 1, vec![0, 0, 0, 1, 1, 2]).unwrap();
        assert_eq!(cfg.num_users(), 3);
        assert_eq!(cfg.codes_of_user(0), vec![0, 1, 2]);
        assert_eq!(cfg.codes_of_user(2), vec![5]);
    }
}
