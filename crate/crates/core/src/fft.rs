//! Scalar DFTs with operation tallies.
//!
//! Two kernels sit behind one plan type: an iterative radix-2 transform for
//! power-of-two lengths and a direct `O(n^2)` DFT for everything else (the
//! 61-symbol field length in particular). Both directions use the
//! negative-exponent kernel forward and scale the inverse by `1/n`.
//!
//! Tallies follow the accounting of the complexity model: a radix-2
//! butterfly counts two complex operations (multiply plus add/subtract
//! pair), so a transform of length `n` tallies exactly `n log2 n`; the
//! direct DFT tallies `n` per output bin, `n^2` per transform.

use alloc::vec;
use alloc::vec::Vec;

// Unused whenever std is in the crate graph (tests): inherent float methods
// shadow the trait ones. The pure no_std build resolves sqrt/log2 through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::cmat::OpTally;
use crate::Cpx;

/// Precomputed transform of one length.
pub struct FftPlan {
    len: usize,
    /// Forward twiddles. Radix-2: `exp(-2*pi*i*k/n)` for `k < n/2`.
    /// Direct: the full `n`-th root table.
    twiddles: Vec<Cpx>,
    radix2: bool,
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let radix2 = len.is_power_of_two() && len > 1;
        let table_len = if radix2 { len / 2 } else { len };
        let mut twiddles = Vec::with_capacity(table_len);
        for k in 0..table_len {
            let theta = -2.0 * core::f64::consts::PI * (k as f64) / (len as f64);
            twiddles.push(Cpx::new(theta.cos(), theta.sin()));
        }
        FftPlan { len, twiddles, radix2 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transform `buf` in place. `buf.len()` must equal the plan length.
    pub fn transform(&self, buf: &mut [Cpx], inverse: bool, tally: &mut OpTally) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        if self.len == 1 {
            return;
        }
        if self.radix2 {
            self.radix2_in_place(buf, inverse, tally);
        } else {
            self.direct(buf, inverse, tally);
        }
        if inverse {
            let s = 1.0 / self.len as f64;
            for v in buf.iter_mut() {
                *v *= s;
            }
        }
    }

    fn radix2_in_place(&self, buf: &mut [Cpx], inverse: bool, tally: &mut OpTally) {
        let n = self.len;
        // Bit-reversal permutation.
        let mut j = 0usize;
        for i in 0..n {
            if i < j {
                buf.swap(i, j);
            }
            let mut mask = n >> 1;
            while mask > 0 && j & mask != 0 {
                j &= !mask;
                mask >>= 1;
            }
            j |= mask;
        }
        let mut m = 2;
        while m <= n {
            let half = m / 2;
            let step = n / m;
            for start in (0..n).step_by(m) {
                for t in 0..half {
                    let mut w = self.twiddles[t * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + t];
                    let b = buf[start + t + half] * w;
                    buf[start + t] = a + b;
                    buf[start + t + half] = a - b;
                    tally.fft += 2;
                }
            }
            m <<= 1;
        }
    }

    fn direct(&self, buf: &mut [Cpx], inverse: bool, tally: &mut OpTally) {
        let n = self.len;
        let mut out = vec![Cpx::new(0.0, 0.0); n];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = Cpx::new(0.0, 0.0);
            for (t, &x) in buf.iter().enumerate() {
                let mut w = self.twiddles[(k * t) % n];
                if inverse {
                    w = w.conj();
                }
                acc += x * w;
                tally.fft += 1;
            }
            *o = acc;
        }
        buf.copy_from_slice(&out);
    }
}

/// Transform every lane of a block vector in place.
///
/// `x` holds `p` blocks of `lanes` entries (`x[b * lanes + l]` is block `b`,
/// lane `l`); each lane is one strided length-`p` sequence.
pub fn block_transform(x: &mut [Cpx], lanes: usize, plan: &FftPlan, inverse: bool, tally: &mut OpTally) {
    let p = plan.len();
    assert_eq!(x.len(), lanes * p, "block vector length mismatch");
    let mut scratch = vec![Cpx::new(0.0, 0.0); p];
    for lane in 0..lanes {
        for b in 0..p {
            scratch[b] = x[b * lanes + lane];
        }
        plan.transform(&mut scratch, inverse, tally);
        for b in 0..p {
            x[b * lanes + lane] = scratch[b];
        }
    }
}
