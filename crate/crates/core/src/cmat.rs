//! Small dense complex matrices and the factorizations the detectors need.
//!
//! Matrices here are tiny (code-count blocks of a few rows up to the dense
//! oracle's few hundred) and row-major. The factorizations that sit inside
//! per-bin loops carry an [`OpTally`] so measured multiply-accumulate counts
//! can be compared against the closed-form operation model.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

// Unused whenever std is in the crate graph (tests): inherent float methods
// shadow the trait ones. The pure no_std build resolves sqrt/log2 through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::Cpx;

/// Measured complex-operation counts for the instrumented kernels.
///
/// One "operation" is one complex multiply-accumulate (a division or a
/// reciprocal counts as one). FFT butterflies count two operations each, so
/// a radix-2 transform of length `n` tallies exactly `n log2 n`.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpTally {
    /// Matched-filter correlations.
    pub matched_filter: u64,
    /// Explicit per-bin matrix inversions.
    pub bin_inverse: u64,
    /// Per-bin LU (or LDL-style) factorizations.
    pub bin_factor: u64,
    /// Per-bin right-hand-side applications (inverse multiply or
    /// forward/backward substitution).
    pub bin_apply: u64,
    /// FFT work across all scalar transforms.
    pub fft: u64,
    /// Everything else that is instrumented (dense factorizations).
    pub other: u64,
}

impl OpTally {
    pub fn total(&self) -> u64 {
        self.matched_filter + self.bin_inverse + self.bin_factor + self.bin_apply + self.fft
            + self.other
    }

    pub fn add(&mut self, other: &OpTally) {
        self.matched_filter += other.matched_filter;
        self.bin_inverse += other.bin_inverse;
        self.bin_factor += other.bin_factor;
        self.bin_apply += other.bin_apply;
        self.fft += other.fft;
        self.other += other.other;
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Cpx>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let v = self.get(r, c);
                write!(f, "{:>9.4}{:+.4}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Cpx::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Cpx::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cpx) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Cpx {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Cpx) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: Cpx) {
        self.data[r * self.cols + c] += v;
    }

    pub fn data(&self) -> &[Cpx] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = CMat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == Cpx::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..other.cols {
                    out.add_to(r, c, a * other.get(k, c));
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Cpx]) -> Vec<Cpx> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        let mut out = vec![Cpx::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = Cpx::new(0.0, 0.0);
            for c in 0..self.cols {
                acc += self.get(r, c) * x[c];
            }
            out[r] = acc;
        }
        out
    }

    /// `self^H * x` without materializing the adjoint.
    pub fn adjoint_matvec(&self, x: &[Cpx]) -> Vec<Cpx> {
        assert_eq!(self.rows, x.len(), "adjoint matvec dimension mismatch");
        let mut out = vec![Cpx::new(0.0, 0.0); self.cols];
        for r in 0..self.rows {
            let xr = x[r];
            for c in 0..self.cols {
                out[c] += self.get(r, c).conj() * xr;
            }
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn add_assign(&mut self, other: &CMat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
    }

    pub fn scale(&mut self, s: Cpx) {
        for v in self.data.iter_mut() {
            *v *= s;
        }
    }

    pub fn add_diag(&mut self, s: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.add_to(i, i, Cpx::new(s, 0.0));
        }
    }

    pub fn frob(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry-wise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Replace `self` by `(self + self^H) / 2`, making it exactly Hermitian.
    pub fn hermitize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for r in 0..self.rows {
            let d = self.get(r, r);
            self.set(r, r, Cpx::new(d.re, 0.0));
            for c in (r + 1)..self.cols {
                let avg = (self.get(r, c) + self.get(c, r).conj()) * 0.5;
                self.set(r, c, avg);
                self.set(c, r, avg.conj());
            }
        }
    }
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky_factor(a: &CMat, tally: &mut OpTally) -> Result<CMat> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut l = CMat::zeros(n, n);
    let scale = a.frob().max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        tally.other += j as u64 + 1;
        // d carries the scale of A's entries, so compare it (not its root)
        // against the matrix norm; exact zeros buried in rounding still trip.
        if d <= 1e-14 * scale {
            return Err(Error::NotPositiveDefinite { row: j, pivot: d });
        }
        let dj = d.sqrt();
        l.set(j, j, Cpx::new(dj, 0.0));
        let inv = 1.0 / dj;
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, v * inv);
            tally.other += j as u64 + 1;
        }
    }
    Ok(l)
}

/// Solve `L y = b` in place for lower-triangular `L`.
pub fn solve_lower(l: &CMat, b: &mut [Cpx]) {
    let n = l.rows();
    assert_eq!(b.len(), n);
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l.get(i, k) * b[k];
        }
        b[i] = v / l.get(i, i);
    }
}

/// Solve `L^H x = b` in place for lower-triangular `L`.
pub fn solve_lower_adjoint(l: &CMat, b: &mut [Cpx]) {
    let n = l.rows();
    assert_eq!(b.len(), n);
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in (i + 1)..n {
            v -= l.get(k, i).conj() * b[k];
        }
        b[i] = v / l.get(i, i).conj();
    }
}

/// Solve the Hermitian positive-definite system `A x = b`.
pub fn solve_hermitian(a: &CMat, b: &[Cpx]) -> Result<Vec<Cpx>> {
    let mut tally = OpTally::default();
    let l = cholesky_factor(a, &mut tally)?;
    let mut x = b.to_vec();
    solve_lower(&l, &mut x);
    solve_lower_adjoint(&l, &mut x);
    Ok(x)
}

/// Solve `X L^H = M` for `X`, with `L` lower triangular (so `L^H` is upper).
///
/// This is the right-division used when building block Cholesky factors.
pub fn solve_right_adjoint(l: &CMat, m: &CMat) -> CMat {
    let n = l.rows();
    assert_eq!(m.cols(), n);
    let mut x = m.clone();
    // Column j of X depends on columns 0..j already computed:
    // X[:,j] = (M[:,j] - sum_{k<j} X[:,k] * conj(L[j,k])) / conj(L[j,j]).
    for j in 0..n {
        let djj = l.get(j, j).conj();
        for r in 0..m.rows() {
            let mut v = x.get(r, j);
            for k in 0..j {
                v -= x.get(r, k) * l.get(j, k).conj();
            }
            x.set(r, j, v / djj);
        }
    }
    x
}

/// Partially pivoted LU factorization of a square matrix.
pub struct LuFactors {
    lu: CMat,
    perm: Vec<usize>,
    /// Smallest and largest pivot magnitudes seen during factorization.
    pub pivot_min: f64,
    pub pivot_max: f64,
}

/// Factor `A = P L U` with partial pivoting. The pivot guard rejects pivots
/// below `1e-12` times the matrix norm.
pub fn lu_factor(a: &CMat, tally: &mut OpTally) -> Result<LuFactors> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = a.frob().max(f64::MIN_POSITIVE);
    let mut pivot_min = f64::INFINITY;
    let mut pivot_max = 0.0f64;
    for j in 0..n {
        let mut best = j;
        let mut best_mag = lu.get(j, j).norm();
        for r in (j + 1)..n {
            let mag = lu.get(r, j).norm();
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        if best_mag < 1e-12 * scale {
            return Err(Error::Singular { row: j, pivot: best_mag });
        }
        pivot_min = pivot_min.min(best_mag);
        pivot_max = pivot_max.max(best_mag);
        if best != j {
            for c in 0..n {
                let tmp = lu.get(j, c);
                lu.set(j, c, lu.get(best, c));
                lu.set(best, c, tmp);
            }
            perm.swap(j, best);
        }
        let pivot = lu.get(j, j);
        for r in (j + 1)..n {
            let factor = lu.get(r, j) / pivot;
            lu.set(r, j, factor);
            tally.bin_factor += 1;
            for c in (j + 1)..n {
                let v = lu.get(r, c) - factor * lu.get(j, c);
                lu.set(r, c, v);
                tally.bin_factor += 1;
            }
        }
    }
    Ok(LuFactors { lu, perm, pivot_min, pivot_max })
}

impl LuFactors {
    /// Solve `A x = b` in place using the stored factors.
    ///
    /// Forward substitution on the unit-lower factor takes `n(n-1)/2`
    /// operations and backward substitution `n(n+1)/2`, so one solve tallies
    /// exactly `n^2`.
    pub fn solve(&self, b: &mut [Cpx], tally: &mut OpTally) {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x = vec![Cpx::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[i] = b[p];
        }
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.lu.get(i, k) * x[k];
                tally.bin_apply += 1;
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in (i + 1)..n {
                v -= self.lu.get(i, k) * x[k];
                tally.bin_apply += 1;
            }
            x[i] = v / self.lu.get(i, i);
            tally.bin_apply += 1;
        }
        b.copy_from_slice(&x);
    }
}

/// Invert a square matrix by in-place Gauss-Jordan elimination with partial
/// pivoting. Every pivot step performs exactly `n^2` complex operations, so
/// the tally for one inversion is exactly `n^3`.
pub fn gauss_jordan_inverse(a: &CMat, tally: &mut OpTally) -> Result<CMat> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m = a.clone();
    let mut row_perm: Vec<usize> = (0..n).collect();
    let scale = a.frob().max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut best = j;
        let mut best_mag = m.get(j, j).norm();
        for r in (j + 1)..n {
            let mag = m.get(r, j).norm();
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        if best_mag < 1e-12 * scale {
            return Err(Error::Singular { row: j, pivot: best_mag });
        }
        if best != j {
            for c in 0..n {
                let tmp = m.get(j, c);
                m.set(j, c, m.get(best, c));
                m.set(best, c, tmp);
            }
            row_perm.swap(j, best);
        }
        let inv = Cpx::new(1.0, 0.0) / m.get(j, j);
        m.set(j, j, inv);
        tally.bin_inverse += 1;
        for c in 0..n {
            if c != j {
                m.set(j, c, m.get(j, c) * inv);
                tally.bin_inverse += 1;
            }
        }
        for r in 0..n {
            if r == j {
                continue;
            }
            let factor = m.get(r, j);
            m.set(r, j, -factor * inv);
            tally.bin_inverse += 1;
            for c in 0..n {
                if c != j {
                    let v = m.get(r, c) - factor * m.get(j, c);
                    m.set(r, c, v);
                    tally.bin_inverse += 1;
                }
            }
        }
    }
    // Undo the column permutation induced by row pivoting of the inverse.
    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out.set(r, row_perm[c], m.get(r, c));
        }
    }
    Ok(out)
}
