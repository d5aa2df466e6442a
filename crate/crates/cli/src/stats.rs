//! Exact binomial confidence intervals and the paired significance test
//! used by the BER harness.

/// Natural log of the complete beta function.
fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Continued fraction for the regularized incomplete beta, evaluated with
/// modified Lentz. Converges quickly only for `x < (a + 1)/(a + b + 2)`;
/// `inc_beta` flips to the symmetric form outside that region.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 3e-14 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`.
pub fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(x, a, b) / a
    } else {
        1.0 - front * beta_cf(1.0 - x, b, a) / b
    }
}

/// Quantile of the beta distribution by bisection on `inc_beta`, which is
/// monotone in `x`. Accurate to about 1e-14 in `x`.
pub fn beta_inv(p: f64, a: f64, b: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "probability out of range");
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inc_beta(mid, a, b) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
/// proportion: `errors` successes out of `trials`, confidence e.g. 0.95.
pub fn clopper_pearson(errors: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0, "no trials");
    assert!(errors <= trials);
    assert!((0.0..1.0).contains(&confidence));
    let alpha = 1.0 - confidence;
    let x = errors as f64;
    let n = trials as f64;
    let lo = if errors == 0 { 0.0 } else { beta_inv(alpha / 2.0, x, n - x + 1.0) };
    let hi = if errors == trials { 1.0 } else { beta_inv(1.0 - alpha / 2.0, x + 1.0, n - x) };
    (lo, hi)
}

/// Half-width of the 95% Clopper-Pearson interval.
pub fn ci95_half_width(errors: u64, trials: u64) -> f64 {
    let (lo, hi) = clopper_pearson(errors, trials, 0.95);
    0.5 * (hi - lo)
}

/// One-sample z statistic of paired differences: mean over standard error.
/// Zero-variance differences give `0` when centered, otherwise a signed
/// infinity (every trial agreed on the direction).
pub fn paired_z(diffs: &[f64]) -> f64 {
    let n = diffs.len();
    assert!(n >= 2, "need at least two pairs");
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0);
    let se = (var / n as f64).sqrt();
    if se == 0.0 {
        if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(mean)
        }
    } else {
        mean / se
    }
}
