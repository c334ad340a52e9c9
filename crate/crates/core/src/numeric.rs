//! Small numerical helpers shared by the analytic modules.

use statrs::function::erf::erfc;
use statrs::function::factorial::ln_binomial;

/// `ln C(n, k)`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        f64::NEG_INFINITY
    } else {
        ln_binomial(n as u64, k as u64)
    }
}

/// `C(n, k)` as a float.
pub fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    // exact for the small arguments used in subset weights
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `C(n, k) p^k (1-p)^(n-k)`, computed in the log domain.
pub fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

/// `Pr[Bin(n, p) > t]`, summed from the smallest term upward.
pub fn binomial_upper_tail(n: usize, t: usize, p: f64) -> f64 {
    if t >= n {
        return 0.0;
    }
    let mut terms: Vec<f64> = (t + 1..=n).map(|w| binomial_pmf(n, w, p)).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().min(1.0)
}

/// `Pr[Bin(n, p) <= k]`.
pub fn binomial_cdf(n: usize, k: usize, p: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    let mut terms: Vec<f64> = (0..=k).map(|w| binomial_pmf(n, w, p)).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>().min(1.0)
}

/// `H_m = Σ_{i=1}^m 1/i`.
pub fn harmonic(m: usize) -> f64 {
    (1..=m).rev().map(|i| 1.0 / i as f64).sum()
}

/// `Σ_{i=1}^m 1/i²`.
pub fn harmonic2(m: usize) -> f64 {
    (1..=m).rev().map(|i| 1.0 / (i * i) as f64).sum()
}

/// Standard normal upper tail `Q(x)`.
pub fn normal_q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Inverse of the binary entropy on `[0, 1/2]`, by bisection.
pub fn binary_entropy_inverse(h: f64) -> f64 {
    let h = h.clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
