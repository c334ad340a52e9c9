//! Server completion times and order statistics.
//!
//! A server needs `T = T1 + T2`, where `T1 ~ Exp(μ1)` is workload
//! independent and `T2 = s + Exp(μ')` is a shifted exponential with shift
//! `s = a·n` and rate `μ' = μ2 / n` for a packet of `n` bits.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{invalid, NfvError, Result};
use crate::numeric::{binomial_pmf, harmonic, harmonic2};

const INVERSE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyModel {
    inv_mu1: f64,
    mu2: f64,
    a: f64,
    n: usize,
}

impl LatencyModel {
    pub fn new(inv_mu1: f64, mu2: f64, a: f64, n: usize) -> Result<Self> {
        if !(inv_mu1 >= 0.0 && inv_mu1.is_finite()) {
            return Err(invalid("inv_mu1", format!("{inv_mu1} must be finite and >= 0")));
        }
        if !(mu2 > 0.0 && mu2.is_finite()) {
            return Err(invalid("mu2", format!("{mu2} must be finite and > 0")));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(invalid("a", format!("{a} must be finite and >= 0")));
        }
        if n == 0 {
            return Err(invalid("n", "blocklength must be at least 1"));
        }
        Ok(Self { inv_mu1, mu2, a, n })
    }

    /// Same model for a different blocklength.
    pub fn with_blocklength(&self, n: usize) -> Result<Self> {
        Self::new(self.inv_mu1, self.mu2, self.a, n)
    }

    pub fn inv_mu1(&self) -> f64 {
        self.inv_mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    /// Minimum completion time `a·n`.
    pub fn shift(&self) -> f64 {
        self.a * self.n as f64
    }

    /// Rate `μ2 / n` of the exponential part of `T2`.
    pub fn rate(&self) -> f64 {
        self.mu2 / self.n as f64
    }

    pub fn mean(&self) -> f64 {
        self.inv_mu1 + self.shift() + 1.0 / self.rate()
    }

    /// `Pr[T > t]`, evaluated directly so tails near 1 keep full precision.
    pub fn survival(&self, t: f64) -> f64 {
        let x = t - self.shift();
        if x <= 0.0 {
            return 1.0;
        }
        let rate = self.rate();
        if self.inv_mu1 == 0.0 {
            return (-rate * x).exp();
        }
        let mu1 = 1.0 / self.inv_mu1;
        let diff = mu1 - rate;
        // S(x) = e^{-μ1 x} + μ1 (e^{-μ' x} - e^{-μ1 x}) / (μ1 - μ')
        let spread = if (diff * x).abs() < 1.0 {
            // (e^{-μ'x} - e^{-μ1 x}) / Δ = e^{-μ1 x} · expm1(Δx)/Δ
            let ratio = if diff == 0.0 {
                x
            } else {
                (diff * x).exp_m1() / diff
            };
            (-mu1 * x).exp() * ratio
        } else {
            ((-rate * x).exp() - (-mu1 * x).exp()) / diff
        };
        ((-mu1 * x).exp() + mu1 * spread).clamp(0.0, 1.0)
    }

    /// `F(t) = Pr[T <= t]`.
    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Density of `T`.
    pub fn pdf(&self, t: f64) -> f64 {
        let x = t - self.shift();
        if x < 0.0 {
            return 0.0;
        }
        let rate = self.rate();
        if self.inv_mu1 == 0.0 {
            return rate * (-rate * x).exp();
        }
        let mu1 = 1.0 / self.inv_mu1;
        let diff = mu1 - rate;
        let spread = if (diff * x).abs() < 1.0 {
            let ratio = if diff == 0.0 { x } else { (diff * x).exp_m1() / diff };
            (-mu1 * x).exp() * ratio
        } else {
            ((-rate * x).exp() - (-mu1 * x).exp()) / diff
        };
        mu1 * rate * spread
    }

    /// Smallest `t` with `F(t) >= p`, by bisection to 1e-10 in `t`.
    pub fn cdf_inverse(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(invalid("p", format!("{p} not in [0, 1)")));
        }
        let lo0 = self.shift();
        if p == 0.0 {
            return Ok(lo0);
        }
        let mut span = self.mean().max(1e-12);
        while self.cdf(lo0 + span) < p {
            span *= 2.0;
            if !span.is_finite() {
                return Err(invalid("p", "inverse diverged"));
            }
        }
        let (mut lo, mut hi) = (lo0, lo0 + span);
        for _ in 0..400 {
            if hi - lo <= INVERSE_TOLERANCE {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e1: f64 = Exp1.sample(rng);
        let e2: f64 = Exp1.sample(rng);
        self.inv_mu1 * e1 + self.shift() + e2 / self.rate()
    }
}

/// `a_l(t) = C(N,l) F^l (1-F)^{N-l}` given `F = F(t)`.
pub fn subset_completion_prob(servers: usize, l: usize, cdf_value: f64) -> f64 {
    binomial_pmf(servers, l, cdf_value)
}

/// Per-frame service of the queueing model: `N` i.i.d. `Exp(ν)` servers,
/// frame done at the `m = N − d_min + 1`-th completion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServiceModel {
    nu: f64,
    servers: usize,
    d_min: usize,
}

impl ServiceModel {
    pub fn new(nu: f64, servers: usize, d_min: usize) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(invalid("nu", format!("{nu} must be finite and > 0")));
        }
        if servers == 0 || d_min == 0 || d_min > servers {
            return Err(invalid(
                "d_min",
                format!("need 1 <= d_min <= N, got d_min={d_min}, N={servers}"),
            ));
        }
        Ok(Self { nu, servers, d_min })
    }

    /// Rate under the printed mean-delay formula, `ν = (N − d_min + 1)·μ / n`.
    pub fn from_frame_rate(mu: f64, n: usize, servers: usize, d_min: usize) -> Result<Self> {
        if n == 0 {
            return Err(NfvError::InvalidParameter {
                name: "n",
                reason: "blocklength must be at least 1".into(),
            });
        }
        let m = servers.saturating_sub(d_min) + 1;
        Self::new(m as f64 * mu / n as f64, servers, d_min)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn d_min(&self) -> usize {
        self.d_min
    }

    pub fn threshold(&self) -> usize {
        self.servers - self.d_min + 1
    }

    /// `(E[S], E[S²])` of the `m`-th order statistic.
    pub fn order_statistic_moments(&self) -> (f64, f64) {
        let h1 = harmonic(self.servers) - harmonic(self.d_min - 1);
        let h2 = harmonic2(self.servers) - harmonic2(self.d_min - 1);
        (h1 / self.nu, (h1 * h1 + h2) / (self.nu * self.nu))
    }

    /// Density of the `m`-th order statistic of `N` i.i.d. `Exp(ν)`.
    pub fn order_statistic_pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let (n, m) = (self.servers, self.threshold());
        let f = self.nu * (-self.nu * t).exp();
        let cdf = -(-self.nu * t).exp_m1();
        let coef = (crate::numeric::ln_choose(n, m - 1) + ((n - m + 1) as f64).ln()).exp();
        coef * f * cdf.powi((m - 1) as i32) * (1.0 - cdf).powi((n - m) as i32)
    }

    /// Draws one frame service time.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend((0..self.servers).map(|_| {
            let e: f64 = Exp1.sample(rng);
            e / self.nu
        }));
        let m = self.threshold();
        let (_, kth, _) = scratch.select_nth_unstable_by(m - 1, f64::total_cmp);
        *kth
    }
}

/// Free-function form of [`ServiceModel::order_statistic_moments`].
pub fn order_statistic_mean_and_second_moment(service: &ServiceModel) -> (f64, f64) {
    service.order_statistic_moments()
}
