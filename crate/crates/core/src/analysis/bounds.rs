//! Large-deviation bound on the FUP, its t → ∞ asymptote, and the FER bound.

use super::{janson_lower_tail, BoundValue, SystemConfig};
use crate::channel::flip_probability;
use crate::error::Result;

/// Smallest `t` at which the large-deviation bound holds, or `None` when
/// `Σ P_i ≥ d_min` makes it inapplicable at every `t`.
pub fn ldb_threshold(cfg: &SystemConfig) -> Result<Option<f64>> {
    let n = cfg.servers() as f64;
    let sum_p = cfg.error_prob_sum();
    let p = (n - cfg.d_min() as f64) / (n - sum_p);
    if !(p < 1.0) {
        return Ok(None);
    }
    cfg.latency().cdf_inverse(p.max(0.0)).map(Some)
}

/// Large-deviation upper bound on `P_u(t)`.
///
/// Applies to `X(t) = Σ C_i(t) D_i` the lower-tail inequality with
/// `b(t) = F(t)(1 − P_min)`, `S(t) = Σ p_i(1 − p_i)` where
/// `p_i = F(t)(1 − P_i)`, and `τ = E X − (N − d_min)`.
pub fn ldb_fup(cfg: &SystemConfig, t: f64) -> Result<BoundValue> {
    let n = cfg.servers() as f64;
    let d = cfg.d_min() as f64;
    let sum_p = cfg.error_prob_sum();
    let required = (n - d) / (n - sum_p);
    if !(required < 1.0) {
        return Ok(BoundValue::not_applicable(format!(
            "sum of server error probabilities {sum_p:.6e} >= d_min = {d}"
        )));
    }
    let surv = cfg.latency().survival(t);
    let f = 1.0 - surv;
    if f < required {
        let threshold = ldb_threshold(cfg)?.unwrap_or(f64::INFINITY);
        return Ok(BoundValue::not_applicable(format!(
            "t = {t} below validity threshold {threshold}"
        )));
    }
    let tau = f * (n - sum_p) - (n - d);
    if tau <= 0.0 {
        return Ok(BoundValue::applicable(1.0));
    }
    let b = f * (1.0 - cfg.error_prob_min());
    let s: f64 = cfg
        .error_probs()
        .iter()
        .map(|&p| {
            // 1 - F(1 - p) without cancellation when both p and 1 - F are tiny
            f * (1.0 - p) * (surv + f * p)
        })
        .sum();
    Ok(BoundValue::applicable(janson_lower_tail(
        s,
        b,
        cfg.chi() as f64,
        tau,
    )?))
}

/// Closed-form limit of the large-deviation bound with every server at the
/// pessimistic error probability `P = P_{n,k}(γ(d_max))`.
pub fn ldb_asymptote_value(servers: usize, d_min: usize, chi: usize, p: f64) -> BoundValue {
    let n = servers as f64;
    let ratio = d_min as f64 / n;
    if p <= 0.0 {
        return BoundValue::applicable(0.0);
    }
    if !(p < 1.0) || ratio <= p {
        return BoundValue::not_applicable(format!(
            "d_min/N = {ratio:.6} does not exceed P = {p:.6e}"
        ));
    }
    let x = 4.0 * (ratio - p) / (5.0 * p);
    let phi = super::phi(x).expect("x > 0");
    let exponent = -n * p / ((1.0 - p) * chi as f64) * phi;
    BoundValue::applicable(exponent.exp())
}

pub fn ldb_asymptote(cfg: &SystemConfig) -> Result<BoundValue> {
    let gamma = flip_probability(cfg.channel().delta(), cfg.code().d_max())?;
    let p = cfg.decoder().error_probability(gamma)?;
    Ok(ldb_asymptote_value(cfg.servers(), cfg.d_min(), cfg.chi(), p))
}

/// Upper bound on the frame error rate `Pr[Σ I_i ≥ d_min]`.
pub fn fer_bound(cfg: &SystemConfig) -> Result<BoundValue> {
    let sum_p = cfg.error_prob_sum();
    let d = cfg.d_min() as f64;
    let tau = d - sum_p;
    if tau <= 0.0 {
        return Ok(BoundValue::not_applicable(format!(
            "d_min = {d} does not exceed sum of error probabilities {sum_p:.6e}"
        )));
    }
    let s: f64 = cfg.error_probs().iter().map(|&p| p * (1.0 - p)).sum();
    let b = 1.0 - cfg.error_prob_min();
    Ok(BoundValue::applicable(janson_lower_tail(
        s,
        b,
        cfg.chi() as f64,
        tau,
    )?))
}
