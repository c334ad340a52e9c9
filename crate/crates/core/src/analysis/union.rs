//! Subset-enumeration upper bound on the FUP, valid at every `t`.
//!
//! Conditioning on the exact set `A` of servers done by `t`,
//! `P_s(t) = Σ_l (a_l(t) / C(N,l)) Σ_{|A|=l} (1 − Pr[I_A ≥ l − N + d_min])`,
//! and each inner probability is replaced by its Janson upper bound over the
//! dependency graph of the column-restricted generator `G_A`. The inner
//! terms do not depend on `t`, so they are computed once per subset.

use rayon::prelude::*;

use super::{janson_lower_tail, SystemConfig};
use crate::error::{NfvError, Result};
use crate::latency::subset_completion_prob;
use crate::numeric::choose;
use crate::structure::{chromatic_number, dependency_graph, ColoringMode};

/// Largest `N` for which all subsets are enumerated.
pub const MAX_UNION_SERVERS: usize = 16;

#[derive(Debug, Clone)]
pub struct UnionBound {
    servers: usize,
    threshold: usize,
    /// `W_l = C(N,l)^{-1} Σ_{|A|=l} (1 − inner_A)` for `l = 0..=N`.
    weights: Vec<f64>,
}

impl UnionBound {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let n = cfg.servers();
        if n > MAX_UNION_SERVERS {
            return Err(NfvError::SearchLimitExceeded {
                what: "servers (subset enumeration)",
                value: n,
                limit: MAX_UNION_SERVERS,
            });
        }
        let d = cfg.d_min();
        let threshold = n - d + 1;
        let graph = dependency_graph(cfg.code().generator());
        let probs = cfg.error_probs();

        let inner_of = |mask: u32| -> Result<f64> {
            let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let l = members.len();
            let sum_p: f64 = members.iter().map(|&i| probs[i]).sum();
            let tau = (l + d) as f64 - n as f64 - sum_p;
            if tau < 0.0 {
                return Ok(1.0);
            }
            let s: f64 = members.iter().map(|&i| probs[i] * (1.0 - probs[i])).sum();
            if s == 0.0 {
                return Ok(if tau > 0.0 { 0.0 } else { 1.0 });
            }
            let p_min = members.iter().map(|&i| probs[i]).fold(f64::INFINITY, f64::min);
            let chi = chromatic_number(&graph.induced(&members), ColoringMode::Exact)?
                .chromatic_number;
            janson_lower_tail(s, 1.0 - p_min, chi.max(1) as f64, tau)
        };

        let masks: Vec<u32> = (0u32..(1u32 << n))
            .filter(|m| m.count_ones() as usize >= threshold)
            .collect();
        let inner: Vec<f64> = masks
            .par_iter()
            .map(|&m| inner_of(m))
            .collect::<Result<_>>()?;

        let mut sums = vec![0.0f64; n + 1];
        for (&m, &v) in masks.iter().zip(&inner) {
            sums[m.count_ones() as usize] += 1.0 - v;
        }
        let weights = sums
            .iter()
            .enumerate()
            .map(|(l, &s)| if l >= threshold { s / choose(n, l) } else { 0.0 })
            .collect();
        Ok(Self {
            servers: n,
            threshold,
            weights,
        })
    }

    /// Bound at a given completion probability `F(t)`.
    pub fn at_cdf(&self, f: f64) -> f64 {
        let success: f64 = (self.threshold..=self.servers)
            .map(|l| subset_completion_prob(self.servers, l, f) * self.weights[l])
            .sum();
        (1.0 - success).clamp(0.0, 1.0)
    }

    pub fn at(&self, cfg: &SystemConfig, t: f64) -> f64 {
        self.at_cdf(cfg.latency().cdf(t))
    }
}

/// One-shot evaluation; prefer [`UnionBound`] for whole time grids.
pub fn ub_fup(cfg: &SystemConfig, t: f64) -> Result<f64> {
    Ok(UnionBound::new(cfg)?.at(cfg, t))
}
