//! Regular Gallager LDPC codes with sum-product decoding on the BSC.
//!
//! Simulation transmits the all-zero codeword, so the received word equals
//! the noise realization and decoding succeeds iff the output is all-zero.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::gf2::BitVec;

/// Smallest crossover probability used when forming channel LLRs.
const MIN_CROSSOVER: f64 = 1e-12;
const TANH_CLAMP: f64 = 1.0 - 1e-15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularLdpc {
    n: usize,
    var_degree: usize,
    check_degree: usize,
    max_iterations: usize,
    /// Variable index of each edge, grouped by check.
    edge_var: Vec<usize>,
    /// Edge range of each check in `edge_var`.
    check_edges: Vec<std::ops::Range<usize>>,
    /// Edges incident to each variable.
    var_edges: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub decoded: BitVec,
    pub iterations: usize,
    pub converged: bool,
}

impl RegularLdpc {
    /// Gallager construction: `var_degree` bands of `n / check_degree`
    /// checks, the first band contiguous and the rest column-permuted.
    pub fn gallager(
        n: usize,
        var_degree: usize,
        check_degree: usize,
        max_iterations: usize,
        seed: u64,
    ) -> Result<Self> {
        if var_degree == 0 || check_degree < 2 {
            return Err(invalid("ldpc", "need d_v >= 1 and d_c >= 2"));
        }
        if n == 0 || n % check_degree != 0 {
            return Err(invalid(
                "ldpc",
                format!("blocklength {n} must be a positive multiple of d_c = {check_degree}"),
            ));
        }
        if max_iterations == 0 {
            return Err(invalid("ldpc", "iteration cap must be positive"));
        }
        let band = n / check_degree;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edge_var = Vec::with_capacity(n * var_degree);
        let mut check_edges = Vec::with_capacity(band * var_degree);
        for b in 0..var_degree {
            let mut perm: Vec<usize> = (0..n).collect();
            if b > 0 {
                perm.shuffle(&mut rng);
            }
            for c in 0..band {
                let start = edge_var.len();
                edge_var.extend_from_slice(&perm[c * check_degree..(c + 1) * check_degree]);
                check_edges.push(start..edge_var.len());
            }
        }
        let mut var_edges = vec![Vec::with_capacity(var_degree); n];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[v].push(e);
        }
        Ok(Self {
            n,
            var_degree,
            check_degree,
            max_iterations,
            edge_var,
            check_edges,
            var_edges,
        })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn checks(&self) -> usize {
        self.check_edges.len()
    }

    /// Design dimension `n - m` (actual dimension may be larger).
    pub fn design_dimension(&self) -> usize {
        self.n - self.checks().min(self.n)
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.var_degree, self.check_degree)
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn syndrome_is_zero(&self, word: &BitVec) -> bool {
        self.check_edges.iter().all(|range| {
            self.edge_var[range.clone()]
                .iter()
                .fold(false, |acc, &v| acc ^ word.get(v))
                == false
        })
    }

    /// Sum-product decoding of a hard-decision word received over a BSC with
    /// crossover `gamma`. Stops as soon as the syndrome vanishes.
    pub fn decode(&self, received: &BitVec, gamma: f64) -> DecodeOutcome {
        assert_eq!(received.len(), self.n);
        let gamma = gamma.clamp(MIN_CROSSOVER, 0.5);
        let magnitude = ((1.0 - gamma) / gamma).ln();
        let channel: Vec<f64> = (0..self.n)
            .map(|v| if received.get(v) { -magnitude } else { magnitude })
            .collect();

        let mut decoded = received.clone();
        if self.syndrome_is_zero(&decoded) {
            return DecodeOutcome {
                decoded,
                iterations: 0,
                converged: true,
            };
        }

        let edges = self.edge_var.len();
        let mut to_check: Vec<f64> = self.edge_var.iter().map(|&v| channel[v]).collect();
        let mut to_var = vec![0.0f64; edges];
        let mut tanhs = vec![0.0f64; self.check_degree];

        for iteration in 1..=self.max_iterations {
            for range in &self.check_edges {
                let k = range.len();
                for (slot, e) in tanhs[..k].iter_mut().zip(range.clone()) {
                    *slot = (0.5 * to_check[e]).tanh().clamp(-TANH_CLAMP, TANH_CLAMP);
                }
                for (j, e) in range.clone().enumerate() {
                    let prod: f64 = tanhs[..k]
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != j)
                        .map(|(_, t)| t)
                        .product();
                    to_var[e] = 2.0 * prod.clamp(-TANH_CLAMP, TANH_CLAMP).atanh();
                }
            }
            for v in 0..self.n {
                let total: f64 = channel[v] + self.var_edges[v].iter().map(|&e| to_var[e]).sum::<f64>();
                for &e in &self.var_edges[v] {
                    to_check[e] = total - to_var[e];
                }
                decoded.set(v, total < 0.0);
            }
            if self.syndrome_is_zero(&decoded) {
                return DecodeOutcome {
                    decoded,
                    iterations: iteration,
                    converged: true,
                };
            }
        }
        DecodeOutcome {
            decoded,
            iterations: self.max_iterations,
            converged: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_is_regular() {
        let code = RegularLdpc::gallager(96, 3, 6, 50, 7).unwrap();
        assert_eq!(code.checks(), 48);
        assert_eq!(code.design_dimension(), 48);
        assert!(code.var_edges.iter().all(|e| e.len() == 3));
        assert!(code.check_edges.iter().all(|r| r.len() == 6));
    }

    #[test]
    fn rejects_bad_blocklength() {
        assert!(RegularLdpc::gallager(100, 3, 6, 50, 1).is_err());
        assert!(RegularLdpc::gallager(96, 3, 6, 0, 1).is_err());
    }

    #[test]
    fn zero_word_is_fixed_point() {
        let code = RegularLdpc::gallager(96, 3, 6, 50, 7).unwrap();
        let out = code.decode(&BitVec::zeros(96), 0.01);
        assert!(out.converged && out.decoded.is_zero());
        assert!(out.iterations <= 1);
    }

    #[test]
    fn corrects_single_error() {
        let code = RegularLdpc::gallager(504, 3, 6, 50, 11).unwrap();
        let mut noise = BitVec::zeros(504);
        noise.set(17, true);
        let out = code.decode(&noise, 0.01);
        assert!(out.converged);
        assert!(out.decoded.is_zero());
    }

    #[test]
    fn deterministic_construction() {
        let a = RegularLdpc::gallager(120, 3, 6, 50, 3).unwrap();
        let b = RegularLdpc::gallager(120, 3, 6, 50, 3).unwrap();
        assert_eq!(a, b);
    }
}
