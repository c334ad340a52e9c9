//! Exact FUP: closed forms for the single-server, repetition and parallel
//! schemes, plus an exhaustive oracle for tiny instances of any code.

use super::SystemConfig;
use crate::channel::{combined_noise, DecoderKind};
use crate::error::{NfvError, Result};
use crate::gf2::{BitMatrix, BitVec, CodeKind};
use crate::numeric::binomial_cdf;

/// Largest `n·K` enumerated by the brute-force oracle.
pub const MAX_ENUMERATED_BITS: usize = 22;

fn mismatch(scheme: CodeKind, reason: impl Into<String>) -> NfvError {
    NfvError::SchemeMismatch {
        scheme: scheme.name().into(),
        reason: reason.into(),
    }
}

fn check_shape(cfg: &SystemConfig, scheme: CodeKind) -> Result<()> {
    let code = cfg.code();
    let (k, n) = (code.packets(), code.servers());
    match scheme {
        CodeKind::Single if k == 1 && n == 1 => Ok(()),
        CodeKind::Repetition if k == 1 => Ok(()),
        CodeKind::Parallel if *code.generator() == BitMatrix::identity(n)? => Ok(()),
        CodeKind::Single | CodeKind::Repetition | CodeKind::Parallel => Err(mismatch(
            scheme,
            format!("configured code `{}` is {k}x{n}", code.name()),
        )),
        other => Err(mismatch(other, "no closed form for this scheme")),
    }
}

/// Closed-form FUP for the single-server, repetition and parallel schemes.
pub fn exact_fup(cfg: &SystemConfig, scheme: CodeKind, t: f64) -> Result<f64> {
    check_shape(cfg, scheme)?;
    let servers = cfg.servers() as i32;
    // every column has weight one, so all servers see γ = δ
    let p = cfg.error_probs()[0];
    let survival = cfg.latency().survival(t);
    let value = match scheme {
        // 1 − F(1 − P)
        CodeKind::Single => survival + p - survival * p,
        // 1 − (1 − (1 − F)^N)(1 − P)
        CodeKind::Repetition => {
            let none_done = survival.powi(servers);
            none_done + p - none_done * p
        }
        // 1 − F^N (1 − P)^N
        CodeKind::Parallel => {
            let f = cfg.latency().cdf(t);
            if f == 0.0 {
                1.0
            } else {
                -(servers as f64 * (f.ln() + (-p).ln_1p())).exp_m1()
            }
        }
        _ => unreachable!("checked above"),
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Exhaustive oracle over all `2^{nK}` noise matrices.
///
/// Stores the exact distribution of the number of servers that decode
/// successfully; since completion indicators are i.i.d. `Bern(F(t))`
/// independent of decoding, `P_u(t)` follows by a binomial convolution.
#[derive(Debug, Clone)]
pub struct BruteForceOracle {
    servers: usize,
    d_min: usize,
    /// `success_dist[j] = Pr[exactly j servers decode]`.
    success_dist: Vec<f64>,
}

impl BruteForceOracle {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        if cfg.decoder().kind() != DecoderKind::BoundedDistance {
            return Err(NfvError::NotEnumerable(match cfg.decoder().kind() {
                DecoderKind::NormalApproximation => "normal_approximation",
                _ => "empirical",
            }));
        }
        let n = cfg.latency().blocklength();
        let k = cfg.code().packets();
        let bits = n * k;
        if bits > MAX_ENUMERATED_BITS {
            return Err(NfvError::SearchLimitExceeded {
                what: "n*K (noise enumeration)",
                value: bits,
                limit: MAX_ENUMERATED_BITS,
            });
        }
        let servers = cfg.servers();
        let delta = cfg.channel().delta();
        // counts[successes][weight]
        let mut counts = vec![vec![0u64; bits + 1]; servers + 1];
        let mask = (1u64 << n) - 1;
        for z in 0u64..(1u64 << bits) {
            let rows = (0..k)
                .map(|j| BitVec::from_u64((z >> (j * n)) & mask, n))
                .collect();
            let noise = BitMatrix::from_rows(rows)?;
            let per_server = combined_noise(&noise, cfg.code())?;
            let mut ok = 0usize;
            for (v, &g) in per_server.iter().zip(cfg.gammas()) {
                if cfg.decoder().decode_success(v, g)? {
                    ok += 1;
                }
            }
            counts[ok][z.count_ones() as usize] += 1;
        }
        let weight_prob: Vec<f64> = (0..=bits)
            .map(|w| delta.powi(w as i32) * (1.0 - delta).powi((bits - w) as i32))
            .collect();
        let success_dist = counts
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&weight_prob)
                    .map(|(&c, &p)| c as f64 * p)
                    .sum()
            })
            .collect();
        Ok(Self {
            servers,
            d_min: cfg.d_min(),
            success_dist,
        })
    }

    pub fn success_distribution(&self) -> &[f64] {
        &self.success_dist
    }

    /// `P_u` at completion probability `F(t) = f`.
    pub fn at_cdf(&self, f: f64) -> f64 {
        let limit = self.servers - self.d_min;
        self.success_dist
            .iter()
            .enumerate()
            .map(|(j, &p)| p * binomial_cdf(j, limit, f))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn at(&self, cfg: &SystemConfig, t: f64) -> f64 {
        self.at_cdf(cfg.latency().cdf(t))
    }

    /// Frame error rate: `Pr[at most N − d_min servers decode]`.
    pub fn fer(&self) -> f64 {
        self.success_dist[..=self.servers - self.d_min].iter().sum()
    }
}

pub fn brute_force_fup(cfg: &SystemConfig, t: f64) -> Result<f64> {
    Ok(BruteForceOracle::new(cfg)?.at(cfg, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{DecoderSpec, SystemParams};
    use crate::gf2::NfvCode;
    use crate::numeric::binomial_cdf;

    fn tiny(kind: CodeKind, servers: usize, delta: f64, t0: usize) -> SystemConfig {
        let code = NfvCode::from_kind(kind, servers).unwrap();
        // L chosen so n = L/(rK) = 6 with r = 1/2
        let p = SystemParams {
            frame_bits: 3 * code.packets(),
            rate: 0.5,
            delta,
            inv_mu1: 0.0,
            mu2: 2.0,
            a: 0.5,
        };
        p.build(
            code,
            &DecoderSpec::BoundedDistance {
                t0: Some(t0),
                d_u: None,
                relative_distance: None,
            },
        )
        .unwrap()
    }

    fn grid(cfg: &SystemConfig) -> Vec<f64> {
        let s = cfg.latency().shift();
        (0..30).map(|i| s - 0.5 + i as f64 * 0.4).collect()
    }

    #[test]
    fn noiseless_reduces_to_completion_count() {
        let cfg = tiny(CodeKind::Spc, 3, 0.0, 0);
        let oracle = BruteForceOracle::new(&cfg).unwrap();
        for t in grid(&cfg) {
            let f = cfg.latency().cdf(t);
            let expected = binomial_cdf(3, 3 - cfg.d_min(), f);
            assert!((oracle.at(&cfg, t) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_closed_forms() {
        let cases = [
            (CodeKind::Parallel, 3),
            (CodeKind::Repetition, 4),
            (CodeKind::Single, 1),
        ];
        for (kind, servers) in cases {
            let cfg = tiny(kind, servers, 0.08, 1);
            let oracle = BruteForceOracle::new(&cfg).unwrap();
            for t in grid(&cfg) {
                let exact = exact_fup(&cfg, kind, t).unwrap();
                let brute = oracle.at(&cfg, t);
                assert!((exact - brute).abs() < 1e-12, "{kind:?} t={t}: {exact} vs {brute}");
            }
        }
    }

    #[test]
    fn exact_limits() {
        let cfg = tiny(CodeKind::Repetition, 4, 0.08, 1);
        let far = exact_fup(&cfg, CodeKind::Repetition, 1e9).unwrap();
        assert!((far - cfg.error_probs()[0]).abs() < 1e-15);
        let perfect = tiny(CodeKind::Parallel, 3, 0.08, 6);
        assert_eq!(exact_fup(&perfect, CodeKind::Parallel, 1e9).unwrap(), 0.0);
        // parallel on one server is the single-server formula
        let one = tiny(CodeKind::Parallel, 1, 0.08, 1);
        for t in grid(&one) {
            let a = exact_fup(&one, CodeKind::Parallel, t).unwrap();
            let b = exact_fup(&one, CodeKind::Single, t).unwrap();
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn exact_rejects_wrong_shape() {
        let cfg = tiny(CodeKind::Spc, 3, 0.08, 1);
        assert!(exact_fup(&cfg, CodeKind::Parallel, 5.0).is_err());
        assert!(exact_fup(&cfg, CodeKind::Spc, 5.0).is_err());
    }

    #[test]
    fn oracle_limits() {
        let cfg = tiny(CodeKind::Spc, 4, 0.0, 0);
        let n = cfg.latency().blocklength();
        assert_eq!(n * cfg.code().packets(), 18);
        assert!(BruteForceOracle::new(&tiny(CodeKind::Parallel, 4, 0.1, 1)).is_err());
    }
}
