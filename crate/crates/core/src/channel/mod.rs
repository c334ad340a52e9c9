//! BSC noise, its propagation through the NFV code, and decoding-error models.

pub mod ldpc;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, NfvError, Result};
use crate::gf2::{BitMatrix, BitVec, NfvCode};
use crate::numeric::{binary_entropy, binomial_upper_tail, normal_q};

pub use ldpc::{DecodeOutcome, RegularLdpc};

/// Binary symmetric channel. `delta = 0` is accepted as a degenerate
/// noiseless channel for oracle checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BscChannel {
    delta: f64,
}

impl BscChannel {
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&delta) {
            return Err(invalid("delta", format!("{delta} not in [0, 0.5)")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Entry (1,2) of `Q^d`: the flip probability after XOR-ing `d` independent
/// BSC noise bits, `(1 - (1 - 2δ)^d) / 2`.
pub fn flip_probability(delta: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(invalid("d", "column weight must be at least 1"));
    }
    if !(0.0..=0.5).contains(&delta) {
        return Err(invalid("delta", format!("{delta} not in [0, 0.5]")));
    }
    if delta == 0.5 {
        return Ok(0.5);
    }
    // 1 - (1-2δ)^d without cancellation for small δ
    Ok(-0.5 * (d as f64 * (-2.0 * delta).ln_1p()).exp_m1())
}

/// I.i.d. Bernoulli(p) vector, drawn by geometric gap skipping.
pub fn sample_bernoulli<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> BitVec {
    let mut v = BitVec::zeros(len);
    if p <= 0.0 || len == 0 {
        return v;
    }
    if p >= 1.0 {
        for i in 0..len {
            v.set(i, true);
        }
        return v;
    }
    let log_q = (-p).ln_1p();
    let mut pos = 0usize;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_q).floor();
        if !gap.is_finite() || gap >= (len - pos) as f64 {
            break;
        }
        pos += gap as usize;
        v.set(pos, true);
        pos += 1;
        if pos >= len {
            break;
        }
    }
    v
}

/// Per-packet channel noise, as a `K x n` matrix whose row `j` is `z_j`.
pub fn sample_noise<R: Rng + ?Sized>(
    channel: &BscChannel,
    n: usize,
    packets: usize,
    rng: &mut R,
) -> BitMatrix {
    let rows = (0..packets)
        .map(|_| sample_bernoulli(n, channel.delta(), rng))
        .collect();
    BitMatrix::from_rows(rows).expect("n and K are positive")
}

/// Noise seen by each server: server `i` receives the XOR of the packet
/// noises `z_j` with `g_{ji} = 1`. `noise` holds one packet per row.
pub fn combined_noise(noise: &BitMatrix, code: &NfvCode) -> Result<Vec<BitVec>> {
    let g = code.generator();
    if noise.rows() != g.rows() {
        return Err(NfvError::DimensionMismatch {
            left: format!("noise with {} packets", noise.rows()),
            right: format!("{}x{} generator", g.rows(), g.cols()),
        });
    }
    let mut out = vec![BitVec::zeros(noise.cols()); g.cols()];
    for j in 0..g.rows() {
        for i in g.row(j).iter_ones() {
            out[i].xor_assign(noise.row(j));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    BoundedDistance,
    NormalApproximation,
    Empirical,
}

/// Decoding-error model of the `(n, k)` user code.
#[derive(Debug, Clone)]
pub enum DecoderModel {
    /// Succeeds iff the noise weight is at most `t0`.
    BoundedDistance { n: usize, k: usize, t0: usize },
    /// Gaussian approximation of the finite-blocklength error probability.
    NormalApproximation { n: usize, k: usize },
    /// Belief propagation on a regular LDPC code; analytic queries are
    /// answered by Monte Carlo with `trials` draws from `seed`.
    Empirical {
        code: Arc<RegularLdpc>,
        trials: usize,
        seed: u64,
    },
}

impl DecoderModel {
    pub fn bounded_distance(n: usize, k: usize, t0: usize) -> Result<Self> {
        check_nk(n, k)?;
        Ok(Self::BoundedDistance { n, k, t0 })
    }

    /// Bounded-distance model with `t0 = ⌊(d_u − 1)/2⌋`.
    pub fn with_min_distance(n: usize, k: usize, d_u: usize) -> Result<Self> {
        if d_u == 0 {
            return Err(invalid("d_u", "minimum distance must be at least 1"));
        }
        Self::bounded_distance(n, k, (d_u - 1) / 2)
    }

    pub fn normal_approximation(n: usize, k: usize) -> Result<Self> {
        check_nk(n, k)?;
        Ok(Self::NormalApproximation { n, k })
    }

    pub fn empirical(code: RegularLdpc, trials: usize, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("trials", "must be positive"));
        }
        Ok(Self::Empirical {
            code: Arc::new(code),
            trials,
            seed,
        })
    }

    pub fn kind(&self) -> DecoderKind {
        match self {
            Self::BoundedDistance { .. } => DecoderKind::BoundedDistance,
            Self::NormalApproximation { .. } => DecoderKind::NormalApproximation,
            Self::Empirical { .. } => DecoderKind::Empirical,
        }
    }

    pub fn blocklength(&self) -> usize {
        match self {
            Self::BoundedDistance { n, .. } | Self::NormalApproximation { n, .. } => *n,
            Self::Empirical { code, .. } => code.blocklength(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::BoundedDistance { n, k, t0 } => format!("bounded_distance(n={n}, k={k}, t0={t0})"),
            Self::NormalApproximation { n, k } => format!("normal_approximation(n={n}, k={k})"),
            Self::Empirical { code, trials, .. } => {
                let (dv, dc) = code.degrees();
                format!(
                    "empirical_ldpc(n={}, dv={dv}, dc={dc}, iters={}, trials={trials})",
                    code.blocklength(),
                    code.max_iterations()
                )
            }
        }
    }

    /// Block error probability at crossover `gamma`.
    pub fn error_probability(&self, gamma: f64) -> Result<f64> {
        if !(0.0..0.5).contains(&gamma) {
            return Err(invalid("gamma", format!("{gamma} not in [0, 0.5)")));
        }
        if gamma == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::BoundedDistance { n, t0, .. } => binomial_upper_tail(*n, *t0, gamma),
            Self::NormalApproximation { n, k } => {
                let n_f = *n as f64;
                let capacity = 1.0 - binary_entropy(gamma);
                let dispersion = gamma * (1.0 - gamma) * ((1.0 - gamma) / gamma).log2().powi(2);
                let arg = (n_f * capacity - *k as f64 + 0.5 * n_f.log2()) / (n_f * dispersion).sqrt();
                normal_q(arg).clamp(0.0, 1.0)
            }
            Self::Empirical { code, trials, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let failures = (0..*trials)
                    .filter(|_| {
                        let noise = sample_bernoulli(code.blocklength(), gamma, &mut rng);
                        !code.decode(&noise, gamma).decoded.is_zero()
                    })
                    .count();
                failures as f64 / *trials as f64
            }
        })
    }

    /// Whether decoding succeeds on a given noise realization (all-zero
    /// codeword sent). `gamma` sets the channel reliability for soft decoders.
    pub fn decode_success(&self, noise: &BitVec, gamma: f64) -> Result<bool> {
        match self {
            Self::BoundedDistance { n, t0, .. } => {
                check_len(noise, *n)?;
                Ok(noise.weight() <= *t0)
            }
            Self::NormalApproximation { .. } => Err(NfvError::AnalyticOnlyModel),
            Self::Empirical { code, .. } => {
                check_len(noise, code.blocklength())?;
                Ok(code.decode(noise, gamma).decoded.is_zero())
            }
        }
    }

    pub fn supports_realizations(&self) -> bool {
        !matches!(self, Self::NormalApproximation { .. })
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || n < k {
        return Err(invalid("n,k", format!("need n >= k >= 1, got n={n}, k={k}")));
    }
    Ok(())
}

fn check_len(noise: &BitVec, n: usize) -> Result<()> {
    if noise.len() != n {
        return Err(NfvError::DimensionMismatch {
            left: format!("noise of length {}", noise.len()),
            right: format!("blocklength {n}"),
        });
    }
    Ok(())
}

/// Convenience: a ChaCha stream for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
