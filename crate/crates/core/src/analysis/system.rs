use serde::{Deserialize, Serialize};

use crate::channel::{flip_probability, BscChannel, DecoderModel, RegularLdpc};
use crate::error::{invalid, NfvError, Result};
use crate::gf2::NfvCode;
use crate::latency::LatencyModel;
use crate::numeric::binary_entropy_inverse;
use crate::structure::{chromatic_for_bounds, ChiSource};

/// A complete single-frame system: NFV code, channel, user-code decoder
/// model and latency model, with the per-server quantities derived once.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    code: NfvCode,
    channel: BscChannel,
    decoder: DecoderModel,
    latency: LatencyModel,
    gammas: Vec<f64>,
    error_probs: Vec<f64>,
    chi: usize,
    chi_source: ChiSource,
}

impl SystemConfig {
    pub fn new(
        code: NfvCode,
        channel: BscChannel,
        decoder: DecoderModel,
        latency: LatencyModel,
    ) -> Result<Self> {
        if decoder.blocklength() != latency.blocklength() {
            return Err(NfvError::DimensionMismatch {
                left: format!("decoder blocklength {}", decoder.blocklength()),
                right: format!("latency blocklength {}", latency.blocklength()),
            });
        }
        let gammas = code
            .column_weights()
            .iter()
            .map(|&d| flip_probability(channel.delta(), d))
            .collect::<Result<Vec<_>>>()?;
        let error_probs = gammas
            .iter()
            .map(|&g| decoder.error_probability(g))
            .collect::<Result<Vec<_>>>()?;
        if let Some(p) = error_probs.iter().find(|&&p| p >= 1.0) {
            return Err(invalid(
                "decoder",
                format!("per-server error probability {p} must be < 1"),
            ));
        }
        let (chi, chi_source) = chromatic_for_bounds(code.generator());
        Ok(Self {
            code,
            channel,
            decoder,
            latency,
            gammas,
            error_probs,
            chi,
            chi_source,
        })
    }

    pub fn code(&self) -> &NfvCode {
        &self.code
    }

    pub fn channel(&self) -> &BscChannel {
        &self.channel
    }

    pub fn decoder(&self) -> &DecoderModel {
        &self.decoder
    }

    pub fn latency(&self) -> &LatencyModel {
        &self.latency
    }

    pub fn servers(&self) -> usize {
        self.code.servers()
    }

    pub fn d_min(&self) -> usize {
        self.code.d_min()
    }

    /// Per-server flip probabilities `γ_i`.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// Per-server decoding error probabilities `P_{n,k}(γ_i)`.
    pub fn error_probs(&self) -> &[f64] {
        &self.error_probs
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn chi_source(&self) -> ChiSource {
        self.chi_source
    }

    pub fn error_prob_sum(&self) -> f64 {
        self.error_probs.iter().sum()
    }

    pub fn error_prob_min(&self) -> f64 {
        self.error_probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// How the user-code decoder is modelled for a given `(n, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecoderSpec {
    /// Bounded-distance decoding. Exactly one of `t0`, `d_u` or
    /// `relative_distance` may be set; with none, `d_u` is the
    /// Gilbert–Varshamov distance `n · h⁻¹(1 − r)`.
    BoundedDistance {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t0: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d_u: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        relative_distance: Option<f64>,
    },
    NormalApproximation,
    /// Belief propagation on a regular Gallager LDPC code.
    Empirical {
        #[serde(default = "default_dv")]
        dv: usize,
        #[serde(default = "default_dc")]
        dc: usize,
        #[serde(default = "default_iterations")]
        max_iterations: usize,
        #[serde(default = "default_decoder_trials")]
        trials: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_dv() -> usize {
    3
}
fn default_dc() -> usize {
    6
}
fn default_iterations() -> usize {
    50
}
fn default_decoder_trials() -> usize {
    10_000
}

impl Default for DecoderSpec {
    fn default() -> Self {
        DecoderSpec::BoundedDistance {
            t0: None,
            d_u: None,
            relative_distance: None,
        }
    }
}

impl DecoderSpec {
    pub fn build(&self, n: usize, k: usize) -> Result<DecoderModel> {
        match self {
            DecoderSpec::BoundedDistance {
                t0,
                d_u,
                relative_distance,
            } => {
                let set = [t0.is_some(), d_u.is_some(), relative_distance.is_some()]
                    .iter()
                    .filter(|&&b| b)
                    .count();
                if set > 1 {
                    return Err(invalid(
                        "decoder",
                        "set at most one of t0, d_u, relative_distance",
                    ));
                }
                if let Some(t0) = t0 {
                    return DecoderModel::bounded_distance(n, k, *t0);
                }
                let d_u = match (d_u, relative_distance) {
                    (Some(d), _) => *d,
                    (None, rel) => {
                        let rel = match rel {
                            Some(r) => *r,
                            None => binary_entropy_inverse(1.0 - k as f64 / n as f64),
                        };
                        if !(0.0..=1.0).contains(&rel) {
                            return Err(invalid("relative_distance", format!("{rel} not in [0, 1]")));
                        }
                        ((rel * n as f64).floor() as usize).max(1)
                    }
                };
                DecoderModel::with_min_distance(n, k, d_u)
            }
            DecoderSpec::NormalApproximation => DecoderModel::normal_approximation(n, k),
            DecoderSpec::Empirical {
                dv,
                dc,
                max_iterations,
                trials,
                seed,
            } => DecoderModel::empirical(
                RegularLdpc::gallager(n, *dv, *dc, *max_iterations, *seed)?,
                *trials,
                *seed,
            ),
        }
    }
}

/// Physical parameters shared by all schemes of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Frame length `L` in bits.
    pub frame_bits: usize,
    /// User-code rate `r`.
    pub rate: f64,
    pub delta: f64,
    pub inv_mu1: f64,
    pub mu2: f64,
    pub a: f64,
}

impl SystemParams {
    /// `(n, k) = (L / (rK), L / K)` for a code with `K` packets.
    pub fn user_code_dims(&self, packets: usize) -> Result<(usize, usize)> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(invalid("rate", format!("{} not in (0, 1]", self.rate)));
        }
        let k = self.frame_bits as f64 / packets as f64;
        let n = k / self.rate;
        let (k_int, n_int) = (k.round(), n.round());
        if (k - k_int).abs() > 1e-9 || (n - n_int).abs() > 1e-6 * n.max(1.0) {
            return Err(invalid(
                "frame_bits",
                format!(
                    "L = {} with K = {packets}, r = {} gives non-integer (n, k) = ({n}, {k})",
                    self.frame_bits, self.rate
                ),
            ));
        }
        Ok((n_int as usize, k_int as usize))
    }

    pub fn build(&self, code: NfvCode, decoder: &DecoderSpec) -> Result<SystemConfig> {
        let (n, k) = self.user_code_dims(code.packets())?;
        let channel = BscChannel::new(self.delta)?;
        let model = decoder.build(n, k)?;
        let latency = LatencyModel::new(self.inv_mu1, self.mu2, self.a, n)?;
        SystemConfig::new(code, channel, model, latency)
    }
}
