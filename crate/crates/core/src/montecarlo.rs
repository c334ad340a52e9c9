//! Correlated Monte Carlo estimation of the FUP curve and the FER.
//!
//! Trial `k` draws everything from the ChaCha stream `(seed, k)`, and the
//! per-trial outcomes are reduced into integer counters, so results do not
//! depend on the number of worker threads.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::SystemConfig;
use crate::channel::{combined_noise, sample_noise, stream_rng};
use crate::error::{invalid, NfvError, Result};

/// Trials handed to one rayon task.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FupCurve {
    pub time_grid: Vec<f64>,
    pub estimates: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

/// 95% normal-approximation half-width, floored at `3/trials` when the
/// estimate sits on the boundary.
pub fn half_width(p: f64, trials: usize) -> f64 {
    let n = trials as f64;
    if p <= 0.0 || p >= 1.0 {
        return 3.0 / n;
    }
    1.96 * (p * (1.0 - p) / n).sqrt()
}

fn check_trials(cfg: &SystemConfig, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    if !cfg.decoder().supports_realizations() {
        return Err(NfvError::AnalyticOnlyModel);
    }
    Ok(())
}

/// Checks that a time grid is nonempty, finite and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("time_grid", "must not be empty"));
    }
    if let Some(t) = grid.iter().find(|t| !t.is_finite()) {
        return Err(invalid("time_grid", format!("non-finite value {t}")));
    }
    if let Some(w) = grid.windows(2).find(|w| w[0] >= w[1]) {
        return Err(invalid(
            "time_grid",
            format!("must be strictly increasing ({} >= {})", w[0], w[1]),
        ));
    }
    Ok(())
}

/// Decode-success indicators `D_i` for one shared-noise realization.
pub fn sample_decode_indicators<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let n = cfg.latency().blocklength();
    let noise = sample_noise(cfg.channel(), n, cfg.code().packets(), rng);
    combined_noise(&noise, cfg.code())?
        .iter()
        .zip(cfg.gammas())
        .map(|(v, &g)| cfg.decoder().decode_success(v, g))
        .collect()
}

/// Earliest time at which trial `k` has `N − d_min + 1` servers that are
/// both done and decoded correctly (`∞` if that never happens).
fn ready_time(cfg: &SystemConfig, seed: u64, k: u64, scratch: &mut Vec<f64>) -> Result<f64> {
    let mut rng = stream_rng(seed, k);
    let decoded = sample_decode_indicators(cfg, &mut rng)?;
    scratch.clear();
    for ok in decoded {
        // always draw, so the latency stream does not depend on decoding
        let t = cfg.latency().sample(&mut rng);
        if ok {
            scratch.push(t);
        }
    }
    let m = cfg.servers() - cfg.d_min() + 1;
    if scratch.len() < m {
        return Ok(f64::INFINITY);
    }
    let (_, kth, _) = scratch.select_nth_unstable_by(m - 1, f64::total_cmp);
    Ok(*kth)
}

pub fn simulate_fup(
    cfg: &SystemConfig,
    time_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<FupCurve> {
    check_trials(cfg, trials)?;
    validate_grid(time_grid)?;
    let g = time_grid.len();
    // hist[j] = trials first available in (grid[j-1], grid[j]]; hist[g] = later or never
    let hist = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<Vec<u64>> {
            let mut h = vec![0u64; g + 1];
            let mut scratch = Vec::with_capacity(cfg.servers());
            for k in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let ready = ready_time(cfg, seed, k as u64, &mut scratch)?;
                h[time_grid.partition_point(|&t| t < ready)] += 1;
            }
            Ok(h)
        })
        .try_reduce(
            || vec![0u64; g + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    // unavailable at grid[j] ⇔ ready time > grid[j]
    let mut remaining = trials as u64;
    let mut estimates = Vec::with_capacity(g);
    for &h in &hist[..g] {
        remaining -= h;
        estimates.push(remaining as f64 / trials as f64);
    }
    let half_widths = estimates.iter().map(|&p| half_width(p, trials)).collect();
    Ok(FupCurve {
        time_grid: time_grid.to_vec(),
        estimates,
        half_widths,
        trials,
        seed,
    })
}

/// FER estimate and half-width: a trial fails iff at least `d_min` servers
/// decode incorrectly.
pub fn estimate_fer(cfg: &SystemConfig, trials: usize, seed: u64) -> Result<(f64, f64)> {
    check_trials(cfg, trials)?;
    let d = cfg.d_min();
    let failures = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<u64> {
            let mut f = 0u64;
            for k in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = stream_rng(seed, k as u64);
                let wrong = sample_decode_indicators(cfg, &mut rng)?
                    .iter()
                    .filter(|&&ok| !ok)
                    .count();
                f += u64::from(wrong >= d);
            }
            Ok(f)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = failures as f64 / trials as f64;
    Ok((p, half_width(p, trials)))
}
