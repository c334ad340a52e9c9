//! Random-arrival latency: Pollaczek–Khinchin mean for per-frame decoding and
//! a discrete-event simulator for per-frame and continuous decoding.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::analysis::SystemConfig;
use crate::channel::stream_rng;
use crate::error::{invalid, NfvError, Result};
use crate::latency::ServiceModel;
use crate::montecarlo::{half_width, sample_decode_indicators};

/// Fraction of leading frames dropped before averaging.
pub const WARMUP_FRACTION: f64 = 0.1;
const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    PerFrame,
    Continuous,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::PerFrame => "per_frame",
            Policy::Continuous => "continuous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueConfig {
    pub lambda: f64,
    pub service: ServiceModel,
    pub policy: Policy,
    pub frames: usize,
    pub seed: u64,
    /// Continuous policy: abort a packet that is in service when its frame
    /// completes elsewhere (otherwise the server finishes it first).
    pub abort_in_service: bool,
}

impl QueueConfig {
    pub fn new(lambda: f64, service: ServiceModel, policy: Policy, frames: usize, seed: u64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("{lambda} must be finite and > 0")));
        }
        if frames == 0 {
            return Err(invalid("frames", "must be at least 1"));
        }
        Ok(Self {
            lambda,
            service,
            policy,
            frames,
            seed,
            abort_in_service: true,
        })
    }

    pub fn with_policy(mut self, policy: Policy) -> Self {
        self.policy = policy;
        self
    }

    /// Utilization of the per-frame station, `λ E[S]`.
    pub fn utilization(&self) -> f64 {
        self.lambda * self.service.order_statistic_moments().0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueStats {
    pub policy: Policy,
    pub mean_latency: f64,
    /// 95% batch-means half-width of `mean_latency`.
    pub latency_half_width: f64,
    /// Time-averaged number of frames in the system over the measured window.
    pub mean_in_system: f64,
    /// `(estimate, half_width)` when a system model is attached.
    pub fer: Option<(f64, f64)>,
    pub completed: usize,
    pub frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameRecord {
    pub arrival: f64,
    pub completion: f64,
    /// `m`-th smallest service duration among this frame's finished packets.
    pub service_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueTrace {
    pub frames: Vec<FrameRecord>,
    /// Times a server was found idle with unfinished packets queued.
    pub idle_violations: usize,
}

/// Mean per-frame latency `E[S] + λE[S²] / (2(1 − λE[S]))`.
pub fn pfd_mean_latency(cfg: &QueueConfig) -> Result<f64> {
    let (m1, m2) = cfg.service.order_statistic_moments();
    let rho = cfg.lambda * m1;
    if !(rho < 1.0) {
        return Err(NfvError::UnstableQueue { rho });
    }
    Ok(m1 + cfg.lambda * m2 / (2.0 * (1.0 - rho)))
}

pub fn simulate_queue(cfg: &QueueConfig, sys: Option<&SystemConfig>) -> Result<QueueStats> {
    simulate(cfg, sys, false).map(|(s, _)| s)
}

/// Like [`simulate_queue`], also returning per-frame records.
pub fn simulate_queue_traced(
    cfg: &QueueConfig,
    sys: Option<&SystemConfig>,
) -> Result<(QueueStats, QueueTrace)> {
    simulate(cfg, sys, true).map(|(s, t)| (s, t.expect("trace requested")))
}

fn simulate(
    cfg: &QueueConfig,
    sys: Option<&SystemConfig>,
    trace: bool,
) -> Result<(QueueStats, Option<QueueTrace>)> {
    if cfg.frames == 0 {
        return Err(invalid("frames", "must be at least 1"));
    }
    if let Some(s) = sys {
        if s.servers() != cfg.service.servers() || s.d_min() != cfg.service.d_min() {
            return Err(NfvError::DimensionMismatch {
                left: format!("system N={}, d_min={}", s.servers(), s.d_min()),
                right: format!(
                    "service N={}, d_min={}",
                    cfg.service.servers(),
                    cfg.service.d_min()
                ),
            });
        }
    }
    let mut rng = stream_rng(cfg.seed, 0);
    let mut arrivals = Vec::with_capacity(cfg.frames);
    let mut now = 0.0;
    for _ in 0..cfg.frames {
        let gap: f64 = Exp1.sample(&mut rng);
        now += gap / cfg.lambda;
        arrivals.push(now);
    }
    let run = match cfg.policy {
        Policy::PerFrame => per_frame(cfg, &arrivals, &mut rng),
        Policy::Continuous => continuous(cfg, &arrivals, &mut rng, trace),
    };
    let fer = sys.map(|s| frame_errors(s, cfg)).transpose()?;
    let stats = summarize(cfg, &arrivals, &run.completion, fer);
    let trace = trace.then(|| QueueTrace {
        frames: arrivals
            .iter()
            .zip(&run.completion)
            .zip(&run.floor)
            .map(|((&arrival, &completion), &service_floor)| FrameRecord {
                arrival,
                completion,
                service_floor,
            })
            .collect(),
        idle_violations: run.idle_violations,
    });
    Ok((stats, trace))
}

struct Run {
    completion: Vec<f64>,
    floor: Vec<f64>,
    idle_violations: usize,
}

/// FCFS station whose service time is the `m`-th order statistic.
fn per_frame<R: Rng>(cfg: &QueueConfig, arrivals: &[f64], rng: &mut R) -> Run {
    let mut scratch = Vec::with_capacity(cfg.service.servers());
    let mut completion = Vec::with_capacity(arrivals.len());
    let mut floor = Vec::with_capacity(arrivals.len());
    let mut free_at = 0.0f64;
    for &a in arrivals {
        let s = cfg.service.sample(rng, &mut scratch);
        free_at = free_at.max(a) + s;
        completion.push(free_at);
        floor.push(s);
    }
    Run {
        completion,
        floor,
        idle_violations: 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Arrival,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    frame: usize,
    server: usize,
    kind: Kind,
}

impl Eq for Event {}

impl Ord for Event {
    // min-heap on (time, frame, server)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.frame.cmp(&self.frame))
            .then(other.server.cmp(&self.server))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Default)]
struct Server {
    queue: VecDeque<usize>,
    /// `(frame, start time, duration)` of the packet in service.
    busy: Option<(usize, f64, f64)>,
}

/// Independent per-server FCFS queues with eviction on frame completion.
fn continuous<R: Rng>(cfg: &QueueConfig, arrivals: &[f64], rng: &mut R, trace: bool) -> Run {
    let n = cfg.service.servers();
    let m = cfg.service.threshold();
    let nu = cfg.service.nu();
    let frames = arrivals.len();
    let mut servers: Vec<Server> = (0..n).map(|_| Server::default()).collect();
    let mut finished = vec![0usize; frames];
    let mut done = vec![false; frames];
    let mut completion = vec![f64::INFINITY; frames];
    let mut durations: Vec<Vec<f64>> = if trace { vec![Vec::new(); frames] } else { Vec::new() };
    let mut idle_violations = 0usize;
    let mut heap = BinaryHeap::new();
    heap.push(Event {
        time: arrivals[0],
        frame: 0,
        server: usize::MAX,
        kind: Kind::Arrival,
    });

    // start the next unevicted packet on server i, if any
    let start_next = |srv: &mut Server, i: usize, now: f64, done: &[bool], heap: &mut BinaryHeap<Event>, rng: &mut R| {
        while let Some(f) = srv.queue.pop_front() {
            if done[f] {
                continue;
            }
            let e: f64 = Exp1.sample(rng);
            let d = e / nu;
            srv.busy = Some((f, now, d));
            heap.push(Event {
                time: now + d,
                frame: f,
                server: i,
                kind: Kind::Done,
            });
            return;
        }
        srv.busy = None;
    };

    while let Some(ev) = heap.pop() {
        let now = ev.time;
        match ev.kind {
            Kind::Arrival => {
                let r = ev.frame;
                for (i, srv) in servers.iter_mut().enumerate() {
                    srv.queue.push_back(r);
                    if srv.busy.is_none() {
                        start_next(srv, i, now, &done, &mut heap, rng);
                    }
                }
                if r + 1 < frames {
                    heap.push(Event {
                        time: arrivals[r + 1],
                        frame: r + 1,
                        server: usize::MAX,
                        kind: Kind::Arrival,
                    });
                }
            }
            Kind::Done => {
                let i = ev.server;
                let Some((f, _, dur)) = servers[i].busy else {
                    continue;
                };
                if f != ev.frame {
                    continue; // aborted earlier
                }
                let r = f;
                if !done[r] {
                    finished[r] += 1;
                    if trace {
                        durations[r].push(dur);
                    }
                    if finished[r] == m {
                        done[r] = true;
                        completion[r] = now;
                        if cfg.abort_in_service {
                            for (j, srv) in servers.iter_mut().enumerate() {
                                if j != i && matches!(srv.busy, Some((g, _, _)) if g == r) {
                                    start_next(srv, j, now, &done, &mut heap, rng);
                                }
                            }
                        }
                    }
                }
                start_next(&mut servers[i], i, now, &done, &mut heap, rng);
            }
        }
        if trace {
            idle_violations += servers
                .iter()
                .filter(|s| s.busy.is_none() && s.queue.iter().any(|&f| !done[f]))
                .count();
        }
    }

    let floor = if trace {
        durations
            .iter_mut()
            .map(|d| {
                d.sort_by(f64::total_cmp);
                d.get(m - 1).copied().unwrap_or(f64::NAN)
            })
            .collect()
    } else {
        vec![f64::NAN; frames]
    };
    Run {
        completion,
        floor,
        idle_violations,
    }
}

/// Decode-failure rate over one shared-noise realization per frame.
fn frame_errors(sys: &SystemConfig, cfg: &QueueConfig) -> Result<(f64, f64)> {
    let d = sys.d_min();
    let mut failures = 0usize;
    for r in 0..cfg.frames {
        let mut rng = stream_rng(cfg.seed, r as u64 + 1);
        let wrong = sample_decode_indicators(sys, &mut rng)?
            .iter()
            .filter(|&&ok| !ok)
            .count();
        failures += usize::from(wrong >= d);
    }
    let p = failures as f64 / cfg.frames as f64;
    Ok((p, half_width(p, cfg.frames)))
}

fn summarize(cfg: &QueueConfig, arrivals: &[f64], completion: &[f64], fer: Option<(f64, f64)>) -> QueueStats {
    let frames = arrivals.len();
    let skip = ((frames as f64 * WARMUP_FRACTION).floor() as usize).min(frames - 1);
    let latencies: Vec<f64> = arrivals[skip..]
        .iter()
        .zip(&completion[skip..])
        .map(|(a, c)| c - a)
        .collect();
    let completed = completion.iter().filter(|c| c.is_finite()).count();
    let mean = latencies.iter().sum::<f64>() / latencies.len() as f64;
    QueueStats {
        policy: cfg.policy,
        mean_latency: mean,
        latency_half_width: batch_half_width(&latencies),
        mean_in_system: time_average_in_system(arrivals, completion, arrivals[skip], arrivals[frames - 1]),
        fer,
        completed,
        frames,
    }
}

fn batch_half_width(samples: &[f64]) -> f64 {
    let per = samples.len() / BATCHES;
    if per == 0 {
        return f64::INFINITY;
    }
    let means: Vec<f64> = samples
        .chunks_exact(per)
        .take(BATCHES)
        .map(|c| c.iter().sum::<f64>() / per as f64)
        .collect();
    let k = means.len() as f64;
    let grand = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (k - 1.0);
    let t = StudentsT::new(0.0, 1.0, k - 1.0)
        .expect("k >= 2")
        .inverse_cdf(0.975);
    t * (var / k).sqrt()
}

/// `(1/(t1 − t0)) ∫_{t0}^{t1} N(s) ds` with `N` the number of frames present.
fn time_average_in_system(arrivals: &[f64], completion: &[f64], t0: f64, t1: f64) -> f64 {
    if !(t1 > t0) {
        return f64::NAN;
    }
    arrivals
        .iter()
        .zip(completion)
        .map(|(&a, &c)| (c.min(t1) - a.max(t0)).max(0.0))
        .sum::<f64>()
        / (t1 - t0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub rho: f64,
    pub pfd_analytic: Option<f64>,
    pub pfd: QueueStats,
    pub cd: QueueStats,
}

/// Per-frame and continuous simulations at each `λ`; runs are independent.
pub fn latency_vs_rate_sweep(
    base: &QueueConfig,
    lambdas: &[f64],
    sys: Option<&SystemConfig>,
) -> Result<Vec<SweepRow>> {
    lambdas
        .par_iter()
        .map(|&lambda| {
            let mut cfg = QueueConfig::new(lambda, base.service, Policy::PerFrame, base.frames, base.seed)?;
            cfg.abort_in_service = base.abort_in_service;
            let pfd = simulate_queue(&cfg, sys)?;
            let cd = simulate_queue(&cfg.with_policy(Policy::Continuous), sys)?;
            Ok(SweepRow {
                lambda,
                rho: cfg.utilization(),
                pfd_analytic: pfd_mean_latency(&cfg).ok(),
                pfd,
                cd,
            })
        })
        .collect()
}
