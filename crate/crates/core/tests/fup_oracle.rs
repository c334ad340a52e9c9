use nfvlab_core::analysis::{
    brute_force_fup, exact_fup, fer_bound, ldb_fup, BruteForceOracle, DecoderSpec, SystemConfig,
    SystemParams, UnionBound,
};
use nfvlab_core::channel::stream_rng;
use nfvlab_core::montecarlo::{estimate_fer, simulate_fup};
use nfvlab_core::numeric::binomial_upper_tail;
use nfvlab_core::{BitMatrix, BitVec, CodeKind, NfvCode};
use rand::Rng;

fn bd(t0: usize) -> DecoderSpec {
    DecoderSpec::BoundedDistance {
        t0: Some(t0),
        d_u: None,
        relative_distance: None,
    }
}

fn params(k: usize, n: usize, packets: usize, delta: f64) -> SystemParams {
    SystemParams {
        frame_bits: k * packets,
        rate: k as f64 / n as f64,
        delta,
        inv_mu1: 1.5,
        mu2: 3.0,
        a: 0.4,
    }
}

fn random_code<R: Rng>(rng: &mut R, packets: usize, servers: usize) -> NfvCode {
    loop {
        let rows = (0..packets)
            .map(|_| BitVec::from_u64(rng.random_range(0..1u64 << servers), servers))
            .collect();
        let g = BitMatrix::from_rows(rows).unwrap();
        if let Ok(c) = NfvCode::new("random", g) {
            return c;
        }
    }
}

fn grid(cfg: &SystemConfig, points: usize) -> Vec<f64> {
    let s = cfg.latency().shift();
    let hi = cfg.latency().cdf_inverse(0.9999).unwrap();
    (0..points)
        .map(|i| s + (hi - s) * i as f64 / (points - 1) as f64)
        .collect()
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    let mut rng = stream_rng(77, 0);
    for case in 0..4 {
        let packets = rng.random_range(1..=3);
        let servers = rng.random_range(2..=5);
        let n = rng.random_range(3..=6usize.min(22 / packets));
        let k = rng.random_range(1..=n);
        let code = random_code(&mut rng, packets, servers);
        let cfg = params(k, n, packets, 0.12)
            .build(code, &bd(rng.random_range(0..=2)))
            .unwrap();
        let oracle = BruteForceOracle::new(&cfg).unwrap();
        let g = grid(&cfg, 12);
        let mc = simulate_fup(&cfg, &g, 40_000, case).unwrap();
        for (j, &t) in g.iter().enumerate() {
            let exact = oracle.at(&cfg, t);
            let diff = (mc.estimates[j] - exact).abs();
            assert!(diff <= 3.0 * mc.half_widths[j], "case {case} t={t}: {} vs {exact}", mc.estimates[j]);
        }
        let (fer, hw) = estimate_fer(&cfg, 40_000, case).unwrap();
        assert!((fer - oracle.fer()).abs() <= 3.0 * hw);
    }
}

#[test]
fn closed_forms_match_enumeration() {
    for (kind, servers, packets) in [
        (CodeKind::Single, 1, 1),
        (CodeKind::Repetition, 5, 1),
        (CodeKind::Parallel, 3, 3),
    ] {
        let code = NfvCode::from_kind(kind, servers).unwrap();
        assert_eq!(code.packets(), packets);
        let cfg = params(3, 6, packets, 0.07).build(code, &bd(1)).unwrap();
        for t in grid(&cfg, 20) {
            let a = exact_fup(&cfg, kind, t).unwrap();
            let b = brute_force_fup(&cfg, t).unwrap();
            assert!((a - b).abs() < 1e-10, "{kind:?}: {a} vs {b}");
        }
    }
}

#[test]
fn repetition_without_noise_is_minimum_order_statistic() {
    let code = NfvCode::from_kind(CodeKind::Repetition, 3).unwrap();
    let cfg = params(4, 8, 1, 1e-15).build(code, &bd(0)).unwrap();
    let g = grid(&cfg, 15);
    let mc = simulate_fup(&cfg, &g, 50_000, 3).unwrap();
    for (j, &t) in g.iter().enumerate() {
        let expect = cfg.latency().survival(t).powi(3);
        assert!((mc.estimates[j] - expect).abs() <= 3.0 * mc.half_widths[j]);
    }
}

#[test]
fn repetition_fails_together() {
    // all servers see the same noise, so FER equals one server's error rate
    let code = NfvCode::from_kind(CodeKind::Repetition, 4).unwrap();
    let cfg = params(5, 10, 1, 0.1).build(code, &bd(1)).unwrap();
    let single = binomial_upper_tail(10, 1, 0.1);
    let (fer, hw) = estimate_fer(&cfg, 100_000, 1).unwrap();
    assert!((fer - single).abs() <= 3.0 * hw, "{fer} vs {single}");
    assert!((BruteForceOracle::new(&cfg).unwrap().fer() - single).abs() < 1e-12);
}

#[test]
fn estimates_respect_bounds() {
    let p = SystemParams {
        frame_bits: 504,
        rate: 0.5,
        delta: 0.01,
        inv_mu1: 0.0,
        mu2: 10.0,
        a: 1.0,
    };
    for kind in [CodeKind::Spc, CodeKind::Nfv84, CodeKind::SplitRepetition] {
        let cfg = p.build(NfvCode::from_kind(kind, 8).unwrap(), &DecoderSpec::default()).unwrap();
        let ub = UnionBound::new(&cfg).unwrap();
        let g = grid(&cfg, 10);
        let mc = simulate_fup(&cfg, &g, 20_000, 5).unwrap();
        for (j, &t) in g.iter().enumerate() {
            assert!(mc.estimates[j] <= ub.at(&cfg, t) + 3.0 * mc.half_widths[j]);
            if let Some(l) = ldb_fup(&cfg, t).unwrap().value {
                assert!(mc.estimates[j] <= l + 3.0 * mc.half_widths[j]);
            }
        }
        if let Some(b) = fer_bound(&cfg).unwrap().value {
            let (fer, hw) = estimate_fer(&cfg, 20_000, 5).unwrap();
            assert!(fer <= b + 3.0 * hw);
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = params(3, 6, 3, 0.1)
        .build(NfvCode::from_kind(CodeKind::Spc, 4).unwrap(), &bd(1))
        .unwrap();
    let g = grid(&cfg, 8);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_fup(&cfg, &g, 30_000, 42).unwrap())
    };
    assert_eq!(run(1), run(8));
}
