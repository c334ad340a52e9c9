use nfvlab_core::channel::stream_rng;
use nfvlab_core::latency::{LatencyModel, ServiceModel};
use rand::Rng;

/// Adaptive Simpson on [a, b].
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, eps, 50)
}

/// `F(t) = ∫_0^{t−s} μ1 e^{−μ1 x} (1 − e^{−μ'(t−s−x)}) dx` by quadrature.
fn cdf_by_quadrature(inv_mu1: f64, mu2: f64, a: f64, n: usize, t: f64) -> f64 {
    let s = a * n as f64;
    let rate = mu2 / n as f64;
    let u = t - s;
    if u <= 0.0 {
        return 0.0;
    }
    if inv_mu1 == 0.0 {
        return 1.0 - (-rate * u).exp();
    }
    let mu1 = 1.0 / inv_mu1;
    let integrand = |x: f64| mu1 * (-mu1 * x).exp() * -(-rate * (u - x)).exp_m1();
    simpson(&integrand, 0.0, u, 1e-13)
}

#[test]
fn cdf_matches_quadrature() {
    let mut rng = stream_rng(2024, 0);
    for _ in 0..100 {
        let inv_mu1 = if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random_range(0.5..80.0) };
        let mu2 = rng.random_range(1.0..40.0);
        let a = rng.random_range(0.0..2.0);
        let n = rng.random_range(16..1100);
        let m = LatencyModel::new(inv_mu1, mu2, a, n).unwrap();
        let t = m.shift() + rng.random_range(0.0..5.0) * m.mean().max(1.0);
        let q = cdf_by_quadrature(inv_mu1, mu2, a, n, t);
        let got = m.cdf(t);
        assert!((got - q).abs() < 1e-9, "inv_mu1={inv_mu1} mu2={mu2} a={a} n={n} t={t}: {got} vs {q}");
    }
}

#[test]
fn equal_rates_match_quadrature() {
    // μ1 = μ' is the degenerate branch of the closed form
    let n = 100;
    let m = LatencyModel::new(10.0, 10.0, 0.5, n).unwrap();
    for t in [50.0, 51.0, 60.0, 80.0, 120.0] {
        let q = cdf_by_quadrature(10.0, 10.0, 0.5, n, t);
        assert!((m.cdf(t) - q).abs() < 1e-9);
    }
}

#[test]
fn sampler_passes_ks() {
    let m = LatencyModel::new(50.0, 20.0, 0.1, 252).unwrap();
    let mut rng = stream_rng(5, 1);
    let mut xs: Vec<f64> = (0..50_000).map(|_| m.sample(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = m.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 0.1% critical value 1.95/√n
    assert!(d < 1.95 / n.sqrt(), "KS statistic {d}");
}

#[test]
fn inverse_round_trips() {
    let m = LatencyModel::new(50.0, 20.0, 0.1, 252).unwrap();
    for p in [0.0, 1e-6, 0.1, 0.5, 0.9, 0.999999] {
        let t = m.cdf_inverse(p).unwrap();
        assert!((m.cdf(t) - p).abs() < 1e-9, "p={p}");
    }
    assert!(m.cdf_inverse(1.0).is_err());
}

#[test]
fn order_statistic_moments_match_simulation() {
    for d in [1, 3, 8] {
        let s = ServiceModel::new(2.0, 8, d).unwrap();
        let (m1, m2) = s.order_statistic_moments();
        let mut rng = stream_rng(9, d as u64);
        let mut scratch = Vec::new();
        let trials = 200_000;
        let (mut a1, mut a2) = (0.0, 0.0);
        for _ in 0..trials {
            let x = s.sample(&mut rng, &mut scratch);
            a1 += x;
            a2 += x * x;
        }
        a1 /= trials as f64;
        a2 /= trials as f64;
        assert!((a1 - m1).abs() / m1 < 0.01, "d={d}: {a1} vs {m1}");
        assert!((a2 - m2).abs() / m2 < 0.02, "d={d}: {a2} vs {m2}");
        // density integrates to one and reproduces the mean
        let panels = |g: &dyn Fn(f64) -> f64| -> f64 {
            let w = 0.1 / s.nu();
            (0..400).map(|i| simpson(&g, i as f64 * w, (i + 1) as f64 * w, 1e-15)).sum()
        };
        let mass = panels(&|t| s.order_statistic_pdf(t));
        let mean = panels(&|t| t * s.order_statistic_pdf(t));
        assert!((mass - 1.0).abs() < 1e-8);
        assert!((mean - m1).abs() < 1e-8, "d={d}: {mean} vs {m1}");
    }
}
