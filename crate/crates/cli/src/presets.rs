//! Embedded experiment configurations.

use serde_json::{json, Value};

pub const NAMES: [&str; 10] = [
    "fig5",
    "fig6",
    "nservers",
    "fig7a-nu",
    "fig7a-printed",
    "fig7b-nu",
    "fig7b-printed",
    "fig8",
    "fig8-nu",
    "codes",
];

const ALL_SCHEMES: [&str; 6] = ["single", "repetition", "parallel", "split_repetition", "spc", "nfv84"];
const QUEUE_SCHEMES: [&str; 3] = ["repetition", "nfv84", "parallel"];
const RATES: [f64; 4] = [1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0];

pub fn describe(name: &str) -> &'static str {
    match name {
        "fig5" => "FUP vs latency, six schemes, L=504 N=8 1/mu1=0 mu2=10 a=1 delta=0.01 r=0.5",
        "fig6" => "FUP vs latency, six schemes, 1/mu1=50 mu2=20 a=0.1",
        "nservers" => "exact FUP of parallel and repetition for N in {3,6,12}, L=240 delta=0.03",
        "fig7a-nu" => "latency vs FER over r, light load (lambda=0.1, mu=500), nu = mu",
        "fig7a-printed" => "latency vs FER over r, light load (lambda=0.1, mu=500), nu = (N-d+1)mu/n",
        "fig7b-nu" => "latency vs FER over r, heavy load (lambda=1, mu=50), nu = mu",
        "fig7b-printed" => "latency vs FER over r, heavy load (lambda=1, mu=50), nu = (N-d+1)mu/n",
        "fig8" => "latency vs arrival rate, L=112 r=0.5 mu=500, nu = (N-d+1)mu/n",
        "fig8-nu" => "latency vs arrival rate, L=112 r=0.5 mu=500, nu = mu",
        "codes" => "structural metrics of the six schemes at N=8",
        _ => "",
    }
}

fn fup(scenario: &str, inv_mu1: f64, mu2: f64, a: f64, grid: Value) -> Value {
    json!({
        "scenario": scenario,
        "system": {"frame_bits": 504, "rate": 0.5, "delta": 0.01, "inv_mu1": inv_mu1, "mu2": mu2, "a": a},
        "servers": 8,
        "schemes": ALL_SCHEMES,
        "decoder": {"kind": "bounded_distance"},
        "time_grid": grid,
        "trials": 100000,
        "seed": 1
    })
}

fn queue(lambdas: Value, mu: f64, mode: &str, rates: Option<&[f64]>, rate: f64) -> Value {
    let mut q = json!({
        "lambdas": lambdas,
        "mu": mu,
        "service_rate_mode": mode,
        "frames": 200000
    });
    if let Some(r) = rates {
        q["rates"] = json!(r);
    }
    json!({
        "scenario": "queue_simulate",
        "system": {"frame_bits": 112, "rate": rate, "delta": 0.03, "inv_mu1": 0.0, "mu2": 10.0, "a": 1.0},
        "servers": 8,
        "schemes": QUEUE_SCHEMES,
        "decoder": {"kind": "bounded_distance"},
        "trials": 100000,
        "seed": 1,
        "queue": q
    })
}

pub fn get(name: &str) -> Option<Value> {
    Some(match name {
        "fig5" => fup(
            "fup_simulate",
            0.0,
            10.0,
            1.0,
            json!({"start": 120.0, "stop": 1620.0, "points": 76}),
        ),
        "fig6" => fup(
            "fup_simulate",
            50.0,
            20.0,
            0.1,
            json!({"start": 0.0, "stop": 800.0, "points": 81}),
        ),
        "nservers" => {
            let schemes: Vec<Value> = ["parallel", "repetition"]
                .iter()
                .flat_map(|k| [3, 6, 12].map(|n| json!({"kind": k, "servers": n})))
                .collect();
            json!({
                "scenario": "fup_analyze",
                "system": {"frame_bits": 240, "rate": 0.5, "delta": 0.03, "inv_mu1": 0.0, "mu2": 10.0, "a": 1.0},
                "schemes": schemes,
                "decoder": {"kind": "bounded_distance"},
                "time_grid": {"start": 0.0, "stop": 700.0, "points": 141},
                "seed": 1
            })
        }
        "fig7a-nu" => queue(json!([0.1]), 500.0, "nu", Some(&RATES), 0.5),
        "fig7a-printed" => queue(json!([0.1]), 500.0, "printed", Some(&RATES), 0.5),
        "fig7b-nu" => queue(json!([1.0]), 50.0, "nu", Some(&RATES), 0.5),
        "fig7b-printed" => queue(json!([1.0]), 50.0, "printed", Some(&RATES), 0.5),
        "fig8" => queue(
            json!([1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 17.0]),
            500.0,
            "printed",
            None,
            0.5,
        ),
        "fig8-nu" => queue(
            json!([10.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0]),
            500.0,
            "nu",
            None,
            0.5,
        ),
        "codes" => json!({
            "scenario": "code_info",
            "system": {"frame_bits": 504, "rate": 0.5, "delta": 0.01, "inv_mu1": 0.0, "mu2": 10.0, "a": 1.0},
            "schemes": ALL_SCHEMES
        }),
        _ => return None,
    })
}
