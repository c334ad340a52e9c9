//! Scenario execution and output files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use nfvlab_core::analysis::{
    exact_fup, fer_bound, ldb_asymptote, ldb_fup, ldb_threshold, BoundValue, UnionBound,
};
use nfvlab_core::latency::ServiceModel;
use nfvlab_core::montecarlo::{estimate_fer, simulate_fup};
use nfvlab_core::queueing::{latency_vs_rate_sweep, pfd_mean_latency, QueueConfig, Policy};
use nfvlab_core::structure::{chromatic_bounds, chromatic_number, dependency_graph, ColoringMode};
use nfvlab_core::{ChiSource, CodeKind, SystemConfig};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{system_for, ExperimentConfig, QueueSection, ResolvedScheme, Scenario, ServiceRateMode};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub columns: Vec<String>,
    /// Why a column has empty cells.
    pub notes: BTreeMap<String, String>,
    pub schemes: BTreeMap<String, Value>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub manifest: Manifest,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&canonical)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Runs a validated config, optionally on a dedicated thread pool.
pub fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(|| run_inner(cfg)),
        None => run_inner(cfg),
    }
}

fn run_inner(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let schemes = cfg.resolve_schemes()?;
    let mut notes = BTreeMap::new();
    let mut meta = BTreeMap::new();
    let table = match cfg.scenario {
        Scenario::FupAnalyze => fup_table(cfg, &schemes, false, &mut notes, &mut meta)?,
        Scenario::FupSimulate => fup_table(cfg, &schemes, true, &mut notes, &mut meta)?,
        Scenario::QueueAnalyze => queue_table(cfg, &schemes, false, &mut notes, &mut meta)?,
        Scenario::QueueSimulate => queue_table(cfg, &schemes, true, &mut notes, &mut meta)?,
        Scenario::CodeInfo => code_table(&schemes, &mut notes)?,
    };
    let manifest = Manifest {
        tool: "nfvlab",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: config_hash(cfg),
        seed: cfg.seed,
        columns: table.header.clone(),
        notes,
        schemes: meta,
        config: cfg.clone(),
    };
    Ok(Outcome { table, manifest })
}

pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("results.csv"), outcome.table.to_csv()).context("writing results.csv")?;
    let mut m = serde_json::to_string_pretty(&outcome.manifest)?;
    m.push('\n');
    fs::write(dir.join("manifest.json"), m).context("writing manifest.json")?;
    Ok(())
}

fn note(notes: &mut BTreeMap<String, String>, column: String, reason: impl Into<String>) {
    notes.entry(column).or_insert_with(|| reason.into());
}

fn bound_json(b: &BoundValue) -> Value {
    match (&b.value, &b.reason) {
        (Some(v), _) => json!(v),
        (None, Some(r)) => json!({ "not_applicable": r }),
        (None, None) => Value::Null,
    }
}

fn system_meta(sys: &SystemConfig) -> Result<Value> {
    Ok(json!({
        "K": sys.code().packets(),
        "N": sys.servers(),
        "n": sys.latency().blocklength(),
        "d_min": sys.d_min(),
        "d_max": sys.code().d_max(),
        "chi": sys.chi(),
        "chi_source": sys.chi_source(),
        "decoder": sys.decoder().describe(),
        "error_probs": sys.error_probs(),
        "ldb_threshold": ldb_threshold(sys)?,
        "ldb_asymptote": bound_json(&ldb_asymptote(sys)?),
        "fer_bound": bound_json(&fer_bound(sys)?),
    }))
}

fn closed_form(kind: Option<CodeKind>) -> Option<CodeKind> {
    kind.filter(|k| matches!(k, CodeKind::Single | CodeKind::Repetition | CodeKind::Parallel))
}

fn fup_table(
    cfg: &ExperimentConfig,
    schemes: &[ResolvedScheme],
    simulate: bool,
    notes: &mut BTreeMap<String, String>,
    meta: &mut BTreeMap<String, Value>,
) -> Result<Table> {
    let grid = cfg.grid_values()?;
    let mut header = vec!["t".to_string()];
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    for s in schemes {
        let sys = cfg
            .system
            .build(s.code.clone(), &cfg.decoder)
            .with_context(|| format!("scheme `{}`", s.label))?;
        meta.insert(s.label.clone(), system_meta(&sys)?);

        let col = format!("{}_ldb", s.label);
        let mut ldb = Vec::with_capacity(grid.len());
        for &t in &grid {
            let b = ldb_fup(&sys, t)?;
            if let Some(r) = &b.reason {
                note(notes, col.clone(), format!("empty where not applicable; first: {r}"));
            }
            ldb.push(b.value);
        }
        header.push(col);
        columns.push(ldb);

        let col = format!("{}_ub", s.label);
        match UnionBound::new(&sys) {
            Ok(ub) => columns.push(grid.iter().map(|&t| Some(ub.at(&sys, t))).collect()),
            Err(e) => {
                note(notes, col.clone(), e.to_string());
                columns.push(vec![None; grid.len()]);
            }
        }
        header.push(col);

        let col = format!("{}_exact", s.label);
        match closed_form(s.kind) {
            Some(kind) => columns.push(
                grid.iter()
                    .map(|&t| exact_fup(&sys, kind, t).map(Some))
                    .collect::<nfvlab_core::Result<_>>()?,
            ),
            None => {
                note(notes, col.clone(), "no closed form for this scheme");
                columns.push(vec![None; grid.len()]);
            }
        }
        header.push(col);

        if simulate {
            let (mc, hw) = (format!("{}_mc", s.label), format!("{}_mc_hw", s.label));
            match simulate_fup(&sys, &grid, cfg.trials, cfg.seed) {
                Ok(curve) => {
                    columns.push(curve.estimates.into_iter().map(Some).collect());
                    columns.push(curve.half_widths.into_iter().map(Some).collect());
                }
                Err(nfvlab_core::NfvError::AnalyticOnlyModel) => {
                    let why = "decoder model is analytic-only";
                    note(notes, mc.clone(), why);
                    note(notes, hw.clone(), why);
                    columns.push(vec![None; grid.len()]);
                    columns.push(vec![None; grid.len()]);
                }
                Err(e) => return Err(e.into()),
            }
            header.push(mc);
            header.push(hw);
        }
    }
    let mut table = Table::new(header);
    for (j, &t) in grid.iter().enumerate() {
        let mut row = vec![Cell::from(t)];
        row.extend(columns.iter().map(|c| Cell::from(c[j])));
        table.push(row);
    }
    Ok(table)
}

/// Per-server exponential rate for a code with blocklength `n`.
pub fn service_rate(q: &QueueSection, n: usize, servers: usize, d_min: usize) -> Result<ServiceModel> {
    Ok(match q.service_rate_mode {
        ServiceRateMode::Nu => {
            ServiceModel::new(q.nu.or(q.mu).expect("validated"), servers, d_min)?
        }
        ServiceRateMode::Printed => {
            ServiceModel::from_frame_rate(q.mu.expect("validated"), n, servers, d_min)?
        }
    })
}

const QUEUE_HEADER: [&str; 15] = [
    "scheme",
    "r",
    "n",
    "d_min",
    "lambda",
    "nu",
    "rho",
    "fer_bound",
    "fer_mc",
    "fer_mc_hw",
    "t_pfd_analytic",
    "t_pfd_sim",
    "t_pfd_sim_hw",
    "t_cd_sim",
    "t_cd_sim_hw",
];

fn queue_table(
    cfg: &ExperimentConfig,
    schemes: &[ResolvedScheme],
    simulate: bool,
    notes: &mut BTreeMap<String, String>,
    meta: &mut BTreeMap<String, Value>,
) -> Result<Table> {
    let q = cfg.queue.as_ref().expect("validated");
    let rates = q.rates.clone().unwrap_or_else(|| vec![cfg.system.rate]);
    let header: Vec<String> = if simulate {
        QUEUE_HEADER.iter().map(|s| s.to_string()).collect()
    } else {
        QUEUE_HEADER[..11].iter().filter(|c| !c.starts_with("fer_mc")).map(|s| s.to_string()).collect()
    };
    let mut table = Table::new(header);
    for s in schemes {
        for &r in &rates {
            let sys = system_for(&cfg.system, r)
                .build(s.code.clone(), &cfg.decoder)
                .with_context(|| format!("scheme `{}` at r = {r}", s.label))?;
            let n = sys.latency().blocklength();
            let service = service_rate(q, n, sys.servers(), sys.d_min())?;
            let mut m = system_meta(&sys)?;
            m["nu"] = json!(service.nu());
            meta.insert(format!("{}@r={r}", s.label), m);

            let fb = fer_bound(&sys)?;
            if let Some(why) = &fb.reason {
                note(notes, "fer_bound".into(), why.clone());
            }
            let fer_mc = if simulate {
                match estimate_fer(&sys, cfg.trials, cfg.seed) {
                    Ok(v) => Some(v),
                    Err(nfvlab_core::NfvError::AnalyticOnlyModel) => {
                        note(notes, "fer_mc".into(), "decoder model is analytic-only");
                        note(notes, "fer_mc_hw".into(), "decoder model is analytic-only");
                        None
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                None
            };

            let mut base = QueueConfig::new(q.lambdas[0], service, Policy::PerFrame, q.frames, cfg.seed)?;
            base.abort_in_service = q.abort_in_service;
            let sweep = if simulate {
                Some(latency_vs_rate_sweep(&base, &q.lambdas, None)?)
            } else {
                None
            };
            for (i, &lambda) in q.lambdas.iter().enumerate() {
                let qc = QueueConfig { lambda, ..base };
                let analytic = match pfd_mean_latency(&qc) {
                    Ok(v) => Some(v),
                    Err(e) => {
                        note(notes, "t_pfd_analytic".into(), format!("empty where {e}"));
                        None
                    }
                };
                let mut row: Vec<Cell> = vec![
                    s.label.as_str().into(),
                    r.into(),
                    n.into(),
                    sys.d_min().into(),
                    lambda.into(),
                    service.nu().into(),
                    qc.utilization().into(),
                    fb.value.into(),
                ];
                if simulate {
                    row.push(fer_mc.map(|v| v.0).into());
                    row.push(fer_mc.map(|v| v.1).into());
                }
                row.push(analytic.into());
                if let Some(sw) = &sweep {
                    let x = &sw[i];
                    row.push(x.pfd.mean_latency.into());
                    row.push(x.pfd.latency_half_width.into());
                    row.push(x.cd.mean_latency.into());
                    row.push(x.cd.latency_half_width.into());
                }
                table.push(row);
            }
        }
    }
    Ok(table)
}

/// Structural metrics of a code.
pub fn code_metrics(code: &nfvlab_core::NfvCode) -> Result<Value> {
    let g = code.generator();
    let graph = dependency_graph(g);
    let bounds = chromatic_bounds(g);
    let chi = chromatic_number(&graph, ColoringMode::Exact).ok().map(|c| c.chromatic_number);
    Ok(json!({
        "K": g.rows(),
        "N": g.cols(),
        "column_weights": code.column_weights(),
        "d_min": code.d_min(),
        "chi": chi,
        "chi_source": if chi.is_some() { Some(ChiSource::Exact) } else { None },
        "brooks_bound": bounds.brooks,
        "lemma1_bound": bounds.lemma1,
        "edges": graph.edge_count(),
    }))
}

fn code_table(schemes: &[ResolvedScheme], notes: &mut BTreeMap<String, String>) -> Result<Table> {
    let header = ["scheme", "K", "N", "d_min", "d_max", "chi", "brooks_bound", "lemma1_bound", "edges"];
    let mut table = Table::new(header.iter().map(|s| s.to_string()).collect());
    for s in schemes {
        let g = s.code.generator();
        let graph = dependency_graph(g);
        let bounds = chromatic_bounds(g);
        let chi = match chromatic_number(&graph, ColoringMode::Exact) {
            Ok(c) => Cell::Int(c.chromatic_number),
            Err(e) => {
                note(notes, "chi".into(), e.to_string());
                Cell::Num(None)
            }
        };
        table.push(vec![
            s.label.as_str().into(),
            g.rows().into(),
            g.cols().into(),
            s.code.d_min().into(),
            s.code.d_max().into(),
            chi,
            bounds.brooks.into(),
            bounds.lemma1.into(),
            graph.edge_count().into(),
        ]);
    }
    Ok(table)
}

/// Human-readable `code-info` report.
pub fn code_info_report(code: &nfvlab_core::NfvCode) -> Result<String> {
    let m = code_metrics(code)?;
    let mut out = format!(
        "K = {}\nN = {}\ncolumn weights = {:?}\nd_min = {}\n",
        m["K"], m["N"], code.column_weights(), m["d_min"]
    );
    match m["chi"].as_u64() {
        Some(chi) => out.push_str(&format!("chromatic number = {chi} (exact)\n")),
        None => out.push_str("chromatic number = unavailable (graph too large for exact search)\n"),
    }
    out.push_str(&format!(
        "brooks bound = {}\nlemma1 bound = {}\nedges = {}\n",
        m["brooks_bound"], m["lemma1_bound"], m["edges"]
    ));
    Ok(out)
}
