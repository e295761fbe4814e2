use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use log::{info, warn};
use serde::Serialize;

use codedcast::analysis::{sweep_csv, sweep_rows, SweepConfig, SweepRow};
use codedcast::percolation::{ergodic_diagnostics, estimate_theta_curve, Regime, ThetaTable};
use codedcast::seed::{trial_id, GEOMETRY_STREAM};
use codedcast::{
    build_rgg, components, forward_n_packets, largest_component_fraction, sample_ppp, Error, ForwardingParams,
    Method, Network, SeedSpec,
};

use crate::config::ExperimentConfig;
use crate::output::{emit, write_atomic};

/// Diagnostics fail when any z-score exceeds this.
const Z_LIMIT: f64 = 5.0;

fn config_map(cfg: &ExperimentConfig) -> serde_json::Map<String, serde_json::Value> {
    cfg.echo().into_iter().map(|(k, v)| (k.to_string(), v.into())).collect()
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn load_table(cfg: &ExperimentConfig) -> Result<ThetaTable> {
    match &cfg.theta_table {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ThetaTable::from_csv(&text).with_context(|| format!("parsing {}", path.display()))
        }
        None => {
            info!(
                "no theta table given; estimating one ({}:{}:{}, m={}, {} trials)",
                cfg.lambda_min, cfg.lambda_step, cfg.lambda_max, cfg.theta_m, cfg.trials
            );
            Ok(estimate_theta_curve(cfg.lambda_grid(), cfg.theta_m, cfg.trials, cfg.seed, cfg.smoothed)?)
        }
    }
}

pub fn theta(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let start = Instant::now();
    let table = estimate_theta_curve(cfg.lambda_grid(), cfg.theta_m, cfg.trials, cfg.seed, cfg.smoothed)?;
    emit(cfg.out.as_deref(), &table.to_csv(&cfg.echo_lines()))?;
    eprintln!(
        "grid points: {}  runtime: {:.1}s  max std_err: {:.3e}  isotonic deviation: {:.2} SE",
        table.len(),
        start.elapsed().as_secs_f64(),
        table.max_std_err(),
        table.isotonic_deviation()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let scfg = SweepConfig {
        domain: cfg.domain()?,
        k: cfg.k,
        delta: cfg.delta,
        n_values: cfg.n.values(),
        method: cfg.method,
        trials: cfg.trials_spec(),
        master_seed: cfg.seed,
        grid_resolution: cfg.grid_resolution,
        stop_within_se: !cfg.exact_search,
    };
    let table = match (cfg.method, &cfg.theta_table) {
        (Method::MeanField, _) | (Method::Simulated, Some(_)) => Some(load_table(cfg)?),
        (Method::Simulated, None) => None,
    };
    let rows = sweep_rows(&scfg, table.as_ref())?
        .into_iter()
        .zip(&scfg.n_values)
        .map(|(row, &n)| match row {
            Ok(r) => {
                info!(
                    "n={n}: p_min={:.4} success={:.4} tau/node={:.4}",
                    r.p_min, r.success_at_p, r.tau_per_node
                );
                if let (Method::Simulated, Some(f)) = (r.method, r.tau_formula) {
                    info!("n={n}: simulated tau={:.1} closed-form tau={:.1} ratio={:.4}", r.tau, f, f / r.tau);
                }
                Ok(r)
            }
            Err(Error::Unreachable { target, at_one }) => {
                warn!("n={n}: success {at_one:.4} at p=1 is below the target {target:.4}; recording NaN");
                Ok(SweepRow::unreachable(n, cfg.method))
            }
            Err(e) => Err(e.into()),
        })
        .collect::<Result<Vec<_>>>()?;
    emit(cfg.out.as_deref(), &sweep_csv(&rows, &cfg.echo_lines()))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SeedProvenance {
    master_seed: u64,
    trial_id: u64,
    geometry_stream: u64,
    /// Packet `j` uses stream `j`.
    packet_streams: [u64; 2],
}

#[derive(Serialize)]
struct PacketReport {
    packet: usize,
    transmitters: usize,
    receivers: usize,
}

#[derive(Serialize)]
struct SimulateReport {
    config: serde_json::Map<String, serde_json::Value>,
    seed: SeedProvenance,
    n: usize,
    k: usize,
    p: f64,
    point_count: usize,
    sampled_points: usize,
    source_degree: usize,
    source_component_size: usize,
    largest_component_fraction: f64,
    successful_receivers: usize,
    success_fraction: f64,
    total_transmissions: usize,
    per_packet: Vec<PacketReport>,
}

pub fn simulate(cfg: &ExperimentConfig, graph_out: Option<&Path>) -> Result<ExitCode> {
    let n = cfg.n.start;
    if !cfg.n.is_single() {
        info!("simulate uses a single packet count; taking n={n} from {}", cfg.n);
    }
    let params = ForwardingParams::new(n, cfg.k, cfg.p)?;
    let trial = trial_id(0, 0);
    let geometry = SeedSpec::geometry(cfg.seed, trial);
    let graph = build_rgg(sample_ppp(&cfg.domain()?, geometry)?);
    let result = forward_n_packets(&graph, &params, SeedSpec::new(cfg.seed, trial, 0))?;
    let labels = components(&graph, None);
    let src = graph.source();
    let report = SimulateReport {
        config: config_map(cfg),
        seed: SeedProvenance {
            master_seed: cfg.seed,
            trial_id: trial,
            geometry_stream: GEOMETRY_STREAM,
            packet_streams: [1, n as u64],
        },
        n,
        k: cfg.k,
        p: cfg.p,
        point_count: graph.node_count(),
        sampled_points: graph.points().sampled_count(),
        source_degree: graph.degree(src),
        source_component_size: labels.size(labels.label(src)),
        largest_component_fraction: largest_component_fraction(&graph),
        successful_receivers: result.successful_receivers,
        success_fraction: result.successful_receivers as f64 / graph.node_count() as f64,
        total_transmissions: result.total_transmissions,
        per_packet: result
            .per_packet
            .iter()
            .enumerate()
            .map(|(j, c)| PacketReport {
                packet: j + 1,
                transmitters: c.transmitters,
                receivers: c.receivers,
            })
            .collect(),
    };
    if let Some(path) = graph_out {
        let mut text = format!(
            "# n={} m={} lambda={}\n",
            graph.node_count(),
            codedcast::fmt::round_trip(cfg.m),
            codedcast::fmt::round_trip(cfg.lambda)
        );
        for (i, j) in graph.adjacency().edges() {
            let _ = writeln!(text, "{i} {j}");
        }
        write_atomic(path, &text)?;
    }
    emit(cfg.out.as_deref(), &to_json(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DiagnosticJson {
    name: &'static str,
    predicted: f64,
    estimate: f64,
    estimate_se: f64,
    predicted_se: f64,
    applicable: bool,
    z: Option<f64>,
}

#[derive(Serialize)]
struct DiagnosticsReport {
    config: serde_json::Map<String, serde_json::Value>,
    lambda: f64,
    p: f64,
    m: f64,
    trials: usize,
    regime: &'static str,
    rows: Vec<DiagnosticJson>,
    max_abs_z: f64,
    pass: bool,
}

pub fn diagnostics(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let table = load_table(cfg)?;
    let report = ergodic_diagnostics(&cfg.domain()?, cfg.p, cfg.trials, cfg.seed, &table)?;
    let max_z = report.max_abs_z();
    let pass = max_z <= Z_LIMIT;
    let regime = match report.regime {
        Regime::Supercritical => "supercritical",
        Regime::Subcritical => "subcritical",
    };
    eprintln!("regime: {regime} (lambda*p = {})", cfg.lambda * cfg.p);
    eprintln!("{:<26} {:>12} {:>12} {:>10} {:>8}", "identity", "predicted", "estimate", "se", "z");
    for r in &report.rows {
        let z = r.z.map_or_else(|| "n/a".to_string(), |z| format!("{z:.2}"));
        eprintln!(
            "{:<26} {:>12.6} {:>12.6} {:>10.2e} {:>8}",
            r.name,
            r.predicted,
            r.estimate.mean,
            r.combined_se(),
            z
        );
    }
    let json = DiagnosticsReport {
        config: config_map(cfg),
        lambda: report.lambda,
        p: report.p,
        m: report.side_m,
        trials: report.trials,
        regime,
        rows: report
            .rows
            .iter()
            .map(|r| DiagnosticJson {
                name: r.name,
                predicted: r.predicted,
                estimate: r.estimate.mean,
                estimate_se: r.estimate.std_err,
                predicted_se: r.predicted_se,
                applicable: r.applicable(),
                z: r.z,
            })
            .collect(),
        max_abs_z: max_z,
        pass,
    };
    emit(cfg.out.as_deref(), &to_json(&json)?)?;
    if pass {
        Ok(ExitCode::SUCCESS)
    } else {
        warn!("max |z| = {max_z:.2} exceeds {Z_LIMIT}");
        Ok(ExitCode::FAILURE)
    }
}
