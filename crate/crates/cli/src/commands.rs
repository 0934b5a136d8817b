use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use delaysync::graph::{laplacian, spectrum, LaplacianSpectrum, WeightedGraph};
use delaysync::models::{HindmarshRose, NodeModel};
use delaysync::network::{initial_condition, simulate as simulate_network, sync_error, NetworkSystem, StateBox};
use delaysync::sweep::{
    boundary_curve, compare_topologies, optimum_of, run_sweep, unimodality_score, BoundaryPoint,
    ComparisonReport, EmpiricalOptimum, InitialConditions, NetworkTemplate, RegionMap, TopologyResult,
    Unimodality,
};
use delaysync::theory::{derived_constants, phi_curve, summarize, SemipassiveConstants, SpectralPair, TheorySummary};

use crate::config::RunConfig;
use crate::output::{num, sibling, write_json, Csv};
use crate::{Classify, Failure};

type CmdResult<T> = Result<T, Failure>;

const TIME_UNIT: &str = "ms";

fn graph_spectrum(g: &WeightedGraph) -> CmdResult<LaplacianSpectrum> {
    spectrum(&laplacian(g)).config()
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    graph_id: String,
    graph: &'a WeightedGraph,
    spectrum: &'a LaplacianSpectrum,
    config: &'a RunConfig,
}

pub fn spectrum_cmd(cfg: &RunConfig, out: Option<&Path>) -> CmdResult<()> {
    let (src, g) = cfg.graph().config()?;
    let s = graph_spectrum(&g)?;
    let mut csv = Csv::new(&["index", "eigenvalue"]);
    for (i, v) in s.eigenvalues.iter().enumerate() {
        csv.row([(i + 1).to_string(), num(*v)]);
    }
    match out {
        Some(path) => {
            csv.write(path).runtime()?;
            let report = SpectrumReport {
                graph_id: src.id(),
                graph: &g,
                spectrum: &s,
                config: cfg,
            };
            write_json(&sibling(path, ".json"), &report).runtime()?;
        }
        None => print!("{}", csv.as_str()),
    }
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryMeta<'a> {
    graph_id: String,
    model: &'a str,
    gamma: f64,
    tau: f64,
    step: f64,
    k: usize,
    node_dim: usize,
    output_dim: usize,
    samples: usize,
    diverged: bool,
    final_sync_error: Option<f64>,
    time_unit: &'static str,
    initial_function: &'static str,
    initial_state: &'a [f64],
    config: &'a RunConfig,
}

fn check_perturbed(perturbed: &[usize], n: usize) -> CmdResult<()> {
    if let Some(c) = perturbed.iter().find(|&&c| c >= n) {
        return Err(Failure::Config(anyhow!("perturbed component {c} is out of range 0..{n}")));
    }
    Ok(())
}

pub fn simulate_cmd(cfg: &RunConfig) -> CmdResult<()> {
    cfg.check_model().config()?;
    let sim = &cfg.simulate;
    let gamma = sim.gamma.context("missing --gamma").config()?;
    let tau = sim.tau.context("missing --tau").config()?;
    let (src, g) = cfg.graph().config()?;
    let model = HindmarshRose;
    check_perturbed(&sim.perturbed, model.state_dim())?;
    let net = NetworkSystem::new(model, g, gamma, tau).config()?;
    let step = sim.step.unwrap_or_else(|| delaysync::dde::default_step(tau));
    let x0 = initial_condition(net.k(), &model.state_box(), &sim.perturbed, sim.seed);
    let traj = simulate_network(&net, &x0, sim.t_end, sim.stride, Some(step)).runtime()?;

    let n = model.state_dim();
    let m = model.output_dim();
    let mut header: Vec<String> = vec!["t".into(), "node".into()];
    header.extend((1..=n - m).map(|i| format!("zeta{i}")));
    header.extend((1..=m).map(|i| format!("y{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header_refs);
    for (t, x) in traj.iter() {
        for (node, block) in x.chunks(n).enumerate() {
            let mut row = vec![num(t), (node + 1).to_string()];
            row.extend(block.iter().map(|v| num(*v)));
            csv.row(row);
        }
    }
    csv.write(&sim.out).runtime()?;

    let final_sync_error = traj
        .last()
        .filter(|_| !traj.diverged)
        .and_then(|(t, _)| sync_error(&traj, n, (t, t)).ok());
    let meta = TrajectoryMeta {
        graph_id: src.id(),
        model: model.name(),
        gamma,
        tau,
        step,
        k: net.k(),
        node_dim: n,
        output_dim: m,
        samples: traj.len(),
        diverged: traj.diverged,
        final_sync_error,
        time_unit: TIME_UNIT,
        initial_function: "constant",
        initial_state: &x0,
        config: cfg,
    };
    write_json(&sibling(&sim.out, ".json"), &meta).runtime()?;
    if traj.diverged {
        return Err(Failure::Runtime(anyhow!(
            "trajectory diverged before t = {}; partial output written to {}",
            sim.t_end,
            sim.out.display()
        )));
    }
    Ok(())
}

/// Everything `sweep` writes to its JSON summary; `compare` reads it back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub graph_id: String,
    pub model: String,
    pub time_unit: String,
    pub status: String,
    pub spectrum: LaplacianSpectrum,
    pub optimum: Option<EmpiricalOptimum>,
    pub boundary: Vec<BoundaryPoint>,
    pub holes: usize,
    pub unimodality: Option<Unimodality>,
    pub synchronized_cells: usize,
    pub diverged_cells: usize,
    pub failed_cells: usize,
    pub config: RunConfig,
    pub region: RegionMap,
}

fn summarize_region(region: RegionMap, spectrum: LaplacianSpectrum, cfg: &RunConfig) -> SweepSummary {
    let curve = boundary_curve(&region);
    let optimum = optimum_of(&curve);
    SweepSummary {
        graph_id: region.metadata.graph_id.clone(),
        model: region.metadata.model.clone(),
        time_unit: region.metadata.time_unit.clone(),
        status: if optimum.is_some() {
            "ok".into()
        } else {
            "no synchronized cells".into()
        },
        spectrum,
        optimum,
        holes: curve.holes,
        unimodality: unimodality_score(&curve).ok(),
        synchronized_cells: region.synchronized_cells(),
        diverged_cells: region.diverged_cells(),
        failed_cells: region.failures.len(),
        boundary: curve.points,
        config: cfg.clone(),
        region,
    }
}

/// Region CSV, boundary CSV and JSON summary, each written atomically.
pub fn emit_region_artifacts(summary: &SweepSummary, out: &Path) -> anyhow::Result<()> {
    let r = &summary.region;
    let mut csv = Csv::new(&["gamma", "tau", "synchronized", "diverged", "max_error"]);
    for (gi, gamma) in r.grid.gamma_values.iter().enumerate() {
        for (ti, tau) in r.grid.tau_values.iter().enumerate() {
            let err = match r.max_error[gi][ti] {
                Some(e) => num(e),
                None if r.diverged[gi][ti] => "inf".into(),
                None => "nan".into(),
            };
            csv.row([
                num(*gamma),
                num(*tau),
                r.verdicts[gi][ti].to_string(),
                r.diverged[gi][ti].to_string(),
                err,
            ]);
        }
    }
    csv.write(out)?;
    let mut boundary = Csv::new(&["gamma", "tau_max"]);
    for p in &summary.boundary {
        boundary.row([num(p.gamma), num(p.tau_max)]);
    }
    boundary.write(&sibling(out, "_boundary.csv"))?;
    write_json(&sibling(out, "_summary.json"), summary)
}

fn progress_printer(label: String) -> impl Fn(usize, usize) + Sync {
    move |done, total| {
        let every = (total / 100).max(1);
        if done % every == 0 || done == total {
            eprint!("\r{label}: {done}/{total} cells");
            if done == total {
                eprintln!();
            }
        }
    }
}

fn sweep_graph(cfg: &RunConfig, graph_id: String, g: WeightedGraph, workers: usize, quiet: bool) -> CmdResult<RegionMap> {
    let grid = cfg.sweep.grid().config()?;
    let template = NetworkTemplate {
        model: HindmarshRose,
        graph: g,
        graph_id: graph_id.clone(),
    };
    let ics = InitialConditions {
        seeds: cfg.sweep.seeds.clone(),
        perturbed: cfg.sweep.perturbed.clone(),
    };
    let printer = progress_printer(format!("sweep {graph_id}"));
    let progress: Option<&(dyn Fn(usize, usize) + Sync)> = if quiet { None } else { Some(&printer) };
    run_sweep(&template, &grid, &cfg.sync, &ics, workers, progress).runtime()
}

fn validate_sweep(cfg: &mut RunConfig) -> CmdResult<usize> {
    cfg.check_model().config()?;
    cfg.sync.validate().config()?;
    cfg.sweep.grid().config()?;
    if cfg.sweep.seeds.is_empty() {
        return Err(Failure::Config(anyhow!("at least one seed is required")));
    }
    check_perturbed(&cfg.sweep.perturbed, HindmarshRose.state_dim())?;
    cfg.resolve_workers().config()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), num)
}

pub fn sweep_cmd(cfg: &mut RunConfig, quiet: bool) -> CmdResult<()> {
    let workers = validate_sweep(cfg)?;
    let (src, g) = cfg.graph().config()?;
    let id = src.id();
    let spec = graph_spectrum(&g)?;
    let region = sweep_graph(cfg, id, g, workers, quiet)?;
    let summary = summarize_region(region, spec, cfg);
    emit_region_artifacts(&summary, &cfg.sweep.out).runtime()?;

    println!("graph      {}", summary.graph_id);
    println!("status     {}", summary.status);
    println!("gamma*     {}", fmt_opt(summary.optimum.map(|o| o.gamma_star)));
    println!("tau* [{TIME_UNIT}]  {}", fmt_opt(summary.optimum.map(|o| o.tau_star)));
    println!("lambda_k   {}", num(summary.spectrum.lambda_k));
    println!("lambda_2   {}", num(summary.spectrum.lambda2));
    println!("quotient   {}", num(summary.spectrum.quotient));
    println!(
        "unimodal   {}",
        summary
            .unimodality
            .map_or("-".into(), |u| format!("{} ({} violations)", u.is_unimodal, u.violations))
    );
    println!(
        "cells      {} synchronized, {} diverged, {} failed, {} holes",
        summary.synchronized_cells, summary.diverged_cells, summary.failed_cells, summary.holes
    );
    for (gi, ti, msg) in &summary.region.failures {
        log::warn!(
            "cell gamma={} tau={} failed: {msg}",
            summary.region.grid.gamma_values[*gi],
            summary.region.grid.tau_values[*ti]
        );
    }
    let cells = summary.region.grid.cells();
    if 2 * (summary.diverged_cells + summary.failed_cells) > cells {
        return Err(Failure::Runtime(anyhow!(
            "{} of {cells} cells diverged or failed",
            summary.diverged_cells + summary.failed_cells
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct TheoryReport<'a> {
    summary: &'a TheorySummary,
    curve_samples: usize,
    config: &'a RunConfig,
}

pub fn theory_cmd(cfg: &RunConfig) -> CmdResult<()> {
    let t = &cfg.theory;
    let c = SemipassiveConstants::new(t.alpha, t.c0, t.c1, t.c2).config()?;
    let sp = match (t.lambda2, t.lambdak) {
        (Some(l2), Some(lk)) => SpectralPair::new(l2, lk).config()?,
        (None, None) => {
            let (_, g) = cfg
                .graph()
                .context("give --lambda2 and --lambdak, or a graph")
                .config()?;
            SpectralPair::try_from(&graph_spectrum(&g)?).config()?
        }
        _ => return Err(Failure::Config(anyhow!("--lambda2 and --lambdak must be given together"))),
    };
    let s = summarize(&c, &sp);
    let d = derived_constants(&c);
    let gamma_max = t.gamma_max.unwrap_or(4.0 * s.gamma_star);
    let curve = phi_curve(&d, &sp, s.gamma_min, gamma_max, t.samples).config()?;

    println!("γ′ = {}", num(s.derived.gamma_prime));
    println!("c̄₁ = {}", num(s.derived.cbar1));
    println!("c̄₂ = {}", num(s.derived.cbar2));
    println!("γ′/λ₂ = {}", num(s.gamma_min));
    println!("γ* = {}", num(s.gamma_star));
    println!("γ̃ = {}", num(s.gamma_tilde));
    println!("τ* = {}", num(s.tau_star));

    let mut csv = Csv::new(&["gamma", "phi"]);
    for (g, p) in &curve {
        csv.row([num(*g), num(*p)]);
    }
    csv.write(&t.out).runtime()?;
    let report = TheoryReport {
        summary: &s,
        curve_samples: curve.len(),
        config: cfg,
    };
    write_json(&sibling(&t.out, ".json"), &report).runtime()
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    report: &'a ComparisonReport,
    sources: Vec<String>,
    time_unit: &'static str,
    config: &'a RunConfig,
}

pub fn read_summary(path: &PathBuf) -> anyhow::Result<SweepSummary> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not a sweep summary", path.display()))
}

pub fn compare_cmd(cfg: &mut RunConfig, quiet: bool) -> CmdResult<()> {
    let mut results = Vec::new();
    let mut sources = Vec::new();
    if !cfg.compare.regions.is_empty() {
        for path in &cfg.compare.regions {
            let s = read_summary(path).config()?;
            sources.push(path.display().to_string());
            results.push(TopologyResult {
                name: s.graph_id,
                region: s.region,
                spectrum: s.spectrum,
            });
        }
    } else {
        let workers = validate_sweep(cfg)?;
        for name in cfg.compare.graphs.clone() {
            let g = delaysync::graph::builtin(&name).config()?;
            let spectrum = graph_spectrum(&g)?;
            let region = sweep_graph(cfg, name.clone(), g, workers, quiet)?;
            sources.push(format!("sweep:{name}"));
            results.push(TopologyResult { name, region, spectrum });
        }
    }
    if results.len() < 2 {
        return Err(Failure::Config(anyhow!("compare needs at least two topologies")));
    }
    let report = compare_topologies(&results, cfg.compare.tolerance).config()?;

    println!(
        "{:<8} {:>8} {:>10} {:>10} {:>10} {:>10} {:>9}",
        "graph", "gamma*", "tau*[ms]", "lambda_k", "lambda_2", "quotient", "unimodal"
    );
    for r in &report.rows {
        println!(
            "{:<8} {:>8} {:>10} {:>10.4} {:>10.4} {:>10.4} {:>9}",
            r.name,
            fmt_opt(r.gamma_star),
            fmt_opt(r.tau_star),
            r.lambda_k,
            r.lambda2,
            r.quotient,
            r.unimodal.map_or("-".into(), |u| u.to_string())
        );
    }
    for p in &report.pairs {
        println!(
            "tau*({}) {} tau*({}): {}",
            p.first,
            p.predicted,
            p.second,
            if p.pass { "pass" } else { "FAIL" }
        );
    }
    if let Some(ok) = report.unit_quotient_is_max {
        println!("quotient-1 topology attains max tau*: {}", if ok { "pass" } else { "FAIL" });
    }
    let out = CompareOutput {
        report: &report,
        sources,
        time_unit: TIME_UNIT,
        config: cfg,
    };
    write_json(&cfg.compare.out, &out).runtime()
}
