//! Parallel (γ, τ) grid sweeps and the analysis of the resulting empirical
//! synchronization region: boundary curve, optimum, unimodality and
//! cross-topology comparison.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{LaplacianSpectrum, WeightedGraph};
use crate::models::NodeModel;
use crate::network::{initial_condition, is_synchronized, NetworkSystem, StateBox, SyncConfig};
use crate::theory::{corollary2_compare, SpectralPair};

/// Axis values of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub gamma_values: Vec<f64>,
    pub tau_values: Vec<f64>,
}

impl SweepGrid {
    pub fn new(gamma_values: Vec<f64>, tau_values: Vec<f64>) -> Result<Self> {
        for (name, axis) in [("gamma_values", &gamma_values), ("tau_values", &tau_values)] {
            if axis.is_empty() {
                return Err(invalid(name, "must not be empty"));
            }
            if axis.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(invalid(name, "values must be finite and nonnegative"));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid(name, "values must be strictly ascending"));
            }
        }
        Ok(Self {
            gamma_values,
            tau_values,
        })
    }

    /// Grid from `a:b:step` ranges on both axes.
    pub fn from_ranges(gamma: (f64, f64, f64), tau: (f64, f64, f64)) -> Result<Self> {
        Self::new(axis(gamma.0, gamma.1, gamma.2)?, axis(tau.0, tau.1, tau.2)?)
    }

    /// γ ∈ [0.25, 12] step 0.25, τ ∈ [0, 6] step 0.05.
    pub fn table_default() -> Self {
        Self::from_ranges((0.25, 12.0, 0.25), (0.0, 6.0, 0.05)).expect("static grid")
    }

    /// Four times coarser on each axis than [`SweepGrid::table_default`].
    pub fn smoke() -> Self {
        Self::from_ranges((0.5, 12.0, 1.0), (0.0, 6.0, 0.2)).expect("static grid")
    }

    pub fn cells(&self) -> usize {
        self.gamma_values.len() * self.tau_values.len()
    }

    /// Smallest spacing of the τ axis (zero for a single value).
    pub fn tau_step(&self) -> f64 {
        self.tau_values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            .min(f64::MAX)
            * (self.tau_values.len() > 1) as u8 as f64
    }
}

/// `a, a + step, …` up to `b` inclusive, each value computed as `a + i·step`
/// and rounded to 12 significant decimals so that grids built from the same
/// range are identical.
pub fn axis(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !a.is_finite() || !b.is_finite() || !(step > 0.0) || b < a {
        return Err(invalid("range", format!("need a <= b and step > 0, got {a}:{b}:{step}")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| {
            let v = a + i as f64 * step;
            let scale = 1e12;
            (v * scale).round() / scale
        })
        .collect())
}

/// Network description reused for every cell of a sweep.
#[derive(Debug, Clone)]
pub struct NetworkTemplate<M> {
    pub model: M,
    pub graph: WeightedGraph,
    pub graph_id: String,
}

/// Initial-condition policy of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    /// One run per seed; a cell counts as synchronized only if every run does.
    pub seeds: Vec<u64>,
    /// State components that receive the per-node offsets.
    pub perturbed: Vec<usize>,
}

impl InitialConditions {
    pub fn single(seed: u64) -> Self {
        Self {
            seeds: vec![seed],
            perturbed: DEFAULT_PERTURBED.to_vec(),
        }
    }
}

/// Fast components `(ζ₁, y)` of the Hindmarsh–Rose state.
pub const DEFAULT_PERTURBED: [usize; 2] = [0, 2];

/// Provenance recorded with every region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub graph_id: String,
    pub model: String,
    pub sync: SyncConfig,
    pub initial_conditions: InitialConditions,
    pub initial_function: String,
    pub time_unit: String,
}

/// Per-cell result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub synchronized: bool,
    pub diverged: bool,
    pub max_error: f64,
    pub failed: bool,
}

/// Empirical synchronization region over a grid. Matrices are indexed
/// `[γ-index][τ-index]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub grid: SweepGrid,
    pub verdicts: Vec<Vec<bool>>,
    pub diverged: Vec<Vec<bool>>,
    /// Largest disagreement in the window; `None` for diverged or failed cells.
    pub max_error: Vec<Vec<Option<f64>>>,
    /// Cells whose integration returned an error, with the message.
    pub failures: Vec<(usize, usize, String)>,
    pub metadata: SweepMetadata,
}

impl RegionMap {
    /// Region from a verdict matrix only (no errors, no divergence).
    pub fn from_verdicts(grid: SweepGrid, verdicts: Vec<Vec<bool>>, metadata: SweepMetadata) -> Result<Self> {
        if verdicts.len() != grid.gamma_values.len()
            || verdicts.iter().any(|c| c.len() != grid.tau_values.len())
        {
            return Err(Error::DimensionMismatch {
                expected: grid.cells(),
                got: verdicts.iter().map(Vec::len).sum(),
            });
        }
        Ok(Self {
            diverged: verdicts.iter().map(|c| vec![false; c.len()]).collect(),
            max_error: verdicts.iter().map(|c| vec![None; c.len()]).collect(),
            failures: Vec::new(),
            grid,
            verdicts,
            metadata,
        })
    }

    pub fn synchronized_cells(&self) -> usize {
        self.verdicts.iter().flatten().filter(|v| **v).count()
    }

    pub fn diverged_cells(&self) -> usize {
        self.diverged.iter().flatten().filter(|v| **v).count()
    }

    pub fn failed(&self, gi: usize, ti: usize) -> bool {
        self.failures.iter().any(|&(g, t, _)| g == gi && t == ti)
    }
}

/// Evaluates one cell for every seed.
fn evaluate_cell<M: NodeModel + Clone>(
    template: &NetworkTemplate<M>,
    gamma: f64,
    tau: f64,
    sync: &SyncConfig,
    starts: &[Vec<f64>],
) -> std::result::Result<CellResult, String> {
    let net = NetworkSystem::new(template.model.clone(), template.graph.clone(), gamma, tau)
        .map_err(|e| e.to_string())?;
    let mut cell = CellResult {
        synchronized: true,
        diverged: false,
        max_error: 0.0,
        failed: false,
    };
    for x0 in starts {
        let v = is_synchronized(&net, sync, x0).map_err(|e| e.to_string())?;
        cell.synchronized &= v.synchronized;
        cell.diverged |= v.diverged;
        cell.max_error = cell.max_error.max(v.max_error);
    }
    Ok(cell)
}

/// Runs every (γ, τ) cell on a pool of `workers` threads.
///
/// Cells are written to fixed slots, so the result does not depend on the
/// worker count. Per-cell errors are recorded in `failures` (the cell counts
/// as unsynchronized) and never abort the sweep. `progress`, if given, is
/// called with the number of finished cells.
pub fn run_sweep<M>(
    template: &NetworkTemplate<M>,
    grid: &SweepGrid,
    sync: &SyncConfig,
    ics: &InitialConditions,
    workers: usize,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<RegionMap>
where
    M: NodeModel + StateBox + Clone,
{
    if workers == 0 {
        return Err(invalid("workers", "must be at least 1"));
    }
    sync.validate()?;
    if ics.seeds.is_empty() {
        return Err(invalid("seeds", "need at least one seed"));
    }
    let n = template.model.state_dim();
    if ics.perturbed.iter().any(|&c| c >= n) {
        return Err(invalid("perturbed", format!("component index out of range 0..{n}")));
    }
    let bounds = template.model.state_box();
    let k = template.graph.k();
    let starts: Vec<Vec<f64>> = ics
        .seeds
        .iter()
        .map(|&s| initial_condition(k, &bounds, &ics.perturbed, s))
        .collect();

    let ng = grid.gamma_values.len();
    let nt = grid.tau_values.len();
    let total = ng * nt;
    let done = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Other(format!("cannot build worker pool: {e}")))?;
    let results: Vec<std::result::Result<CellResult, String>> = pool.install(|| {
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let (gi, ti) = (idx / nt, idx % nt);
                let r = evaluate_cell(
                    template,
                    grid.gamma_values[gi],
                    grid.tau_values[ti],
                    sync,
                    &starts,
                );
                let finished = done.fetch_add(1, AtomicOrdering::Relaxed) + 1;
                if let Some(cb) = progress {
                    cb(finished, total);
                }
                r
            })
            .collect()
    });

    let mut verdicts = vec![vec![false; nt]; ng];
    let mut diverged = vec![vec![false; nt]; ng];
    let mut max_error = vec![vec![None; nt]; ng];
    let mut failures = Vec::new();
    for (idx, r) in results.into_iter().enumerate() {
        let (gi, ti) = (idx / nt, idx % nt);
        match r {
            Ok(c) => {
                verdicts[gi][ti] = c.synchronized;
                diverged[gi][ti] = c.diverged;
                max_error[gi][ti] = Some(c.max_error).filter(|e| e.is_finite());
            }
            Err(msg) => failures.push((gi, ti, msg)),
        }
    }
    Ok(RegionMap {
        grid: grid.clone(),
        verdicts,
        diverged,
        max_error,
        failures,
        metadata: SweepMetadata {
            graph_id: template.graph_id.clone(),
            model: template.model.name().to_string(),
            sync: *sync,
            initial_conditions: ics.clone(),
            initial_function: "constant".into(),
            time_unit: "ms".into(),
        },
    })
}

/// Largest delay per coupling strength, read from the region with the
/// contiguity-from-zero rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    /// `(γ, τ_max(γ))`, with `γ`-index, for columns synchronized at τ = τ₀.
    pub points: Vec<BoundaryPoint>,
    /// Synchronized cells lying above a desynchronized cell in their column.
    pub holes: usize,
    /// Spacing of the τ grid, used as the noise allowance.
    pub tau_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub gamma: f64,
    pub tau_max: f64,
    pub gamma_index: usize,
    pub tau_index: usize,
}

pub fn boundary_curve(r: &RegionMap) -> BoundaryCurve {
    let mut points = Vec::new();
    let mut holes = 0;
    for (gi, column) in r.verdicts.iter().enumerate() {
        let run = column.iter().take_while(|v| **v).count();
        holes += column[run..].iter().filter(|v| **v).count();
        if run > 0 {
            points.push(BoundaryPoint {
                gamma: r.grid.gamma_values[gi],
                tau_max: r.grid.tau_values[run - 1],
                gamma_index: gi,
                tau_index: run - 1,
            });
        }
    }
    BoundaryCurve {
        points,
        holes,
        tau_step: r.grid.tau_step(),
    }
}

/// Cell of largest boundary delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalOptimum {
    pub gamma_star: f64,
    pub tau_star: f64,
    pub gamma_index: usize,
    pub tau_index: usize,
}

/// Maximum of the boundary curve, ties going to the smallest γ; `None` when
/// no column synchronizes.
pub fn empirical_optimum(r: &RegionMap) -> Option<EmpiricalOptimum> {
    optimum_of(&boundary_curve(r))
}

pub fn optimum_of(curve: &BoundaryCurve) -> Option<EmpiricalOptimum> {
    let mut best: Option<&BoundaryPoint> = None;
    for p in &curve.points {
        if best.map_or(true, |b| p.tau_max > b.tau_max) {
            best = Some(p);
        }
    }
    best.map(|p| EmpiricalOptimum {
        gamma_star: p.gamma,
        tau_star: p.tau_max,
        gamma_index: p.gamma_index,
        tau_index: p.tau_index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unimodality {
    pub is_unimodal: bool,
    pub violations: usize,
}

/// Checks that the curve rises to its (first) maximum and falls afterwards.
///
/// Before the peak a point violates when it lies more than one τ-cell below
/// the running maximum; after the peak when it lies more than one τ-cell
/// above the running minimum. A monotone curve counts as unimodal.
pub fn unimodality_score(curve: &BoundaryCurve) -> Result<Unimodality> {
    let values: Vec<f64> = curve.points.iter().map(|p| p.tau_max).collect();
    if values.len() < 3 {
        return Err(invalid("curve", format!("need at least 3 points, got {}", values.len())));
    }
    let allowance = curve.tau_step * (1.0 + 1e-9);
    let peak = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    let mut violations = 0;
    let mut running_max = values[0];
    for &v in &values[..=peak] {
        if v < running_max - allowance {
            violations += 1;
        }
        running_max = running_max.max(v);
    }
    let mut running_min = values[peak];
    for &v in &values[peak..] {
        if v > running_min + allowance {
            violations += 1;
        }
        running_min = running_min.min(v);
    }
    Ok(Unimodality {
        is_unimodal: violations == 0,
        violations,
    })
}

/// One topology's sweep together with its spectrum.
#[derive(Debug, Clone)]
pub struct TopologyResult {
    pub name: String,
    pub region: RegionMap,
    pub spectrum: LaplacianSpectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub gamma_star: Option<f64>,
    pub tau_star: Option<f64>,
    pub lambda_k: f64,
    pub lambda2: f64,
    pub quotient: f64,
    pub unimodal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub first: String,
    pub second: String,
    /// Predicted relation of the first τ* to the second: `<`, `=` or `>`.
    pub predicted: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub pairs: Vec<PairCheck>,
    /// Whether a quotient-1 topology attains the largest τ* (None if no
    /// topology has quotient 1).
    pub unit_quotient_is_max: Option<bool>,
    /// Relative tolerance for "equal τ*".
    pub equal_tolerance: f64,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass) && self.unit_quotient_is_max != Some(false)
    }
}

/// Tabulates empirical optima against spectra and checks every pairwise
/// τ* prediction. Equal quotients must give τ* within `equal_tolerance`
/// (relative) or one τ-cell, whichever is larger.
pub fn compare_topologies(results: &[TopologyResult], equal_tolerance: f64) -> Result<ComparisonReport> {
    if results.len() < 2 {
        return Err(invalid("regions", "need at least two topologies"));
    }
    let mut rows = Vec::new();
    let mut pairs_in = Vec::new();
    for r in results {
        let curve = boundary_curve(&r.region);
        let opt = optimum_of(&curve);
        let unimodal = unimodality_score(&curve).ok().map(|u| u.is_unimodal);
        rows.push(ComparisonRow {
            name: r.name.clone(),
            gamma_star: opt.map(|o| o.gamma_star),
            tau_star: opt.map(|o| o.tau_star),
            lambda_k: r.spectrum.lambda_k,
            lambda2: r.spectrum.lambda2,
            quotient: r.spectrum.quotient,
            unimodal,
        });
        pairs_in.push((SpectralPair::try_from(&r.spectrum)?, curve.tau_step));
    }

    let mut pairs = Vec::new();
    for a in 0..results.len() {
        for b in (a + 1)..results.len() {
            let pred = corollary2_compare(&pairs_in[a].0, &pairs_in[b].0);
            let (ta, tb) = (rows[a].tau_star, rows[b].tau_star);
            let cell = pairs_in[a].1.max(pairs_in[b].1);
            let pass = match (ta, tb) {
                (Some(ta), Some(tb)) => match pred.tau_order {
                    Ordering::Equal => (ta - tb).abs() <= (equal_tolerance * ta.max(tb)).max(cell) + 1e-12,
                    Ordering::Less => ta < tb,
                    Ordering::Greater => ta > tb,
                },
                _ => false,
            };
            pairs.push(PairCheck {
                first: rows[a].name.clone(),
                second: rows[b].name.clone(),
                predicted: match pred.tau_order {
                    Ordering::Less => "<",
                    Ordering::Equal => "=",
                    Ordering::Greater => ">",
                }
                .into(),
                pass,
            });
        }
    }

    let unit_rows: Vec<&ComparisonRow> = rows
        .iter()
        .filter(|r| (r.quotient - 1.0).abs() <= 1e-9)
        .collect();
    let unit_quotient_is_max = if unit_rows.is_empty() {
        None
    } else {
        let best_unit = unit_rows.iter().filter_map(|r| r.tau_star).fold(f64::NEG_INFINITY, f64::max);
        let best_all = rows.iter().filter_map(|r| r.tau_star).fold(f64::NEG_INFINITY, f64::max);
        Some(best_unit >= best_all)
    };

    Ok(ComparisonReport {
        rows,
        pairs,
        unit_quotient_is_max,
        equal_tolerance,
    })
}
