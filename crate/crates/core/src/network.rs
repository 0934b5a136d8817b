//! Networks of identical nodes with diffusive, time-delayed output coupling
//! `u_i(t) = γ Σ_j a_ij (y_j(t − τ) − y_i(t − τ))`, and synchronization
//! measurements on the resulting trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dde::{default_step, integrate, integrate_observed, DelaySystem, IntegratorConfig, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::graph::{is_connected, laplacian, LaplacianMatrix, WeightedGraph};
use crate::linalg::Matrix;
use crate::models::NodeModel;

/// Largest supported output dimension per node.
pub const MAX_OUTPUT_DIM: usize = 8;

/// Magnitude of the per-node offsets in [`initial_condition`].
pub const IC_OFFSET: f64 = 0.5;

/// Closed loop of `k` copies of `model` coupled over `graph`.
#[derive(Debug, Clone)]
pub struct NetworkSystem<M> {
    model: M,
    graph: WeightedGraph,
    laplacian: LaplacianMatrix,
    gamma: f64,
    tau: f64,
    /// Per node: `(j, a_ij)` for every neighbor with positive weight.
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl<M: NodeModel> NetworkSystem<M> {
    pub fn new(model: M, graph: WeightedGraph, gamma: f64, tau: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(invalid("gamma", format!("must be finite and nonnegative, got {gamma}")));
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(invalid("tau", format!("must be finite and nonnegative, got {tau}")));
        }
        if model.output_dim() == 0 || model.output_dim() > MAX_OUTPUT_DIM {
            return Err(invalid(
                "model",
                format!("output dimension must be in 1..={MAX_OUTPUT_DIM}"),
            ));
        }
        if model.output_dim() > model.state_dim() {
            return Err(invalid("model", "output dimension exceeds state dimension"));
        }
        if !is_connected(&graph) {
            return Err(Error::Disconnected);
        }
        let laplacian = laplacian(&graph);
        let mut neighbors = vec![Vec::new(); graph.k()];
        for e in graph.edges().iter().filter(|e| e.weight > 0.0) {
            neighbors[e.i].push((e.j, e.weight));
            neighbors[e.j].push((e.i, e.weight));
        }
        for list in &mut neighbors {
            list.sort_by_key(|&(j, _)| j);
        }
        Ok(Self {
            model,
            graph,
            laplacian,
            gamma,
            tau,
            neighbors,
        })
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn laplacian(&self) -> &LaplacianMatrix {
        &self.laplacian
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn k(&self) -> usize {
        self.graph.k()
    }

    pub fn node_dim(&self) -> usize {
        self.model.state_dim()
    }
}

impl<M: NodeModel> DelaySystem for NetworkSystem<M> {
    fn dim(&self) -> usize {
        self.k() * self.node_dim()
    }

    fn delay(&self) -> f64 {
        self.tau
    }

    fn derivative(&self, _t: f64, x: &[f64], x_delayed: &[f64], dx: &mut [f64]) {
        let n = self.node_dim();
        let m = self.model.output_dim();
        let out = n - m;
        let mut u = [0.0f64; MAX_OUTPUT_DIM];
        for (i, nbrs) in self.neighbors.iter().enumerate() {
            let yi = &x_delayed[i * n + out..(i + 1) * n];
            let ui = &mut u[..m];
            ui.fill(0.0);
            for &(j, a) in nbrs {
                let yj = &x_delayed[j * n + out..(j + 1) * n];
                for c in 0..m {
                    ui[c] += a * (yj[c] - yi[c]);
                }
            }
            for c in ui.iter_mut() {
                *c *= self.gamma;
            }
            self.model
                .derivative(&x[i * n..(i + 1) * n], ui, &mut dx[i * n..(i + 1) * n]);
        }
    }
}

/// `u = −γ (L ⊗ I_m) y`, evaluated as `γ Σ_{j≠i} (−L_ij)(y_j − y_i)` so
/// that equal outputs give exactly zero.
pub fn coupling_input(y_delayed: &[f64], l: &LaplacianMatrix, gamma: f64, m: usize) -> Result<Vec<f64>> {
    let k = l.k();
    if m == 0 || y_delayed.len() != k * m {
        return Err(Error::DimensionMismatch {
            expected: k * m,
            got: y_delayed.len(),
        });
    }
    let lm = l.matrix();
    let mut u = vec![0.0; k * m];
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            let a = -lm[(i, j)];
            if a == 0.0 {
                continue;
            }
            for c in 0..m {
                u[i * m + c] += a * (y_delayed[j * m + c] - y_delayed[i * m + c]);
            }
        }
        for c in 0..m {
            u[i * m + c] *= gamma;
        }
    }
    Ok(u)
}

/// Lower-right `(k−1)×(k−1)` block of `M̃ L M̃⁻¹` with
/// `M̃ = [[1, 0ᵀ], [1, −I]]` (an involution, so `M̃⁻¹ = M̃`).
///
/// Its spectrum is the Laplacian spectrum without the zero eigenvalue.
pub fn reduced_laplacian(l: &LaplacianMatrix) -> Result<Matrix> {
    let k = l.k();
    if k < 2 {
        return Err(invalid("laplacian", "need at least 2 nodes"));
    }
    let transform = Matrix::from_fn(k, k, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        (_, 0) => 1.0,
        (i, j) if i == j => -1.0,
        _ => 0.0,
    });
    let full = transform.matmul(l.matrix())?.matmul(&transform)?;
    Ok(Matrix::from_fn(k - 1, k - 1, |i, j| full[(i + 1, j + 1)]))
}

/// Which part of the node state enters the synchronization error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SyncMeasure {
    /// Full state `x_i`.
    #[default]
    FullState,
    /// Outputs `y_i` only.
    Output,
}

/// Synchronization test settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyncConfig {
    /// Transient discarded before measuring.
    pub transient: f64,
    /// Length of the measurement window.
    pub window: f64,
    /// Threshold on the pairwise disagreement.
    pub epsilon: f64,
    pub measure: SyncMeasure,
    /// Integration step; [`default_step`] of the delay when absent.
    pub step: Option<f64>,
}

impl Default for SyncConfig {
    fn default() -> Self {
        // Convergence close to the region boundary is slow; with much shorter
        // transients the measured boundary still moves when T₀ is doubled.
        Self {
            transient: 2400.0,
            window: 100.0,
            epsilon: 1e-2,
            measure: SyncMeasure::FullState,
            step: None,
        }
    }
}

impl SyncConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("transient", self.transient), ("window", self.window)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(invalid("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if let Some(h) = self.step {
            if !(h > 0.0) || !h.is_finite() {
                return Err(invalid("step", format!("must be positive, got {h}")));
            }
        }
        Ok(())
    }

    pub fn step_for(&self, tau: f64) -> f64 {
        self.step.unwrap_or_else(|| default_step(tau))
    }
}

/// Outcome of [`is_synchronized`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncVerdict {
    pub synchronized: bool,
    /// Largest pairwise disagreement in the window (`+∞` if diverged).
    pub max_error: f64,
    pub diverged: bool,
}

/// Largest pairwise Euclidean distance between the node blocks of `x`,
/// restricted to components `lo..hi` of each block.
fn max_pairwise_gap(x: &[f64], n: usize, lo: usize, hi: usize) -> f64 {
    let k = x.len() / n;
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in (i + 1)..k {
            let d2: f64 = (lo..hi)
                .map(|c| {
                    let d = x[i * n + c] - x[j * n + c];
                    d * d
                })
                .sum();
            worst = worst.max(d2);
        }
    }
    worst.sqrt()
}

/// Max over recorded times in `[t_a, t_b]` of the largest full-state
/// distance between any two nodes.
pub fn sync_error(traj: &Trajectory, node_dim: usize, window: (f64, f64)) -> Result<f64> {
    if node_dim == 0 || traj.dim % node_dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: node_dim,
            got: traj.dim,
        });
    }
    let mut any = false;
    let mut worst = 0.0f64;
    for (t, x) in traj.iter() {
        if t >= window.0 && t <= window.1 {
            any = true;
            worst = worst.max(max_pairwise_gap(x, node_dim, 0, node_dim));
        }
    }
    if !any {
        return Err(Error::EmptyWindow);
    }
    Ok(worst)
}

/// Integrates over `[0, T₀ + W]` and compares the disagreement over
/// `[T₀, T₀ + W]` against `ε`.
pub fn is_synchronized<M: NodeModel>(
    net: &NetworkSystem<M>,
    cfg: &SyncConfig,
    x0: &[f64],
) -> Result<SyncVerdict> {
    cfg.validate()?;
    let h = cfg.step_for(net.tau());
    let icfg = IntegratorConfig::new(h, cfg.transient + cfg.window, 1)?;
    let n = net.node_dim();
    let (lo, hi) = match cfg.measure {
        SyncMeasure::FullState => (0, n),
        SyncMeasure::Output => (n - net.model().output_dim(), n),
    };
    // Grid times are n·h; compare in step units to avoid rounding at T₀.
    let first_step = (cfg.transient / h - 1e-9).ceil();
    let mut worst = 0.0f64;
    let summary = integrate_observed(net, x0, &icfg, |t, x| {
        if t / h >= first_step {
            worst = worst.max(max_pairwise_gap(x, n, lo, hi));
        }
    })?;
    if summary.diverged {
        return Ok(SyncVerdict {
            synchronized: false,
            max_error: f64::INFINITY,
            diverged: true,
        });
    }
    Ok(SyncVerdict {
        synchronized: worst < cfg.epsilon,
        max_error: worst,
        diverged: false,
    })
}

/// True iff the run did not diverge and every recorded stacked state after
/// `transient` has Euclidean norm at most `bound`.
pub fn boundedness_check(traj: &Trajectory, bound: f64, transient: f64) -> bool {
    if traj.diverged {
        return false;
    }
    traj.iter()
        .filter(|(t, _)| *t >= transient)
        .all(|(_, x)| x.iter().map(|v| v * v).sum::<f64>().sqrt() <= bound)
}

/// Simulates the network from constant history `x0` with the default step.
pub fn simulate<M: NodeModel>(
    net: &NetworkSystem<M>,
    x0: &[f64],
    t_end: f64,
    record_stride: usize,
    step: Option<f64>,
) -> Result<Trajectory> {
    let h = step.unwrap_or_else(|| default_step(net.tau()));
    integrate(net, x0, &IntegratorConfig::new(h, t_end, record_stride)?)
}

/// Box from which the common starting point of [`initial_condition`] is
/// drawn, per state component.
pub trait StateBox {
    fn state_box(&self) -> Vec<(f64, f64)>;
}

impl StateBox for crate::models::HindmarshRose {
    fn state_box(&self) -> Vec<(f64, f64)> {
        // Covers the bulk of the bursting attractor.
        vec![(-8.0, 0.0), (2.9, 3.3), (-1.5, 1.5)]
    }
}

/// Seeded, desynchronized stacked initial state: a common random point in
/// `bounds` plus, for each node, an offset of length [`IC_OFFSET`] in a
/// random direction of the components listed in `perturbed`.
pub fn initial_condition(
    k: usize,
    bounds: &[(f64, f64)],
    perturbed: &[usize],
    seed: u64,
) -> Vec<f64> {
    let n = bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = bounds.iter().map(|&(a, b)| rng.gen_range(a..b)).collect();
    let mut x = Vec::with_capacity(k * n);
    for _ in 0..k {
        let mut dir: Vec<f64> = perturbed.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        dir.iter_mut().for_each(|v| *v *= IC_OFFSET / norm);
        let mut node = base.clone();
        for (&c, d) in perturbed.iter().zip(&dir) {
            node[c] += d;
        }
        x.extend(node);
    }
    x
}

/// The stacked state with every node at `node`.
pub fn synchronized_state(k: usize, node: &[f64]) -> Vec<f64> {
    node.iter().copied().cycle().take(k * node.len()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{builtin, normalize_max_degree, spectrum};
    use crate::models::HindmarshRose;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coupling_examples() {
        let l = laplacian(&builtin("path3").unwrap());
        assert_eq!(coupling_input(&[0.7; 3], &l, 5.0, 1).unwrap(), vec![0.0; 3]);
        assert_eq!(coupling_input(&[1.0, -2.0, 3.0], &l, 0.0, 1).unwrap(), vec![0.0; 3]);
        let k2 = normalize_max_degree(&builtin("k2").unwrap()).unwrap();
        let u = coupling_input(&[1.0, 0.0], &laplacian(&k2), 2.0, 1).unwrap();
        assert_eq!(u, vec![-2.0, 2.0]);
        assert!(coupling_input(&[1.0, 0.0], &laplacian(&k2), 2.0, 2).is_err());
    }

    #[test]
    fn coupling_matches_kronecker_product() {
        let g = builtin("g6").unwrap();
        let l = laplacian(&g);
        let m = 2;
        let y: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37).sin()).collect();
        let u = coupling_input(&y, &l, 1.7, m).unwrap();
        for i in 0..4 {
            for c in 0..m {
                let lhs: f64 = (0..4).map(|j| l.matrix()[(i, j)] * y[j * m + c]).sum();
                assert_abs_diff_eq!(u[i * m + c], -1.7 * lhs, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn reduced_laplacian_two_nodes() {
        let k2 = normalize_max_degree(&builtin("k2").unwrap()).unwrap();
        let lt = reduced_laplacian(&laplacian(&k2)).unwrap();
        assert_eq!(lt.to_rows(), vec![vec![2.0]]);
    }

    #[test]
    fn reduced_laplacian_closed_form() {
        // Lower-right block equals L₂₂ − 1 bᵀ with b the first column below the diagonal.
        let l = laplacian(&builtin("g6").unwrap());
        let lt = reduced_laplacian(&l).unwrap();
        let lm = l.matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(lt[(i, j)], lm[(i + 1, j + 1)] - lm[(j + 1, 0)], epsilon = 1e-15);
            }
        }
        let path3 = laplacian(&builtin("path3").unwrap());
        let lt = reduced_laplacian(&path3).unwrap();
        let eig = nalgebra::DMatrix::from_fn(2, 2, |i, j| lt[(i, j)]).complex_eigenvalues();
        let mut re: Vec<f64> = eig.iter().map(|c| c.re).collect();
        re.sort_by(f64::total_cmp);
        let s = spectrum(&path3).unwrap();
        assert_abs_diff_eq!(re[0], s.lambda2, epsilon = 1e-10);
        assert_abs_diff_eq!(re[1], s.lambda_k, epsilon = 1e-10);
        assert!(eig.iter().all(|c| c.im.abs() < 1e-12));
    }


    #[test]
    fn single_node_graph_is_rejected() {
        assert!(builtin("complete1").is_err());
    }

    #[test]
    fn disconnected_network_is_rejected() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(
            NetworkSystem::new(HindmarshRose, g, 1.0, 0.0),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn sync_error_examples() {
        let traj = Trajectory {
            dim: 6,
            times: vec![0.0, 1.0, 2.0],
            states: [[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]; 3].concat(),
            diverged: false,
        };
        assert_eq!(sync_error(&traj, 3, (0.0, 2.0)).unwrap(), 0.0);
        let traj = Trajectory {
            states: [[1.0, 2.0, 3.0, 0.0, 2.0, 3.0]; 3].concat(),
            ..traj
        };
        assert_eq!(sync_error(&traj, 3, (0.5, 2.0)).unwrap(), 1.0);
        assert_eq!(sync_error(&traj, 3, (5.0, 6.0)), Err(Error::EmptyWindow));
        let swapped = Trajectory {
            states: [[0.0, 2.0, 3.0, 1.0, 2.0, 3.0]; 3].concat(),
            ..traj.clone()
        };
        assert_eq!(
            sync_error(&swapped, 3, (0.0, 2.0)).unwrap(),
            sync_error(&traj, 3, (0.0, 2.0)).unwrap()
        );
    }

    #[test]
    fn boundedness_examples() {
        let traj = Trajectory {
            dim: 2,
            times: vec![0.0, 1.0],
            states: vec![3.0, 4.0, 0.0, 1.0],
            diverged: false,
        };
        assert!(boundedness_check(&traj, 5.0, 0.0));
        assert!(!boundedness_check(&traj, 4.9, 0.0));
        assert!(boundedness_check(&traj, 1.0, 0.5));
        assert!(!boundedness_check(&traj, 0.0, 0.0));
        let diverged = Trajectory {
            diverged: true,
            ..traj
        };
        assert!(!boundedness_check(&diverged, 1e12, 0.0));
    }

    #[test]
    fn initial_condition_is_seeded_and_offset() {
        let b = HindmarshRose.state_box();
        let a = initial_condition(3, &b, &[0, 2], 7);
        assert_eq!(a, initial_condition(3, &b, &[0, 2], 7));
        assert_ne!(a, initial_condition(3, &b, &[0, 2], 8));
        // Unperturbed component is common to all nodes.
        assert_eq!(a[1], a[4]);
        assert_eq!(a[4], a[7]);
        let d01 = ((a[0] - a[3]).powi(2) + (a[2] - a[5]).powi(2)).sqrt();
        assert!(d01 > 0.0 && d01 <= 2.0 * IC_OFFSET + 1e-12);
    }

    #[test]
    fn synchronized_state_repeats_node() {
        assert_eq!(synchronized_state(2, &[1.0, 2.0]), vec![1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn epsilon_infinity_is_trivially_synchronized() {
        let net = NetworkSystem::new(HindmarshRose, builtin("k2").unwrap(), 0.0, 0.0).unwrap();
        let cfg = SyncConfig {
            transient: 5.0,
            window: 5.0,
            epsilon: f64::INFINITY,
            ..SyncConfig::default()
        };
        let x0 = initial_condition(2, &HindmarshRose.state_box(), &[0, 1, 2], 1);
        let v = is_synchronized(&net, &cfg, &x0).unwrap();
        assert!(v.synchronized && !v.diverged);
    }
}
