//! Weighted undirected communication graphs, their Laplacians and spectra.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};

/// Eigenvalues below `ZERO_EIG_REL_TOL * ‖L‖_F` are treated as zero.
pub const ZERO_EIG_REL_TOL: f64 = 1e-10;

/// One undirected edge `{i, j}` with `i < j` (0-based node indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Simple weighted undirected graph on `k` nodes.
///
/// Each unordered pair is stored once, so `a_ij = a_ji` holds structurally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    k: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph from 0-based edges, rejecting self-loops, duplicate
    /// pairs, out-of-range nodes and negative or non-finite weights.
    pub fn new(k: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {k}")));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", a + 1)));
            }
            if a >= k || b >= k {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{}, {}}} references a node outside 1..={k}",
                    a + 1,
                    b + 1
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{}, {}}} has invalid weight {w}",
                    a + 1,
                    b + 1
                )));
            }
            let (i, j) = (a.min(b), a.max(b));
            if !seen.insert((i, j)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge {{{}, {}}}",
                    i + 1,
                    j + 1
                )));
            }
            out.push(Edge { i, j, weight: w });
        }
        out.sort_by_key(|e| (e.i, e.j));
        Ok(Self { k, edges: out })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weight of `{i, j}`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|e| e.i == i && e.j == j)
            .map_or(0.0, |e| e.weight)
    }

    /// Weighted degrees `d_i = Σ_j a_ij`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.k];
        for e in &self.edges {
            d[e.i] += e.weight;
            d[e.j] += e.weight;
        }
        d
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees().into_iter().fold(0.0, f64::max)
    }

    /// Same topology with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(invalid("scale", format!("must be finite and nonnegative, got {c}")));
        }
        Ok(Self {
            k: self.k,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    weight: e.weight * c,
                    ..*e
                })
                .collect(),
        })
    }
}

/// Shape of a generated topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Complete,
    Path,
    Ring,
    Star,
    /// 0-based `(i, j, weight)` triples. The weight is only used under
    /// [`WeightRule::Explicit`].
    Custom(Vec<(usize, usize, f64)>),
}

/// How edge weights are assigned by [`build_topology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRule {
    /// Every edge gets `1/k`.
    #[default]
    Uniform,
    /// Weights taken from the custom edge list; builtin shapes get weight 1.
    Explicit,
}

pub fn build_topology(kind: &TopologyKind, k: usize, rule: WeightRule) -> Result<WeightedGraph> {
    if k < 2 {
        return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {k}")));
    }
    let pairs: Vec<(usize, usize, f64)> = match kind {
        TopologyKind::Complete => (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j, 1.0)))
            .collect(),
        TopologyKind::Path => (0..k - 1).map(|i| (i, i + 1, 1.0)).collect(),
        TopologyKind::Ring => {
            let mut set = BTreeSet::new();
            for i in 0..k {
                let j = (i + 1) % k;
                set.insert((i.min(j), i.max(j)));
            }
            set.into_iter().map(|(i, j)| (i, j, 1.0)).collect()
        }
        TopologyKind::Star => (1..k).map(|j| (0, j, 1.0)).collect(),
        TopologyKind::Custom(list) => list.clone(),
    };
    let uniform = 1.0 / k as f64;
    let weighted = pairs.into_iter().map(|(i, j, w)| match rule {
        WeightRule::Uniform => (i, j, uniform),
        WeightRule::Explicit => (i, j, w),
    });
    WeightedGraph::new(k, weighted)
}

/// Rescales all weights by one common factor so the largest weighted degree
/// is 1.
pub fn normalize_max_degree(g: &WeightedGraph) -> Result<WeightedGraph> {
    let max = g.max_degree();
    if !(max > 0.0) {
        return Err(Error::InvalidGraph("all edge weights are zero".into()));
    }
    if max == 1.0 {
        return Ok(g.clone());
    }
    g.scaled(1.0 / max)
}

/// True iff the positive-weight edges span a single connected component.
pub fn is_connected(g: &WeightedGraph) -> bool {
    let mut adj = vec![Vec::new(); g.k];
    for e in g.edges.iter().filter(|e| e.weight > 0.0) {
        adj[e.i].push(e.j);
        adj[e.j].push(e.i);
    }
    let mut seen = vec![false; g.k];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == g.k
}

/// Graph Laplacian `L = D − A` as a dense symmetric matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianMatrix(Matrix);

impl LaplacianMatrix {
    /// Wraps an arbitrary square matrix after checking the Laplacian
    /// invariants (symmetry, zero row sums, sign pattern).
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let scale = m.frobenius_norm().max(1.0);
        let asym = m.max_asymmetry();
        if asym > 1e-12 * scale {
            return Err(Error::NotSymmetric(asym));
        }
        for i in 0..m.rows() {
            let row_sum: f64 = m.row(i).iter().sum();
            if row_sum.abs() > 1e-12 * scale {
                return Err(invalid("laplacian", format!("row {} sums to {row_sum:e}", i + 1)));
            }
            if m[(i, i)] < 0.0 || m.row(i).iter().enumerate().any(|(j, &v)| j != i && v > 0.0) {
                return Err(invalid("laplacian", format!("row {} has the wrong sign pattern", i + 1)));
            }
        }
        Ok(Self(m))
    }

    pub fn k(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl fmt::Debug for LaplacianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn laplacian(g: &WeightedGraph) -> LaplacianMatrix {
    let mut m = Matrix::zeros(g.k, g.k);
    for e in &g.edges {
        m[(e.i, e.j)] -= e.weight;
        m[(e.j, e.i)] -= e.weight;
        m[(e.i, e.i)] += e.weight;
        m[(e.j, e.j)] += e.weight;
    }
    LaplacianMatrix(m)
}

/// Sorted Laplacian spectrum with the quantities that govern
/// synchronizability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub lambda2: f64,
    pub lambda_k: f64,
    /// `λ_k / λ₂`.
    pub quotient: f64,
}

/// All eigenvalues of `L`, nondecreasing, without a connectivity check.
pub fn laplacian_eigenvalues(l: &LaplacianMatrix) -> Result<Vec<f64>> {
    symmetric_eigenvalues(&l.0)
}

/// Full spectrum of a connected graph's Laplacian. A (numerically) zero
/// `λ₂` is reported as [`Error::Disconnected`].
pub fn spectrum(l: &LaplacianMatrix) -> Result<LaplacianSpectrum> {
    let eigenvalues = laplacian_eigenvalues(l)?;
    let tol = ZERO_EIG_REL_TOL * l.0.frobenius_norm().max(f64::MIN_POSITIVE);
    let lambda2 = eigenvalues[1];
    if lambda2 <= tol {
        return Err(Error::Disconnected);
    }
    let lambda_k = *eigenvalues.last().expect("k >= 2");
    Ok(LaplacianSpectrum {
        quotient: lambda_k / lambda2,
        lambda2,
        lambda_k,
        eigenvalues,
    })
}

/// Declarative graph description as found in config files. Node indices in
/// `edges` are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub k: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(default)]
    pub weights: WeightRule,
    #[serde(default)]
    pub normalize: bool,
}

impl GraphSpec {
    pub fn build(&self) -> Result<WeightedGraph> {
        let kind = match self.kind.as_str() {
            "complete" => TopologyKind::Complete,
            "path" => TopologyKind::Path,
            "ring" => TopologyKind::Ring,
            "star" => TopologyKind::Star,
            "custom" => {
                let edges = self
                    .edges
                    .as_ref()
                    .ok_or_else(|| Error::InvalidGraph("custom graph without `edges`".into()))?;
                let mut zero_based = Vec::with_capacity(edges.len());
                for &(i, j, w) in edges {
                    if i == 0 || j == 0 {
                        return Err(Error::InvalidGraph("edge indices are 1-based".into()));
                    }
                    zero_based.push((i - 1, j - 1, w));
                }
                TopologyKind::Custom(zero_based)
            }
            other => return Err(Error::InvalidGraph(format!("unknown graph kind `{other}`"))),
        };
        if self.edges.is_some() && !matches!(kind, TopologyKind::Custom(_)) {
            return Err(Error::InvalidGraph(format!(
                "`edges` is only allowed with kind = \"custom\", not `{}`",
                self.kind
            )));
        }
        let g = build_topology(&kind, self.k, self.weights)?;
        if self.normalize {
            normalize_max_degree(&g)
        } else {
            Ok(g)
        }
    }
}

/// Reconstructed benchmark topology with its reference spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Benchmark {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub lambda2: f64,
    pub lambda_k: f64,
}

/// The seven reference networks. Only node count and spectrum are known for
/// them; the shapes below are the small uniform-weight graphs that reproduce
/// those spectra.
pub const BENCHMARKS: [Benchmark; 7] = [
    Benchmark { name: "g1", aliases: &["k2"], lambda2: 1.0, lambda_k: 1.0 },
    Benchmark { name: "g2", aliases: &["path3"], lambda2: 1.0 / 3.0, lambda_k: 1.0 },
    Benchmark { name: "g3", aliases: &["k3"], lambda2: 1.0, lambda_k: 1.0 },
    Benchmark { name: "g4", aliases: &["path4"], lambda2: 0.1464, lambda_k: 0.8536 },
    Benchmark { name: "g5", aliases: &["ring4"], lambda2: 0.5, lambda_k: 1.0 },
    Benchmark { name: "g6", aliases: &["diamond4"], lambda2: 0.5, lambda_k: 1.0 },
    Benchmark { name: "g7", aliases: &["k4"], lambda2: 1.0, lambda_k: 1.0 },
];

/// Builds a named builtin topology (`g1`..`g7` or their aliases, plus
/// `complete<k>`, `path<k>`, `ring<k>`, `star<k>`), with uniform `1/k`
/// weights.
pub fn builtin(name: &str) -> Result<WeightedGraph> {
    let uniform = |kind: TopologyKind, k| build_topology(&kind, k, WeightRule::Uniform);
    let canonical = BENCHMARKS
        .iter()
        .find(|b| b.name == name || b.aliases.contains(&name))
        .map(|b| b.name);
    match canonical {
        Some("g1") => return uniform(TopologyKind::Complete, 2),
        Some("g2") => return uniform(TopologyKind::Path, 3),
        Some("g3") => return uniform(TopologyKind::Complete, 3),
        Some("g4") => return uniform(TopologyKind::Path, 4),
        Some("g5") => return uniform(TopologyKind::Ring, 4),
        Some("g6") => {
            // K4 without the {3, 4} edge.
            let edges = vec![(0, 1, 0.0), (0, 2, 0.0), (0, 3, 0.0), (1, 2, 0.0), (1, 3, 0.0)];
            return uniform(TopologyKind::Custom(edges), 4);
        }
        Some("g7") => return uniform(TopologyKind::Complete, 4),
        _ => {}
    }
    for (prefix, kind) in [
        ("complete", TopologyKind::Complete),
        ("path", TopologyKind::Path),
        ("ring", TopologyKind::Ring),
        ("star", TopologyKind::Star),
    ] {
        if let Some(rest) = name.strip_prefix(prefix) {
            let k: usize = rest
                .parse()
                .map_err(|_| Error::InvalidGraph(format!("unknown builtin graph `{name}`")))?;
            return uniform(kind, k);
        }
    }
    Err(Error::InvalidGraph(format!("unknown builtin graph `{name}`")))
}

/// Resolves a builtin name to its benchmark entry, if it is one.
pub fn benchmark(name: &str) -> Option<&'static Benchmark> {
    BENCHMARKS
        .iter()
        .find(|b| b.name == name || b.aliases.contains(&name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform(kind: TopologyKind, k: usize) -> WeightedGraph {
        build_topology(&kind, k, WeightRule::Uniform).unwrap()
    }

    #[test]
    fn complete_two_is_single_half_edge() {
        let g = uniform(TopologyKind::Complete, 2);
        assert_eq!(g.edges(), &[Edge { i: 0, j: 1, weight: 0.5 }]);
    }

    #[test]
    fn path_three() {
        let g = uniform(TopologyKind::Path, 3);
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.weight(0, 1), 1.0 / 3.0);
        assert_eq!(g.weight(2, 1), 1.0 / 3.0);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn ring_three_is_triangle() {
        assert_eq!(uniform(TopologyKind::Ring, 3), uniform(TopologyKind::Complete, 3));
        assert_eq!(uniform(TopologyKind::Ring, 2), uniform(TopologyKind::Complete, 2));
    }

    #[test]
    fn construction_errors() {
        assert!(build_topology(&TopologyKind::Complete, 1, WeightRule::Uniform).is_err());
        let looped = TopologyKind::Custom(vec![(0, 0, 1.0), (0, 1, 1.0)]);
        assert!(build_topology(&looped, 2, WeightRule::Explicit).is_err());
        let negative = TopologyKind::Custom(vec![(0, 1, -1.0)]);
        assert!(build_topology(&negative, 2, WeightRule::Explicit).is_err());
        let dup = TopologyKind::Custom(vec![(0, 1, 1.0), (1, 0, 2.0)]);
        assert!(build_topology(&dup, 2, WeightRule::Explicit).is_err());
        let outside = TopologyKind::Custom(vec![(0, 5, 1.0)]);
        assert!(build_topology(&outside, 2, WeightRule::Explicit).is_err());
    }

    #[test]
    fn normalization() {
        let k2 = normalize_max_degree(&uniform(TopologyKind::Complete, 2)).unwrap();
        assert_eq!(k2.weight(0, 1), 1.0);
        let p3 = normalize_max_degree(&uniform(TopologyKind::Path, 3)).unwrap();
        assert_abs_diff_eq!(p3.weight(0, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p3.weight(1, 2), 0.5, epsilon = 1e-15);
        assert_eq!(normalize_max_degree(&k2).unwrap(), k2);
        let zero = WeightedGraph::new(2, [(0, 1, 0.0)]).unwrap();
        assert!(normalize_max_degree(&zero).is_err());
    }

    #[test]
    fn laplacian_small_cases() {
        let l = laplacian(&uniform(TopologyKind::Complete, 2));
        assert_eq!(l.matrix().to_rows(), vec![vec![0.5, -0.5], vec![-0.5, 0.5]]);

        let l = laplacian(&uniform(TopologyKind::Path, 3));
        let third = 1.0 / 3.0;
        let expected = [
            [third, -third, 0.0],
            [-third, 2.0 * third, -third],
            [0.0, -third, third],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(l.matrix()[(i, j)], expected[i][j], epsilon = 1e-15);
            }
        }
        let ones = l.matrix().mul_vec(&[1.0; 3]).unwrap();
        assert!(ones.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn spectra_of_reference_graphs() {
        let s = spectrum(&laplacian(&uniform(TopologyKind::Complete, 2))).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda2, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.quotient, 1.0, epsilon = 1e-12);

        let s = spectrum(&laplacian(&uniform(TopologyKind::Path, 3))).unwrap();
        assert_abs_diff_eq!(s.lambda2, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda_k, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.quotient, 3.0, epsilon = 1e-10);

        let s = spectrum(&laplacian(&uniform(TopologyKind::Path, 4))).unwrap();
        assert_abs_diff_eq!(s.lambda2, 0.1464, epsilon = 5e-5);
        assert_abs_diff_eq!(s.eigenvalues[2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda_k, 0.8536, epsilon = 5e-5);
        // 5.8306 is 0.8536 / 0.1464 after rounding; the exact value is 3 + 2√2.
        assert_abs_diff_eq!(s.quotient, 5.8306, epsilon = 5e-3);
        assert_abs_diff_eq!(s.quotient, 3.0 + 2.0 * 2f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn disconnected_graph_is_detected() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(!is_connected(&g));
        assert_eq!(spectrum(&laplacian(&g)), Err(Error::Disconnected));
        assert!(is_connected(&uniform(TopologyKind::Complete, 2)));
        assert!(is_connected(&uniform(TopologyKind::Path, 5)));
        // Zero-weight edges do not connect.
        let g = WeightedGraph::new(2, [(0, 1, 0.0)]).unwrap();
        assert!(!is_connected(&g));
    }

    #[test]
    fn builtins_match_reference_spectra() {
        for b in &BENCHMARKS {
            let g = builtin(b.name).unwrap();
            assert!(is_connected(&g), "{}", b.name);
            let s = spectrum(&laplacian(&g)).unwrap();
            assert_abs_diff_eq!(s.lambda2, b.lambda2, epsilon = 5e-5);
            assert_abs_diff_eq!(s.lambda_k, b.lambda_k, epsilon = 5e-5);
        }
        assert_eq!(builtin("path4").unwrap(), builtin("g4").unwrap());
        assert_eq!(builtin("star5").unwrap().edges().len(), 4);
        assert!(builtin("nonsense").is_err());
        assert!(builtin("pathx").is_err());
    }

    #[test]
    fn graph_spec_custom_is_one_based() {
        let spec = GraphSpec {
            k: 3,
            kind: "custom".into(),
            edges: Some(vec![(1, 2, 0.25), (2, 3, 0.75)]),
            weights: WeightRule::Explicit,
            normalize: false,
        };
        let g = spec.build().unwrap();
        assert_eq!(g.weight(0, 1), 0.25);
        assert_eq!(g.weight(1, 2), 0.75);

        let bad = GraphSpec {
            edges: Some(vec![(0, 1, 1.0)]),
            ..spec.clone()
        };
        assert!(bad.build().is_err());
        let stray = GraphSpec {
            kind: "path".into(),
            ..spec
        };
        assert!(stray.build().is_err());
    }

    #[test]
    fn laplacian_matrix_validation() {
        let ok = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(LaplacianMatrix::from_matrix(ok).is_ok());
        let bad_sum = Matrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(LaplacianMatrix::from_matrix(bad_sum).is_err());
        let asym = Matrix::from_rows(&[vec![1.0, -1.0], vec![-0.5, 0.5]]).unwrap();
        assert!(matches!(
            LaplacianMatrix::from_matrix(asym),
            Err(Error::NotSymmetric(_))
        ));
    }
}
