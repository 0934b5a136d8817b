//! Node dynamics in the normal form `ζ̇ = q(ζ, y)`, `ẏ = a(ζ, y) + u`, the
//! Hindmarsh–Rose neuron, and semipassivity / convergence diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{symmetric_eigenvalues, Matrix};

/// Central-difference step used for Jacobians of user models.
pub const FD_STEP: f64 = 1e-6;

/// Per-node state split into internal state and output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub zeta: Vec<f64>,
    pub y: Vec<f64>,
}

impl NodeState {
    pub fn new(zeta: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if zeta.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("node state"));
        }
        Ok(Self { zeta, y })
    }

    /// Splits a flat `col(ζ, y)` vector whose last `m` entries are outputs.
    pub fn from_flat(x: &[f64], m: usize) -> Result<Self> {
        if m > x.len() {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: x.len(),
            });
        }
        let split = x.len() - m;
        Self::new(x[..split].to_vec(), x[split..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.zeta.iter().chain(&self.y).copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.zeta.iter().chain(&self.y).map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Dynamics of one network node with `CB = I_m`: the input enters the
/// output rows additively with unit gain.
///
/// States are flat slices laid out as `col(ζ, y)`, with the `m` outputs last.
pub trait NodeModel: Send + Sync {
    fn name(&self) -> &str;

    /// Full state dimension `n`.
    fn state_dim(&self) -> usize;

    /// Output (and input) dimension `m`.
    fn output_dim(&self) -> usize;

    /// Writes `ẋ` for state `x` and input `u` into `dx`.
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]);

    /// `∂q/∂ζ` at `x`, an `(n − m) × (n − m)` matrix.
    fn internal_jacobian(&self, x: &[f64]) -> Matrix {
        finite_difference_internal_jacobian(self, x, FD_STEP)
    }
}

/// Central-difference approximation of `∂q/∂ζ`.
pub fn finite_difference_internal_jacobian<M: NodeModel + ?Sized>(
    model: &M,
    x: &[f64],
    step: f64,
) -> Matrix {
    let n = model.state_dim();
    let m = model.output_dim();
    let p = n - m;
    let u = vec![0.0; m];
    let mut jac = Matrix::zeros(p, p);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for col in 0..p {
        xp[col] = x[col] + step;
        model.derivative(&xp, &u, &mut fp);
        xp[col] = x[col] - step;
        model.derivative(&xp, &u, &mut fm);
        xp[col] = x[col];
        for row in 0..p {
            jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * step);
        }
    }
    jac
}

/// Hindmarsh–Rose neuron with state `(ζ₁, ζ₂, y)`:
///
/// ```text
/// ζ̇₁ = 1 − 5y² − ζ₁
/// ζ̇₂ = 0.005 (4y + 6.472 − ζ₂)
/// ẏ  = −y³ + 3y² + ζ₁ − ζ₂ + 3.25 + u
/// ```
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HindmarshRose;

impl HindmarshRose {
    pub const NAME: &'static str = "hindmarsh-rose";

    #[inline]
    fn rhs(z1: f64, z2: f64, y: f64, u: f64) -> [f64; 3] {
        [
            1.0 - 5.0 * y * y - z1,
            0.005 * (4.0 * y + 6.472 - z2),
            -y * y * y + 3.0 * y * y + z1 - z2 + 3.25 + u,
        ]
    }
}

impl NodeModel for HindmarshRose {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn state_dim(&self) -> usize {
        3
    }

    fn output_dim(&self) -> usize {
        1
    }

    #[inline]
    fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        dx.copy_from_slice(&Self::rhs(x[0], x[1], x[2], u[0]));
    }

    fn internal_jacobian(&self, _x: &[f64]) -> Matrix {
        Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -0.005]]).expect("2x2")
    }
}

/// Looks a model up by its config name.
pub fn model_by_name(name: &str) -> Result<Box<dyn NodeModel>> {
    match name {
        HindmarshRose::NAME | "hr" => Ok(Box::new(HindmarshRose)),
        other => Err(invalid("model", format!("unknown model `{other}`"))),
    }
}

/// Time derivative of a Hindmarsh–Rose node for scalar input `u`.
pub fn hr_derivative(s: &NodeState, u: f64) -> Result<NodeState> {
    if s.zeta.len() != 2 || s.y.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: s.zeta.len() + s.y.len(),
        });
    }
    if !u.is_finite() || s.zeta.iter().chain(&s.y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("hindmarsh-rose input"));
    }
    let [dz1, dz2, dy] = HindmarshRose::rhs(s.zeta[0], s.zeta[1], s.y[0], u);
    Ok(NodeState {
        zeta: vec![dz1, dz2],
        y: vec![dy],
    })
}

/// Constants of the Hindmarsh–Rose storage and dissipation functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemipassivityParams {
    sigma: f64,
    varsigma1: f64,
    varsigma2: f64,
}

impl SemipassivityParams {
    /// Requires `ς₁, ς₂ ∈ (0, 1)` and `0 < σ < 4ς₁(1 − ς₂)/25`.
    pub fn new(sigma: f64, varsigma1: f64, varsigma2: f64) -> Result<Self> {
        for (name, v) in [("varsigma1", varsigma1), ("varsigma2", varsigma2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(name, format!("must lie in (0, 1), got {v}")));
            }
        }
        let upper = 4.0 * varsigma1 * (1.0 - varsigma2) / 25.0;
        if !(sigma > 0.0 && sigma < upper) {
            return Err(invalid("sigma", format!("must lie in (0, {upper}), got {sigma}")));
        }
        Ok(Self {
            sigma,
            varsigma1,
            varsigma2,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn varsigma1(&self) -> f64 {
        self.varsigma1
    }

    pub fn varsigma2(&self) -> f64 {
        self.varsigma2
    }
}

impl Default for SemipassivityParams {
    fn default() -> Self {
        Self {
            sigma: 0.01,
            varsigma1: 0.5,
            varsigma2: 0.5,
        }
    }
}

fn hr_components(s: &NodeState) -> (f64, f64, f64) {
    (s.zeta[0], s.zeta[1], s.y[0])
}

/// Storage function `V = ½y² + σζ₁² + 25ζ₂²`.
pub fn hr_storage(s: &NodeState, p: &SemipassivityParams) -> f64 {
    let (z1, z2, y) = hr_components(s);
    0.5 * y * y + p.sigma * z1 * z1 + 25.0 * z2 * z2
}

/// Dissipation function `H` of the Hindmarsh–Rose storage inequality.
pub fn hr_h(s: &NodeState, p: &SemipassivityParams) -> f64 {
    let (z1, z2, y) = hr_components(s);
    let SemipassivityParams {
        sigma,
        varsigma1: s1,
        varsigma2: s2,
    } = *p;
    let y2 = y * y;
    s1 * y2 * y2 - 3.0 * y2 * y - y2 / (4.0 * sigma * (1.0 - s2))
        + (sigma * s2 - 25.0 * sigma * sigma / (4.0 * (1.0 - s1))) * z1 * z1
        + 0.25 * z2 * z2
        - 1.618 * z2
        + sigma * (1.0 - s2) * (z1 - y / (2.0 * sigma * (1.0 - s2))).powi(2)
        - sigma * z1
        + (1.0 - s1) * (y2 + 5.0 * sigma / (2.0 * (1.0 - s1)) * z1).powi(2)
        - 3.25 * y
}

/// Outcome of [`h41_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellScan {
    pub holds: bool,
    pub samples: usize,
    /// Smallest `H(x) − δ|y|²` seen, `+∞` for an empty scan.
    pub min_margin: f64,
    pub worst_point: Option<[f64; 3]>,
}

/// Spot-checks `H(x) − δ|y|² > 0` on the shell `R < |x| ≤ 4R` with a
/// Halton point set. This is a sampled diagnostic, not a proof.
pub fn h41_scan(p: &SemipassivityParams, delta: f64, radius: f64, samples: usize) -> Result<ShellScan> {
    if !(delta > 0.0) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    if !(radius > 0.0) {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    if samples == 0 {
        log::warn!("h41_scan called with zero samples; result is vacuous");
    }
    let mut scan = ShellScan {
        holds: true,
        samples,
        min_margin: f64::INFINITY,
        worst_point: None,
    };
    for idx in 1..=samples {
        let u = halton(idx, 2);
        let v = halton(idx, 3);
        let w = halton(idx, 5);
        let cos_theta = 1.0 - 2.0 * u;
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let phi = std::f64::consts::TAU * v;
        // w in [0, 1) maps onto (R, 4R].
        let r = radius + 3.0 * radius * (1.0 - w);
        let x = [
            r * sin_theta * phi.cos(),
            r * sin_theta * phi.sin(),
            r * cos_theta,
        ];
        let s = NodeState {
            zeta: vec![x[0], x[1]],
            y: vec![x[2]],
        };
        let margin = hr_h(&s, p) - delta * x[2] * x[2];
        if margin < scan.min_margin {
            scan.min_margin = margin;
            scan.worst_point = Some(x);
        }
        if !(margin > 0.0) {
            scan.holds = false;
        }
    }
    Ok(scan)
}

/// Radical inverse of `index` in `base`.
fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Result of [`demidovich_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemidovichReport {
    /// Largest eigenvalue of `½(P J + Jᵀ P)` over all samples.
    pub max_eigenvalue: f64,
    pub passes: bool,
}

/// Evaluates the P-weighted symmetrized internal Jacobian at every sample
/// state and checks it is bounded above by `−margin`.
pub fn demidovich_check<M: NodeModel + ?Sized>(
    model: &M,
    states: &[Vec<f64>],
    p: &Matrix,
    margin: f64,
) -> Result<DemidovichReport> {
    let dim = model.state_dim() - model.output_dim();
    if p.rows() != dim || p.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.rows(),
        });
    }
    if !p.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    if states.is_empty() {
        return Err(invalid("states", "sample set is empty"));
    }
    let mut max_eigenvalue = f64::NEG_INFINITY;
    for x in states {
        if x.len() != model.state_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.state_dim(),
                got: x.len(),
            });
        }
        let j = model.internal_jacobian(x);
        let pj = p.matmul(&j)?;
        let sym = pj.add(&pj.transpose())?.scale(0.5);
        let eig = symmetric_eigenvalues(&sym)?;
        max_eigenvalue = max_eigenvalue.max(*eig.last().expect("nonempty"));
    }
    Ok(DemidovichReport {
        max_eigenvalue,
        passes: max_eigenvalue <= -margin,
    })
}
