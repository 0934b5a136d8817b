//! Fixed-step RK4 integration of delay differential equations with a single
//! constant delay.
//!
//! Past states live on a uniform grid `t_n = n·h` in a ring buffer together
//! with their derivatives; delayed arguments at RK stage times are read back
//! by cubic Hermite interpolation between the bracketing grid nodes. With
//! `h ≤ τ` every delayed argument lies at or before the current node, so the
//! scheme stays explicit.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Any state component beyond this magnitude marks the run as diverged.
pub const DIVERGENCE_GUARD: f64 = 1e9;

/// Right-hand side `ẋ(t) = F(t, x(t), x(t − τ))`.
pub trait DelaySystem: Sync {
    fn dim(&self) -> usize;

    fn delay(&self) -> f64;

    fn derivative(&self, t: f64, x: &[f64], x_delayed: &[f64], dx: &mut [f64]);
}

/// Ring buffer of grid states `x(n·h)` with one-sided derivatives.
///
/// Each node keeps a left and a right derivative so that the kink of a
/// constant initial function at `t = 0` is represented exactly.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    dim: usize,
    h: f64,
    capacity: usize,
    states: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    /// Grid index of the newest node.
    newest: i64,
    len: usize,
}

impl HistoryBuffer {
    /// Empty buffer that can hold `capacity` nodes.
    pub fn with_capacity(dim: usize, h: f64, capacity: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid("h", format!("step must be positive, got {h}")));
        }
        if capacity == 0 {
            return Err(invalid("capacity", "must be at least 1"));
        }
        Ok(Self {
            dim,
            h,
            capacity,
            states: vec![0.0; capacity * dim],
            left: vec![0.0; capacity * dim],
            right: vec![0.0; capacity * dim],
            newest: -1,
            len: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn newest_index(&self) -> i64 {
        self.newest
    }

    pub fn oldest_index(&self) -> i64 {
        self.newest - self.len as i64 + 1
    }

    /// Stored time window `[t_oldest, t_newest]`.
    pub fn window(&self) -> (f64, f64) {
        (
            self.oldest_index() as f64 * self.h,
            self.newest as f64 * self.h,
        )
    }

    fn slot(&self, n: i64) -> usize {
        n.rem_euclid(self.capacity as i64) as usize * self.dim
    }

    fn contains(&self, n: i64) -> bool {
        self.len > 0 && n >= self.oldest_index() && n <= self.newest
    }

    /// Appends node `index` (which must follow the newest one), evicting the
    /// oldest node when full. Both derivatives start at `deriv`.
    pub fn push(&mut self, index: i64, state: &[f64], deriv: &[f64]) {
        debug_assert_eq!(state.len(), self.dim);
        debug_assert!(self.len == 0 || index == self.newest + 1);
        let s = self.slot(index);
        self.states[s..s + self.dim].copy_from_slice(state);
        self.left[s..s + self.dim].copy_from_slice(deriv);
        self.right[s..s + self.dim].copy_from_slice(deriv);
        self.newest = index;
        self.len = (self.len + 1).min(self.capacity);
    }

    /// Sets the right derivative of the newest node and, unless
    /// `keep_left`, the left one too.
    pub fn set_newest_derivative(&mut self, deriv: &[f64], keep_left: bool) {
        let s = self.slot(self.newest);
        self.right[s..s + self.dim].copy_from_slice(deriv);
        if !keep_left {
            self.left[s..s + self.dim].copy_from_slice(deriv);
        }
    }

    pub fn node(&self, n: i64) -> Option<&[f64]> {
        self.contains(n).then(|| {
            let s = self.slot(n);
            &self.states[s..s + self.dim]
        })
    }

    /// Interpolated state at time `t_query`.
    pub fn delayed_state(&self, t_query: f64, out: &mut [f64]) -> Result<()> {
        self.state_at_grid_coordinate(t_query / self.h, out)
    }

    /// Interpolated state at grid coordinate `s = t / h`. Integral `s` hits
    /// a stored node and returns it bit-exactly.
    pub fn state_at_grid_coordinate(&self, s: f64, out: &mut [f64]) -> Result<()> {
        let outside = || {
            let (start, end) = self.window();
            Error::OutsideHistory {
                query: s * self.h,
                start,
                end,
            }
        };
        if self.len == 0 || !s.is_finite() {
            return Err(outside());
        }
        let j = s.floor();
        let theta = s - j;
        let j = j as i64;
        if theta == 0.0 {
            let node = self.node(j).ok_or_else(outside)?;
            out.copy_from_slice(node);
            return Ok(());
        }
        if !self.contains(j) || !self.contains(j + 1) {
            return Err(outside());
        }
        let a = self.slot(j);
        let b = self.slot(j + 1);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = (t3 - 2.0 * t2 + theta) * self.h;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = (t3 - t2) * self.h;
        for (i, o) in out.iter_mut().enumerate() {
            *o = h00 * self.states[a + i]
                + h10 * self.right[a + i]
                + h01 * self.states[b + i]
                + h11 * self.left[b + i];
        }
        Ok(())
    }
}

/// Buffer holding the constant initial function `x(s) = x0` on `[−τ, 0]`
/// at nodes `−m·h, …, 0` with `m = ⌈τ/h⌉`.
///
/// History derivatives are zero, which is exact for the constant function.
/// The right derivative at `t = 0` is filled in by the integrator's first
/// stage evaluation.
pub fn init_history(x0: &[f64], tau: f64, h: f64) -> Result<HistoryBuffer> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid("tau", format!("delay must be finite and nonnegative, got {tau}")));
    }
    let m = history_span(tau, h)?;
    let mut buf = HistoryBuffer::with_capacity(x0.len(), h, m + 2)?;
    let zero = vec![0.0; x0.len()];
    for n in -(m as i64)..=0 {
        buf.push(n, x0, &zero);
    }
    Ok(buf)
}

/// `⌈τ/h⌉`, ignoring floating noise just above an integer.
fn history_span(tau: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid("h", format!("step must be positive, got {h}")));
    }
    let ratio = tau / h;
    let nearest = ratio.round();
    let span = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    Ok(span as usize)
}

/// Fixed-step integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Step size.
    pub h: f64,
    /// Horizon; the run takes `round(t_end / h)` steps.
    pub t_end: f64,
    /// Record every `record_stride`-th step (and t = 0).
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn new(h: f64, t_end: f64, record_stride: usize) -> Result<Self> {
        let cfg = Self {
            h,
            t_end,
            record_stride,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(invalid("h", format!("must be positive, got {}", self.h)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(invalid("t_end", format!("must be positive, got {}", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(invalid("record_stride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.h).round().max(1.0) as usize
    }
}

/// Default step for network runs: `min(τ/4, 0.01)`, or 0.01 without delay.
pub fn default_step(tau: f64) -> f64 {
    if tau > 0.0 {
        (tau / 4.0).min(0.01)
    } else {
        0.01
    }
}

/// Sampled solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Row-major, one row of length `dim` per entry of `times`.
    pub states: Vec<f64>,
    pub diverged: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().copied().zip(self.states.chunks(self.dim))
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.iter().last()
    }
}

/// Summary of an observed integration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub steps_taken: usize,
    pub t_final: f64,
    pub diverged: bool,
}

/// Integrates from the constant history `x0`, recording into a
/// [`Trajectory`]. Divergence stops the run and returns the partial
/// trajectory with `diverged` set.
pub fn integrate<S: DelaySystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let dim = sys.dim();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let summary = integrate_observed(sys, x0, cfg, |t, x| {
        times.push(t);
        states.extend_from_slice(x);
    })?;
    Ok(Trajectory {
        dim,
        times,
        states,
        diverged: summary.diverged,
    })
}

/// Classical RK4 with delayed arguments from a [`HistoryBuffer`].
///
/// `observe(t, x)` is called at t = 0 and after every `record_stride`-th
/// step. A diverged state is still observed once before the run stops.
pub fn integrate_observed<S, F>(
    sys: &S,
    x0: &[f64],
    cfg: &IntegratorConfig,
    mut observe: F,
) -> Result<RunSummary>
where
    S: DelaySystem + ?Sized,
    F: FnMut(f64, &[f64]),
{
    cfg.validate()?;
    let dim = sys.dim();
    if x0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    let tau = sys.delay();
    let h = cfg.h;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid("tau", format!("delay must be finite and nonnegative, got {tau}")));
    }
    if tau > 0.0 && h > tau * (1.0 + 1e-12) {
        return Err(invalid("h", format!("step {h} exceeds the delay {tau}")));
    }

    let delayed = tau > 0.0;
    let lag = tau / h;
    let mut hist = if delayed {
        Some(init_history(x0, tau, h)?)
    } else {
        None
    };

    let steps = cfg.steps();
    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut stage = vec![0.0; dim];
    let mut xd = vec![0.0; dim];

    observe(0.0, &x);
    for n in 0..steps {
        let t = n as f64 * h;
        let nf = n as f64;

        // Stage 1.
        if let Some(buf) = hist.as_mut() {
            buf.state_at_grid_coordinate(nf - lag, &mut xd)?;
            sys.derivative(t, &x, &xd, &mut k1);
            buf.set_newest_derivative(&k1, n == 0);
        } else {
            sys.derivative(t, &x, &x, &mut k1);
        }

        // Stage 2.
        for i in 0..dim {
            stage[i] = x[i] + 0.5 * h * k1[i];
        }
        if let Some(buf) = hist.as_ref() {
            buf.state_at_grid_coordinate(nf + 0.5 - lag, &mut xd)?;
            sys.derivative(t + 0.5 * h, &stage, &xd, &mut k2);
        } else {
            sys.derivative(t + 0.5 * h, &stage, &stage, &mut k2);
        }

        // Stage 3 shares the delayed argument of stage 2.
        for i in 0..dim {
            stage[i] = x[i] + 0.5 * h * k2[i];
        }
        if hist.is_some() {
            sys.derivative(t + 0.5 * h, &stage, &xd, &mut k3);
        } else {
            sys.derivative(t + 0.5 * h, &stage, &stage, &mut k3);
        }

        // Stage 4.
        for i in 0..dim {
            stage[i] = x[i] + h * k3[i];
        }
        if let Some(buf) = hist.as_ref() {
            buf.state_at_grid_coordinate(nf + 1.0 - lag, &mut xd)?;
            sys.derivative(t + h, &stage, &xd, &mut k4);
        } else {
            sys.derivative(t + h, &stage, &stage, &mut k4);
        }

        let mut diverged = false;
        for i in 0..dim {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if !(x[i].abs() <= DIVERGENCE_GUARD) {
                diverged = true;
            }
        }
        let t_next = (n + 1) as f64 * h;
        if diverged {
            observe(t_next, &x);
            return Ok(RunSummary {
                steps_taken: n + 1,
                t_final: t_next,
                diverged: true,
            });
        }
        if let Some(buf) = hist.as_mut() {
            // Derivative is set at the start of the next step.
            buf.push(n as i64 + 1, &x, &k4);
        }
        if (n + 1) % cfg.record_stride == 0 {
            observe(t_next, &x);
        }
    }
    Ok(RunSummary {
        steps_taken: steps,
        t_final: steps as f64 * h,
        diverged: false,
    })
}
