//! Oracles shared by the integration tests.
#![allow(dead_code)]

use delaysync::graph::WeightedGraph;
use delaysync::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random connected graph: a random spanning tree plus extra edges, weights
/// in [0.1, 2).
pub fn random_connected_graph(seed: u64, k_max: usize) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(2..=k_max);
    let mut edges = Vec::new();
    for i in 1..k {
        let j = rng.gen_range(0..i);
        edges.push((j, i, rng.gen_range(0.1..2.0)));
    }
    for i in 0..k {
        for j in (i + 1)..k {
            if !edges.iter().any(|&(a, b, _)| (a, b) == (i, j)) && rng.gen_bool(0.35) {
                edges.push((i, j, rng.gen_range(0.1..2.0)));
            }
        }
    }
    WeightedGraph::new(k, edges).unwrap()
}

/// Characteristic polynomial coefficients `c[0] + c[1] λ + … + λⁿ` by
/// Faddeev–LeVerrier.
pub fn char_poly(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a.matmul(&m).unwrap();
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        let am = a.matmul(&next).unwrap();
        let tr: f64 = (0..n).map(|i| am[(i, i)]).sum();
        c[n - k] = -tr / k as f64;
        m = next;
    }
    c
}

pub fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Real roots in `[lo, hi]` found by sign changes on a fine grid and
/// bisection. Only reliable for well-separated simple roots.
pub fn real_roots(c: &[f64], lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (hi - lo) / grid as f64;
    let mut a = lo;
    let mut fa = poly_eval(c, a);
    for i in 1..=grid {
        let b = lo + i as f64 * step;
        let fb = poly_eval(c, b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (x0 + x1);
                let fm = poly_eval(c, mid);
                if fm == 0.0 || (x1 - x0) < 1e-15 {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if f0 * fm < 0.0 {
                    x1 = mid;
                } else {
                    x0 = mid;
                    f0 = fm;
                }
            }
            roots.push(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// Exact solution of ẋ = −x(t − 1) with x ≡ 1 on [−1, 0], by the method of
/// steps: on [n, n+1] the solution is a polynomial in s = t − n.
pub struct DelayedDecay {
    pieces: Vec<Vec<f64>>,
}

impl DelayedDecay {
    pub fn new(intervals: usize) -> Self {
        let mut pieces: Vec<Vec<f64>> = Vec::new();
        let mut prev = vec![1.0];
        let mut start = 1.0;
        for _ in 0..intervals {
            // x(n + s) = x(n) − ∫₀ˢ prev(r) dr
            let mut p = vec![start];
            for (i, &ci) in prev.iter().enumerate() {
                p.push(-ci / (i + 1) as f64);
            }
            start = p.iter().sum();
            pieces.push(p.clone());
            prev = p;
        }
        Self { pieces }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let n = (t.floor() as usize).min(self.pieces.len() - 1);
        let s = t - n as f64;
        self.pieces[n].iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }
}
