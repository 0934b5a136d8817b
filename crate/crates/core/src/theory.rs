//! Closed-form synchronization region: the delay bound `φ(γ)`, its maximizer
//! `γ*`, the spurious critical point `γ̃`, the maximal delay `τ*`, and the
//! spectral comparison rules between topologies.
//!
//! All quantities depend on the node dynamics only through four semipassivity
//! constants `(α, c₀, c₁, c₂)` and on the topology only through `λ₂` and
//! `λ_k` of the Laplacian.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::LaplacianSpectrum;

/// Relative tolerance under which two spectral quotients count as equal.
pub const QUOTIENT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemipassiveConstants {
    pub alpha: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl SemipassiveConstants {
    pub fn new(alpha: f64, c0: f64, c1: f64, c2: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("c0", c0), ("c1", c1), ("c2", c2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self { alpha, c0, c1, c2 })
    }

    /// `α = c₀ = c₁ = c₂ = 1`.
    pub fn unit() -> Self {
        Self {
            alpha: 1.0,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

/// `γ′`, `c̄₁`, `c̄₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub gamma_prime: f64,
    pub cbar1: f64,
    pub cbar2: f64,
}

/// `(λ₂, λ_k)` with `0 < λ₂ ≤ λ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    lambda2: f64,
    lambda_k: f64,
}

impl SpectralPair {
    pub fn new(lambda2: f64, lambda_k: f64) -> Result<Self> {
        if !(lambda2 > 0.0) || !lambda2.is_finite() {
            return Err(invalid("lambda2", format!("must be positive, got {lambda2}")));
        }
        if !(lambda_k >= lambda2) || !lambda_k.is_finite() {
            return Err(invalid(
                "lambda_k",
                format!("must satisfy lambda2 <= lambda_k, got {lambda_k} < {lambda2}"),
            ));
        }
        Ok(Self { lambda2, lambda_k })
    }

    /// Pair with `λ_k = q·λ₂`.
    pub fn from_quotient(lambda2: f64, quotient: f64) -> Result<Self> {
        Self::new(lambda2, quotient * lambda2)
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn lambda_k(&self) -> f64 {
        self.lambda_k
    }

    pub fn quotient(&self) -> f64 {
        self.lambda_k / self.lambda2
    }
}

impl TryFrom<&LaplacianSpectrum> for SpectralPair {
    type Error = crate::error::Error;

    fn try_from(s: &LaplacianSpectrum) -> Result<Self> {
        Self::new(s.lambda2, s.lambda_k)
    }
}

pub fn derived_constants(c: &SemipassiveConstants) -> DerivedConstants {
    let SemipassiveConstants { alpha, c0, c1, c2 } = *c;
    DerivedConstants {
        gamma_prime: (c0 + c2).powi(2) / (4.0 * alpha) + c1,
        cbar1: (2.0 * alpha * c1 + c0 * c2 + c2 * c2) / (c2 * c2),
        cbar2: 2.0 * alpha / (c2 * c2),
    }
}

/// Lower end `γ′/λ₂` of the admissible coupling interval.
pub fn gamma_min(d: &DerivedConstants, sp: &SpectralPair) -> f64 {
    d.gamma_prime / sp.lambda2
}

/// Value of `φ(γ)`. Below `γ′/λ₂` the raw (negative) value is returned
/// with `below_domain` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub value: f64,
    pub below_domain: bool,
}

/// Delay bound `φ(γ) = −b + √(b² + 2c̄₂(λ₂γ − γ′)/(λ_k²γ²))` with
/// `b = c̄₂ + c̄₁/(γλ_k)`.
pub fn phi(gamma: f64, d: &DerivedConstants, sp: &SpectralPair) -> Result<PhiValue> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be positive, got {gamma}")));
    }
    let (l2, lk) = (sp.lambda2, sp.lambda_k);
    let b = d.cbar2 + d.cbar1 / (gamma * lk);
    let c = 2.0 * d.cbar2 * (l2 * gamma - d.gamma_prime) / (lk * lk * gamma * gamma);
    // −b + √(b² + c) rewritten as c / (b + √(b² + c)) to avoid cancellation.
    let root = (b * b + c).max(0.0).sqrt();
    let value = if c >= 0.0 { c / (b + root) } else { -b + root };
    Ok(PhiValue {
        value,
        below_domain: l2 * gamma < d.gamma_prime,
    })
}

/// Maximizer of `φ` on `[γ′/λ₂, ∞)`.
pub fn gamma_star(d: &DerivedConstants, sp: &SpectralPair) -> f64 {
    let (l2, lk) = (sp.lambda2, sp.lambda_k);
    let DerivedConstants {
        gamma_prime: gp,
        cbar1: c1,
        cbar2: c2,
    } = *d;
    let s = l2 + 2.0 * lk * c1;
    let radical =
        (2.0 * c1 * c1 * c2 * gp * (l2 * l2 + 2.0 * l2 * lk * c1 + 2.0 * lk * lk * c2 * gp)).sqrt();
    (1.0 + l2 / s) * gp / l2 + radical / (c2 * l2 * s)
}

/// `γ*` in its quotient form, `γ′/λ₂ · g(q)`.
pub fn gamma_star_quotient_form(d: &DerivedConstants, sp: &SpectralPair) -> f64 {
    let DerivedConstants {
        gamma_prime: gp,
        cbar1: c1,
        cbar2: c2,
    } = *d;
    let p = 1.0 + 2.0 * c1 * sp.quotient();
    gp / sp.lambda2
        * (1.0 + 1.0 / p + (1.0 + 1.0 / (p * p) + 2.0 * (c1 * c1 - c2 * gp) / (c2 * gp * p)).sqrt())
}

/// The second critical point of `φ`, written so its sign is that of the
/// numerator `2c̄₂γ′ − c̄₁²`.
pub fn gamma_tilde(d: &DerivedConstants, sp: &SpectralPair) -> f64 {
    let (l2, lk) = (sp.lambda2, sp.lambda_k);
    let DerivedConstants {
        gamma_prime: gp,
        cbar1: c1,
        cbar2: c2,
    } = *d;
    let numerator = 2.0 * c2 * gp - c1 * c1;
    let denominator = c2 * (l2 + c1 * lk)
        + c1 * (c2 * (l2 * l2 + 2.0 * l2 * lk * c1 + 2.0 * lk * lk * c2 * gp) / (2.0 * gp)).sqrt();
    numerator / denominator
}

/// `γ̃` as the minus branch of the same quadratic that yields `γ*`.
pub fn gamma_tilde_direct(d: &DerivedConstants, sp: &SpectralPair) -> f64 {
    let (l2, lk) = (sp.lambda2, sp.lambda_k);
    let DerivedConstants {
        gamma_prime: gp,
        cbar1: c1,
        cbar2: c2,
    } = *d;
    let s = l2 + 2.0 * lk * c1;
    let radical =
        (2.0 * c1 * c1 * c2 * gp * (l2 * l2 + 2.0 * l2 * lk * c1 + 2.0 * lk * lk * c2 * gp)).sqrt();
    (1.0 + l2 / s) * gp / l2 - radical / (c2 * l2 * s)
}

/// `2c̄₂γ′ − c̄₁²` expressed in the raw constants:
/// `−4αc₁(c₀c₂ + αc₁)/c₂⁴`. Strictly negative for positive constants.
pub fn gamma_tilde_numerator(c: &SemipassiveConstants) -> f64 {
    -4.0 * c.alpha * c.c1 * (c.c0 * c.c2 + c.alpha * c.c1) / c.c2.powi(4)
}

/// Maximal tolerable delay `τ* = φ(γ*)`; depends on the spectrum only
/// through `q = λ_k/λ₂`.
pub fn tau_star(d: &DerivedConstants, sp: &SpectralPair) -> f64 {
    tau_star_for_quotient(d, sp.quotient())
}

pub fn tau_star_for_quotient(d: &DerivedConstants, q: f64) -> f64 {
    let DerivedConstants {
        gamma_prime: gp,
        cbar1: c1,
        cbar2: c2,
    } = *d;
    let a = 2.0 * c2 * gp * q;
    c2 / (q * (c1 + a + (2.0 * c2 * gp + 4.0 * c2 * c1 * gp * q + a * a).sqrt()))
}

/// Which lower bound on γ defines the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RegionRule {
    /// `λ₂γ > γ′`, the condition under which `φ` was derived.
    #[default]
    ScaledByLambda2,
    /// `γ > γ′` as stated without the `λ₂` factor.
    Literal,
}

/// Membership of `(γ, τ)` in the predicted synchronization region.
pub fn in_region(
    gamma: f64,
    tau: f64,
    d: &DerivedConstants,
    sp: &SpectralPair,
    delta_bar: Option<f64>,
    rule: RegionRule,
) -> bool {
    if !(gamma > 0.0) || !(tau >= 0.0) {
        return false;
    }
    let lower_ok = match rule {
        RegionRule::ScaledByLambda2 => sp.lambda2 * gamma > d.gamma_prime,
        RegionRule::Literal => gamma > d.gamma_prime,
    };
    if !lower_ok {
        return false;
    }
    if let Some(db) = delta_bar {
        if !(gamma < db / 2.0) {
            return false;
        }
    }
    match phi(gamma, d, sp) {
        Ok(p) => tau < p.value,
        Err(_) => false,
    }
}

/// Predicted order of `γ₁*` relative to `γ₂*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaOrder {
    Less,
    Equal,
    Greater,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corollary2Prediction {
    /// Order of `τ₁*` relative to `τ₂*`.
    pub tau_order: Ordering,
    pub gamma_order: GammaOrder,
    /// Both quotients equal 1, so both delays equal the global maximum.
    pub both_at_max: bool,
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= QUOTIENT_REL_TOL * a.abs().max(b.abs())
}

/// Topology comparison from spectra alone. The γ order is only asserted
/// when the quotients or the `λ₂` values coincide.
pub fn corollary2_compare(sp1: &SpectralPair, sp2: &SpectralPair) -> Corollary2Prediction {
    let (q1, q2) = (sp1.quotient(), sp2.quotient());
    let same_q = approx_eq(q1, q2);
    let same_l2 = approx_eq(sp1.lambda2, sp2.lambda2);
    // Larger quotient, smaller delay.
    let tau_order = if same_q {
        Ordering::Equal
    } else if q1 > q2 {
        Ordering::Less
    } else {
        Ordering::Greater
    };
    let gamma_order = match (same_q, same_l2) {
        (true, true) => GammaOrder::Equal,
        // Equal quotient: larger λ₂, smaller γ*.
        (true, false) if sp1.lambda2 > sp2.lambda2 => GammaOrder::Less,
        (true, false) => GammaOrder::Greater,
        // Equal λ₂: larger quotient, smaller γ*.
        (false, true) if q1 > q2 => GammaOrder::Less,
        (false, true) => GammaOrder::Greater,
        (false, false) => GammaOrder::Incomparable,
    };
    Corollary2Prediction {
        tau_order,
        gamma_order,
        both_at_max: approx_eq(q1, 1.0) && approx_eq(q2, 1.0),
    }
}

/// Everything the `theory` report prints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheorySummary {
    pub constants: SemipassiveConstants,
    pub derived: DerivedConstants,
    pub lambda2: f64,
    pub lambda_k: f64,
    pub quotient: f64,
    pub gamma_min: f64,
    pub gamma_star: f64,
    pub gamma_tilde: f64,
    pub tau_star: f64,
}

pub fn summarize(c: &SemipassiveConstants, sp: &SpectralPair) -> TheorySummary {
    let d = derived_constants(c);
    TheorySummary {
        constants: *c,
        derived: d,
        lambda2: sp.lambda2,
        lambda_k: sp.lambda_k,
        quotient: sp.quotient(),
        gamma_min: gamma_min(&d, sp),
        gamma_star: gamma_star(&d, sp),
        gamma_tilde: gamma_tilde(&d, sp),
        tau_star: tau_star(&d, sp),
    }
}

/// `φ` sampled at `n` evenly spaced points of `[a, b]`.
pub fn phi_curve(
    d: &DerivedConstants,
    sp: &SpectralPair,
    a: f64,
    b: f64,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(a > 0.0) || !(b > a) || n < 2 {
        return Err(invalid("gamma range", format!("need 0 < a < b and n >= 2, got [{a}, {b}], n = {n}")));
    }
    (0..n)
        .map(|i| {
            let g = a + (b - a) * i as f64 / (n - 1) as f64;
            phi(g, d, sp).map(|p| (g, p.value))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn unit() -> (DerivedConstants, SpectralPair) {
        (
            derived_constants(&SemipassiveConstants::unit()),
            SpectralPair::new(1.0, 1.0).unwrap(),
        )
    }

    /// Golden-section search for the maximum of a unimodal function.
    fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
        let r = (5.0f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        while (b - a).abs() > tol {
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        0.5 * (a + b)
    }

    #[test]
    fn derived_constants_examples() {
        let (d, _) = unit();
        assert_eq!(d, DerivedConstants { gamma_prime: 2.0, cbar1: 4.0, cbar2: 2.0 });
        let big = derived_constants(&SemipassiveConstants::new(1e9, 1.0, 0.7, 1.0).unwrap());
        assert!(big.gamma_prime > 0.7 && big.gamma_prime - 0.7 < 1e-8);
        for s in [0.1, 1.0, 7.0] {
            let c = SemipassiveConstants::new(s * s, s, 0.3, s).unwrap();
            assert_relative_eq!(derived_constants(&c).gamma_prime, 1.3, max_relative = 1e-14);
        }
        assert!(SemipassiveConstants::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(SemipassiveConstants::new(1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn phi_examples() {
        let (d, sp) = unit();
        let root = phi(gamma_min(&d, &sp), &d, &sp).unwrap();
        assert_eq!(root.value, 0.0);
        assert!(!root.below_domain);
        assert!(phi(1e8, &d, &sp).unwrap().value.abs() < 1e-6);
        let below = phi(1.0, &d, &sp).unwrap();
        assert!(below.below_domain && below.value < 0.0);
        assert!(phi(0.0, &d, &sp).is_err());
        assert!(phi(-1.0, &d, &sp).is_err());
    }

    #[test]
    fn phi_solves_the_quadratic_inequality_at_equality() {
        // (λ₂γ − γ′) − λ_k(λ_kγ + c̄₁/c̄₂)γτ − λ_k²(γτ)²/(2c̄₂) = 0 at τ = φ(γ).
        let (d, sp) = unit();
        let g = 4.0;
        let residual = |tau: f64| {
            let (l2, lk) = (sp.lambda2(), sp.lambda_k());
            (l2 * g - d.gamma_prime)
                - lk * (lk * g + d.cbar1 / d.cbar2) * g * tau
                - lk * lk / (2.0 * d.cbar2) * (g * tau).powi(2)
        };
        // Bisection on the decreasing residual.
        let (mut lo, mut hi) = (0.0, 1.0);
        assert!(residual(lo) > 0.0 && residual(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if residual(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = phi(g, &d, &sp).unwrap().value;
        assert!(p > 0.0);
        assert_abs_diff_eq!(p, lo, epsilon = 1e-14);
    }

    #[test]
    fn gamma_star_unit_constants() {
        let (d, sp) = unit();
        let gs = gamma_star(&d, &sp);
        let expected = (1.0 + 1.0 / 9.0) * 2.0 + (2.0f64 * 16.0 * 2.0 * 2.0 * 17.0).sqrt() / 18.0;
        assert_relative_eq!(gs, expected, max_relative = 1e-15);
        assert_abs_diff_eq!(gs, 4.8137564, epsilon = 1e-6);
        let found = golden_max(|g| phi(g, &d, &sp).unwrap().value, 2.0, 100.0, 1e-9);
        assert_abs_diff_eq!(found, gs, epsilon = 1e-6);
        assert_relative_eq!(gamma_star_quotient_form(&d, &sp), gs, max_relative = 1e-13);
    }

    #[test]
    fn gamma_star_scales_inversely_with_lambda2() {
        let (d, _) = unit();
        let base = gamma_star(&d, &SpectralPair::from_quotient(1.0, 3.0).unwrap());
        for l2 in [0.1, 0.5, 4.0] {
            let g = gamma_star(&d, &SpectralPair::from_quotient(l2, 3.0).unwrap());
            assert_relative_eq!(g * l2, base, max_relative = 1e-13);
        }
    }

    #[test]
    fn gamma_tilde_examples() {
        let c = SemipassiveConstants::unit();
        let (d, sp) = unit();
        assert_eq!(2.0 * d.cbar2 * d.gamma_prime - d.cbar1 * d.cbar1, -8.0);
        assert_eq!(gamma_tilde_numerator(&c), -8.0);
        let gt = gamma_tilde(&d, &sp);
        assert!(gt < 0.0);
        assert_relative_eq!(gt, gamma_tilde_direct(&d, &sp), max_relative = 1e-10);
    }

    #[test]
    fn numerator_identity_off_unit_c2() {
        let c = SemipassiveConstants::new(0.7, 1.3, 2.1, 2.5).unwrap();
        let d = derived_constants(&c);
        let direct = 2.0 * d.cbar2 * d.gamma_prime - d.cbar1 * d.cbar1;
        assert_relative_eq!(direct, gamma_tilde_numerator(&c), max_relative = 1e-13);
    }

    #[test]
    fn tau_star_examples() {
        let (d, sp) = unit();
        let ts = tau_star(&d, &sp);
        assert_relative_eq!(ts, 2.0 / (12.0 + 136f64.sqrt()), max_relative = 1e-15);
        assert_abs_diff_eq!(ts, 0.08452, epsilon = 1e-5);
        let at_opt = phi(gamma_star(&d, &sp), &d, &sp).unwrap().value;
        assert_relative_eq!(ts, at_opt, max_relative = 1e-9);
        let qs = [1.0, 2.0, 3.0, 5.8306];
        let taus: Vec<f64> = qs.iter().map(|&q| tau_star_for_quotient(&d, q)).collect();
        assert!(taus.windows(2).all(|w| w[1] < w[0]));
        let a = tau_star(&d, &SpectralPair::from_quotient(0.2, 2.5).unwrap());
        let b = tau_star(&d, &SpectralPair::from_quotient(3.0, 2.5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn region_membership() {
        let (d, sp) = unit();
        let gmin = gamma_min(&d, &sp);
        let rule = RegionRule::default();
        assert!(!in_region(gmin, 0.01, &d, &sp, None, rule));
        let gs = gamma_star(&d, &sp);
        assert!(in_region(gs, tau_star(&d, &sp) / 2.0, &d, &sp, None, rule));
        assert!(!in_region(gs, tau_star(&d, &sp) * 1.01, &d, &sp, None, rule));
        assert!(in_region(gmin * (1.0 + 1e-6), 0.0, &d, &sp, None, rule));
        assert!(!in_region(gs, 0.0, &d, &sp, Some(2.0 * gs), rule));
        assert!(in_region(gs, 0.0, &d, &sp, Some(2.0 * gs + 1.0), rule));

        // λ₂ = 1/2: the two lower bounds differ.
        let sp = SpectralPair::new(0.5, 1.0).unwrap();
        let g = 3.0; // γ′ < 3 < γ′/λ₂
        assert!(!in_region(g, 0.0, &d, &sp, None, RegionRule::ScaledByLambda2));
        // φ(3) is negative here, so the literal rule also rejects τ = 0.
        assert!(!in_region(g, 0.0, &d, &sp, None, RegionRule::Literal));
    }

    #[test]
    fn corollary2_cases() {
        let a = SpectralPair::from_quotient(1.0 / 3.0, 3.0).unwrap();
        let p = corollary2_compare(&a, &a);
        assert_eq!(p.tau_order, Ordering::Equal);
        assert_eq!(p.gamma_order, GammaOrder::Equal);
        assert!(!p.both_at_max);

        let g4 = SpectralPair::new(0.1464, 0.8536).unwrap();
        let g1 = SpectralPair::new(1.0, 1.0).unwrap();
        let p = corollary2_compare(&g4, &g1);
        assert_eq!(p.tau_order, Ordering::Less);
        assert_eq!(p.gamma_order, GammaOrder::Incomparable);

        let p = corollary2_compare(&g1, &SpectralPair::new(0.5, 0.5).unwrap());
        assert!(p.both_at_max);
        assert_eq!(p.tau_order, Ordering::Equal);
        assert_eq!(p.gamma_order, GammaOrder::Less);

        // Same λ₂, larger quotient: smaller delay and smaller γ*.
        let p = corollary2_compare(
            &SpectralPair::new(0.5, 1.5).unwrap(),
            &SpectralPair::new(0.5, 1.0).unwrap(),
        );
        assert_eq!(p.tau_order, Ordering::Less);
        assert_eq!(p.gamma_order, GammaOrder::Less);
    }

    #[test]
    fn corollary2_gamma_claims_agree_with_closed_form() {
        let d = derived_constants(&SemipassiveConstants::new(0.7, 1.3, 0.4, 2.1).unwrap());
        let pairs = [
            SpectralPair::new(0.5, 1.5).unwrap(),
            SpectralPair::new(0.5, 1.0).unwrap(),
            SpectralPair::new(1.0, 3.0).unwrap(),
            SpectralPair::new(0.5, 0.5).unwrap(),
        ];
        for a in &pairs {
            for b in &pairs {
                let p = corollary2_compare(a, b);
                let (ga, gb) = (gamma_star(&d, a), gamma_star(&d, b));
                let (ta, tb) = (tau_star(&d, a), tau_star(&d, b));
                match p.gamma_order {
                    GammaOrder::Less => assert!(ga < gb),
                    GammaOrder::Greater => assert!(ga > gb),
                    GammaOrder::Equal => assert_relative_eq!(ga, gb, max_relative = 1e-12),
                    GammaOrder::Incomparable => {}
                }
                match p.tau_order {
                    Ordering::Less => assert!(ta < tb),
                    Ordering::Greater => assert!(ta > tb),
                    Ordering::Equal => assert_relative_eq!(ta, tb, max_relative = 1e-12),
                }
            }
        }
    }

    #[test]
    fn phi_curve_shape() {
        let (d, sp) = unit();
        let curve = phi_curve(&d, &sp, 2.0, 50.0, 200).unwrap();
        assert_eq!(curve.len(), 200);
        assert_eq!(curve[0].1, 0.0);
        assert!(phi_curve(&d, &sp, 0.0, 1.0, 10).is_err());
    }
}
