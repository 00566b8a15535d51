//! Procurement-cost minimization: optimal shipment size under financing
//! costs, delivery time, and per-shipment fixed costs.
//!
//! An importer procures `q` units per year from an exporter with marginal
//! cost `c` and pays on delivery, `delta` years after ordering. The
//! exporter borrows working capital at rate `r` over the delivery lag, so
//! a shipment of size `x` costs the importer `c·x·e^{Δr} + f` where `f`
//! is the per-shipment fixed cost. Orders arrive evenly spaced `x/q`
//! years apart and the importer discounts at rate `r1`, which makes the
//! present value of the indefinite supply stream
//!
//! ```text
//! C(x) = (c·x·e^{Δr} + f) · e^{-Δ·r1} / (1 - e^{-r1·x/q})
//! ```
//!
//! The minimizer satisfies `q·c·e^{Δr}·(e^{r1·x/q} - 1) - c·e^{Δr}·r1·x = f·r1`,
//! which has the closed form `x* = -(W₋₁(-e^{-b}) + b)/a` with `a = r1/q`
//! and `b = f·r1/(c·q·e^{Δr}) + 1`. [`solve`] seeds a safeguarded Newton
//! polish with that closed form; [`solve_bracketed`] is the independent
//! bracket-only path kept around as a cross-check.
//!
//! The upfront-financing variant borrows `f` immediately at the exporter
//! rate, giving the objective `e^{Δr}(c·x + f)/(1 - e^{-r1·x/q})`; its
//! optimal size is independent of both `r` and `delta`.

use thiserror::Error;

use crate::lambert_w::{lambert_w, Branch};
use crate::scalar::Real;

/// Structural parameters of the procurement problem.
///
/// Fields are public for ergonomic struct updates; [`ModelParams::new`]
/// is the validating constructor and everything downstream assumes its
/// invariants (all finite, `c > 0`, `q > 0`, `f ≥ 0`, `delta ≥ 0`,
/// `r ≥ 0`, `r1 > 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T = f64> {
    /// Marginal production cost (currency per unit).
    pub c: T,
    /// Annual procurement quantity (units per year).
    pub q: T,
    /// Per-shipment fixed cost (currency per shipment).
    pub f: T,
    /// Delivery time in years.
    pub delta: T,
    /// Exporter interest rate, annual and continuously compounded.
    pub r: T,
    /// Importer interest rate, annual and continuously compounded.
    /// Strictly positive: the discounted sum degenerates at `r1 = 0`.
    pub r1: T,
}

/// Which financing arrangement covers the per-shipment cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Variant {
    /// `f` is paid at shipment time, no upfront borrowing.
    #[default]
    Baseline,
    /// `f` is borrowed at the exporter rate as soon as the order arrives.
    UpfrontFixedCost,
}

/// How the root was reached, for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverPath {
    /// Lambert-W seed, Newton polish never left the bracket.
    ClosedForm,
    /// Asymptotic or midpoint seed, pure Newton afterwards.
    Newton,
    /// At least one safeguard bisection step was taken.
    BisectionFallback,
}

/// Solved optimum plus certificates.
#[derive(Clone, Copy, Debug)]
pub struct ModelSolution<T = f64> {
    pub params: ModelParams<T>,
    pub variant: Variant,
    /// Optimal shipment size (units).
    pub x_star: T,
    /// Shipping frequency `q / x_star` (shipments per year).
    pub n: T,
    /// Financing demand `c · x_star` (currency).
    pub demand: T,
    /// Minimized present-value procurement cost (currency).
    pub cost: T,
    /// First-order condition evaluated at `x_star` (should be ~0).
    pub foc_residual: T,
    /// Second-order certificate at the root; positive means a minimum.
    pub soc_value: T,
    pub solver_path: SolverPath,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parameter {name} = {value} violates requirement: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("no positive root: a zero per-shipment cost drives the shipment size to zero")]
    NoPositiveRoot,
    #[error("degenerate discount denominator: r1*x/q = {ratio:e} leaves 1 - e^(-r1 x/q) at zero")]
    DegenerateDenominator { ratio: f64 },
    #[error("root polish did not converge: |FOC| = {residual:e} > {tolerance:e} at x = {x}")]
    Convergence { x: f64, residual: f64, tolerance: f64 },
}

impl<T: Real> ModelParams<T> {
    pub fn new(c: T, q: T, f: T, delta: T, r: T, r1: T) -> Result<Self, ModelError> {
        let check = |name: &'static str, value: T, ok: bool, requirement: &'static str| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    value: value.to_f64().unwrap_or(f64::NAN),
                    requirement,
                })
            }
        };
        check("c", c, c > T::zero(), "c > 0")?;
        check("q", q, q > T::zero(), "q > 0")?;
        check("f", f, f >= T::zero(), "f >= 0")?;
        check("delta", delta, delta >= T::zero(), "delta >= 0")?;
        check("r", r, r >= T::zero(), "r >= 0")?;
        check("r1", r1, r1 > T::zero(), "r1 > 0 (discounted sum degenerates at 0)")?;
        Ok(Self { c, q, f, delta, r, r1 })
    }
}

/// Payment covering the exporter's cost of one shipment: `c·x·e^{Δr} + f`.
pub fn payment<T: Real>(params: &ModelParams<T>, x: T) -> T {
    params.c * x * (params.delta * params.r).exp() + params.f
}

/// Present value of procuring the indefinite stream with shipment size `x`.
pub fn total_cost<T: Real>(params: &ModelParams<T>, x: T, variant: Variant) -> Result<T, ModelError> {
    let y = params.r1 * x / params.q;
    let denom = -(-y).exp_m1(); // 1 - e^{-y}, accurate for small y
    if !(y >= T::of(1e-300)) || denom <= T::zero() {
        return Err(ModelError::DegenerateDenominator {
            ratio: y.to_f64().unwrap_or(f64::NAN),
        });
    }
    let value = match variant {
        Variant::Baseline => payment(params, x) * (-(params.delta * params.r1)).exp() / denom,
        Variant::UpfrontFixedCost => {
            (params.delta * params.r).exp() * (params.c * x + params.f) / denom
        }
    };
    Ok(value)
}

/// First-order condition, rescaled to polynomial-exponential form.
///
/// Negative below the optimal size, positive above it.
pub fn foc<T: Real>(params: &ModelParams<T>, x: T, variant: Variant) -> T {
    let y = params.r1 * x / params.q;
    match variant {
        Variant::Baseline => {
            let growth = (params.delta * params.r).exp();
            params.q * params.c * growth * y.exp_m1()
                - params.c * growth * params.r1 * x
                - params.f * params.r1
        }
        Variant::UpfrontFixedCost => {
            params.c * params.q * y.exp_m1() - params.c * params.r1 * x - params.f * params.r1
        }
    }
}

/// Magnitude scale of the FOC's additive terms at `x`, for relative
/// residual tests.
pub fn foc_scale<T: Real>(params: &ModelParams<T>, x: T, variant: Variant) -> T {
    let y = params.r1 * x / params.q;
    match variant {
        Variant::Baseline => {
            let growth = (params.delta * params.r).exp();
            (params.q * params.c * growth * y.exp_m1()).abs()
                + (params.c * growth * params.r1 * x).abs()
                + (params.f * params.r1).abs()
        }
        Variant::UpfrontFixedCost => {
            (params.c * params.q * y.exp_m1()).abs()
                + (params.c * params.r1 * x).abs()
                + (params.f * params.r1).abs()
        }
    }
}

fn foc_slope<T: Real>(params: &ModelParams<T>, x: T, variant: Variant) -> T {
    let y = params.r1 * x / params.q;
    match variant {
        Variant::Baseline => params.c * params.r1 * (params.delta * params.r).exp() * y.exp_m1(),
        Variant::UpfrontFixedCost => params.c * params.r1 * y.exp_m1(),
    }
}

/// Simplified second-order condition of the baseline objective at the
/// root: `c·r1·e^{r1x/q - Δr1 + Δr} / (q·(e^{r1x/q} - 1))`, positive for
/// every `x > 0`.
pub fn soc<T: Real>(params: &ModelParams<T>, x: T) -> T {
    let y = params.r1 * x / params.q;
    params.c * params.r1 * (y - params.delta * params.r1 + params.delta * params.r).exp()
        / (params.q * y.exp_m1())
}

/// Variant-aware minimum certificate; for the upfront variant the
/// importer discount factor drops out of the curvature.
fn soc_certificate<T: Real>(params: &ModelParams<T>, x: T, variant: Variant) -> T {
    match variant {
        Variant::Baseline => soc(params, x),
        Variant::UpfrontFixedCost => {
            let y = params.r1 * x / params.q;
            params.c * params.r1 * (y + params.delta * params.r).exp() / (params.q * y.exp_m1())
        }
    }
}

/// Financing demand `D = c·x_star` carried by a solved instance.
pub fn financing_demand<T: Real>(solution: &ModelSolution<T>) -> T {
    solution.params.c * solution.x_star
}

/// Solves for the optimal shipment size: Lambert-W closed form seeding a
/// safeguarded Newton polish on the FOC.
pub fn solve<T: Real>(params: &ModelParams<T>, variant: Variant) -> Result<ModelSolution<T>, ModelError> {
    solve_from(params, variant, true)
}

/// Bracket-only safeguarded Newton (midpoint seed, no closed form).
///
/// Exists as an independent route for cross-checking [`solve`]; both must
/// agree to fine relative tolerance on any valid instance.
pub fn solve_bracketed<T: Real>(
    params: &ModelParams<T>,
    variant: Variant,
) -> Result<ModelSolution<T>, ModelError> {
    solve_from(params, variant, false)
}

fn solve_from<T: Real>(
    params: &ModelParams<T>,
    variant: Variant,
    use_closed_form: bool,
) -> Result<ModelSolution<T>, ModelError> {
    let zero = T::zero();
    let one = T::one();
    let half = T::of(0.5);
    if !(params.f > zero) {
        return Err(ModelError::NoPositiveRoot);
    }

    // b - 1 of the transformed FOC e^{ax} = ax + b, with a = r1/q.
    let rate_scale = match variant {
        Variant::Baseline => (params.delta * params.r).exp(),
        Variant::UpfrontFixedCost => one,
    };
    let b_minus_1 = params.f * params.r1 / (params.c * params.q * rate_scale);

    let (seed_u, mut path) = if !use_closed_form {
        (None, SolverPath::Newton)
    } else if b_minus_1 <= T::of(1e-5) {
        // Branch-point expansion of the closed form: with s = sqrt(2(b-1)),
        // u = s·(1 - s/6 + s²/36) + O(s⁴).
        let s = (T::of(2.0) * b_minus_1).sqrt();
        let u = s * (one - s / T::of(6.0) + s * s / T::of(36.0));
        (Some(u), SolverPath::ClosedForm)
    } else {
        let b = one + b_minus_1;
        let eb = (-b).exp();
        let from_w = if eb > zero {
            lambert_w(-eb, Branch::Lower).ok().map(|w| -(w + b))
        } else {
            None
        };
        match from_w {
            Some(u) if u > zero => (Some(u), SolverPath::ClosedForm),
            // e^{-b} underflowed (or W refused): u solves e^u = u + b, so
            // u = ln(b + u) ≈ ln(b + ln b) for huge b.
            _ => (Some((b + b.ln()).ln()), SolverPath::Newton),
        }
    };

    let seed_x = seed_u.map(|u| u * params.q / params.r1);

    // Bracket [lo, hi] with foc(lo) < 0 < foc(hi). The FOC is negative at
    // 0+ and increasing, so doubling always finds the sign change.
    let mut lo = params.q * T::of(1e-12);
    if let Some(s) = seed_x {
        if s.is_finite() && s > zero {
            lo = lo.min(s * half);
        }
    }
    let mut hi = params.q.max(lo * T::of(4.0));
    let mut expand = 0;
    while foc(params, hi, variant) <= zero {
        hi = hi * T::of(2.0);
        expand += 1;
        if expand > 400 {
            return Err(ModelError::Convergence {
                x: hi.to_f64().unwrap_or(f64::NAN),
                residual: f64::NAN,
                tolerance: 0.0,
            });
        }
    }

    let mut x = match seed_x {
        Some(s) if s.is_finite() && s > lo && s < hi => s,
        _ => (lo + hi) * half,
    };

    let step_tol = T::epsilon() * T::of(4.0);
    for _ in 0..100 {
        let g = foc(params, x, variant);
        if g == zero {
            break;
        }
        if g.is_nan() {
            x = (lo + hi) * half;
            path = SolverPath::BisectionFallback;
            continue;
        }
        if g < zero {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - g / foc_slope(params, x, variant);
        if !next.is_finite() || next <= lo || next >= hi {
            next = (lo + hi) * half;
            path = SolverPath::BisectionFallback;
        }
        let done = (next - x).abs() <= step_tol * next.abs();
        x = next;
        if done {
            break;
        }
    }

    let residual = foc(params, x, variant);
    let tolerance = foc_scale(params, x, variant) * T::of(1e-10).max(T::epsilon() * T::of(8.0));
    if !(residual.abs() <= tolerance) {
        return Err(ModelError::Convergence {
            x: x.to_f64().unwrap_or(f64::NAN),
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }

    Ok(ModelSolution {
        params: *params,
        variant,
        x_star: x,
        n: params.q / x,
        demand: params.c * x,
        cost: total_cost(params, x, variant)?,
        foc_residual: residual,
        soc_value: soc_certificate(params, x, variant),
        solver_path: path,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    use super::*;

    fn reference_params() -> ModelParams {
        ModelParams::new(1.0, 100.0, 10.0, 0.3, 0.12, 0.05).unwrap()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    /// Draws from the standard parameter grid: log-uniform on the strictly
    /// positive ranges, uniform where the range touches zero.
    pub(crate) fn draw_params(rng: &mut ChaCha12Rng) -> ModelParams {
        let log_uniform =
            |rng: &mut ChaCha12Rng, lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
        ModelParams::new(
            log_uniform(rng, 0.1, 10.0),
            log_uniform(rng, 10.0, 1e4),
            log_uniform(rng, 0.01, 1e3),
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..0.3),
            log_uniform(rng, 0.005, 0.3),
        )
        .unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::<f64>::new(1.0, 100.0, 10.0, 0.3, 0.12, 0.0).is_err());
        assert!(ModelParams::<f64>::new(0.0, 100.0, 10.0, 0.3, 0.12, 0.05).is_err());
        assert!(ModelParams::<f64>::new(1.0, -1.0, 10.0, 0.3, 0.12, 0.05).is_err());
        assert!(ModelParams::<f64>::new(1.0, 100.0, -0.1, 0.3, 0.12, 0.05).is_err());
        assert!(ModelParams::<f64>::new(1.0, 100.0, 10.0, -0.3, 0.12, 0.05).is_err());
        assert!(ModelParams::<f64>::new(1.0, 100.0, 10.0, 0.3, f64::NAN, 0.05).is_err());
    }

    #[test]
    fn payment_zero_delivery_time_kills_the_exponent() {
        let p: ModelParams = ModelParams::new(1.0, 100.0, 5.0, 0.0, 0.77, 0.05).unwrap();
        assert_eq!(payment(&p, 10.0), 15.0);
    }

    #[test]
    fn payment_direct_formula() {
        let p: ModelParams = ModelParams::new(1.0, 100.0, 0.0, 0.5, 0.10, 0.05).unwrap();
        assert!(rel_err(payment(&p, 10.0), 10.0 * (0.05f64).exp()) <= 1e-15);
    }

    #[test]
    fn payment_independent_recomputation() {
        let p: ModelParams = ModelParams::new(2.0, 100.0, 10.0, 0.3, 0.12, 0.05).unwrap();
        // Spreadsheet-style recomputation, step by step.
        let exponent: f64 = 0.3 * 0.12;
        let expected = 2.0 * 20.0 * exponent.exp() + 10.0;
        assert!(rel_err(payment(&p, 20.0), expected) <= 1e-15);
    }

    /// Direct summation of the discounted geometric series, truncated at
    /// 10^6 terms: the independent oracle for the closed-form objective.
    fn series_cost(p: &ModelParams, x: f64) -> f64 {
        let per_order = (p.c * x * (p.delta * p.r).exp() + p.f) * (-(p.delta * p.r1)).exp();
        let decay = p.r1 * x / p.q;
        let mut total = 0.0;
        for k in 0..1_000_000u64 {
            let term = per_order * (-(k as f64) * decay).exp();
            total += term;
            if term < 1e-300 {
                break;
            }
        }
        total
    }

    #[test]
    fn total_cost_matches_series_oracle() {
        let p = reference_params();
        let direct = total_cost(&p, 25.0, Variant::Baseline).unwrap();
        assert!(rel_err(direct, series_cost(&p, 25.0)) <= 1e-10);
    }

    #[test]
    fn total_cost_single_term_limit() {
        // r1·x/q large: the geometric sum collapses to the first term.
        let p: ModelParams = ModelParams::new(1.0, 1.0, 10.0, 0.3, 0.12, 50.0).unwrap();
        let c = total_cost(&p, 20.0, Variant::Baseline).unwrap();
        let single = payment(&p, 20.0) * (-(p.delta * p.r1)).exp();
        assert!(rel_err(c, single) <= 1e-12);
    }

    #[test]
    fn total_cost_variants_coincide_at_zero_delivery_time() {
        let p: ModelParams = ModelParams::new(1.5, 80.0, 7.0, 0.0, 0.2, 0.06).unwrap();
        for &x in &[1.0, 10.0, 55.0] {
            let base = total_cost(&p, x, Variant::Baseline).unwrap();
            let upfront = total_cost(&p, x, Variant::UpfrontFixedCost).unwrap();
            assert_eq!(base, upfront);
        }
    }

    #[test]
    fn total_cost_rejects_degenerate_denominator() {
        let p = reference_params();
        assert!(matches!(
            total_cost(&p, 0.0, Variant::Baseline),
            Err(ModelError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn foc_plug_in_arithmetic() {
        let p: ModelParams = ModelParams::new(1.0, 100.0, 10.0, 0.0, 0.0, 0.05).unwrap();
        let expected = 100.0 * ((0.025f64).exp() - 1.0) - 2.5 - 0.5;
        assert!(rel_err(foc(&p, 50.0, Variant::Baseline), expected) <= 1e-12);
    }

    #[test]
    fn foc_vanishes_at_origin_when_fixed_cost_is_zero() {
        let p: ModelParams = ModelParams::new(1.0, 100.0, 0.0, 0.3, 0.12, 0.05).unwrap();
        for variant in [Variant::Baseline, Variant::UpfrontFixedCost] {
            let v = foc(&p, 1e-9, variant);
            assert!(v.abs() <= 1e-18, "foc near origin should vanish, got {v}");
        }
    }

    /// Bracketing bisection on the FOC: the independent root oracle.
    fn bisect_root(p: &ModelParams, variant: Variant) -> f64 {
        let mut lo = 1e-9 * p.q;
        let mut hi = 1e6 * p.q;
        assert!(foc(p, lo, variant) < 0.0 && foc(p, hi, variant) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if foc(p, mid, variant) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn solve_matches_bisection_oracle() {
        let p = reference_params();
        for variant in [Variant::Baseline, Variant::UpfrontFixedCost] {
            let sol = solve(&p, variant).unwrap();
            let oracle = bisect_root(&p, variant);
            assert!(
                rel_err(sol.x_star, oracle) <= 1e-9,
                "{variant:?}: x*={} oracle={oracle}",
                sol.x_star
            );
        }
    }

    #[test]
    fn solve_foc_residual_is_consistent() {
        let sol = solve(&reference_params(), Variant::Baseline).unwrap();
        let scale = foc_scale(&sol.params, sol.x_star, Variant::Baseline);
        assert!(sol.foc_residual.abs() <= 1e-10 * scale);
        assert!(foc(&sol.params, sol.x_star, Variant::Baseline) == sol.foc_residual);
    }

    #[test]
    fn solve_rejects_zero_fixed_cost() {
        let p: ModelParams = ModelParams::new(1.0, 100.0, 0.0, 0.3, 0.12, 0.05).unwrap();
        assert!(matches!(solve(&p, Variant::Baseline), Err(ModelError::NoPositiveRoot)));
    }

    #[test]
    fn shipment_size_shrinks_as_fixed_cost_vanishes() {
        let mut previous = f64::INFINITY;
        for k in 0..12 {
            let f = 10.0 * 0.1f64.powi(k);
            let p: ModelParams = ModelParams::new(1.0, 100.0, f, 0.3, 0.12, 0.05).unwrap();
            let sol = solve(&p, Variant::Baseline).unwrap();
            assert!(sol.x_star > 0.0 && sol.x_star < previous);
            previous = sol.x_star;
        }
        // By f = 10^-11 the frequency has blown up accordingly.
        assert!(previous < 1e-3);
    }

    #[test]
    fn cost_scale_invariance_between_c_and_delivery_financing() {
        // The baseline FOC depends on c, delta, r only through c·e^{Δr}.
        let k = 1.7;
        let scaled_c: ModelParams = ModelParams::new(1.3 * k, 250.0, 12.0, 0.0, 0.0, 0.07).unwrap();
        let scaled_rate: ModelParams = ModelParams::new(1.3, 250.0, 12.0, 1.0, k.ln(), 0.07).unwrap();
        let a = solve(&scaled_c, Variant::Baseline).unwrap();
        let b = solve(&scaled_rate, Variant::Baseline).unwrap();
        assert!(rel_err(a.x_star, b.x_star) <= 1e-12);
    }

    #[test]
    fn financing_demand_is_cost_times_size() {
        let sol = solve(&reference_params(), Variant::Baseline).unwrap();
        assert_eq!(financing_demand(&sol), sol.demand);
        let mut doubled = sol;
        doubled.params.c = 2.5;
        doubled.x_star = 20.0;
        assert_eq!(financing_demand(&doubled), 50.0);
    }

    #[test]
    fn soc_matches_second_difference_of_cost_at_optimum() {
        let p = reference_params();
        let sol = solve(&p, Variant::Baseline).unwrap();
        let h = 1e-4 * sol.x_star;
        let c = |x: f64| total_cost(&p, x, Variant::Baseline).unwrap();
        let second_diff = (c(sol.x_star + h) - 2.0 * c(sol.x_star) + c(sol.x_star - h)) / (h * h);
        assert!(rel_err(sol.soc_value, second_diff) <= 1e-5);
    }

    #[test]
    fn soc_is_linear_in_marginal_cost() {
        let p = reference_params();
        let mut p2 = p;
        p2.c = 3.0 * p.c;
        for &x in &[1.0, 20.0, 300.0] {
            assert!(rel_err(soc(&p2, x), 3.0 * soc(&p, x)) <= 1e-14);
        }
    }

    #[test]
    fn grid_root_certificates_and_path_agreement() {
        let mut rng = ChaCha12Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let p = draw_params(&mut rng);
            for variant in [Variant::Baseline, Variant::UpfrontFixedCost] {
                let sol = solve(&p, variant).unwrap();
                assert!(sol.foc_residual.abs() <= 1e-10 * foc_scale(&p, sol.x_star, variant));
                assert!(sol.soc_value > 0.0);
                let alt = solve_bracketed(&p, variant).unwrap();
                assert!(
                    rel_err(sol.x_star, alt.x_star) <= 1e-9,
                    "paths disagree: {} vs {} on {p:?}",
                    sol.x_star,
                    alt.x_star
                );
                // Local minimality of the polished root.
                for eps in [1e-3, 1e-2, 0.1] {
                    for sign in [-1.0, 1.0] {
                        let x_off = sol.x_star * (1.0 + sign * eps);
                        let off = total_cost(&p, x_off, variant).unwrap();
                        assert!(sol.cost <= off * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn upfront_size_ignores_exporter_rate_and_delivery_time() {
        let mut base: ModelParams = ModelParams::new(2.0, 500.0, 25.0, 0.0, 0.0, 0.08).unwrap();
        let x_ref = solve(&base, Variant::UpfrontFixedCost).unwrap().x_star;
        for r in [0.0, 0.1, 0.3] {
            for delta in [0.0, 0.5, 1.0] {
                base.r = r;
                base.delta = delta;
                let sol = solve(&base, Variant::UpfrontFixedCost).unwrap();
                assert_eq!(sol.x_star, x_ref, "upfront x* must not move with r or delta");
            }
        }
    }

    #[test]
    fn envelope_derivative_of_cost_in_fixed_cost() {
        let p = reference_params();
        let h = 1e-5 * p.f.max(1.0);
        let cost_at = |f: f64| {
            let q = ModelParams { f, ..p };
            solve(&q, Variant::Baseline).unwrap().cost
        };
        let numeric = (cost_at(p.f + h) - cost_at(p.f - h)) / (2.0 * h);
        let sol = solve(&p, Variant::Baseline).unwrap();
        let y = p.r1 * sol.x_star / p.q;
        let analytic = (-(p.delta * p.r1)).exp() / (-(-y).exp_m1());
        assert!(rel_err(numeric, analytic) <= 1e-6);
    }

    #[test]
    fn extreme_fixed_costs_still_solve() {
        // Far outside the standard grid in both directions.
        for &f in &[1e-20, 1e-9, 1e6, 1e12] {
            let p: ModelParams = ModelParams::new(1.0, 100.0, f, 0.3, 0.12, 0.05).unwrap();
            let sol = solve(&p, Variant::Baseline).unwrap();
            assert!(sol.x_star > 0.0);
            assert!(sol.foc_residual.abs() <= 1e-10 * foc_scale(&p, sol.x_star, Variant::Baseline));
        }
    }

    #[test]
    fn single_precision_solve_is_reasonable() {
        let p = ModelParams::<f32>::new(1.0, 100.0, 10.0, 0.3, 0.12, 0.05).unwrap();
        let sol = solve(&p, Variant::Baseline).unwrap();
        let wide = solve(&reference_params(), Variant::Baseline).unwrap();
        assert!((f64::from(sol.x_star) - wide.x_star).abs() / wide.x_star <= 1e-4);
    }
}
