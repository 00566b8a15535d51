//! Comparative statics of the solved procurement problem.
//!
//! For each structural input (exporter rate, importer rate, delivery
//! time, per-shipment fixed cost) and each solved quantity (shipment
//! size, frequency, financing demand, cost), this module computes a
//! numeric derivative by five-point central differences through the
//! solver, fills in the closed-form expression where one exists, and
//! certifies the claimed sign. Cross partials with respect to the fixed
//! cost are certified the same way via nested central differences.
//!
//! Sign checks use a tolerance band derived from the rounding-noise bound
//! of the finite-difference stencil, so a derivative that is analytically
//! zero at the evaluation point (for example the cost response to the
//! exporter rate when the delivery time is zero) still passes its weak
//! inequality.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::model::{solve, ModelError, ModelParams, ModelSolution, Variant};
use crate::scalar::Real;

/// Structural input being perturbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelInput {
    ExporterRate,
    ImporterRate,
    DeliveryTime,
    FixedCost,
}

impl ModelInput {
    pub const ALL: [ModelInput; 4] = [
        ModelInput::ExporterRate,
        ModelInput::ImporterRate,
        ModelInput::DeliveryTime,
        ModelInput::FixedCost,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelInput::ExporterRate => "exporter_rate",
            ModelInput::ImporterRate => "importer_rate",
            ModelInput::DeliveryTime => "delivery_time",
            ModelInput::FixedCost => "fixed_cost",
        }
    }
}

/// Solved quantity being differentiated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    ShipmentSize,
    Frequency,
    FinancingDemand,
    Cost,
}

impl Target {
    pub const ALL: [Target; 4] = [
        Target::ShipmentSize,
        Target::Frequency,
        Target::FinancingDemand,
        Target::Cost,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Target::ShipmentSize => "shipment_size",
            Target::Frequency => "frequency",
            Target::FinancingDemand => "financing_demand",
            Target::Cost => "cost",
        }
    }
}

/// Sign asserted for a derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    NonNegative,
    NonPositive,
    Positive,
    Negative,
    Ambiguous,
}

impl Sign {
    fn symbol(self) -> &'static str {
        match self {
            Sign::NonNegative => ">=0",
            Sign::NonPositive => "<=0",
            Sign::Positive => ">0",
            Sign::Negative => "<0",
            Sign::Ambiguous => "?",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The claim's stated sufficient condition does not hold here, so the
    /// sign is reported without being graded.
    ConditionNotMet,
}

/// One first-order derivative check.
#[derive(Clone, Copy, Debug)]
pub struct StaticsReport<T = f64> {
    pub parameter: ModelInput,
    pub target: Target,
    /// Closed-form value where one exists, evaluated at the optimum.
    pub analytic: Option<T>,
    /// Five-point central difference through the solver.
    pub numeric: T,
    pub claimed: Sign,
    pub verdict: Verdict,
}

/// One cross partial `d²target / d(parameter) d(fixed_cost)` check.
#[derive(Clone, Copy, Debug)]
pub struct CrossPartialReport<T = f64> {
    /// The non-fixed-cost parameter of the pair.
    pub parameter: ModelInput,
    pub target: Target,
    pub analytic: Option<T>,
    /// Nested central differences through the solver.
    pub numeric: T,
    pub claimed: Sign,
    pub verdict: Verdict,
}

#[derive(Debug, Error)]
pub enum StaticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn read_input<T: Real>(params: &ModelParams<T>, which: ModelInput) -> T {
    match which {
        ModelInput::ExporterRate => params.r,
        ModelInput::ImporterRate => params.r1,
        ModelInput::DeliveryTime => params.delta,
        ModelInput::FixedCost => params.f,
    }
}

/// Copies `params` with one input replaced, without re-validation: the
/// finite-difference probes step marginally past the admissible boundary
/// (e.g. `r - 2h` at `r = 0`), where every formula is still analytic.
fn with_input<T: Real>(params: &ModelParams<T>, which: ModelInput, value: T) -> ModelParams<T> {
    let mut out = *params;
    match which {
        ModelInput::ExporterRate => out.r = value,
        ModelInput::ImporterRate => out.r1 = value,
        ModelInput::DeliveryTime => out.delta = value,
        ModelInput::FixedCost => out.f = value,
    }
    out
}

fn target_value<T: Real>(sol: &ModelSolution<T>, target: Target) -> T {
    match target {
        Target::ShipmentSize => sol.x_star,
        Target::Frequency => sol.n,
        Target::FinancingDemand => sol.demand,
        Target::Cost => sol.cost,
    }
}

fn fd_step<T: Real>(value: T, relative: f64) -> T {
    T::of(relative) * value.abs().max(T::one())
}

/// Solves at four symmetric offsets and returns the five-point first
/// derivative of every target at once.
fn five_point_derivatives<T: Real>(
    params: &ModelParams<T>,
    which: ModelInput,
    h: T,
) -> Result<[T; 4], ModelError> {
    let base = read_input(params, which);
    let two = T::of(2.0);
    let eight = T::of(8.0);
    let twelve_h = T::of(12.0) * h;
    let at = |offset: T| -> Result<ModelSolution<T>, ModelError> {
        solve(&with_input(params, which, base + offset), Variant::Baseline)
    };
    let m2 = at(-(two * h))?;
    let m1 = at(-h)?;
    let p1 = at(h)?;
    let p2 = at(two * h)?;
    let mut out = [T::zero(); 4];
    for (slot, target) in out.iter_mut().zip(Target::ALL) {
        let f = |s: &ModelSolution<T>| target_value(s, target);
        *slot = (f(&m2) - eight * f(&m1) + eight * f(&p1) - f(&p2)) / twelve_h;
    }
    Ok(out)
}

/// Rounding-noise bound for a difference quotient of a quantity of
/// magnitude `scale` over step `h`, padded by a factor of 64, plus a
/// relative floor on the derivative itself. This operationalizes the
/// sign-check tolerance band.
fn sign_band<T: Real>(scale: T, h: T, numeric: T) -> T {
    T::of(64.0) * T::epsilon() * scale.abs() / h + T::of(1e-12) * numeric.abs()
}

fn sign_verdict<T: Real>(numeric: T, claimed: Sign, band: T) -> Verdict {
    let ok = match claimed {
        Sign::NonNegative => numeric >= -band,
        Sign::NonPositive => numeric <= band,
        Sign::Positive => numeric > band,
        Sign::Negative => numeric < -band,
        Sign::Ambiguous => true,
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn claimed_first_order(parameter: ModelInput, target: Target) -> Sign {
    use ModelInput::*;
    use Target::*;
    match (parameter, target) {
        // Size falls with every financing friction, rises with the fixed cost.
        (ExporterRate, ShipmentSize) | (ImporterRate, ShipmentSize) | (DeliveryTime, ShipmentSize) => {
            Sign::NonPositive
        }
        (FixedCost, ShipmentSize) => Sign::NonNegative,
        // Frequency mirrors size.
        (ExporterRate, Frequency) | (ImporterRate, Frequency) | (DeliveryTime, Frequency) => {
            Sign::NonNegative
        }
        (FixedCost, Frequency) => Sign::NonPositive,
        // Financing demand moves with size.
        (ExporterRate, FinancingDemand)
        | (ImporterRate, FinancingDemand)
        | (DeliveryTime, FinancingDemand) => Sign::NonPositive,
        (FixedCost, FinancingDemand) => Sign::NonNegative,
        // Cost rises with exporter-side frictions and the fixed cost, falls
        // with the importer discount rate.
        (ExporterRate, Cost) => Sign::NonNegative,
        (DeliveryTime, Cost) => Sign::NonNegative,
        (FixedCost, Cost) => Sign::Positive,
        (ImporterRate, Cost) => Sign::NonPositive,
    }
}

/// Closed-form first derivatives, where available, evaluated at the
/// solved optimum (envelope forms for the cost).
fn analytic_first_order<T: Real>(
    sol: &ModelSolution<T>,
    parameter: ModelInput,
    target: Target,
) -> Option<T> {
    let p = &sol.params;
    let x = sol.x_star;
    let y = p.r1 * x / p.q;
    let em = y.exp_m1(); // e^y - 1
    let one_minus = -(-y).exp_m1(); // 1 - e^{-y}
    let dx_df = (-(p.delta * p.r)).exp() / (p.c * em);
    match (parameter, target) {
        (ModelInput::FixedCost, Target::ShipmentSize) => Some(dx_df),
        (ModelInput::FixedCost, Target::Frequency) => Some(-(p.q / (x * x)) * dx_df),
        (ModelInput::FixedCost, Target::FinancingDemand) => Some(p.c * dx_df),
        (ModelInput::FixedCost, Target::Cost) => Some((-(p.delta * p.r1)).exp() / one_minus),
        (ModelInput::ExporterRate, Target::Cost) => {
            Some(p.c * x * p.delta * (p.delta * (p.r - p.r1)).exp() / one_minus)
        }
        (ModelInput::DeliveryTime, Target::Cost) => Some(
            (p.c * x * (p.r - p.r1) * (p.delta * (p.r - p.r1)).exp()
                - p.f * p.r1 * (-(p.delta * p.r1)).exp())
                / one_minus,
        ),
        (ModelInput::ImporterRate, Target::Cost) => {
            let w = p.c * (p.delta * p.r).exp() * x + p.f;
            Some(
                -(w * (-(p.delta * p.r1)).exp() * (p.delta * one_minus + x / p.q * (-y).exp()))
                    / (one_minus * one_minus),
            )
        }
        _ => None,
    }
}

/// The cost response to delivery time is only signed under the stated
/// sufficient conditions: exporter financing dearer than the importer's
/// and production value dominating the fixed cost by a factor of ten.
fn delivery_cost_condition<T: Real>(sol: &ModelSolution<T>) -> bool {
    let p = &sol.params;
    p.r > p.r1 && p.c * sol.x_star * (p.delta * p.r).exp() >= T::of(10.0) * p.f
}

/// First-order statics: sixteen reports, ordered by parameter then target.
pub fn first_order_statics<T: Real>(
    params: &ModelParams<T>,
) -> Result<Vec<StaticsReport<T>>, StaticsError> {
    let base = solve(params, Variant::Baseline)?;
    let mut reports = Vec::with_capacity(16);
    for parameter in ModelInput::ALL {
        let h = fd_step(read_input(params, parameter), 1e-5);
        let derivatives = five_point_derivatives(params, parameter, h)?;
        for (target, numeric) in Target::ALL.into_iter().zip(derivatives) {
            let claimed = claimed_first_order(parameter, target);
            let band = sign_band(target_value(&base, target), h, numeric);
            let verdict = if parameter == ModelInput::DeliveryTime
                && target == Target::Cost
                && !delivery_cost_condition(&base)
            {
                Verdict::ConditionNotMet
            } else {
                sign_verdict(numeric, claimed, band)
            };
            reports.push(StaticsReport {
                parameter,
                target,
                analytic: analytic_first_order(&base, parameter, target),
                numeric,
                claimed,
                verdict,
            });
        }
    }
    Ok(reports)
}

fn claimed_cross(parameter: ModelInput, target: Target) -> Sign {
    match target {
        // Demand responses to financing frictions steepen (more negative)
        // with the fixed cost.
        Target::FinancingDemand => Sign::NonPositive,
        Target::Cost => match parameter {
            ModelInput::ExporterRate | ModelInput::DeliveryTime => Sign::NonNegative,
            ModelInput::ImporterRate => Sign::Negative,
            ModelInput::FixedCost => Sign::Ambiguous,
        },
        _ => Sign::Ambiguous,
    }
}

/// Closed-form cross partials. The demand rows differentiate only the
/// explicit occurrence of the parameter (the induced dependence through
/// the optimum is left to the numeric route), so their magnitudes need
/// not match the numeric column; the cost rows are full derivatives of
/// the envelope forms and do match.
fn analytic_cross<T: Real>(
    sol: &ModelSolution<T>,
    parameter: ModelInput,
    target: Target,
) -> Option<T> {
    let p = &sol.params;
    let x = sol.x_star;
    let one = T::one();
    let y = p.r1 * x / p.q;
    let em = y.exp_m1();
    let one_minus = -(-y).exp_m1();
    let dx_df = (-(p.delta * p.r)).exp() / (p.c * em);
    match (target, parameter) {
        (Target::FinancingDemand, ModelInput::ExporterRate) => {
            Some(-p.delta * (-(p.delta * p.r)).exp() / em)
        }
        (Target::FinancingDemand, ModelInput::ImporterRate) => {
            Some(-x * (y - p.delta * p.r).exp() / (p.q * em * em))
        }
        (Target::FinancingDemand, ModelInput::DeliveryTime) => {
            Some(-p.r * (-(p.delta * p.r)).exp() / em)
        }
        (Target::Cost, ModelInput::ExporterRate) => {
            let dx_dr = -p.delta * (p.q * em - p.r1 * x) / (p.r1 * em);
            Some(-(-(p.delta * p.r1) - y).exp() * (p.r1 / p.q) * dx_dr / (one_minus * one_minus))
        }
        (Target::Cost, ModelInput::DeliveryTime) => {
            let bracket1 = one_minus - y * (-y).exp();
            let bracket2 = (-y).exp() * (p.f * p.r1 / p.q * dx_df + one) - one;
            Some(
                (p.c * (p.r - p.r1) * (p.delta * (p.r - p.r1)).exp() * dx_df * bracket1
                    + p.r1 * (-(p.delta * p.r1)).exp() * bracket2)
                    / (one_minus * one_minus),
            )
        }
        (Target::Cost, ModelInput::ImporterRate) => {
            let b_minus_1 = p.f * p.r1 / (p.c * p.q * (p.delta * p.r).exp());
            let dx_dr1 = (p.q * b_minus_1 / (p.r1 * em) - x) / p.r1;
            Some(
                -((p.r1 * dx_dr1 + x) / p.q * (-(p.delta * p.r1) - y).exp()
                    + p.delta * (-(p.delta * p.r1)).exp() * one_minus)
                    / (one_minus * one_minus),
            )
        }
        _ => None,
    }
}

/// Cross partials against the fixed cost, via nested central differences
/// with `h = 1e-4·max(1, |parameter|)` on both legs.
///
/// Six reports: financing demand and cost, each against exporter rate,
/// importer rate, and delivery time.
pub fn cross_partials<T: Real>(
    params: &ModelParams<T>,
) -> Result<Vec<CrossPartialReport<T>>, StaticsError> {
    let base = solve(params, Variant::Baseline)?;
    let y_star = params.r1 * base.x_star / params.q;
    let mut reports = Vec::with_capacity(6);
    let h_f = fd_step(params.f, 1e-4);
    for parameter in [
        ModelInput::ExporterRate,
        ModelInput::ImporterRate,
        ModelInput::DeliveryTime,
    ] {
        let h_p = fd_step(read_input(params, parameter), 1e-4);
        let p_base = read_input(params, parameter);
        // Four corner solves shared by both targets.
        let corner = |df: T, dp: T| -> Result<ModelSolution<T>, ModelError> {
            let shifted = with_input(params, ModelInput::FixedCost, params.f + df);
            solve(&with_input(&shifted, parameter, p_base + dp), Variant::Baseline)
        };
        let pp = corner(h_f, h_p)?;
        let pm = corner(h_f, -h_p)?;
        let mp = corner(-h_f, h_p)?;
        let mm = corner(-h_f, -h_p)?;
        for target in [Target::FinancingDemand, Target::Cost] {
            let f = |s: &ModelSolution<T>| target_value(s, target);
            let numeric = ((f(&pp) - f(&pm)) - (f(&mp) - f(&mm))) / (T::of(4.0) * h_f * h_p);
            let claimed = claimed_cross(parameter, target);
            let band = T::of(64.0) * T::epsilon() * target_value(&base, target).abs()
                / (h_f * h_p)
                + T::of(1e-12) * numeric.abs();
            let condition_met = if target == Target::Cost && parameter == ModelInput::DeliveryTime {
                y_star > T::zero() && y_star < T::one() && params.r > params.r1
            } else {
                true
            };
            let verdict = if condition_met {
                sign_verdict(numeric, claimed, band)
            } else {
                Verdict::ConditionNotMet
            };
            reports.push(CrossPartialReport {
                parameter,
                target,
                analytic: analytic_cross(&base, parameter, target),
                numeric,
                claimed,
                verdict,
            });
        }
    }
    Ok(reports)
}

/// Parameter ranges the sweep draws from. Strictly positive ranges are
/// sampled log-uniformly; ranges touching zero are sampled uniformly.
#[derive(Clone, Copy, Debug)]
pub struct SweepGrid {
    pub c: (f64, f64),
    pub q: (f64, f64),
    pub f: (f64, f64),
    pub delta: (f64, f64),
    pub r: (f64, f64),
    pub r1: (f64, f64),
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            c: (0.1, 10.0),
            q: (10.0, 1e4),
            f: (0.01, 1e3),
            delta: (0.0, 1.0),
            r: (0.0, 0.3),
            r1: (0.005, 0.3),
        }
    }
}

impl SweepGrid {
    pub fn draw(&self, rng: &mut ChaCha12Rng) -> ModelParams<f64> {
        let log_uniform = |rng: &mut ChaCha12Rng, (lo, hi): (f64, f64)| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo.ln()..hi.ln()).exp()
            }
        };
        let uniform = |rng: &mut ChaCha12Rng, (lo, hi): (f64, f64)| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..hi)
            }
        };
        ModelParams {
            c: log_uniform(rng, self.c),
            q: log_uniform(rng, self.q),
            f: log_uniform(rng, self.f),
            delta: uniform(rng, self.delta),
            r: uniform(rng, self.r),
            r1: log_uniform(rng, self.r1),
        }
    }
}

/// Tallies for one claim across a sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClaimCounts {
    pub claim: String,
    pub pass: u32,
    pub fail: u32,
    pub condition_not_met: u32,
}

impl ClaimCounts {
    fn graded(&self) -> u32 {
        self.pass + self.fail + self.condition_not_met
    }
}

/// Deterministic summary of a statics sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSummary {
    pub draws: u32,
    pub solver_failures: u32,
    pub claims: Vec<ClaimCounts>,
}

impl SweepSummary {
    pub fn total_failures(&self) -> u32 {
        self.claims.iter().map(|c| c.fail).sum()
    }

    /// Writes `claim,draws,pass,fail,condition_not_met` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "claim,draws,pass,fail,condition_not_met")?;
        for c in &self.claims {
            writeln!(
                out,
                "{},{},{},{},{}",
                c.claim,
                c.graded(),
                c.pass,
                c.fail,
                c.condition_not_met
            )?;
        }
        Ok(())
    }
}

fn first_order_claim_label(parameter: ModelInput, target: Target) -> String {
    format!(
        "d({})/d({}){}",
        target.label(),
        parameter.label(),
        claimed_first_order(parameter, target).symbol()
    )
}

fn cross_claim_label(parameter: ModelInput, target: Target) -> String {
    format!(
        "d2({})/d({})d(fixed_cost){}",
        target.label(),
        parameter.label(),
        claimed_cross(parameter, target).symbol()
    )
}

/// Runs the first-order and cross-partial checks over `draws` seeded
/// parameter draws and tallies verdicts per claim. Solver errors on a
/// draw are counted and the sweep continues.
pub fn statics_sweep(grid: &SweepGrid, draws: u32, seed: u64) -> SweepSummary {
    let mut labels = Vec::new();
    for parameter in ModelInput::ALL {
        for target in Target::ALL {
            labels.push(first_order_claim_label(parameter, target));
        }
    }
    for parameter in [
        ModelInput::ExporterRate,
        ModelInput::ImporterRate,
        ModelInput::DeliveryTime,
    ] {
        for target in [Target::FinancingDemand, Target::Cost] {
            labels.push(cross_claim_label(parameter, target));
        }
    }
    let mut claims: Vec<ClaimCounts> = labels
        .into_iter()
        .map(|claim| ClaimCounts { claim, pass: 0, fail: 0, condition_not_met: 0 })
        .collect();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut solver_failures = 0;
    for _ in 0..draws {
        let params = grid.draw(&mut rng);
        let (first, cross) = match (first_order_statics(&params), cross_partials(&params)) {
            (Ok(f), Ok(c)) => (f, c),
            _ => {
                solver_failures += 1;
                continue;
            }
        };
        let verdicts = first
            .iter()
            .map(|r| r.verdict)
            .chain(cross.iter().map(|r| r.verdict));
        for (slot, verdict) in claims.iter_mut().zip(verdicts) {
            match verdict {
                Verdict::Pass => slot.pass += 1,
                Verdict::Fail => slot.fail += 1,
                Verdict::ConditionNotMet => slot.condition_not_met += 1,
            }
        }
    }
    SweepSummary { draws, solver_failures, claims }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params() -> ModelParams {
        ModelParams::new(1.0, 100.0, 10.0, 0.3, 0.12, 0.05).unwrap()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn report_for(reports: &[StaticsReport], parameter: ModelInput, target: Target) -> StaticsReport {
        *reports
            .iter()
            .find(|r| r.parameter == parameter && r.target == target)
            .unwrap()
    }

    #[test]
    fn report_count_and_order() {
        let reports = first_order_statics(&reference_params()).unwrap();
        assert_eq!(reports.len(), 16);
        assert_eq!(reports[0].parameter, ModelInput::ExporterRate);
        assert_eq!(reports[0].target, Target::ShipmentSize);
        assert_eq!(reports[15].parameter, ModelInput::FixedCost);
        assert_eq!(reports[15].target, Target::Cost);
    }

    #[test]
    fn fixed_cost_signs_on_reference_instance() {
        let reports = first_order_statics(&reference_params()).unwrap();
        let freq = report_for(&reports, ModelInput::FixedCost, Target::Frequency);
        assert_eq!(freq.verdict, Verdict::Pass);
        assert!(freq.numeric <= 0.0);
        let demand = report_for(&reports, ModelInput::FixedCost, Target::FinancingDemand);
        assert_eq!(demand.verdict, Verdict::Pass);
        assert!(demand.numeric >= 0.0);
    }

    #[test]
    fn size_response_to_fixed_cost_matches_closed_form() {
        let reports = first_order_statics(&reference_params()).unwrap();
        let size = report_for(&reports, ModelInput::FixedCost, Target::ShipmentSize);
        let analytic = size.analytic.unwrap();
        assert!(
            rel_err(size.numeric, analytic) <= 1e-6,
            "numeric {} analytic {analytic}",
            size.numeric
        );
    }

    #[test]
    fn envelope_derivatives_match_numeric_on_reference_instance() {
        let reports = first_order_statics(&reference_params()).unwrap();
        for parameter in ModelInput::ALL {
            let report = report_for(&reports, parameter, Target::Cost);
            let analytic = report.analytic.unwrap();
            assert!(
                rel_err(report.numeric, analytic) <= 1e-6,
                "{parameter:?}: numeric {} analytic {analytic}",
                report.numeric
            );
        }
    }

    #[test]
    fn frequency_size_duality() {
        let params = reference_params();
        let sol = solve(&params, Variant::Baseline).unwrap();
        let reports = first_order_statics(&params).unwrap();
        for parameter in ModelInput::ALL {
            let dx = report_for(&reports, parameter, Target::ShipmentSize).numeric;
            let dn = report_for(&reports, parameter, Target::Frequency).numeric;
            let implied = -(params.q / (sol.x_star * sol.x_star)) * dx;
            assert!(rel_err(dn, implied) <= 1e-6, "{parameter:?}: dn {dn} implied {implied}");
        }
    }

    #[test]
    fn delivery_cost_claim_flags_condition() {
        // r < r1 violates the stated sufficient condition.
        let params: ModelParams = ModelParams::new(1.0, 100.0, 10.0, 0.3, 0.02, 0.05).unwrap();
        let reports = first_order_statics(&params).unwrap();
        let report = report_for(&reports, ModelInput::DeliveryTime, Target::Cost);
        assert_eq!(report.verdict, Verdict::ConditionNotMet);
    }

    #[test]
    fn cross_partial_signs_on_reference_instance() {
        // The reference instance has r > r1 and production value >> fixed cost.
        let reports = cross_partials(&reference_params()).unwrap();
        assert_eq!(reports.len(), 6);
        for report in &reports {
            assert_eq!(
                report.verdict,
                Verdict::Pass,
                "{:?}/{:?} numeric {}",
                report.parameter,
                report.target,
                report.numeric
            );
        }
        let demand_delivery = reports
            .iter()
            .find(|r| r.parameter == ModelInput::DeliveryTime && r.target == Target::FinancingDemand)
            .unwrap();
        assert!(demand_delivery.numeric <= 0.0);
        let cost_exporter = reports
            .iter()
            .find(|r| r.parameter == ModelInput::ExporterRate && r.target == Target::Cost)
            .unwrap();
        assert!(cost_exporter.numeric >= 0.0);
    }

    #[test]
    fn cost_cross_partials_match_envelope_forms() {
        // The cost rows carry full derivatives in the analytic column, so
        // numeric and analytic agree within finite-difference accuracy.
        let reports = cross_partials(&reference_params()).unwrap();
        for report in reports.iter().filter(|r| r.target == Target::Cost) {
            let analytic = report.analytic.unwrap();
            assert!(
                rel_err(report.numeric, analytic) <= 1e-4,
                "{:?}: numeric {} analytic {analytic}",
                report.parameter,
                report.numeric
            );
        }
    }

    #[test]
    fn cross_partial_regression_baseline() {
        // Frozen from the nested-difference oracle on the reference instance.
        let reports = cross_partials(&reference_params()).unwrap();
        let cost_exporter = reports
            .iter()
            .find(|r| r.parameter == ModelInput::ExporterRate && r.target == Target::Cost)
            .unwrap();
        let frozen = 1.5033378986117893;
        assert!(
            rel_err(cost_exporter.numeric, frozen) <= 1e-6,
            "numeric {} frozen {frozen}",
            cost_exporter.numeric
        );
    }

    #[test]
    fn sweep_zero_draws_is_empty() {
        let summary = statics_sweep(&SweepGrid::default(), 0, 1);
        assert_eq!(summary.draws, 0);
        assert_eq!(summary.solver_failures, 0);
        assert!(summary.claims.iter().all(|c| c.graded() == 0));
    }

    #[test]
    fn sweep_is_deterministic() {
        let grid = SweepGrid::default();
        let a = statics_sweep(&grid, 25, 99);
        let b = statics_sweep(&grid, 25, 99);
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_small_grid_has_no_failures_on_provable_claims() {
        // The two delivery-time cost claims are gated by heuristic
        // sufficient conditions that understate the true requirement (both
        // need roughly c·x*e^{Δr}(r - r1) ≥ f·r1 rather than r > r1 with
        // level dominance), so the sweep legitimately reports a sign
        // frontier for them. Every other claim is a theorem and must never
        // fail.
        let summary = statics_sweep(&SweepGrid::default(), 100, 7);
        assert_eq!(summary.solver_failures, 0);
        for claim in &summary.claims {
            if claim.claim.starts_with("d(cost)/d(delivery_time)")
                || claim.claim.starts_with("d2(cost)/d(delivery_time)")
            {
                continue;
            }
            assert_eq!(claim.fail, 0, "unexpected failures for {}", claim.claim);
        }
    }

    #[test]
    fn sweep_csv_shape() {
        let summary = statics_sweep(&SweepGrid::default(), 3, 5);
        let mut buf = Vec::new();
        summary.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "claim,draws,pass,fail,condition_not_met");
        assert_eq!(lines.count(), 22);
    }
}
