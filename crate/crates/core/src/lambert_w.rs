//! Real branches of the Lambert W function, the inverse of `w ↦ w·e^w`.
//!
//! Only the two real branches are provided: the principal branch `W₀` on
//! `[-1/e, ∞)` with `W₀ ≥ -1`, and the lower branch `W₋₁` on `[-1/e, 0)`
//! with `W₋₁ ≤ -1`. Evaluation is Halley's iteration from a
//! branch-appropriate seed; near the branch point `-1/e` the series
//! expansion in `p = ±sqrt(2(1 + e·x))` is used directly because the
//! iteration's derivative blows up there.

use thiserror::Error;

use crate::scalar::Real;

/// Which real branch to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `W₀`, defined on `[-1/e, ∞)`, increasing, `W₀ ≥ -1`.
    Principal,
    /// `W₋₁`, defined on `[-1/e, 0)`, decreasing, `W₋₁ ≤ -1`.
    Lower,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LambertWError {
    #[error("argument {argument} is below the branch point -1/e")]
    BelowBranchPoint { argument: f64 },
    #[error("the lower branch is defined only on [-1/e, 0), got {argument}")]
    ArgumentNotNegative { argument: f64 },
    #[error("iteration did not converge for argument {argument} on {branch:?}")]
    DidNotConverge { argument: f64, branch: Branch },
}

/// Evaluates the requested real branch of `W` at `argument`.
///
/// The result satisfies `w·e^w = argument` to a relative residual of
/// `1e-14` (a few ulps for narrower scalar types). Arguments within
/// `1e-12` of the branch point return exactly `-1`.
pub fn lambert_w<T: Real>(argument: T, branch: Branch) -> Result<T, LambertWError> {
    let x = argument;
    let zero = T::zero();
    let one = T::one();
    let arg_f64 = x.to_f64().unwrap_or(f64::NAN);
    if x.is_nan() {
        return Err(LambertWError::BelowBranchPoint { argument: arg_f64 });
    }

    let e = T::of(std::f64::consts::E);
    // 1 + e·x via a compensated product: near x = -1/e the plain form loses
    // every significant digit, and the seed accuracy there hinges on it.
    let prod = x * e;
    let ex1 = (prod + one) + x.mul_add(e, -prod);

    let near_branch_point = (x + one / e).abs() <= T::of(1e-12);
    if ex1 < zero {
        return if near_branch_point {
            Ok(-one)
        } else {
            Err(LambertWError::BelowBranchPoint { argument: arg_f64 })
        };
    }
    if near_branch_point {
        // Snap to the branch value; the derivative of W is unbounded here.
        return Ok(-one);
    }

    let w = match branch {
        Branch::Principal => principal(x, ex1),
        Branch::Lower => {
            if x >= zero {
                return Err(LambertWError::ArgumentNotNegative { argument: arg_f64 });
            }
            lower(x, ex1)
        }
    };

    if residual_ok(x, w) {
        Ok(w)
    } else {
        Err(LambertWError::DidNotConverge { argument: arg_f64, branch })
    }
}

fn residual_ok<T: Real>(x: T, w: T) -> bool {
    let tol = T::of(1e-14).max(T::epsilon() * T::of(8.0));
    if x.abs() < T::of(1e-290) {
        // Deep in the tail |w| is large and w·e^w flirts with underflow;
        // check the identity in log space instead: ln(-x) = w + ln(-w).
        if x == T::zero() {
            return w == T::zero();
        }
        let l1 = x.abs().ln();
        return (l1 - w - w.abs().ln()).abs() <= tol.max(T::of(1e-13)) * l1.abs();
    }
    (w * w.exp() - x).abs() <= tol * x.abs()
}

/// Branch-point expansion `W = -1 + p - p²/3 + 11p³/72 - 43p⁴/540 + 769p⁵/17280`
/// with `p = ±sqrt(2(1 + e·x))` (`+` on the principal branch, `-` on the lower).
fn branch_point_series<T: Real>(p: T) -> T {
    let c2 = T::of(-1.0 / 3.0);
    let c3 = T::of(11.0 / 72.0);
    let c4 = T::of(-43.0 / 540.0);
    let c5 = T::of(769.0 / 17280.0);
    -T::one() + p * (T::one() + p * (c2 + p * (c3 + p * (c4 + p * c5))))
}

fn principal<T: Real>(x: T, ex1: T) -> T {
    if x.abs() < T::of(1e-290) {
        // W(x) = x - x² + ... ; the linear term is already exact here.
        return x;
    }
    let p2 = T::of(2.0) * ex1;
    if p2 <= T::of(1e-6) {
        // Truncation error ~ p⁶ < 1e-18: the series alone beats the
        // iteration, whose step noise grows like eps/|1+w|.
        return branch_point_series(p2.sqrt());
    }
    let seed = if p2 <= T::of(0.5) {
        branch_point_series(p2.sqrt())
    } else if x <= T::of(std::f64::consts::E) {
        x.ln_1p()
    } else {
        let lx = x.ln();
        lx - lx.ln()
    };
    halley(x, seed, Branch::Principal)
}

fn lower<T: Real>(x: T, ex1: T) -> T {
    let p2 = T::of(2.0) * ex1;
    if p2 <= T::of(1e-6) {
        return branch_point_series(-p2.sqrt());
    }
    if x > -T::of(1e-290) {
        // x → 0⁻: iterate the asymptotic fixed point w = ln(-x) - ln(-w),
        // which stays accurate where e^w would underflow.
        let l1 = (-x).ln();
        let mut w = l1 - (-l1).ln();
        for _ in 0..40 {
            w = l1 - (-w).ln();
        }
        return w;
    }
    let seed = if p2 <= T::of(0.5) {
        branch_point_series(-p2.sqrt())
    } else {
        let l1 = (-x).ln();
        l1 - (-l1).ln()
    };
    halley(x, seed, Branch::Lower)
}

/// Halley iteration on `f(w) = w·e^w - x`, cubically convergent.
/// Stops when `|Δw| ≤ 1e-15·(1 + |w|)` (clamped to a few ulps for narrow
/// scalars) or after 50 iterations; the caller verifies the residual.
fn halley<T: Real>(x: T, seed: T, branch: Branch) -> T {
    let one = T::one();
    let two = T::of(2.0);
    let tol = T::of(1e-15).max(T::epsilon() * T::of(4.0));
    let mut w = seed;
    for _ in 0..50 {
        let wp1 = w + one;
        if wp1 == T::zero() {
            break;
        }
        let ew = w.exp();
        let f = w * ew - x;
        if f == T::zero() {
            break;
        }
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        let mut step = f / denom;
        if !step.is_finite() {
            step = f / (ew * wp1);
        }
        let mut next = w - step;
        // Keep the iterate on the requested branch.
        let crossed = match branch {
            Branch::Principal => next < -one,
            Branch::Lower => next > -one,
        };
        if crossed || !next.is_finite() {
            next = (w - one) * T::of(0.5);
        }
        let delta = (next - w).abs();
        w = next;
        if delta <= tol * (one + w.abs()) {
            break;
        }
    }
    w
}
