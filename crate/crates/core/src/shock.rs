//! Piston pushed into the gas: a single 1-shock connects `V0 = (1, sqrt 2)`
//! to the state at rest on the piston, `V1 = (rho1, 0)`.
//!
//! Eliminating the shock speed from the jump conditions leaves the scalar
//! equation `f(rho1) = M0^2` with
//!
//! ```text
//! f(rho) = [A M0^2 (rho - 1) - B M0^2 (rho^-alpha - 1)] (rho - 1) / (2 rho)
//! ```
//!
//! which is strictly increasing on `(1, inf)` with `f(1) = 0`. For `A > 0` it
//! is unbounded, so a root exists for every Mach number. For `A = 0` it
//! saturates at `B M0^2 / 2` and larger Mach numbers have no bounded shock.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::eos::GasParams;
use crate::error::{domain, Error, Result};
use crate::roots;
use crate::setup::{Direction, PistonProblem};

/// Lower bracket offset: the root is searched on `[1 + LOWER_OFFSET, ...)`.
const LOWER_OFFSET: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-8;
const POLISH_TOL: f64 = 1e-14;
const POLISH_STEPS: usize = 8;
const MAX_DOUBLINGS: usize = 1100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShockSolution {
    pub rho1: f64,
    /// Shock speed in the piston frame, always negative.
    pub sigma: f64,
    pub p1: f64,
    /// `(mass, momentum)` jump-condition residuals.
    pub rh_residual: (f64, f64),
    pub lax_ok: bool,
    /// `f(rho1) - M0^2`.
    pub f_residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub gas: GasParams,
}

impl ShockSolution {
    /// Piston-frame state `(rho, u)` at `xi = x / t <= 0`.
    pub fn state_at(&self, xi: f64) -> (f64, f64) {
        if xi < self.sigma {
            (1.0, SQRT_2)
        } else {
            (self.rho1, 0.0)
        }
    }
}

/// Scaled coefficients `(A M0^2, B M0^2)`.
fn scaled(problem: &PistonProblem) -> (f64, f64) {
    let m0_sq = problem.m0 * problem.m0;
    (problem.gas.a * m0_sq, problem.gas.b * m0_sq)
}

/// `f` written in terms of `d = rho - 1`, accurate for small `d`.
fn f_of_excess(am: f64, bm: f64, alpha: f64, d: f64) -> f64 {
    let inv_pow_minus_one = (-alpha * d.ln_1p()).exp_m1();
    (am * d - bm * inv_pow_minus_one) * d / (2.0 * (1.0 + d))
}

fn f_prime(am: f64, bm: f64, alpha: f64, rho: f64) -> f64 {
    let r2 = rho.powi(-2);
    let ra1 = rho.powf(-alpha - 1.0);
    let ra2 = rho.powf(-alpha - 2.0);
    0.5 * (am * (1.0 - r2) + alpha * bm * (ra1 - ra2) + bm * (r2 - ra2))
}

pub fn f_curve(problem: &PistonProblem, rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 1.0) {
        return domain(format!("f_curve requires rho > 1, got {rho}"));
    }
    let (am, bm) = scaled(problem);
    Ok(f_of_excess(am, bm, problem.gas.alpha, rho - 1.0))
}

/// Closed-form `f'(rho)`.
pub fn f_curve_derivative(problem: &PistonProblem, rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 1.0) {
        return domain(format!("f_curve_derivative requires rho > 1, got {rho}"));
    }
    let (am, bm) = scaled(problem);
    Ok(f_prime(am, bm, problem.gas.alpha, rho))
}

/// `sup f` over `(1, inf)`: infinite for `A > 0`, `B M0^2 / 2` for `A = 0`.
pub fn f_supremum(problem: &PistonProblem) -> f64 {
    let (am, bm) = scaled(problem);
    if am > 0.0 {
        f64::INFINITY
    } else {
        0.5 * bm
    }
}

/// Jump-condition residuals for `V0 = (1, sqrt 2)`, `V1 = (rho1, 0)`:
/// `(sigma (rho1 - 1) + sqrt 2, -sqrt 2 sigma - (P1 - 2 - P0))`.
pub fn rh_residual(problem: &PistonProblem, rho1: f64, sigma: f64) -> Result<(f64, f64)> {
    let p1 = problem.gas.pressure(rho1)?;
    let p0 = problem.initial_pressure();
    let mass = sigma * (rho1 - 1.0) - (0.0 - SQRT_2);
    let momentum = sigma * (0.0 - SQRT_2) - (p1 - 2.0 - p0);
    Ok((mass, momentum))
}

/// Lax conditions for a 1-shock: `lambda1(V1) < sigma < lambda1(V0)` and `sigma < lambda2(V1)`.
pub fn lax_admissible(gas: &GasParams, rho1: f64, sigma: f64) -> Result<bool> {
    let (l1_up, _) = gas.eigenvalues(1.0, SQRT_2)?;
    let (l1_down, l2_down) = gas.eigenvalues(rho1, 0.0)?;
    Ok(l1_down < sigma && sigma < l1_up && sigma < l2_down)
}

/// Upper bracket in `d = rho - 1`, doubling from `d = 1` until `f > M0^2`.
fn upper_bracket(am: f64, bm: f64, alpha: f64, target: f64) -> Result<f64> {
    let mut d = 1.0;
    for _ in 0..MAX_DOUBLINGS {
        let v = f_of_excess(am, bm, alpha, d);
        if v > target {
            return Ok(d);
        }
        if !v.is_finite() || !d.is_finite() {
            break;
        }
        d *= 2.0;
    }
    Err(Error::Convergence {
        what: "shock upper bracket",
        iterations: MAX_DOUBLINGS,
        lo: LOWER_OFFSET,
        hi: d,
        residual: f_of_excess(am, bm, alpha, d) - target,
    })
}

/// Unique shock for the proceeding piston.
///
/// Fails with [`Error::ConcentrationRegime`] when `A = 0` and `M0^2 >= B M0^2 / 2`.
pub fn solve_shock(problem: &PistonProblem) -> Result<ShockSolution> {
    if problem.direction != Direction::Proceeding {
        return domain("solve_shock requires a proceeding piston");
    }
    if problem.gas.nonlinearity_risk() {
        return domain("alpha = 1 with A > 0 is not supported");
    }
    let (am, bm) = scaled(problem);
    let alpha = problem.gas.alpha;
    let target = problem.m0 * problem.m0;
    let sup = f_supremum(problem);
    if target >= sup {
        return Err(Error::ConcentrationRegime { m0_sq: target, threshold: sup });
    }

    let hi = upper_bracket(am, bm, alpha, target)?;
    let g = |d: f64| f_of_excess(am, bm, alpha, d) - target;
    let dg = |d: f64| f_prime(am, bm, alpha, 1.0 + d);
    let root = roots::bisect_then_newton("shock density", g, dg, LOWER_OFFSET, hi, BISECTION_TOL, POLISH_TOL, POLISH_STEPS)?;

    let rho1 = 1.0 + root.x;
    let sigma = -SQRT_2 / (rho1 - 1.0);
    let p1 = problem.gas.pressure(rho1)?;
    let rh = rh_residual(problem, rho1, sigma)?;
    let lax_ok = lax_admissible(&problem.gas, rho1, sigma)?;
    Ok(ShockSolution {
        rho1,
        sigma,
        p1,
        rh_residual: rh,
        lax_ok,
        f_residual: f_of_excess(am, bm, alpha, rho1 - 1.0) - target,
        iterations: root.iterations,
        gas: problem.gas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn proceeding(m0: f64, alpha: f64, theta: f64) -> PistonProblem {
        PistonProblem::new(m0, Direction::Proceeding, alpha, theta).unwrap()
    }

    /// Independent oracle: plain bisection on the literal `f(rho)` formula.
    fn bisection_oracle(p: &PistonProblem) -> f64 {
        let m0_sq = p.m0 * p.m0;
        let (a, b, al) = (p.gas.a, p.gas.b, p.gas.alpha);
        let f = |r: f64| (a * m0_sq * (r - 1.0) - b * m0_sq * (r.powf(-al) - 1.0)) * (r - 1.0) / (2.0 * r);
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        while f(hi) < m0_sq {
            hi *= 2.0;
        }
        while hi - lo > 1e-13 * hi {
            let mid = 0.5 * (lo + hi);
            if f(mid) < m0_sq {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn f_curve_vanishes_at_one_and_grows() {
        let p = proceeding(1.0, 0.5, 0.5);
        assert!(f_curve(&p, 1.0 + 1e-12).unwrap().abs() < 1e-20);
        assert!(f_curve(&p, 1e12).unwrap() > 1e10);
        assert!(f_curve(&p, 1.0).is_err());
        assert!(f_curve(&p, 0.5).is_err());
    }

    #[test]
    fn f_curve_chaplygin_reduction() {
        // A = 0, alpha = 1, B M0^2 = 2  =>  f = (rho - 1)^2 / rho^2
        let p = proceeding(0.7, 1.0, 0.0);
        for rho in [1.1, 2.0, 5.0, 40.0] {
            let expected = (rho - 1.0) * (rho - 1.0) / (rho * rho);
            assert_relative_eq!(f_curve(&p, rho).unwrap(), expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = proceeding(1.3, 0.4, 0.3);
        for rho in [1.01, 1.5, 3.0, 100.0] {
            let h = 1e-6 * rho;
            let fd = (f_curve(&p, rho + h).unwrap() - f_curve(&p, rho - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(f_curve_derivative(&p, rho).unwrap(), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn chaplygin_closed_form() {
        let s = solve_shock(&proceeding(0.5, 1.0, 0.0)).unwrap();
        assert_relative_eq!(s.rho1, 2.0, max_relative = 1e-12);
        assert_relative_eq!(s.sigma, -SQRT_2, max_relative = 1e-12);
        let (m, q) = rh_residual(&proceeding(0.5, 1.0, 0.0), 2.0, -SQRT_2).unwrap();
        assert!(m.abs() < 1e-15 && q.abs() < 1e-14, "{m} {q}");
    }

    #[test]
    fn golden_modified_case() {
        let p = proceeding(1.0, 0.5, 0.5);
        let s = solve_shock(&p).unwrap();
        // frozen from a 40-digit bisection of the same f(rho) = M0^2
        assert_relative_eq!(s.rho1, 3.0928625429485406, max_relative = 1e-12);
        assert_relative_eq!(s.rho1, bisection_oracle(&p), max_relative = 1e-12);
        assert!(s.rh_residual.0.abs() < 1e-10 && s.rh_residual.1.abs() < 1e-10);
        assert!(s.lax_ok);
    }

    #[test]
    fn perturbed_density_breaks_momentum_balance() {
        let p = proceeding(1.0, 0.5, 0.5);
        let s = solve_shock(&p).unwrap();
        let (_, q) = rh_residual(&p, s.rho1 + 1e-3, s.sigma).unwrap();
        assert!(q.abs() > 1e-6);
    }

    #[test]
    fn receding_is_rejected() {
        let p = PistonProblem::new(1.0, Direction::Receding, 0.5, 0.5).unwrap();
        assert!(matches!(solve_shock(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn concentration_threshold_for_generalized_gas() {
        let err = solve_shock(&proceeding(2.0, 0.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ConcentrationRegime { .. }));
        // boundary case M0^2 = 1/alpha
        let err = solve_shock(&proceeding(SQRT_2, 0.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ConcentrationRegime { .. }));
        assert!(solve_shock(&proceeding(1.0, 0.5, 0.0)).is_ok());
    }

    #[test]
    fn uniqueness_newton_from_both_ends() {
        let p = proceeding(3.0, 0.3, 0.2);
        let s = solve_shock(&p).unwrap();
        let m0_sq = p.m0 * p.m0;
        let f = |r: f64| f_curve(&p, r).unwrap() - m0_sq;
        let df = |r: f64| f_curve_derivative(&p, r).unwrap();
        let mut hi = 2.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        let lo = 1.0 + 1e-12;
        let left = roots::newton_in_bracket("left", f, df, lo, hi, lo, 1e-15, 500).unwrap();
        let right = roots::newton_in_bracket("right", f, df, lo, hi, hi, 1e-15, 500).unwrap();
        assert!((left.x - s.rho1).abs() < 1e-10);
        assert!((right.x - s.rho1).abs() < 1e-10);
    }

    #[test]
    fn resolving_is_deterministic() {
        let p = proceeding(2.5, 0.35, 0.6);
        let a = solve_shock(&p).unwrap();
        let b = solve_shock(&PistonProblem::with_gas(p.m0, p.direction, p.gas).unwrap()).unwrap();
        assert_eq!(a.rho1.to_bits(), b.rho1.to_bits());
        let c = solve_shock(&proceeding(2.5, 0.35, 0.3)).unwrap();
        assert_ne!(a.rho1, c.rho1);
    }

    proptest! {
        #[test]
        fn solved_shocks_satisfy_invariants(
            m0 in 0.05f64..20.0, alpha in 0.05f64..0.95, theta in 0.01f64..0.99,
        ) {
            let p = proceeding(m0, alpha, theta);
            let s = solve_shock(&p).unwrap();
            prop_assert!(s.rho1 > 1.0);
            prop_assert!(s.f_residual.abs() < 1e-12 * (m0 * m0).max(1.0));
            prop_assert!(s.rh_residual.0.abs() < 1e-10);
            prop_assert!(s.rh_residual.1.abs() < 1e-10);
            prop_assert!(s.lax_ok);
            prop_assert!(s.sigma < 0.0);
        }
    }
}
