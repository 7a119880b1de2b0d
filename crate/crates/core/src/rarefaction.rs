//! Piston withdrawn from the gas: a first-family rarefaction fan connects
//! `V0 = (1, -sqrt 2)` to `V1 = (rho1, 0)`.
//!
//! Inside the fan `eta = x / t = u - N` with `N = c(rho)`, and the first
//! Riemann invariant
//!
//! ```text
//! u - 2N/(alpha+1) + sqrt(A)/(alpha+1) ln(2 sqrt(A) rho^(alpha+1) (N + sqrt A) + B alpha) = W0
//! ```
//!
//! is constant. Eliminating `u` leaves one monotone equation for `N` at each
//! `eta`; imposing `u = 0` at the tail gives one monotone equation for the
//! tail speed.
//!
//! The tail equation is usually written with `C = exp(...)` and `exp(-2Q)`,
//! which over/underflow once `sqrt(A)` is small. The solver works with the
//! logarithm of that relation instead,
//!
//! ```text
//! h(eta) = sqrt(A) ln((eta - sqrt A)/(eta + sqrt A)) + 2 eta - (alpha+1) W0 + sqrt(A) ln(B alpha)
//! ```
//!
//! which is strictly increasing on `(-inf, -sqrt A)` and vanishes exactly
//! where the exponential form does. The exponential forms stay available
//! ([`tail_function`], [`second_family_function`]) for diagnostics.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::eos::{GasParams, Regime};
use crate::error::{domain, Error, Result};
use crate::roots;
use crate::setup::{Direction, PistonProblem};

/// Offset of the upper tail bracket from the pole: `eta <= -sqrt(A) (1 + TAIL_POLE_OFFSET)`.
const TAIL_POLE_OFFSET: f64 = 1e-9;
/// Lower fan bracket `N - sqrt(A) >= sqrt(A) * FAN_LOWER_OFFSET`.
const FAN_LOWER_OFFSET: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-8;
const POLISH_TOL: f64 = 1e-15;
const POLISH_STEPS: usize = 12;
/// `|sqrt(2)/M0 - sqrt(2) - sqrt(A)|` below this is treated as the equality case.
pub const DEGENERATE_TOL: f64 = 1e-12;

fn check_receding_modified(problem: &PistonProblem, op: &str) -> Result<()> {
    if problem.direction != Direction::Receding {
        return domain(format!("{op} requires a receding piston"));
    }
    if problem.gas.regime() != Regime::Modified {
        return domain(format!("{op} requires A > 0 and 0 < alpha < 1 (got {:?})", problem.gas.regime()));
    }
    Ok(())
}

/// Left-hand side of the first-family invariant at `(rho, u)`.
pub fn first_invariant(gas: &GasParams, rho: f64, u: f64) -> Result<f64> {
    let n = gas.sound_speed(rho)?;
    let s = gas.a.sqrt();
    let ap1 = gas.alpha + 1.0;
    let arg = 2.0 * s * rho.powf(ap1) * (n + s) + gas.b * gas.alpha;
    Ok(u - 2.0 * n / ap1 + s / ap1 * arg.ln())
}

/// `W0` in its fully reduced Mach-number form:
/// `-sqrt 2 - 2 sqrt 2 / ((alpha+1) M0) + sqrt(A)/(alpha+1) ln((2 sqrt(2A) M0 + A M0^2 + 2) / M0^2)`.
pub fn riemann_invariant_w0(problem: &PistonProblem) -> Result<f64> {
    check_receding_modified(problem, "riemann_invariant_w0")?;
    let GasParams { a, alpha, .. } = problem.gas;
    let m0 = problem.m0;
    let s = a.sqrt();
    let ap1 = alpha + 1.0;
    let arg = (2.0 * (2.0 * a).sqrt() * m0 + a * m0 * m0 + 2.0) / (m0 * m0);
    Ok(-SQRT_2 - 2.0 * SQRT_2 / (ap1 * m0) + s / ap1 * arg.ln())
}

/// Log-domain tail function `h(eta)`; increasing, zero at the fan tail.
fn tail_log_residual(s: f64, k: f64, eta: f64) -> f64 {
    // ln((eta - s)/(eta + s)) for eta < -s, written around the pole
    s * (2.0 * s / (-eta - s)).ln_1p() + 2.0 * eta - k
}

fn tail_log_derivative(s: f64, eta: f64) -> f64 {
    2.0 + 2.0 * s * s / ((-eta - s) * (-eta + s))
}

/// `ln C` for the tail constant `C = exp(((alpha+1) W0 - sqrt(A) ln(B alpha)) / sqrt A)`,
/// together with the sign of `alpha B M0^2 = 2 - A M0^2`, which decides `C > 0`.
pub fn tail_constant(problem: &PistonProblem) -> Result<(f64, bool)> {
    check_receding_modified(problem, "tail_constant")?;
    let w0 = riemann_invariant_w0(problem)?;
    let GasParams { a, b, alpha } = problem.gas;
    let s = a.sqrt();
    let k = (alpha + 1.0) * w0 - s * (b * alpha).ln();
    let positive = alpha * b * problem.m0 * problem.m0 > 0.0;
    Ok((k / s, positive))
}

/// `f(Q) = exp(-2Q) - 1/C + 2/(C (Q+1))` in its literal exponential form.
/// May overflow for small `A`.
pub fn tail_function(problem: &PistonProblem, q: f64) -> Result<f64> {
    let (ln_c, _) = tail_constant(problem)?;
    let inv_c = (-ln_c).exp();
    Ok((-2.0 * q).exp() + 2.0 * inv_c / (q + 1.0) - inv_c)
}

/// Head speed `lambda1(V0) = sqrt 2 (-1 - 1/M0)`.
pub fn eta_head(problem: &PistonProblem) -> f64 {
    SQRT_2 * (-1.0 - 1.0 / problem.m0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSolution {
    pub eta_tail: f64,
    /// `Q0 = eta_tail / sqrt A`.
    pub q0: f64,
    /// `h(eta_tail)`; see the module docs.
    pub log_residual: f64,
    /// `|f(Q0)| / exp(-2 Q0)`, the relative residual of the exponential form.
    pub relative_residual: f64,
    pub iterations: usize,
}

/// Solves for the fan tail `eta0 = sqrt(A) Q0`, where the velocity returns to zero.
pub fn solve_eta_tail(problem: &PistonProblem) -> Result<TailSolution> {
    check_receding_modified(problem, "solve_eta_tail")?;
    let w0 = riemann_invariant_w0(problem)?;
    let GasParams { a, b, alpha } = problem.gas;
    let s = a.sqrt();
    let k = (alpha + 1.0) * w0 - s * (b * alpha).ln();
    let h = |eta: f64| tail_log_residual(s, k, eta);

    let mut lo = eta_head(problem);
    // h(head) < 0 is the proven sign; widen to the left if rounding ever says otherwise.
    let mut widen = 0;
    while h(lo) >= 0.0 {
        lo = 2.0 * lo - s;
        widen += 1;
        if widen > 200 {
            return Err(Error::Convergence { what: "fan tail lower bracket", iterations: widen, lo, hi: -s, residual: h(lo) });
        }
    }
    let mut offset = TAIL_POLE_OFFSET;
    let mut hi = -s * (1.0 + offset);
    while h(hi) <= 0.0 {
        offset *= 1e-3;
        hi = -s * (1.0 + offset);
        if offset < 1e-300 || hi <= lo {
            return Err(Error::Convergence { what: "fan tail upper bracket", iterations: 0, lo, hi, residual: h(hi) });
        }
    }
    let root = roots::bisect_then_newton(
        "fan tail",
        h,
        |eta| tail_log_derivative(s, eta),
        lo,
        hi,
        BISECTION_TOL,
        POLISH_TOL,
        POLISH_STEPS,
    )?;
    let eta_tail = root.x;
    let log_residual = h(eta_tail);
    Ok(TailSolution {
        eta_tail,
        q0: eta_tail / s,
        log_residual,
        relative_residual: (log_residual / s).exp_m1().abs(),
        iterations: root.iterations,
    })
}

/// Fan state at one similarity coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FanState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
    /// Sound speed `N = c(rho)`.
    pub n: f64,
}

/// Solves the fan relation for `N` at `eta` and returns `(rho, u)`.
///
/// Valid for `eta_head <= eta < -sqrt A`; the actual fan ends at the tail
/// speed, which [`RarefactionSolution::sample`] enforces.
pub fn rho_of_eta(problem: &PistonProblem, w0: f64, eta: f64) -> Result<(f64, f64)> {
    check_receding_modified(problem, "rho_of_eta")?;
    let s = problem.gas.a.sqrt();
    let head = eta_head(problem);
    if !(eta >= head * (1.0 + 1e-14) && eta < -s) {
        return domain(format!("eta = {eta} outside [{head}, {})", -s));
    }
    let st = fan_state(&problem.gas, w0, eta)?;
    Ok((st.rho, st.u))
}

fn fan_state(gas: &GasParams, w0: f64, eta: f64) -> Result<FanState> {
    let GasParams { a, b, alpha } = *gas;
    let s = a.sqrt();
    let ap1 = alpha + 1.0;
    let ba = b * alpha;
    let rhs = w0 - eta - s * ba.ln() / ap1;
    // unknown d = N - sqrt A > 0; the left side decreases in d
    let g = |d: f64| (alpha - 1.0) * (s + d) / ap1 + s / ap1 * (2.0 * s / d).ln_1p() - rhs;
    let dg = |d: f64| (alpha - 1.0) / ap1 - 2.0 * a / (ap1 * d * (d + 2.0 * s));

    let mut lo = s * FAN_LOWER_OFFSET;
    let mut hi = (a + ba).sqrt() - s;
    let mut guard = 0;
    while g(lo) < 0.0 {
        lo *= 1e-3;
        guard += 1;
        if guard > 100 {
            return Err(Error::Convergence { what: "fan density lower bracket", iterations: guard, lo, hi, residual: g(lo) });
        }
    }
    guard = 0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Convergence { what: "fan density upper bracket", iterations: guard, lo, hi, residual: g(hi) });
        }
    }
    let d = if lo < hi {
        roots::bisect_then_newton("fan density", g, dg, lo, hi, BISECTION_TOL, POLISH_TOL, POLISH_STEPS)?.x
    } else {
        hi
    };
    let n = s + d;
    let rho = (ba / (d * (d + 2.0 * s))).powf(1.0 / ap1);
    Ok(FanState { rho, u: eta + n, p: gas.pressure_unchecked(rho), n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RarefactionSolution {
    pub eta_head: f64,
    pub eta_tail: f64,
    pub rho1: f64,
    pub w0: f64,
    pub tail: TailSolution,
    #[serde(skip)]
    pub gas: GasParams,
}

impl RarefactionSolution {
    /// Fan state at `eta`, restricted to `[eta_head, eta_tail]`.
    pub fn sample(&self, eta: f64) -> Result<FanState> {
        let slack = 1e-14 * self.eta_head.abs();
        if !(eta >= self.eta_head - slack && eta <= self.eta_tail + slack) {
            return domain(format!("eta = {eta} outside fan [{}, {}]", self.eta_head, self.eta_tail));
        }
        fan_state(&self.gas, self.w0, eta)
    }

    /// Closed-form `rho'(eta) = -2 N rho / ((alpha+1) A + (1-alpha) N^2)`.
    pub fn density_slope(&self, eta: f64) -> Result<f64> {
        let st = self.sample(eta)?;
        let GasParams { a, alpha, .. } = self.gas;
        Ok(-2.0 * st.n * st.rho / ((alpha + 1.0) * a + (1.0 - alpha) * st.n * st.n))
    }

    /// Piston-frame `(rho, u)` at `xi <= 0`, including the constant states.
    pub fn state_at(&self, xi: f64) -> Result<(f64, f64)> {
        if xi < self.eta_head {
            Ok((1.0, -SQRT_2))
        } else if xi > self.eta_tail {
            Ok((self.rho1, 0.0))
        } else {
            let st = self.sample(xi)?;
            Ok((st.rho, st.u))
        }
    }
}

/// Builds the first-family fan for a receding piston with `A > 0`, `alpha < 1`.
pub fn solve_rarefaction(problem: &PistonProblem) -> Result<RarefactionSolution> {
    check_receding_modified(problem, "solve_rarefaction")?;
    let w0 = riemann_invariant_w0(problem)?;
    let tail = solve_eta_tail(problem)?;
    let head = eta_head(problem);
    let end = fan_state(&problem.gas, w0, tail.eta_tail)?;
    if !(head < tail.eta_tail && tail.eta_tail < 0.0) {
        return domain(format!("fan ordering violated: head {head}, tail {}", tail.eta_tail));
    }
    if !(end.rho > 0.0 && end.rho < 1.0) {
        return domain(format!("terminal density {} outside (0, 1)", end.rho));
    }
    Ok(RarefactionSolution { eta_head: head, eta_tail: tail.eta_tail, rho1: end.rho, w0, tail, gas: problem.gas })
}

/// Which contradiction rules out a second-family fan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondFamilyBranch {
    /// The tail would carry more density than the head (`rho1 > rho0`),
    /// impossible for a receding piston.
    HeadAboveTail,
    /// The tail speed would precede the head speed, breaking the fan ordering.
    OrderingViolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignWitness {
    /// `sqrt(2)/M0 - sqrt(2) - sqrt(A)`.
    pub discriminant: f64,
    /// Sign of `g(Q_head)` from the log-domain comparison (never lost to under/overflow).
    pub g_head_sign: i8,
    /// Sign the two-case argument predicts: `-1` when the discriminant is positive, `+1` otherwise.
    pub predicted_sign: i8,
    pub sign_as_predicted: bool,
    /// Upper bound on `g(Q_head)` from the positive-discriminant case, when finite.
    pub upper_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondFamilyCertificate {
    /// Branch selected by the sign of the discriminant.
    pub branch: SecondFamilyBranch,
    /// `g(Q_head)` in its literal exponential form (may be 0 or inf).
    pub g_head: f64,
    pub sign_witness: SignWitness,
    /// `Q_head = xi_head / sqrt A` with `xi_head = sqrt 2 (-1 + 1/M0)`.
    pub q_head: f64,
    /// The unique root of `g` on `(1, inf)`, where a second-family tail would have to sit.
    pub q_tail: f64,
    /// Branch obtained by locating `q_tail` relative to `q_head`.
    pub located_branch: SecondFamilyBranch,
}

/// `ln C1`, `C1 = exp((sqrt2 (alpha+1) - 2 sqrt2/M0)/sqrt A) (2 sqrt(2A) M0 + A M0^2 + 2)/(alpha B M0^2)`.
fn second_family_ln_c1(problem: &PistonProblem) -> f64 {
    let GasParams { a, b, alpha } = problem.gas;
    let m0 = problem.m0;
    let s = a.sqrt();
    let ratio = (2.0 * (2.0 * a).sqrt() * m0 + a * m0 * m0 + 2.0) / (alpha * b * m0 * m0);
    (SQRT_2 * (alpha + 1.0) - 2.0 * SQRT_2 / m0) / s + ratio.ln()
}

/// `g(Q) = exp(2Q) - 1/C1 - 2/(C1 (Q-1))`, literal exponential form.
pub fn second_family_function(problem: &PistonProblem, q: f64) -> Result<f64> {
    check_receding_modified(problem, "second_family_function")?;
    let inv_c1 = (-second_family_ln_c1(problem)).exp();
    Ok((2.0 * q).exp() - inv_c1 - 2.0 * inv_c1 / (q - 1.0))
}

/// Sign of `g(Q)` via `exp(2Q) C1` versus `(Q+1)/(Q-1)`, compared in logs.
fn second_family_sign(ln_c1: f64, q: f64) -> i8 {
    let ratio = (q + 1.0) / (q - 1.0);
    if ratio <= 0.0 {
        return 1;
    }
    let lhs = 2.0 * q + ln_c1;
    let rhs = ratio.ln();
    if lhs > rhs {
        1
    } else if lhs < rhs {
        -1
    } else {
        0
    }
}

/// Evaluates the second-family infeasibility argument at the fan head.
pub fn second_family_certificate(problem: &PistonProblem) -> Result<SecondFamilyCertificate> {
    check_receding_modified(problem, "second_family_certificate")?;
    let s = problem.gas.a.sqrt();
    let m0 = problem.m0;
    let discriminant = SQRT_2 / m0 - SQRT_2 - s;
    if discriminant.abs() <= DEGENERATE_TOL {
        return Err(Error::Degenerate { discriminant });
    }
    let ln_c1 = second_family_ln_c1(problem);
    let xi_head = SQRT_2 * (-1.0 + 1.0 / m0);
    let q_head = xi_head / s;
    let g_head = second_family_function(problem, q_head)?;
    let g_head_sign = second_family_sign(ln_c1, q_head);

    let (branch, predicted_sign) = if discriminant > 0.0 {
        (SecondFamilyBranch::HeadAboveTail, -1)
    } else {
        (SecondFamilyBranch::OrderingViolated, 1)
    };
    let upper_bound = if discriminant > 0.0 {
        let e = (xi_head / s).exp();
        let v = e * e * (-2.0 * (2.0 * problem.gas.a).sqrt() * m0) / (discriminant * (SQRT_2 + s * m0));
        v.is_finite().then_some(v)
    } else {
        None
    };

    // second-family tail: 2Q + ln C1 = ln((Q+1)/(Q-1)) on (1, inf), increasing in Q
    let phi = |q: f64| 2.0 * q + ln_c1 - ((q + 1.0) / (q - 1.0)).ln();
    let dphi = |q: f64| 2.0 + 2.0 / (q * q - 1.0);
    let lo = 1.0 + 1e-12;
    let mut hi = 2.0;
    while phi(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Convergence { what: "second-family tail bracket", iterations: 0, lo, hi, residual: f64::NAN });
        }
    }
    let q_tail = if phi(lo) >= 0.0 {
        lo
    } else {
        roots::bisect_then_newton("second-family tail", phi, dphi, lo, hi, BISECTION_TOL, POLISH_TOL, POLISH_STEPS)?.x
    };
    let located_branch = if q_tail > q_head {
        SecondFamilyBranch::HeadAboveTail
    } else {
        SecondFamilyBranch::OrderingViolated
    };

    Ok(SecondFamilyCertificate {
        branch,
        g_head,
        sign_witness: SignWitness {
            discriminant,
            g_head_sign,
            predicted_sign,
            sign_as_predicted: g_head_sign == predicted_sign,
            upper_bound,
        },
        q_head,
        q_tail,
        located_branch,
    })
}
