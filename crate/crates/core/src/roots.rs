//! Bracketed scalar root finding.
//!
//! Every implicit equation in this crate is monotone on a known interval, so
//! the solvers here assume a sign change across `[lo, hi]` and never leave it.
//! Bisection gives the guarantee; Newton steps (falling back to bisection
//! whenever a step would exit the bracket) give the fast finish.

use crate::error::{Error, Result};

/// Result of a scalar root solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `f(x)` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// Final bracket, always containing the sign change.
    pub lo: f64,
    pub hi: f64,
}

fn check_bracket(what: &'static str, lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    if lo >= hi || f_lo * f_hi > 0.0 {
        return Err(Error::Convergence {
            what,
            iterations: 0,
            lo,
            hi,
            residual: f_lo.abs().min(f_hi.abs()),
        });
    }
    Ok(())
}

/// Bisection until the bracket width drops below `rel_tol * max(|lo|, |hi|)`.
pub fn bisect<F>(what: &'static str, f: F, lo: f64, hi: f64, rel_tol: f64, max_iter: usize) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    check_bracket(what, lo, hi, f_lo, f_hi)?;
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0, iterations: 0, lo, hi: lo });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0, iterations: 0, lo: hi, hi });
    }
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let stalled = mid <= lo || mid >= hi;
        let f_mid = f(mid);
        if !f_mid.is_finite() {
            return Err(Error::NonFinite(what));
        }
        if f_mid == 0.0 {
            return Ok(Root { x: mid, residual: 0.0, iterations: it, lo: mid, hi: mid });
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if hi - lo <= rel_tol * scale || stalled {
            let x = 0.5 * (lo + hi);
            return Ok(Root { x, residual: f(x), iterations: it, lo, hi });
        }
    }
    Err(Error::Convergence { what, iterations: max_iter, lo, hi, residual: f_lo.abs() })
}

/// Newton iteration confined to `[lo, hi]`; any step that would leave the
/// bracket is replaced by a bisection step. Stops once `|dx| < rel_step * |x|`.
#[allow(clippy::too_many_arguments)]
pub fn newton_in_bracket<F, D>(
    what: &'static str,
    f: F,
    df: D,
    lo: f64,
    hi: f64,
    start: f64,
    rel_step: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo);
    let f_hi = f(hi);
    check_bracket(what, lo, hi, f_lo, f_hi)?;
    let lo_positive = f_lo > 0.0;
    let mut x = start.clamp(lo, hi);
    let mut fx = f(x);
    let mut best = (x, fx);
    for it in 1..=max_iter {
        if !fx.is_finite() {
            return Err(Error::NonFinite(what));
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 {
            return Ok(Root { x, residual: 0.0, iterations: it, lo: x, hi: x });
        }
        if (fx > 0.0) == lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let dx = fx / d;
        let tiny = rel_step * x.abs().max(f64::MIN_POSITIVE);
        if d.is_finite() && d != 0.0 && dx.abs() <= tiny {
            // the proposed step is below tolerance: x is converged
            return Ok(Root { x: best.0, residual: best.1, iterations: it, lo, hi });
        }
        let newton = x - dx;
        let next = if d.is_finite() && d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        fx = f(x);
        if step <= tiny || hi - lo <= f64::EPSILON * x.abs() {
            if fx.abs() < best.1.abs() {
                best = (x, fx);
            }
            return Ok(Root { x: best.0, residual: best.1, iterations: it, lo, hi });
        }
    }
    Err(Error::Convergence { what, iterations: max_iter, lo, hi, residual: best.1.abs() })
}

/// Bisection to `coarse_tol`, then Newton polish inside the surviving bracket
/// until `|dx| < polish_tol * |x|` or `polish_steps` steps.
#[allow(clippy::too_many_arguments)]
pub fn bisect_then_newton<F, D>(
    what: &'static str,
    f: F,
    df: D,
    lo: f64,
    hi: f64,
    coarse_tol: f64,
    polish_tol: f64,
    polish_steps: usize,
) -> Result<Root>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let coarse = bisect(what, &f, lo, hi, coarse_tol, 400)?;
    if coarse.residual == 0.0 || coarse.lo == coarse.hi {
        return Ok(coarse);
    }
    match newton_in_bracket(what, &f, &df, coarse.lo, coarse.hi, coarse.x, polish_tol, polish_steps) {
        Ok(r) => Ok(Root { iterations: r.iterations + coarse.iterations, ..r }),
        // Polish ran out of steps: keep whichever iterate has the smaller residual.
        Err(Error::Convergence { lo, hi, .. }) => {
            let x = 0.5 * (lo + hi);
            let fx = f(x);
            let best = if fx.abs() <= coarse.residual.abs() { (x, fx) } else { (coarse.x, coarse.residual) };
            Ok(Root { x: best.0, residual: best.1, iterations: coarse.iterations + polish_steps, lo, hi })
        }
        Err(e) => Err(e),
    }
}
