//! The `A -> 0` limit: generalized and pure Chaplygin gas.
//!
//! With `A = 0` the Mach normalization fixes `B = 2/(alpha M0^2)`. A
//! proceeding piston then drives a bounded shock only while
//! `M0^2 < 1/alpha`; past that threshold mass concentrates on the piston as a
//! Dirac measure whose weights are given by [`MeasureSolution`]. A receding
//! piston produces an explicit fan for `alpha < 1` and a contact
//! discontinuity for `alpha = 1`.
//!
//! Speeds follow the `|v0| = sqrt 2` normalization used throughout the crate.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::roots;

pub mod weak_form;

pub use weak_form::{default_bank, verify_weak_form, Bump, Support, TestFunction, WeakFormReport, WeakResidual};

fn check_alpha(alpha: f64, allow_one: bool) -> Result<()> {
    let ok = alpha > 0.0 && (alpha < 1.0 || (allow_one && alpha == 1.0));
    if ok {
        Ok(())
    } else {
        domain(format!("alpha = {alpha} outside the supported range"))
    }
}

fn check_mach(m0: f64) -> Result<()> {
    if m0.is_finite() && m0 > 0.0 {
        Ok(())
    } else {
        domain(format!("M0 must be finite and > 0, got {m0}"))
    }
}

/// Limiting Mach relation for a shock into a generalized Chaplygin gas:
/// `M0^2 = (1 - 1/rho1)(1 - rho1^-alpha) / alpha`.
pub fn gcg_limit_relation(alpha: f64, rho1: f64) -> Result<f64> {
    check_alpha(alpha, true)?;
    if rho1.is_nan() || rho1 <= 1.0 {
        return domain(format!("rho1 must exceed 1, got {rho1}"));
    }
    let d = rho1 - 1.0;
    let first = d / rho1;
    let second = -(-alpha * d.ln_1p()).exp_m1();
    Ok(first * second / alpha)
}

/// Inverts [`gcg_limit_relation`]: the downstream density approached by the
/// shock as `A -> 0` with `M0^2 < 1/alpha` fixed.
pub fn gcg_limit_density(alpha: f64, m0: f64) -> Result<f64> {
    check_alpha(alpha, true)?;
    check_mach(m0)?;
    let target = m0 * m0;
    if alpha * target >= 1.0 {
        return domain(format!("M0^2 = {target} is not below 1/alpha = {}", 1.0 / alpha));
    }
    let g = |d: f64| {
        let first = d / (1.0 + d);
        let second = -(-alpha * d.ln_1p()).exp_m1();
        first * second / alpha - target
    };
    let mut hi = 1.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return domain("limit density bracket overflow");
        }
    }
    let root = roots::bisect("limit shock density", g, 0.0, hi, 1e-16, 2000)?;
    Ok(1.0 + root.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitClass {
    /// `M0^2 < 1/alpha`: a bounded shock survives the limit.
    IntegralShock,
    /// `M0^2 >= 1/alpha`: mass concentrates on the piston.
    Concentration,
}

pub fn classify_limit(alpha: f64, m0: f64) -> LimitClass {
    if alpha * m0 * m0 >= 1.0 {
        LimitClass::Concentration
    } else {
        LimitClass::IntegralShock
    }
}

/// Dirac weights on the piston for the concentration regime, together with
/// the constant state `(rho, u, P) = (1, sqrt 2, -2/(alpha M0^2))` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureSolution {
    /// Growth rate of the concentrated mass, `w_rho(t) = slope * t`.
    pub w_rho_slope: f64,
    /// Constant pressure weight on the piston, `2 - 2/(alpha M0^2)`.
    pub w_p_const: f64,
    pub m0: f64,
    pub alpha: f64,
}

impl MeasureSolution {
    pub fn w_rho(&self, t: f64) -> f64 {
        self.w_rho_slope * t
    }

    pub fn w_p(&self, _t: f64) -> f64 {
        self.w_p_const
    }

    /// `P0 = -2 / (alpha M0^2)`.
    pub fn interior_pressure(&self) -> f64 {
        -2.0 / (self.alpha * self.m0 * self.m0)
    }

    /// `(rho, u, P)` away from the piston.
    pub fn interior_state(&self) -> (f64, f64, f64) {
        (1.0, SQRT_2, self.interior_pressure())
    }
}

pub fn measure_solution(alpha: f64, m0: f64) -> Result<MeasureSolution> {
    check_alpha(alpha, true)?;
    check_mach(m0)?;
    if classify_limit(alpha, m0) != LimitClass::Concentration {
        return domain(format!("M0^2 = {} < 1/alpha: the limit is an ordinary shock", m0 * m0));
    }
    let w_p_const = (2.0 - 2.0 / (alpha * m0 * m0)).max(0.0);
    Ok(MeasureSolution { w_rho_slope: SQRT_2, w_p_const, m0, alpha })
}

/// Pure Chaplygin gas behind a receding piston: a single contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChaplyginContact {
    pub rho1: f64,
    /// Contact speed `sqrt 2 / (rho1 - 1)`, equal to the upstream `u - c`.
    pub sigma: f64,
}

impl ChaplyginContact {
    pub fn state_at(&self, xi: f64) -> (f64, f64) {
        if xi < self.sigma {
            (1.0, -SQRT_2)
        } else {
            (self.rho1, 0.0)
        }
    }
}

/// `rho1 = 1 / (1 + M0)`.
pub fn chaplygin_receding_density(m0: f64) -> Result<ChaplyginContact> {
    check_mach(m0)?;
    let rho1 = 1.0 / (1.0 + m0);
    Ok(ChaplyginContact { rho1, sigma: SQRT_2 / (rho1 - 1.0) })
}

/// Explicit first-family fan for a generalized Chaplygin gas (`A = 0`, `alpha < 1`).
///
/// With `c = sqrt(B alpha) rho^(-(alpha+1)/2)` the invariant
/// `u - 2c/(alpha+1) = W` and `eta = u - c` give
/// `c = (eta - W)(alpha+1)/(1-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GcgFan {
    pub alpha: f64,
    pub m0: f64,
    pub w: f64,
    pub eta_head: f64,
    pub eta_tail: f64,
    pub rho1: f64,
}

impl GcgFan {
    pub fn new(alpha: f64, m0: f64) -> Result<Self> {
        check_alpha(alpha, false)?;
        check_mach(m0)?;
        let c0 = SQRT_2 / m0;
        let w = -SQRT_2 - 2.0 * c0 / (alpha + 1.0);
        let eta_head = -SQRT_2 - c0;
        let eta_tail = 0.5 * (alpha + 1.0) * w;
        let mut fan = Self { alpha, m0, w, eta_head, eta_tail, rho1: 1.0 };
        fan.rho1 = fan.density_for_sound_speed(-eta_tail);
        Ok(fan)
    }

    fn density_for_sound_speed(&self, c: f64) -> f64 {
        // B alpha = 2 / M0^2
        let b_alpha = 2.0 / (self.m0 * self.m0);
        (c * c / b_alpha).powf(-1.0 / (self.alpha + 1.0))
    }

    pub fn sample(&self, eta: f64) -> Result<(f64, f64)> {
        let slack = 1e-14 * self.eta_head.abs();
        if !(eta >= self.eta_head - slack && eta <= self.eta_tail + slack) {
            return domain(format!("eta = {eta} outside fan [{}, {}]", self.eta_head, self.eta_tail));
        }
        let c = (eta - self.w) * (self.alpha + 1.0) / (1.0 - self.alpha);
        Ok((self.density_for_sound_speed(c), eta + c))
    }

    pub fn state_at(&self, xi: f64) -> Result<(f64, f64)> {
        if xi < self.eta_head {
            Ok((1.0, -SQRT_2))
        } else if xi > self.eta_tail {
            Ok((self.rho1, 0.0))
        } else {
            self.sample(xi)
        }
    }
}

pub fn gcg_rarefaction_profile(alpha: f64, m0: f64, eta: f64) -> Result<(f64, f64)> {
    GcgFan::new(alpha, m0)?.sample(eta)
}
