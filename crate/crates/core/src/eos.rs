//! Modified Chaplygin gas: `P = A rho - B / rho^alpha`.
//!
//! All quantities live in the normalized piston frame (rho0 = 1, |v0| = sqrt 2),
//! where the Mach number fixes `A + B alpha = 2 / M0^2` and only the split
//! between `A` and `B` is free. That split is exposed as `theta = A M0^2 / 2`.

use serde::Serialize;

use crate::error::{domain, Result};

/// Which member of the Chaplygin family a parameter set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// A > 0, alpha < 1: both fields genuinely nonlinear.
    Modified,
    /// A > 0, alpha = 1. The EOS is fine but the wave solvers refuse it.
    ModifiedUnitExponent,
    /// A = 0, alpha < 1.
    Generalized,
    /// A = 0, alpha = 1 (pure Chaplygin, linearly degenerate).
    Chaplygin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl GasParams {
    pub fn new(a: f64, b: f64, alpha: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && alpha.is_finite()) {
            return domain("gas parameters must be finite");
        }
        if a < 0.0 {
            return domain(format!("A must be >= 0, got {a}"));
        }
        if b <= 0.0 {
            return domain(format!("B must be > 0, got {b}"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        Ok(Self { a, b, alpha })
    }

    /// Split `2 / M0^2` between the two pressure terms:
    /// `A = 2 theta / M0^2`, `B = 2 (1 - theta) / (alpha M0^2)`.
    pub fn from_mach(m0: f64, alpha: f64, theta: f64) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return domain(format!("M0 must be finite and > 0, got {m0}"));
        }
        if !(0.0..1.0).contains(&theta) {
            return domain(format!("theta must lie in [0, 1), got {theta}"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        let m0_sq = m0 * m0;
        Self::new(2.0 * theta / m0_sq, 2.0 * (1.0 - theta) / (alpha * m0_sq), alpha)
    }

    pub fn regime(&self) -> Regime {
        match (self.a > 0.0, self.alpha < 1.0) {
            (true, true) => Regime::Modified,
            (true, false) => Regime::ModifiedUnitExponent,
            (false, true) => Regime::Generalized,
            (false, false) => Regime::Chaplygin,
        }
    }

    /// alpha = 1 with A > 0: accepted here, rejected by the wave solvers.
    pub fn nonlinearity_risk(&self) -> bool {
        self.regime() == Regime::ModifiedUnitExponent
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.pressure_unchecked(rho))
    }

    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.sound_speed_unchecked(rho))
    }

    #[inline]
    pub(crate) fn pressure_unchecked(&self, rho: f64) -> f64 {
        self.a * rho - self.b * rho.powf(-self.alpha)
    }

    /// `c^2 = P'(rho) = A + B alpha / rho^(alpha+1)`.
    #[inline]
    pub(crate) fn sound_speed_sq_unchecked(&self, rho: f64) -> f64 {
        self.a + self.b * self.alpha * rho.powf(-(self.alpha + 1.0))
    }

    #[inline]
    pub(crate) fn sound_speed_unchecked(&self, rho: f64) -> f64 {
        self.sound_speed_sq_unchecked(rho).sqrt()
    }

    /// `M0 = |v0| / c(1)`.
    pub fn mach_of(&self, v0: f64) -> f64 {
        v0.abs() / self.sound_speed_unchecked(1.0)
    }

    /// Characteristic speeds `(u - c, u + c)`.
    pub fn eigenvalues(&self, rho: f64, u: f64) -> Result<(f64, f64)> {
        let c = self.sound_speed(rho)?;
        Ok((u - c, u + c))
    }

    /// `grad(lambda_i) . r_i`, identical for both families; zero only when
    /// A = 0 and alpha = 1.
    pub fn nonlinearity_factor(&self, rho: f64) -> Result<f64> {
        let c = self.sound_speed(rho)?;
        let num = 2.0 * self.a * rho.powf(self.alpha) + self.b * self.alpha * (1.0 - self.alpha);
        Ok(num / (2.0 * rho.powf(self.alpha + 1.0) * c))
    }
}

fn check_density(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 0.0 {
        Ok(())
    } else {
        domain(format!("density must be finite and > 0, got {rho}"))
    }
}
