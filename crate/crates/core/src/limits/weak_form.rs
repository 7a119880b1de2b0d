//! Numerical check of the weak (measure) formulation on `t >= 0, x <= 0`.
//!
//! For the concentration ansatz the density is `1` on the open quarter plane
//! plus a Dirac of weight `w_rho(t)` on the wall, momentum `sqrt 2`, momentum
//! flux `2`, pressure `-2/(alpha M0^2)` in the interior and a wall pressure
//! weight `w_p`. For every test function `phi` the two residuals
//!
//! ```text
//! mass:      II phi_t + I w_rho phi_t(t,0) dt + sqrt2 II phi_x + I phi(0,x) dx
//! momentum:  sqrt2 II phi_t + (2 - 2/(alpha M0^2)) II phi_x - I w_p phi(t,0) dt + sqrt2 I phi(0,x) dx
//! ```
//!
//! vanish. They are evaluated with composite midpoint rules on the support
//! box of `phi` clipped to the quarter plane.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use super::MeasureSolution;
use crate::error::{domain, Result};
use crate::exec::Execution;

/// Axis-aligned support box `[t_lo, t_hi] x [x_lo, x_hi]` outside which `phi` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Support {
    pub t_lo: f64,
    pub t_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

/// A `C^1` test function with compact support and exact partial derivatives.
pub trait TestFunction: Sync {
    fn value(&self, t: f64, x: f64) -> f64;
    fn d_t(&self, t: f64, x: f64) -> f64;
    fn d_x(&self, t: f64, x: f64) -> f64;
    fn support(&self) -> Support;
}

fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        let q = 1.0 - s * s;
        q * q * q
    } else {
        0.0
    }
}

fn bump_prime(s: f64) -> f64 {
    if s.abs() < 1.0 {
        let q = 1.0 - s * s;
        -6.0 * s * q * q
    } else {
        0.0
    }
}

/// `phi(t, x) = b((t - t_center)/t_radius) b((x - x_center)/x_radius)`, `b(s) = (1 - s^2)^3` on `|s| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub t_center: f64,
    pub t_radius: f64,
    pub x_center: f64,
    pub x_radius: f64,
}

impl Bump {
    pub fn new(t_center: f64, t_radius: f64, x_center: f64, x_radius: f64) -> Result<Self> {
        let all_finite = [t_center, t_radius, x_center, x_radius].iter().all(|v| v.is_finite());
        if !all_finite || t_radius <= 0.0 || x_radius <= 0.0 {
            return domain("bump needs finite centers and positive radii");
        }
        Ok(Self { t_center, t_radius, x_center, x_radius })
    }
}

impl TestFunction for Bump {
    fn value(&self, t: f64, x: f64) -> f64 {
        bump((t - self.t_center) / self.t_radius) * bump((x - self.x_center) / self.x_radius)
    }

    fn d_t(&self, t: f64, x: f64) -> f64 {
        bump_prime((t - self.t_center) / self.t_radius) / self.t_radius * bump((x - self.x_center) / self.x_radius)
    }

    fn d_x(&self, t: f64, x: f64) -> f64 {
        bump((t - self.t_center) / self.t_radius) * bump_prime((x - self.x_center) / self.x_radius) / self.x_radius
    }

    fn support(&self) -> Support {
        Support {
            t_lo: self.t_center - self.t_radius,
            t_hi: self.t_center + self.t_radius,
            x_lo: self.x_center - self.x_radius,
            x_hi: self.x_center + self.x_radius,
        }
    }
}

/// Five bumps covering the corner, the wall, the initial line and the interior.
pub fn default_bank() -> Vec<Bump> {
    [(0.0, 0.8, 0.1, 0.3), (0.5, 0.4, 0.05, 0.15), (0.0, 0.3, 0.05, 0.15), (0.3, 0.3, 0.1, 0.2), (0.4, 0.3, -0.3, 0.2)]
        .into_iter()
        .map(|(tc, rt, xc, rx)| Bump { t_center: tc, t_radius: rt, x_center: xc, x_radius: rx })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    pub mass: f64,
    pub momentum: f64,
}

impl WeakResidual {
    pub fn max_abs(&self) -> f64 {
        self.mass.abs().max(self.momentum.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakFormReport {
    pub resolution: usize,
    pub residuals: Vec<WeakResidual>,
    pub max_residual: f64,
}

/// Both residuals for one test function, `resolution` midpoint cells per axis.
pub fn weak_residual<F: TestFunction>(ms: &MeasureSolution, phi: &F, resolution: usize, exec: Execution) -> Result<WeakResidual> {
    if resolution == 0 {
        return domain("quadrature resolution must be positive");
    }
    let sup = phi.support();
    let finite = [sup.t_lo, sup.t_hi, sup.x_lo, sup.x_hi].iter().all(|v| v.is_finite());
    if !finite || sup.t_lo >= sup.t_hi || sup.x_lo >= sup.x_hi {
        return domain("test function must have a bounded, non-empty support box");
    }
    let (t0, t1) = (sup.t_lo.max(0.0), sup.t_hi);
    let (x0, x1) = (sup.x_lo, sup.x_hi.min(0.0));
    if t1 <= t0 || x1 <= x0 {
        return Ok(WeakResidual { mass: 0.0, momentum: 0.0 });
    }
    let n = resolution;
    let ht = (t1 - t0) / n as f64;
    let hx = (x1 - x0) / n as f64;
    let tm = |i: usize| t0 + (i as f64 + 0.5) * ht;
    let xm = |j: usize| x0 + (j as f64 + 0.5) * hx;

    let rows = exec.map_range(n, |i| {
        let t = tm(i);
        let (mut st, mut sx) = (0.0, 0.0);
        for j in 0..n {
            let x = xm(j);
            st += phi.d_t(t, x);
            sx += phi.d_x(t, x);
        }
        (st, sx)
    });
    let (mut int_t, mut int_x) = (0.0, 0.0);
    for (st, sx) in rows {
        int_t += st;
        int_x += sx;
    }
    int_t *= ht * hx;
    int_x *= ht * hx;

    let wall_touched = sup.x_lo < 0.0 && 0.0 < sup.x_hi;
    let (mut wall_mass, mut wall_phi) = (0.0, 0.0);
    if wall_touched {
        for i in 0..n {
            let t = tm(i);
            wall_mass += ms.w_rho(t) * phi.d_t(t, 0.0);
            wall_phi += phi.value(t, 0.0);
        }
        wall_mass *= ht;
        wall_phi *= ht;
    }
    let mut initial = 0.0;
    if sup.t_lo < 0.0 {
        for j in 0..n {
            initial += phi.value(0.0, xm(j));
        }
        initial *= hx;
    }

    let p_interior = ms.interior_pressure();
    let mass = int_t + wall_mass + SQRT_2 * int_x + initial;
    let momentum = SQRT_2 * int_t + (2.0 + p_interior) * int_x - ms.w_p_const * wall_phi + SQRT_2 * initial;
    Ok(WeakResidual { mass, momentum })
}

/// Maximum residual over a bank of test functions.
pub fn verify_weak_form<F: TestFunction>(
    ms: &MeasureSolution,
    bank: &[F],
    resolution: usize,
    exec: Execution,
) -> Result<WeakFormReport> {
    let residuals = bank
        .iter()
        .map(|phi| weak_residual(ms, phi, resolution, exec))
        .collect::<Result<Vec<_>>>()?;
    let max_residual = residuals.iter().map(WeakResidual::max_abs).fold(0.0, f64::max);
    Ok(WeakFormReport { resolution, residuals, max_residual })
}

/// Observed order `log2(r(n) / r(2n))` of the maximum residual.
pub fn observed_order<F: TestFunction>(ms: &MeasureSolution, bank: &[F], resolution: usize, exec: Execution) -> Result<f64> {
    let coarse = verify_weak_form(ms, bank, resolution, exec)?.max_residual;
    let fine = verify_weak_form(ms, bank, 2 * resolution, exec)?.max_residual;
    Ok((coarse / fine).log2())
}
