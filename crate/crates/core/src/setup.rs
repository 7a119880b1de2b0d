//! Normalized piston problems in the frame moving with the piston.
//!
//! The gas occupies `x < 0`, the piston is the wall `x = 0`, and the initial
//! state is `rho0 = 1`, `u0 = -v0` with `v0 = -sqrt 2` (piston pushed into the
//! gas) or `v0 = +sqrt 2` (piston withdrawn).

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::eos::GasParams;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Piston moves into the gas, `v0 = -sqrt 2`.
    Proceeding,
    /// Piston moves away from the gas, `v0 = +sqrt 2`.
    Receding,
}

impl Direction {
    /// Lab-frame piston velocity.
    pub fn piston_velocity(self) -> f64 {
        match self {
            Direction::Proceeding => -SQRT_2,
            Direction::Receding => SQRT_2,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "proceeding" => Ok(Direction::Proceeding),
            "receding" => Ok(Direction::Receding),
            other => Err(format!("unknown direction '{other}' (expected proceeding|receding)")),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Proceeding => "proceeding",
            Direction::Receding => "receding",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PistonProblem {
    pub m0: f64,
    pub direction: Direction,
    pub gas: GasParams,
}

/// Relative tolerance on `A + B alpha = 2 / M0^2`.
const MACH_CONSTRAINT_TOL: f64 = 1e-12;

impl PistonProblem {
    /// Builds a problem from the Mach number, exponent and the `A`/`B` split.
    ///
    /// Accepts `0 < alpha < 1`, or `alpha = 1` only together with `theta = 0`
    /// (pure Chaplygin); `alpha = 1` with `A > 0` is rejected.
    pub fn new(m0: f64, direction: Direction, alpha: f64, theta: f64) -> Result<Self> {
        if alpha == 1.0 && theta != 0.0 {
            return domain("alpha = 1 requires theta = 0 (A > 0 with alpha = 1 is not supported)");
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("alpha must lie in (0, 1), or equal 1 with theta = 0; got {alpha}"));
        }
        let gas = GasParams::from_mach(m0, alpha, theta)?;
        Ok(Self { m0, direction, gas })
    }

    /// Wraps an explicit gas, checking the normalization `A + B alpha = 2 / M0^2`.
    pub fn with_gas(m0: f64, direction: Direction, gas: GasParams) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return domain(format!("M0 must be finite and > 0, got {m0}"));
        }
        if gas.nonlinearity_risk() {
            return domain("alpha = 1 with A > 0 is not supported by the wave solvers");
        }
        let target = 2.0 / (m0 * m0);
        let actual = gas.a + gas.b * gas.alpha;
        if (actual - target).abs() > MACH_CONSTRAINT_TOL * target {
            return domain(format!("A + B alpha = {actual} does not match 2/M0^2 = {target}"));
        }
        Ok(Self { m0, direction, gas })
    }

    /// `theta = A M0^2 / 2`, the fraction of `2/M0^2` carried by `A`.
    pub fn theta(&self) -> f64 {
        0.5 * self.gas.a * self.m0 * self.m0
    }

    /// Piston-frame upstream velocity `u0 = -v0`.
    pub fn initial_velocity(&self) -> f64 {
        -self.direction.piston_velocity()
    }

    /// `(rho0, u0)`.
    pub fn initial_state(&self) -> (f64, f64) {
        (1.0, self.initial_velocity())
    }

    /// `P0 = A - B`.
    pub fn initial_pressure(&self) -> f64 {
        self.gas.a - self.gas.b
    }

    /// Upstream sound speed `c0 = sqrt 2 / M0`.
    pub fn initial_sound_speed(&self) -> f64 {
        self.gas.sound_speed_unchecked(1.0)
    }
}

/// Convenience wrapper matching the command-line argument order.
pub fn make_problem(m0: f64, direction: Direction, alpha: f64, theta: f64) -> Result<PistonProblem> {
    PistonProblem::new(m0, direction, alpha, theta)
}

pub fn initial_pressure(problem: &PistonProblem) -> f64 {
    problem.initial_pressure()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Shock,
    Rarefaction1,
    MeasureLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub xi: f64,
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

/// A self-similar solution sampled in `xi = x / t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub wave_kind: WaveKind,
    pub samples: Vec<ProfileSample>,
}

/// Lab-frame sample at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabSample {
    pub x: f64,
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl WaveProfile {
    /// Checks ordering (`xi` strictly increasing, all `xi <= 0`) and that
    /// every `p` equals `pressure(rho)` to `1e-10` relative.
    pub fn validate(&self, gas: &GasParams) -> Result<()> {
        for w in self.samples.windows(2) {
            if w[1].xi <= w[0].xi {
                return domain(format!("profile xi not strictly increasing at {}", w[1].xi));
            }
        }
        for s in &self.samples {
            if s.xi > 0.0 {
                return domain(format!("profile sample at xi = {} > 0", s.xi));
            }
            // the measure-limit constant state carries the limiting pressure, not P(rho)
            if self.wave_kind != WaveKind::MeasureLimit {
                let p = gas.pressure(s.rho)?;
                if (p - s.p).abs() > 1e-10 * p.abs().max(1.0) {
                    return domain(format!("pressure mismatch at xi = {}: {} vs {}", s.xi, s.p, p));
                }
            }
        }
        Ok(())
    }

    /// Maps the piston-frame profile to lab coordinates at time `t`:
    /// `x_lab = xi t + v0 t`, `u_lab = u + v0`.
    pub fn to_lab_frame(&self, direction: Direction, t: f64) -> Vec<LabSample> {
        let v0 = direction.piston_velocity();
        self.samples
            .iter()
            .map(|s| LabSample { x: (s.xi + v0) * t, rho: s.rho, u: s.u + v0, p: s.p })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn make_problem_examples() {
        let p = make_problem(1.0, Direction::Proceeding, 0.5, 0.5).unwrap();
        assert_eq!((p.gas.a, p.gas.b), (1.0, 2.0));
        assert_eq!(p.initial_state(), (1.0, SQRT_2));

        let p = make_problem(2.0, Direction::Receding, 0.5, 0.0).unwrap();
        assert_eq!(p.gas.a, 0.0);
        assert_relative_eq!(p.gas.b, 1.0, max_relative = 1e-15);
        assert_eq!(p.initial_velocity(), -SQRT_2);

        assert!(make_problem(1.0, Direction::Proceeding, 1.0, 0.5).is_err());
        assert!(make_problem(1.0, Direction::Proceeding, 1.0, 0.0).is_ok());
        assert!(make_problem(0.0, Direction::Proceeding, 0.5, 0.5).is_err());
        assert!(make_problem(1.0, Direction::Proceeding, 0.0, 0.5).is_err());
    }

    #[test]
    fn initial_pressure_examples() {
        let p = make_problem(1.0, Direction::Proceeding, 0.5, 0.5).unwrap();
        assert_eq!(initial_pressure(&p), -1.0);
        let p = make_problem(1.0, Direction::Proceeding, 1.0, 0.0).unwrap();
        assert_eq!(initial_pressure(&p), -2.0);
        // A = B: theta = 1 / (1 + alpha)
        let p = make_problem(1.0, Direction::Receding, 0.5, 1.0 / 1.5).unwrap();
        assert!(initial_pressure(&p).abs() < 1e-15);
    }

    #[test]
    fn with_gas_checks_normalization() {
        let gas = GasParams::new(1.0, 2.0, 0.5).unwrap();
        assert!(PistonProblem::with_gas(1.0, Direction::Proceeding, gas).is_ok());
        assert!(PistonProblem::with_gas(1.1, Direction::Proceeding, gas).is_err());
        let risky = GasParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(PistonProblem::with_gas(1.0, Direction::Proceeding, risky).is_err());
    }

    #[test]
    fn profile_validation_catches_disorder() {
        let gas = GasParams::new(1.0, 2.0, 0.5).unwrap();
        let s = |xi: f64| ProfileSample { xi, rho: 1.0, u: 0.0, p: -1.0 };
        let good = WaveProfile { wave_kind: WaveKind::Shock, samples: vec![s(-1.0), s(-0.5), s(0.0)] };
        assert!(good.validate(&gas).is_ok());
        let bad = WaveProfile { wave_kind: WaveKind::Shock, samples: vec![s(-0.5), s(-1.0)] };
        assert!(bad.validate(&gas).is_err());
        let positive = WaveProfile { wave_kind: WaveKind::Shock, samples: vec![s(0.5)] };
        assert!(positive.validate(&gas).is_err());
        let wrong_p = WaveProfile {
            wave_kind: WaveKind::Shock,
            samples: vec![ProfileSample { xi: -1.0, rho: 1.0, u: 0.0, p: 0.0 }],
        };
        assert!(wrong_p.validate(&gas).is_err());
    }

    #[test]
    fn lab_frame_shift() {
        let prof = WaveProfile {
            wave_kind: WaveKind::Shock,
            samples: vec![ProfileSample { xi: -1.0, rho: 1.0, u: SQRT_2, p: -1.0 }],
        };
        let lab = prof.to_lab_frame(Direction::Proceeding, 2.0);
        assert_relative_eq!(lab[0].x, (-1.0 - SQRT_2) * 2.0);
        // upstream gas at rest in the lab
        assert_eq!(lab[0].u, 0.0);
    }

    proptest! {
        #[test]
        fn constructed_problems_satisfy_invariants(
            m0 in 0.01f64..50.0, alpha in 0.01f64..0.999, theta in 0.0f64..0.999, recede in any::<bool>(),
        ) {
            let dir = if recede { Direction::Receding } else { Direction::Proceeding };
            let p = make_problem(m0, dir, alpha, theta).unwrap();
            let target = 2.0 / (m0 * m0);
            prop_assert!((p.gas.a + p.gas.b * alpha - target).abs() <= 1e-12 * target);
            prop_assert_eq!(p.initial_pressure(), p.gas.pressure(1.0).unwrap());
            let p0_alt = target - p.gas.b * (1.0 + alpha);
            prop_assert!((p.initial_pressure() - p0_alt).abs() <= 1e-12 * target.max(1.0));
            prop_assert!((p.gas.mach_of(SQRT_2) - m0).abs() <= 1e-12 * m0);
            prop_assert_eq!(p.initial_velocity(), if recede { -SQRT_2 } else { SQRT_2 });
        }
    }
}
