//! One entry point for every supported regime, and the finite-volume cross-check.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::eos::Regime;
use crate::error::{domain, Result};
use crate::exec::Execution;
use crate::fvm::{self, Grid1D};
use crate::limits::{chaplygin_receding_density, ChaplyginContact, GcgFan};
use crate::rarefaction::{solve_rarefaction, RarefactionSolution};
use crate::setup::{Direction, PistonProblem, ProfileSample, WaveKind, WaveProfile};
use crate::shock::{solve_shock, ShockSolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactSolution {
    Shock(ShockSolution),
    Rarefaction(RarefactionSolution),
    /// `A = 0`, `alpha < 1`, receding.
    GcgRarefaction(GcgFan),
    /// `A = 0`, `alpha = 1`, receding: the fan collapses to a contact.
    ChaplyginContact(ChaplyginContact),
}

/// Solves the piston problem in whichever regime it belongs to.
///
/// Proceeding pistons always go through the shock solver, which reports
/// [`crate::Error::ConcentrationRegime`] when `A = 0` and `M0^2 >= 1/alpha`.
pub fn solve(problem: &PistonProblem) -> Result<ExactSolution> {
    match (problem.direction, problem.gas.regime()) {
        (Direction::Proceeding, _) => solve_shock(problem).map(ExactSolution::Shock),
        (Direction::Receding, Regime::Modified) => solve_rarefaction(problem).map(ExactSolution::Rarefaction),
        (Direction::Receding, Regime::Generalized) => {
            GcgFan::new(problem.gas.alpha, problem.m0).map(ExactSolution::GcgRarefaction)
        }
        (Direction::Receding, Regime::Chaplygin) => {
            chaplygin_receding_density(problem.m0).map(ExactSolution::ChaplyginContact)
        }
        (Direction::Receding, Regime::ModifiedUnitExponent) => domain("alpha = 1 with A > 0 is not supported"),
    }
}

impl ExactSolution {
    pub fn wave_kind(&self) -> WaveKind {
        match self {
            ExactSolution::Shock(_) => WaveKind::Shock,
            _ => WaveKind::Rarefaction1,
        }
    }

    pub fn rho1(&self) -> f64 {
        match self {
            ExactSolution::Shock(s) => s.rho1,
            ExactSolution::Rarefaction(r) => r.rho1,
            ExactSolution::GcgRarefaction(f) => f.rho1,
            ExactSolution::ChaplyginContact(c) => c.rho1,
        }
    }

    /// Similarity coordinates where the solution is discontinuous or has a kink.
    pub fn singular_points(&self) -> Vec<f64> {
        match self {
            ExactSolution::Shock(s) => vec![s.sigma],
            ExactSolution::Rarefaction(r) => vec![r.eta_head, r.eta_tail],
            ExactSolution::GcgRarefaction(f) => vec![f.eta_head, f.eta_tail],
            ExactSolution::ChaplyginContact(c) => vec![c.sigma],
        }
    }

    /// Leftmost wave speed.
    pub fn leftmost_speed(&self) -> f64 {
        self.singular_points()[0]
    }

    /// Piston-frame `(rho, u)` at `xi <= 0`.
    pub fn state_at(&self, xi: f64) -> Result<(f64, f64)> {
        match self {
            ExactSolution::Shock(s) => Ok(s.state_at(xi)),
            ExactSolution::Rarefaction(r) => r.state_at(xi),
            ExactSolution::GcgRarefaction(f) => f.state_at(xi),
            ExactSolution::ChaplyginContact(c) => Ok(c.state_at(xi)),
        }
    }

    /// `samples` evenly spaced points on `[1.2 * leftmost_speed, 0]`.
    pub fn profile(&self, problem: &PistonProblem, samples: usize) -> Result<WaveProfile> {
        let xi_min = 1.2 * self.leftmost_speed();
        let gas = problem.gas;
        let samples = sample_grid(xi_min, samples)?
            .into_iter()
            .map(|xi| {
                let (rho, u) = self.state_at(xi)?;
                Ok(ProfileSample { xi, rho, u, p: gas.pressure(rho)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WaveProfile { wave_kind: self.wave_kind(), samples })
    }
}

/// `n >= 2` evenly spaced points from `xi_min < 0` to exactly `0`.
pub fn sample_grid(xi_min: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return domain(format!("need at least 2 samples, got {n}"));
    }
    if !(xi_min.is_finite() && xi_min < 0.0) {
        return domain(format!("profile start must be finite and negative, got {xi_min}"));
    }
    let last = (n - 1) as f64;
    Ok((0..n).map(|k| if k + 1 == n { 0.0 } else { xi_min * (1.0 - k as f64 / last) }).collect())
}

/// Constant-state profile of the concentration limit (the Dirac part lives on `xi = 0`).
pub fn measure_limit_profile(problem: &PistonProblem, samples: usize) -> Result<WaveProfile> {
    let m0 = problem.m0;
    let pressure = -2.0 / (problem.gas.alpha * m0 * m0);
    let xi_min = -1.2 * SQRT_2 * (1.0 + 1.0 / m0);
    let samples = sample_grid(xi_min, samples)?
        .into_iter()
        .map(|xi| ProfileSample { xi, rho: 1.0, u: SQRT_2, p: pressure })
        .collect();
    Ok(WaveProfile { wave_kind: WaveKind::MeasureLimit, samples })
}

/// Comparison of one finite-volume run against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridComparison {
    pub n_cells: usize,
    /// `int |rho_num - rho_exact| dx` over the whole grid.
    pub l1_error: f64,
    /// Same, excluding bands of half-width `band` around each wave edge.
    pub l1_smooth: f64,
    /// `|xi_front - sigma| / |sigma|` for shocks.
    pub shock_position_error: Option<f64>,
    /// Velocity in the cell next to the wall.
    pub wall_velocity: f64,
    pub mass_defect: f64,
    pub floor_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub t_final: f64,
    pub band: f64,
    pub levels: Vec<GridComparison>,
    /// Least-squares order of `l1_smooth` over the ladder.
    pub smooth_order: f64,
    pub total_order: f64,
    pub monotone: bool,
}

/// Half-width (in `xi`) of the band excluded around each wave edge when
/// measuring smooth-region errors: 5% of the speed bound `sqrt 2 (1 + 1/M0)`.
pub fn smooth_band(problem: &PistonProblem) -> f64 {
    0.05 * SQRT_2 * (1.0 + 1.0 / problem.m0)
}

/// Runs the finite-volume solver on each grid of `ladder` and compares with `exact`.
pub fn cross_validate(
    problem: &PistonProblem,
    exact: &ExactSolution,
    ladder: &[usize],
    t_final: f64,
    cfl: f64,
    exec: Execution,
) -> Result<CrossValidation> {
    if ladder.is_empty() {
        return domain("empty grid ladder");
    }
    let band = smooth_band(problem);
    let edges = exact.singular_points();
    let levels = exec
        .map(ladder, |&n| compare_on_grid(problem, exact, n, t_final, cfl, band, &edges))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<usize> = levels.iter().map(|l| l.n_cells).collect();
    let smooth: Vec<f64> = levels.iter().map(|l| l.l1_smooth).collect();
    let total: Vec<f64> = levels.iter().map(|l| l.l1_error).collect();
    let monotone = total.windows(2).all(|w| w[1] < w[0]);
    let (smooth_order, total_order) = if ladder.len() > 1 {
        (fvm::observed_order(&ns, &smooth), fvm::observed_order(&ns, &total))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(CrossValidation { t_final, band, levels, smooth_order, total_order, monotone })
}

fn compare_on_grid(
    problem: &PistonProblem,
    exact: &ExactSolution,
    n: usize,
    t_final: f64,
    cfl: f64,
    band: f64,
    edges: &[f64],
) -> Result<GridComparison> {
    let grid = Grid1D::for_problem(problem, t_final, n)?;
    let run = fvm::run_to(problem, &grid, t_final, cfl)?;
    let rho_exact = |xi: f64| exact.state_at(xi).map(|s| s.0);
    let l1_error = fvm::l1_density_error(&run, rho_exact, |_| true)?;
    let l1_smooth = fvm::l1_density_error(&run, rho_exact, |xi| edges.iter().all(|e| (xi - e).abs() > band))?;
    let shock_position_error = match exact {
        ExactSolution::Shock(s) => {
            let xi = fvm::front_position(&run, 0.5 * (1.0 + s.rho1));
            Some(xi.map_or(f64::INFINITY, |xi| (xi - s.sigma).abs() / s.sigma.abs()))
        }
        _ => None,
    };
    let wall_velocity = run.profile.samples.last().map_or(f64::NAN, |s| s.u);
    Ok(GridComparison {
        n_cells: n,
        l1_error,
        l1_smooth,
        shock_position_error,
        wall_velocity,
        mass_defect: run.mass_defect,
        floor_hits: run.floor_hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn problem(m0: f64, dir: Direction, alpha: f64, theta: f64) -> PistonProblem {
        PistonProblem::new(m0, dir, alpha, theta).unwrap()
    }

    #[test]
    fn dispatch_by_regime() {
        assert!(matches!(solve(&problem(1.0, Direction::Proceeding, 0.5, 0.5)), Ok(ExactSolution::Shock(_))));
        assert!(matches!(solve(&problem(1.0, Direction::Receding, 0.5, 0.5)), Ok(ExactSolution::Rarefaction(_))));
        assert!(matches!(solve(&problem(1.0, Direction::Receding, 0.5, 0.0)), Ok(ExactSolution::GcgRarefaction(_))));
        assert!(matches!(solve(&problem(1.0, Direction::Receding, 1.0, 0.0)), Ok(ExactSolution::ChaplyginContact(_))));
        assert!(matches!(solve(&problem(2.0, Direction::Proceeding, 0.5, 0.0)), Err(Error::ConcentrationRegime { .. })));
    }

    #[test]
    fn profiles_are_valid() {
        for (dir, alpha, theta) in [
            (Direction::Proceeding, 0.5, 0.5),
            (Direction::Receding, 0.5, 0.5),
            (Direction::Receding, 0.5, 0.0),
            (Direction::Receding, 1.0, 0.0),
        ] {
            let p = problem(1.0, dir, alpha, theta);
            let prof = solve(&p).unwrap().profile(&p, 101).unwrap();
            prof.validate(&p.gas).unwrap();
            assert_eq!(prof.samples.len(), 101);
            assert_eq!(prof.samples.last().unwrap().xi, 0.0);
            assert!(prof.samples.last().unwrap().u.abs() < 1e-8);
            let first = prof.samples[0];
            assert_eq!(first.rho, 1.0);
            assert_eq!(first.u, p.initial_velocity());
        }
    }

    #[test]
    fn measure_profile_is_constant() {
        let p = problem(2.0, Direction::Proceeding, 0.5, 0.0);
        let prof = measure_limit_profile(&p, 10).unwrap();
        prof.validate(&p.gas).unwrap();
        assert!(prof.samples.iter().all(|s| s.rho == 1.0 && s.p == -1.0));
    }

    #[test]
    fn sample_grid_ends_at_zero() {
        let g = sample_grid(-3.0, 4).unwrap();
        assert_eq!(g, vec![-3.0, -2.0, -1.0, 0.0]);
        assert!(sample_grid(-3.0, 1).is_err());
        assert!(sample_grid(1.0, 5).is_err());
    }
}
