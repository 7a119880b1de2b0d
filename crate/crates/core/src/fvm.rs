//! First-order finite-volume solver used as an independent check on the
//! exact solutions.
//!
//! Conserved variables `(rho, rho u)` on `x_min < x < 0`, local Lax-Friedrichs
//! (Rusanov) fluxes with signal speed `|u| + c`, a reflecting wall at `x = 0`
//! (density copied, momentum negated) and the undisturbed state held fixed at
//! the far-field boundary.

use std::f64::consts::SQRT_2;

use log::warn;
use serde::Serialize;

use crate::eos::GasParams;
use crate::error::{domain, Error, Result};
use crate::setup::{Direction, PistonProblem, ProfileSample, WaveKind, WaveProfile};

pub const DENSITY_FLOOR: f64 = 1e-12;
pub const GHOST_CELLS: usize = 2;
pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub n_cells: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_min < 0.0) {
            return domain(format!("x_min must be finite and negative, got {x_min}"));
        }
        if n_cells < MIN_CELLS {
            return domain(format!("need at least {MIN_CELLS} cells, got {n_cells}"));
        }
        Ok(Self { x_min, n_cells, dx: -x_min / n_cells as f64 })
    }

    /// Grid wide enough that no wave reaches `x_min` before `t_final`.
    pub fn for_problem(problem: &PistonProblem, t_final: f64, n_cells: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return domain(format!("t_final must be finite and > 0, got {t_final}"));
        }
        Self::new(-domain_extent(problem, t_final), n_cells)
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }
}

/// `2 s t + margin`, with `s = sqrt 2 (1 + 1/M0)` bounding every wave speed
/// (the fan head, and the shock by the Lax inequalities).
pub fn domain_extent(problem: &PistonProblem, t_final: f64) -> f64 {
    let speed = SQRT_2 * (1.0 + 1.0 / problem.m0);
    2.0 * speed * t_final + 0.1 * speed * t_final
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservedState {
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
}

impl ConservedState {
    pub fn total_mass(&self, grid: &Grid1D) -> f64 {
        self.rho.iter().sum::<f64>() * grid.dx
    }

    pub fn total_momentum(&self, grid: &Grid1D) -> f64 {
        self.mom.iter().sum::<f64>() * grid.dx
    }
}

/// Uniform initial state `rho = 1`, `rho u = -v0`.
pub fn init(problem: &PistonProblem, grid: &Grid1D) -> ConservedState {
    let m = problem.initial_velocity();
    ConservedState { rho: vec![1.0; grid.n_cells], mom: vec![m; grid.n_cells] }
}

#[inline]
fn physical_flux(gas: &GasParams, rho: f64, mom: f64) -> (f64, f64) {
    (mom, mom * mom / rho + gas.pressure_unchecked(rho))
}

#[inline]
fn signal_speed(gas: &GasParams, rho: f64, mom: f64) -> f64 {
    (mom / rho).abs() + gas.sound_speed_unchecked(rho)
}

#[inline]
fn rusanov(gas: &GasParams, l: (f64, f64), r: (f64, f64)) -> (f64, f64) {
    let s = signal_speed(gas, l.0, l.1).max(signal_speed(gas, r.0, r.1));
    let fl = physical_flux(gas, l.0, l.1);
    let fr = physical_flux(gas, r.0, r.1);
    (0.5 * (fl.0 + fr.0) - 0.5 * s * (r.0 - l.0), 0.5 * (fl.1 + fr.1) - 0.5 * s * (r.1 - l.1))
}

/// Per-step bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepInfo {
    pub dt: f64,
    /// Mass entering through the far-field boundary during the step.
    pub inflow_mass: f64,
    /// Mass crossing the wall during the step (zero by construction).
    pub wall_mass: f64,
    pub floor_hits: usize,
}

/// Largest stable step `cfl dx / max(|u| + c)`.
pub fn stable_dt(state: &ConservedState, gas: &GasParams, grid: &Grid1D, far_field: (f64, f64), cfl: f64) -> f64 {
    let mut s_max = signal_speed(gas, far_field.0, far_field.1);
    for (&r, &m) in state.rho.iter().zip(&state.mom) {
        s_max = s_max.max(signal_speed(gas, r, m));
    }
    cfl * grid.dx / s_max
}

/// Advances one step of size `dt` (no CFL check; see [`step`]).
pub fn advance(state: &mut ConservedState, gas: &GasParams, grid: &Grid1D, far_field: (f64, f64), dt: f64) -> Result<StepInfo> {
    let n = grid.n_cells;
    let lambda = dt / grid.dx;
    let mut flux = Vec::with_capacity(n + 1);
    flux.push(rusanov(gas, far_field, (state.rho[0], state.mom[0])));
    for i in 0..n - 1 {
        flux.push(rusanov(gas, (state.rho[i], state.mom[i]), (state.rho[i + 1], state.mom[i + 1])));
    }
    let last = (state.rho[n - 1], state.mom[n - 1]);
    flux.push(rusanov(gas, last, (last.0, -last.1)));

    let mut floor_hits = 0;
    for i in 0..n {
        let rho = state.rho[i] - lambda * (flux[i + 1].0 - flux[i].0);
        let mom = state.mom[i] - lambda * (flux[i + 1].1 - flux[i].1);
        if !(rho.is_finite() && mom.is_finite()) {
            return Err(Error::NonFinite("finite-volume update"));
        }
        state.rho[i] = if rho < DENSITY_FLOOR {
            floor_hits += 1;
            DENSITY_FLOOR
        } else {
            rho
        };
        state.mom[i] = mom;
    }
    if floor_hits > 0 {
        warn!("density floor applied in {floor_hits} cells");
    }
    Ok(StepInfo { dt, inflow_mass: dt * flux[0].0, wall_mass: dt * flux[n].0, floor_hits })
}

/// One CFL-limited step.
pub fn step(state: &mut ConservedState, gas: &GasParams, grid: &Grid1D, far_field: (f64, f64), cfl: f64) -> Result<StepInfo> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return domain(format!("cfl must lie in (0, 1], got {cfl}"));
    }
    let dt = stable_dt(state, gas, grid, far_field, cfl);
    advance(state, gas, grid, far_field, dt)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FvmRun {
    pub grid: Grid1D,
    pub t_final: f64,
    pub steps: usize,
    pub floor_hits: usize,
    /// `|M(t) - M(0) - inflow| / M(0)` at the end of the run.
    pub mass_defect: f64,
    /// Largest one-step mass defect relative to the total mass.
    pub max_step_mass_defect: f64,
    /// Time-integrated mass flux through the wall.
    pub wall_mass_flux: f64,
    pub state: ConservedState,
    pub profile: WaveProfile,
}

/// Runs from the uniform initial state to `t_final` (last step clipped) and
/// samples cell centres as `xi = x / t_final`.
pub fn run_to(problem: &PistonProblem, grid: &Grid1D, t_final: f64, cfl: f64) -> Result<FvmRun> {
    if !(t_final.is_finite() && t_final > 0.0) {
        return domain(format!("t_final must be finite and > 0, got {t_final}"));
    }
    if !(cfl > 0.0 && cfl <= 1.0) {
        return domain(format!("cfl must lie in (0, 1], got {cfl}"));
    }
    let gas = problem.gas;
    let far_field = (1.0, problem.initial_velocity());
    let mut state = init(problem, grid);
    let mass0 = state.total_mass(grid);
    let mut inflow = 0.0;
    let mut wall = 0.0;
    let mut t = 0.0;
    let mut steps = 0;
    let mut floor_hits = 0;
    let mut max_step_defect: f64 = 0.0;
    while t < t_final {
        let dt = stable_dt(&state, &gas, grid, far_field, cfl).min(t_final - t);
        let before = state.total_mass(grid);
        let info = advance(&mut state, &gas, grid, far_field, dt)?;
        let after = state.total_mass(grid);
        if info.floor_hits == 0 {
            let defect = (after - before - info.inflow_mass + info.wall_mass).abs() / after;
            max_step_defect = max_step_defect.max(defect);
        }
        inflow += info.inflow_mass;
        wall += info.wall_mass;
        floor_hits += info.floor_hits;
        t += dt;
        steps += 1;
    }
    let mass = state.total_mass(grid);
    let mass_defect = (mass - mass0 - inflow + wall).abs() / mass0;

    let samples = (0..grid.n_cells)
        .map(|i| {
            let rho = state.rho[i];
            ProfileSample { xi: grid.center(i) / t_final, rho, u: state.mom[i] / rho, p: gas.pressure_unchecked(rho) }
        })
        .collect();
    let wave_kind = match problem.direction {
        Direction::Proceeding => WaveKind::Shock,
        Direction::Receding => WaveKind::Rarefaction1,
    };
    Ok(FvmRun {
        grid: *grid,
        t_final,
        steps,
        floor_hits,
        mass_defect,
        max_step_mass_defect: max_step_defect,
        wall_mass_flux: wall,
        state,
        profile: WaveProfile { wave_kind, samples },
    })
}

/// `sum |rho_num - rho_exact(xi)| dx` over cells whose `xi` passes `keep`.
pub fn l1_density_error<E, K>(run: &FvmRun, exact: E, keep: K) -> Result<f64>
where
    E: Fn(f64) -> Result<f64>,
    K: Fn(f64) -> bool,
{
    let mut err = 0.0;
    for s in &run.profile.samples {
        if keep(s.xi) {
            err += (s.rho - exact(s.xi)?).abs();
        }
    }
    Ok(err * run.grid.dx)
}

/// `xi` where the density first rises through `level` scanning from the far field.
pub fn front_position(run: &FvmRun, level: f64) -> Option<f64> {
    let s = &run.profile.samples;
    s.windows(2).find(|w| (w[0].rho - level) * (w[1].rho - level) <= 0.0 && w[0].rho != w[1].rho).map(|w| {
        let f = (level - w[0].rho) / (w[1].rho - w[0].rho);
        w[0].xi + f * (w[1].xi - w[0].xi)
    })
}

/// Least-squares slope of `-log(err)` against `log(n)`.
pub fn observed_order(ns: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| -e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shock::solve_shock;
    use proptest::prelude::*;

    #[test]
    fn init_examples() {
        let p = PistonProblem::new(1.0, Direction::Proceeding, 0.5, 0.5).unwrap();
        let g = Grid1D::new(-3.0, 300).unwrap();
        let s = init(&p, &g);
        assert!(s.rho.iter().all(|&r| r == 1.0) && s.mom.iter().all(|&m| m == SQRT_2));
        assert!((s.total_mass(&g) - 3.0).abs() < 1e-12);
        let q = PistonProblem::new(1.0, Direction::Receding, 0.5, 0.5).unwrap();
        assert!(init(&q, &g).mom.iter().all(|&m| m == -SQRT_2));
    }

    #[test]
    fn grid_checks() {
        assert!(Grid1D::new(1.0, 100).is_err());
        assert!(Grid1D::new(-1.0, 8).is_err());
        let g = Grid1D::new(-2.0, 100).unwrap();
        assert_eq!(g.dx, 0.02);
        assert!(g.center(0) > g.x_min && g.center(99) < 0.0);
    }

    #[test]
    fn resting_state_is_preserved() {
        let gas = GasParams::new(1.0, 2.0, 0.5).unwrap();
        let g = Grid1D::new(-1.0, 64).unwrap();
        let mut s = ConservedState { rho: vec![1.3; 64], mom: vec![0.0; 64] };
        let before = s.clone();
        for _ in 0..50 {
            step(&mut s, &gas, &g, (1.3, 0.0), 0.9).unwrap();
        }
        assert_eq!(s, before);
    }

    #[test]
    fn wall_flux_vanishes_and_mass_balances() {
        let p = PistonProblem::new(1.0, Direction::Proceeding, 0.5, 0.5).unwrap();
        let g = Grid1D::for_problem(&p, 0.5, 400).unwrap();
        let run = run_to(&p, &g, 0.5, 0.9).unwrap();
        assert_eq!(run.wall_mass_flux, 0.0);
        assert!(run.mass_defect < 1e-12, "{}", run.mass_defect);
        assert!(run.max_step_mass_defect < 1e-12);
        assert_eq!(run.floor_hits, 0);
    }

    #[test]
    fn shock_position_close_to_exact() {
        let p = PistonProblem::new(1.0, Direction::Proceeding, 0.5, 0.5).unwrap();
        let exact = solve_shock(&p).unwrap();
        let g = Grid1D::for_problem(&p, 0.5, 2000).unwrap();
        let run = run_to(&p, &g, 0.5, 0.9).unwrap();
        let xi = front_position(&run, 0.5 * (1.0 + exact.rho1)).unwrap();
        assert!((xi - exact.sigma).abs() < 0.02 * exact.sigma.abs());
    }

    #[test]
    fn receding_wall_velocity_small() {
        let p = PistonProblem::new(1.0, Direction::Receding, 0.5, 0.5).unwrap();
        let g = Grid1D::for_problem(&p, 0.5, 2000).unwrap();
        let run = run_to(&p, &g, 0.5, 0.9).unwrap();
        let last = run.profile.samples.last().unwrap();
        assert!(last.u.abs() < 1e-2, "{}", last.u);
    }

    #[test]
    fn rejects_bad_cfl() {
        let p = PistonProblem::new(1.0, Direction::Receding, 0.5, 0.5).unwrap();
        let g = Grid1D::for_problem(&p, 0.5, 100).unwrap();
        assert!(run_to(&p, &g, 0.5, 0.0).is_err());
        assert!(run_to(&p, &g, 0.5, 1.5).is_err());
        assert!(run_to(&p, &g, -1.0, 0.5).is_err());
    }

    #[test]
    fn order_fit() {
        let ns = [100, 200, 400];
        let e = [1.0, 0.5, 0.25];
        assert!((observed_order(&ns, &e) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn runs_conserve_and_stay_positive(
            m0 in 0.1f64..10.0,
            alpha in 0.05f64..0.95,
            theta in 0.01f64..0.99,
            proceeding in any::<bool>(),
        ) {
            let dir = if proceeding { Direction::Proceeding } else { Direction::Receding };
            let p = PistonProblem::new(m0, dir, alpha, theta).unwrap();
            let grid = Grid1D::for_problem(&p, 0.5, 200).unwrap();
            let run = run_to(&p, &grid, 0.5, 0.9).unwrap();
            prop_assert!(run.max_step_mass_defect < 1e-12);
            prop_assert_eq!(run.wall_mass_flux, 0.0);
            prop_assert!(run.state.rho.iter().all(|&r| r.is_finite() && r > DENSITY_FLOOR));
            prop_assert!(run.state.mom.iter().all(|m| m.is_finite()));
        }
    }
}
