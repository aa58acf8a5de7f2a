//! Lagrangian trajectory grids with the shift-time commensurability scheme.
//!
//! For each surface a single classical trajectory x(t) is integrated from the
//! left edge of the window; the grid is the set of trajectory samples spaced
//! one shift time apart. Right-moving grid points sit at x(k t_shift + s) and
//! left-moving points at x(k t_shift - s), where the phase s in [0, t_shift]
//! measures progress through the current shift. The two grids of a surface
//! therefore coincide exactly whenever 2s is a multiple of t_shift, and all
//! surfaces share one t_shift so this happens simultaneously everywhere.
//!
//! Trajectory positions are computed from travel-time quadrature inverted
//! with Newton's method, not by ODE stepping, so grid geometry carries
//! quadrature-level accuracy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{Curve, ScatteringProblem};
use crate::quad;

/// Direction tag for a component's grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn signum(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn label(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

const TIME_QUAD_TOL: f64 = 1e-13;

/// The classical trajectory map of one surface: velocity field, travel times,
/// and the time-advance map x -> x(t + dt).
#[derive(Debug, Clone)]
pub struct Trajectory {
    surface: usize,
    energy: f64,
    mass: f64,
    hbar: f64,
    v_eff: Curve,
}

impl Trajectory {
    pub fn new(problem: &ScatteringProblem, surface: usize) -> Result<Self> {
        let v_eff = problem.model.v_eff(surface).clone();
        // the grid strays up to one spacing beyond the window, so check the
        // asymptotes as well as a dense sample of the window itself
        for &asym in [v_eff.left_asymptote(), v_eff.right_asymptote()].iter() {
            if problem.energy - asym <= 0.0 {
                return Err(Error::ClosedChannel {
                    surface: surface + 1,
                    energy: problem.energy,
                    asymptote: asym,
                });
            }
        }
        let samples = 2001;
        for k in 0..samples {
            let x = problem.x_left
                + (problem.x_right - problem.x_left) * k as f64 / (samples - 1) as f64;
            let gap = problem.energy - v_eff.value(x);
            if gap <= 0.0 {
                return Err(Error::TurningPoint {
                    surface: surface + 1,
                    x,
                    margin: gap,
                });
            }
        }
        Ok(Self {
            surface,
            energy: problem.energy,
            mass: problem.mass,
            hbar: problem.hbar,
            v_eff,
        })
    }

    pub fn surface(&self) -> usize {
        self.surface
    }

    /// Trajectory speed at x. Positive by the construction-time check.
    pub fn speed(&self, x: f64) -> f64 {
        let gap = self.energy - self.v_eff.value(x);
        debug_assert!(gap > 0.0, "turning point escaped validation at x = {x}");
        (2.0 * gap.max(f64::MIN_POSITIVE) / self.mass).sqrt()
    }

    /// Time for a trajectory to travel from a to b (signed).
    pub fn travel_time(&self, a: f64, b: f64) -> f64 {
        quad::integrate(|x| 1.0 / self.speed(x), a, b, TIME_QUAD_TOL)
    }

    /// WKB phase (m / hbar) * integral of v from a to b.
    pub fn wkb_action(&self, a: f64, b: f64) -> f64 {
        self.mass / self.hbar * quad::integrate(|x| self.speed(x), a, b, TIME_QUAD_TOL)
    }

    /// Position reached after time dt starting from x (dt of either sign),
    /// by Newton inversion of the travel-time integral.
    pub fn advance(&self, x: f64, dt: f64) -> f64 {
        if dt == 0.0 {
            return x;
        }
        let mut y = x + self.speed(x) * dt;
        for _ in 0..30 {
            let residual = self.travel_time(x, y) - dt;
            let dy = -residual * self.speed(y);
            y += dy;
            if dy.abs() <= 1e-14 * (1.0 + y.abs()) {
                break;
            }
        }
        y
    }
}

/// One surface's grid: the phase-0 base points plus the trajectory map that
/// slides them.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub surface: usize,
    pub t_shift: f64,
    /// Positions at phase 0, strictly increasing, base[0] = x_L.
    pub base: Vec<f64>,
    traj: Trajectory,
}

impl SurfaceGrid {
    fn build(problem: &ScatteringProblem, surface: usize, t_shift: f64) -> Result<Self> {
        let traj = Trajectory::new(problem, surface)?;
        let total = traj.travel_time(problem.x_left, problem.x_right);
        // every sample k * t_shift up to the traversal time, with a little
        // slack so a commensurate endpoint is kept
        let n = (total / t_shift + 1e-9).floor() as usize + 1;
        if n < 4 {
            return Err(Error::TooFewPoints(n));
        }
        let mut base = Vec::with_capacity(n);
        base.push(problem.x_left);
        for k in 1..n {
            let prev = base[k - 1];
            base.push(traj.advance(prev, t_shift));
        }
        Ok(Self {
            surface,
            t_shift,
            base,
            traj,
        })
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn traj(&self) -> &Trajectory {
        &self.traj
    }

    /// Grid positions of the `sign` component at phase s through the shift.
    pub fn positions(&self, sign: Sign, s: f64) -> Vec<f64> {
        if s == 0.0 {
            return self.base.clone();
        }
        let dt = sign.signum() * s;
        self.base.iter().map(|&b| self.traj.advance(b, dt)).collect()
    }

    /// Speeds at the given positions.
    pub fn speeds(&self, positions: &[f64]) -> Vec<f64> {
        positions.iter().map(|&x| self.traj.speed(x)).collect()
    }
}

/// The family of per-surface grids sharing a single shift time, derived from
/// the requested point count on the incident surface.
#[derive(Debug)]
pub struct SurfaceGrids {
    pub t_shift: f64,
    pub grids: Vec<SurfaceGrid>,
}

impl SurfaceGrids {
    /// Build all surface grids. `n_incident` fixes the incident-surface point
    /// count; t_shift = T_1 / (n_incident - 1) where T_1 is the incident
    /// surface's traversal time of the window.
    pub fn build(problem: &ScatteringProblem, n_incident: usize) -> Result<Self> {
        if n_incident < 4 {
            return Err(Error::TooFewPoints(n_incident));
        }
        if !(problem.x_left < problem.x_right) {
            return Err(Error::Config(format!(
                "window [{}, {}] is empty",
                problem.x_left, problem.x_right
            )));
        }
        let incident = Trajectory::new(problem, 0)?;
        let total = incident.travel_time(problem.x_left, problem.x_right);
        let t_shift = total / (n_incident - 1) as f64;
        let grids = (0..problem.model.surfaces())
            .map(|i| SurfaceGrid::build(problem, i, t_shift))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { t_shift, grids })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Benchmark;
    use crate::units::cm_to_hartree;

    fn pure_coupling_problem() -> ScatteringProblem {
        ScatteringProblem::new(
            Benchmark::PureCoupling.model(),
            cm_to_hartree(100.0),
            -3.0,
            3.0,
        )
    }

    #[test]
    fn uniform_velocity_gives_uniform_grid() {
        let p = pure_coupling_problem();
        let grids = SurfaceGrids::build(&p, 61).unwrap();
        let g = &grids.grids[0];
        assert_eq!(g.n(), 61);
        for (k, w) in g.base.windows(2).enumerate() {
            assert!(
                (w[1] - w[0] - 0.1).abs() < 1e-10,
                "spacing off at {k}: {}",
                w[1] - w[0]
            );
        }
        assert!((g.base[60] - 3.0).abs() < 1e-9);
        let v = 6.750_063_150_01e-4;
        assert!((grids.t_shift - 0.1 / v).abs() < 1e-6);
    }

    #[test]
    fn eckart_a_shift_time_matches_published_step() {
        let p = ScatteringProblem::new(Benchmark::EckartA.model(), 0.001823, -2.0, 2.0);
        let grids = SurfaceGrids::build(&p, 20).unwrap();
        // the published fixed step equals one shift for this run
        assert!(
            (grids.t_shift - 155.924).abs() < 5e-3,
            "t_shift = {}",
            grids.t_shift
        );
    }

    #[test]
    fn neighbor_travel_times_equal_t_shift() {
        let p = ScatteringProblem::new(Benchmark::Tully1.model(), 0.11, -3.0, 3.0);
        let grids = SurfaceGrids::build(&p, 50).unwrap();
        for g in &grids.grids {
            for w in g.base.windows(2) {
                let tt = g.traj().travel_time(w[0], w[1]);
                assert!(
                    (tt / grids.t_shift - 1.0).abs() < 1e-10,
                    "travel time {} vs t_shift {}",
                    tt,
                    grids.t_shift
                );
            }
        }
    }

    #[test]
    fn grids_are_denser_where_velocity_is_smaller() {
        let p = ScatteringProblem::new(Benchmark::Tully1.model(), 0.11, -3.0, 3.0);
        let grids = SurfaceGrids::build(&p, 50).unwrap();
        let g = &grids.grids[0];
        // surface 1 climbs uphill to the right, so spacing shrinks
        let first = g.base[1] - g.base[0];
        let last = g.base[g.n() - 1] - g.base[g.n() - 2];
        let expected = (0.10f64 / 0.12).sqrt();
        assert!(
            (last / first - expected).abs() < 1e-3,
            "ratio {} vs {}",
            last / first,
            expected
        );
    }

    #[test]
    fn shift_relabels_onto_base() {
        let p = ScatteringProblem::new(Benchmark::Tully1.model(), 0.11, -3.0, 3.0);
        let grids = SurfaceGrids::build(&p, 50).unwrap();
        for g in &grids.grids {
            let n = g.n();
            let plus = g.positions(Sign::Plus, grids.t_shift);
            for j in 0..n - 1 {
                assert!(
                    (plus[j] - g.base[j + 1]).abs() < 1e-10,
                    "plus point {j} off by {}",
                    plus[j] - g.base[j + 1]
                );
            }
            let minus = g.positions(Sign::Minus, grids.t_shift);
            for j in 1..n {
                assert!((minus[j] - g.base[j - 1]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn half_shift_coincidence() {
        let p = ScatteringProblem::new(Benchmark::Tully2.model(), (-2.0f64).exp(), -8.0, 8.0);
        let grids = SurfaceGrids::build(&p, 40).unwrap();
        for g in &grids.grids {
            let s = 0.5 * grids.t_shift;
            let plus = g.positions(Sign::Plus, s);
            let minus = g.positions(Sign::Minus, s);
            for j in 0..g.n() - 1 {
                assert!(
                    (plus[j] - minus[j + 1]).abs() < 1e-10,
                    "surface {} point {j}: {} vs {}",
                    g.surface,
                    plus[j],
                    minus[j + 1]
                );
            }
        }
    }

    #[test]
    fn auxiliary_surface_count_from_shared_shift() {
        let p = ScatteringProblem::new(Benchmark::Tully1.model(), 0.11, -3.0, 3.0);
        let grids = SurfaceGrids::build(&p, 50).unwrap();
        let t2 = grids.grids[1].traj().travel_time(-3.0, 3.0);
        let expected = (t2 / grids.t_shift + 1e-9).floor() as usize + 1;
        assert_eq!(grids.grids[1].n(), expected);
        // the second surface is the mirror image of the first, so the
        // traversal times agree and both carry the same number of points
        assert_eq!(grids.grids[1].n(), 50);
        let last = *grids.grids[1].base.last().unwrap();
        assert!(last <= 3.0 + 1e-9);
        assert!(last > 3.0 - (grids.grids[1].base[1] - grids.grids[1].base[0]) * 1.5);

        // asymmetric pair: the well on surface 2 changes its traversal time,
        // so its count comes out different from the incident surface's
        let p = ScatteringProblem::new(Benchmark::Tully2.model(), (-2.0f64).exp(), -8.0, 8.0);
        let grids = SurfaceGrids::build(&p, 200).unwrap();
        let t2 = grids.grids[1].traj().travel_time(-8.0, 8.0);
        let expected = (t2 / grids.t_shift + 1e-9).floor() as usize + 1;
        assert_eq!(grids.grids[1].n(), expected);
        assert_ne!(grids.grids[1].n(), 200);
    }

    #[test]
    fn advance_is_invertible() {
        let p = ScatteringProblem::new(Benchmark::EckartB.model(), 0.0044, -3.5, 4.0);
        let traj = Trajectory::new(&p, 0).unwrap();
        for k in 0..20 {
            let x = -3.0 + 0.35 * k as f64;
            let y = traj.advance(x, 37.5);
            let back = traj.advance(y, -37.5);
            assert!((back - x).abs() < 1e-11, "round trip {x} -> {y} -> {back}");
        }
    }

    #[test]
    fn turning_point_rejected() {
        let p = ScatteringProblem::new(Benchmark::Tully1.model(), 0.005, -3.0, 3.0);
        assert!(matches!(
            SurfaceGrids::build(&p, 50),
            Err(Error::TurningPoint { surface: 1, .. }) | Err(Error::ClosedChannel { surface: 1, .. })
        ));
    }
}
