//! Point-robot integration under a planner's force field.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{cf_force, pf_force, SphereCloud, SpherizationParams};
use crate::field::{geopf_force, CollisionSignal, Gains, ObstacleId};
use crate::geom::Vec3;
use crate::world::World;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimParams {
    pub mass: f64,
    pub dt: f64,
    pub damping: f64,
    pub max_speed: f64,
    pub goal_radius: f64,
    pub max_steps: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            mass: 1.0,
            dt: 0.002,
            damping: 4.0,
            max_speed: 0.5,
            goal_radius: 0.02,
            max_steps: 20_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid simulation parameter `{name}`: {reason}")]
pub struct InvalidSimParams {
    pub name: &'static str,
    pub reason: String,
}

impl SimParams {
    pub fn validate(&self) -> Result<(), InvalidSimParams> {
        let bad = |name, reason: &str| {
            Err(InvalidSimParams {
                name,
                reason: reason.to_string(),
            })
        };
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.mass) {
            return bad("mass", "must be > 0");
        }
        if !pos(self.dt) {
            return bad("dt", "must be > 0");
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return bad("damping", "must be >= 0");
        }
        if !(self.max_speed > 0.0) {
            return bad("max_speed", "must be > 0");
        }
        if !pos(self.goal_radius) {
            return bad("goal_radius", "must be > 0");
        }
        if self.max_steps < 1 {
            return bad("max_steps", "must be >= 1");
        }
        Ok(())
    }
}

/// One explicit step: `a = F/m - damping v`, speed-clamped velocity update,
/// and a position update from the pre-clamp acceleration and the previous
/// velocity.
#[inline]
pub fn integrate(p: &Vec3, v: &Vec3, force: &Vec3, params: &SimParams) -> (Vec3, Vec3) {
    let dt = params.dt;
    let a = force / params.mass - params.damping * v;
    let mut v1 = v + dt * a;
    let speed = v1.norm();
    if speed > params.max_speed {
        v1 *= params.max_speed / speed;
    }
    (p + 0.5 * dt * dt * a + dt * v, v1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "planner", rename_all = "lowercase")]
pub enum Planner {
    /// Closed-form primitive fields.
    Geopf { correction: bool },
    /// Radial fields over a sphere cloud.
    Pf(SpherizationParams),
    /// Circulatory fields over a sphere cloud.
    Cf(SpherizationParams),
}

impl Planner {
    pub const GEOPF: Planner = Planner::Geopf { correction: true };

    pub fn id(&self) -> &'static str {
        match self {
            Planner::Geopf { .. } => "geopf",
            Planner::Pf(_) => "pf",
            Planner::Cf(_) => "cf",
        }
    }

    pub fn spherization(&self) -> Option<SpherizationParams> {
        match self {
            Planner::Geopf { .. } => None,
            Planner::Pf(s) | Planner::Cf(s) => Some(*s),
        }
    }
}

impl fmt::Display for Planner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Planner::Geopf { correction: true } => write!(f, "geopf"),
            Planner::Geopf { correction: false } => write!(f, "geopf(no-correction)"),
            Planner::Pf(s) | Planner::Cf(s) => write!(f, "{}({}, {})", self.id(), s.radius, s.k_rep),
        }
    }
}

/// Planner with per-trial state (sphere clouds follow drifting obstacles).
enum Active {
    Geopf { correction: bool },
    Pf { cloud: SphereCloud, k: f64 },
    Cf { cloud: SphereCloud, k: f64 },
}

impl Active {
    fn new(planner: &Planner, world: &World) -> Self {
        match *planner {
            Planner::Geopf { correction } => Active::Geopf { correction },
            Planner::Pf(s) => Active::Pf {
                cloud: SphereCloud::from_world(world, s.radius),
                k: s.k_rep,
            },
            Planner::Cf(s) => Active::Cf {
                cloud: SphereCloud::from_world(world, s.radius),
                k: s.k_rep,
            },
        }
    }

    fn follow(&mut self, world: &World, dt: f64) {
        if let Active::Pf { cloud, .. } | Active::Cf { cloud, .. } = self {
            cloud.follow(world, dt);
        }
    }

    #[inline]
    fn force(
        &self,
        p: &Vec3,
        v: &Vec3,
        goal: &Vec3,
        world: &World,
        gains: &Gains,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec3, CollisionSignal> {
        match self {
            Active::Geopf { correction } => geopf_force(p, goal, world, gains, *correction, rng),
            Active::Pf { cloud, k } => pf_force(p, goal, cloud, *k, &world.boundary, gains),
            Active::Cf { cloud, k } => cf_force(p, v, goal, cloud, *k, &world.boundary, gains),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub step: usize,
    pub position: Vec3,
    pub velocity: Vec3,
    /// Resultant applied during the step that produced this state.
    pub force: Vec3,
    /// Smallest true distance to any obstacle, walls excluded.
    pub min_dist: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ReachedGoal,
    Collision { obstacle: ObstacleId, step: usize },
    Timeout,
}

impl Verdict {
    pub fn is_success(&self) -> bool {
        matches!(self, Verdict::ReachedGoal)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ReachedGoal => write!(f, "reached goal"),
            Verdict::Collision { obstacle, step } => write!(f, "collision with {obstacle} at step {step}"),
            Verdict::Timeout => write!(f, "timeout"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub states: Vec<State>,
    pub verdict: Verdict,
    /// Wall time of each step (drift, force evaluation, integration), ns.
    /// Not part of the deterministic output.
    pub step_ns: Vec<u64>,
}

impl TrajectoryRecord {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("states are never empty")
    }

    /// Same trajectory and verdict, ignoring timing.
    pub fn same_outcome(&self, other: &TrajectoryRecord) -> bool {
        self.verdict == other.verdict && self.states == other.states
    }

    /// Writes `step,px,py,pz,vx,vy,vz,fx,fy,fz,min_dist` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "px", "py", "pz", "vx", "vy", "vz", "fx", "fy", "fz", "min_dist"])?;
        for s in &self.states {
            let mut row = vec![s.step.to_string()];
            for v in [&s.position, &s.velocity, &s.force] {
                row.extend(v.iter().map(|x| sig9(*x)));
            }
            row.push(sig9(s.min_dist));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Nine significant digits, exponent form only for very large or small
/// magnitudes.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Everything a trial needs besides the planner.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub world: World,
    pub start: Vec3,
    pub goal: Vec3,
    pub gains: Gains,
    pub sim: SimParams,
    pub seed: u64,
}

/// RNG stream used by the planners during a trial.
pub const TRIAL_STREAM: u64 = 1;

pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(TRIAL_STREAM);
    rng
}

/// Integrates until the goal, a collision, or the step budget.
///
/// State `k` is the robot after `k` steps, observed against the world after
/// `k` drift updates. The planner's own contact detection (sphere-model
/// penetration for the baselines) also ends a trial as a collision.
pub fn simulate(setup: &TrialSetup, planner: &Planner) -> TrajectoryRecord {
    let TrialSetup {
        start,
        goal,
        gains,
        sim,
        seed,
        ..
    } = *setup;
    let mut world = setup.world.clone();
    let dynamic = world.is_dynamic();
    let mut rng = trial_rng(seed);
    let mut active = Active::new(planner, &world);

    let mut states = Vec::with_capacity(sim.max_steps.min(1 << 16) + 1);
    let mut step_ns = Vec::with_capacity(sim.max_steps.min(1 << 16));
    states.push(State {
        step: 0,
        position: start,
        velocity: Vec3::zeros(),
        force: Vec3::zeros(),
        min_dist: world.min_distance(&start),
    });
    let (mut p, mut v) = (start, Vec3::zeros());
    let mut verdict = Verdict::Timeout;

    if (p - goal).norm() <= sim.goal_radius {
        verdict = Verdict::ReachedGoal;
    }
    let mut i = 0;
    while verdict == Verdict::Timeout && i < sim.max_steps {
        let t0 = Instant::now();
        if dynamic {
            world.advance(sim.dt);
            active.follow(&world, sim.dt);
        }
        let force = match active.force(&p, &v, &goal, &world, &gains, &mut rng) {
            Ok(f) => f,
            Err(sig) => {
                states.push(State {
                    step: i + 1,
                    position: p,
                    velocity: v,
                    force: Vec3::zeros(),
                    min_dist: world.min_distance(&p),
                });
                verdict = Verdict::Collision {
                    obstacle: sig.obstacle,
                    step: i + 1,
                };
                break;
            }
        };
        let (mut p1, v1) = integrate(&p, &v, &force, &sim);
        step_ns.push(t0.elapsed().as_nanos() as u64);

        let contact = world.contact(&p, &p1);
        if let Some((_, hit)) = contact {
            p1 = hit;
        }
        states.push(State {
            step: i + 1,
            position: p1,
            velocity: v1,
            force,
            min_dist: world.min_distance(&p1),
        });
        if let Some((obstacle, _)) = contact {
            verdict = Verdict::Collision { obstacle, step: i + 1 };
        } else if (p1 - goal).norm() <= sim.goal_radius {
            verdict = Verdict::ReachedGoal;
        }
        p = p1;
        v = v1;
        i += 1;
    }
    TrajectoryRecord {
        states,
        verdict,
        step_ns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Shape, Sphere};
    use crate::world::WorldObstacle;

    fn params(dt: f64, damping: f64) -> SimParams {
        SimParams {
            dt,
            damping,
            max_speed: f64::INFINITY,
            ..SimParams::default()
        }
    }

    #[test]
    fn integrator_examples() {
        let (p, v) = integrate(&Vec3::zeros(), &Vec3::zeros(), &Vec3::x(), &params(0.1, 0.0));
        assert!((p - Vec3::new(0.005, 0.0, 0.0)).norm() < 1e-15);
        assert!((v - Vec3::new(0.1, 0.0, 0.0)).norm() < 1e-15);
        let (p, _) = integrate(&Vec3::zeros(), &Vec3::x(), &Vec3::zeros(), &params(0.1, 0.0));
        assert!((p - Vec3::new(0.1, 0.0, 0.0)).norm() < 1e-15);
        let (_, v) = integrate(&Vec3::zeros(), &Vec3::x(), &Vec3::zeros(), &params(0.01, 5.0));
        assert!((v - Vec3::new(0.95, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn speed_is_clamped() {
        let sim = SimParams::default();
        let (_, v) = integrate(&Vec3::zeros(), &Vec3::x(), &(Vec3::x() * 1e6), &sim);
        assert!((v.norm() - sim.max_speed).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(SimParams::default().validate().is_ok());
        let bad = SimParams {
            dt: 0.0,
            ..SimParams::default()
        };
        assert_eq!(bad.validate().unwrap_err().name, "dt");
    }

    fn setup(world: World) -> TrialSetup {
        TrialSetup {
            world,
            start: Vec3::new(0.0, 1.0, 0.0),
            goal: Vec3::new(0.0, -1.0, 0.0),
            gains: Gains::default(),
            sim: SimParams::default(),
            seed: 3,
        }
    }

    #[test]
    fn empty_world_reaches_goal() {
        let rec = simulate(&setup(World::new(vec![], vec![])), &Planner::GEOPF);
        assert_eq!(rec.verdict, Verdict::ReachedGoal);
        assert_eq!(rec.step_ns.len(), rec.steps());
        for (k, s) in rec.states.iter().enumerate() {
            assert_eq!(s.step, k);
        }
    }

    #[test]
    fn sphere_on_the_path_is_avoided_or_hit_never_passed() {
        let s = Shape::Sphere(Sphere::new(Vec3::zeros(), 0.1).unwrap());
        let w = World::new(vec![WorldObstacle::new(s, 0.1, Vec3::zeros())], vec![]);
        let rec = simulate(&setup(w), &Planner::GEOPF);
        for st in &rec.states[..rec.states.len() - 1] {
            assert!(st.min_dist > 0.0);
        }
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(-0.123456789123), "-0.123456789");
        assert_eq!(sig9(1234.5), "1234.5");
        assert_eq!(sig9(f64::INFINITY), "inf");
        assert_eq!(sig9(1.5e-7), "1.50000000e-7");
    }
}
