//! Scene descriptions, the randomized benchmark generators, the fixed maze
//! and trap scenes, and the JSON scene file format.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::Gains;
use crate::geom::{BoundingSphere, Cuboid, Cylinder, RectPlane, Segment, Shape, Sphere, Vec3};
use crate::sim::{SimParams, TrialSetup};
use crate::world::{Aabb, World, WorldObstacle};

/// Minimum free distance around start and goal.
pub const CLEARANCE: f64 = 0.05;
/// Rejected placements tolerated before a class is declared overconstrained.
pub const MAX_ATTEMPTS: usize = 10_000;

pub const START: Vec3 = Vec3::new(0.0, 1.0, 0.0);
pub const GOAL: Vec3 = Vec3::new(0.0, -1.0, 0.0);
pub const LONG_GOAL: Vec3 = Vec3::new(0.0, -2.0, 0.0);

/// Half-width of the corridor in x and z.
pub const CORRIDOR_HALF_WIDTH: f64 = 0.5;
/// Obstacle centers lie within this of the corridor midpoint along y.
pub const OBSTACLE_SPAN: f64 = 0.6;
/// Extra corridor length behind start and goal.
pub const CORRIDOR_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneClass {
    Empty,
    LineEasy,
    LineHard,
    PlaneEasy,
    PlaneEasyLonger,
    PlaneHard,
    PlaneHardLonger,
    Maze,
    Complex,
    DynamicEasy,
    DynamicHard,
}

impl SceneClass {
    pub const ALL: [SceneClass; 11] = [
        SceneClass::Empty,
        SceneClass::LineEasy,
        SceneClass::LineHard,
        SceneClass::PlaneEasy,
        SceneClass::PlaneEasyLonger,
        SceneClass::PlaneHard,
        SceneClass::PlaneHardLonger,
        SceneClass::Maze,
        SceneClass::Complex,
        SceneClass::DynamicEasy,
        SceneClass::DynamicHard,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SceneClass::Empty => "empty",
            SceneClass::LineEasy => "line-easy",
            SceneClass::LineHard => "line-hard",
            SceneClass::PlaneEasy => "plane-easy",
            SceneClass::PlaneEasyLonger => "plane-easy-longer",
            SceneClass::PlaneHard => "plane-hard",
            SceneClass::PlaneHardLonger => "plane-hard-longer",
            SceneClass::Maze => "maze",
            SceneClass::Complex => "complex",
            SceneClass::DynamicEasy => "dynamic-easy",
            SceneClass::DynamicHard => "dynamic-hard",
        }
    }

    /// Expected obstacle count of the generator.
    pub fn mean_obstacles(&self) -> f64 {
        let m = |lo: usize, hi: usize| (lo + hi) as f64 / 2.0;
        match self {
            SceneClass::Empty => 0.0,
            SceneClass::LineEasy => m(5, 10),
            SceneClass::LineHard => m(10, 50),
            SceneClass::PlaneEasy | SceneClass::PlaneEasyLonger => m(2, 8),
            SceneClass::PlaneHard | SceneClass::PlaneHardLonger => m(10, 40),
            SceneClass::Maze => maze_scene().primitives.len() as f64,
            SceneClass::Complex => m(5, 10) + m(2, 5) + m(2, 3),
            SceneClass::DynamicEasy => m(3, 5) + m(1, 3) + m(1, 2),
            SceneClass::DynamicHard => m(7, 10) + m(3, 5) + m(2, 3),
        }
    }

    fn stream(&self) -> u64 {
        SceneClass::ALL.iter().position(|c| c == self).unwrap() as u64 + 100
    }
}

impl fmt::Display for SceneClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown scene class `{0}` (expected one of: {names})", names = SceneClass::ALL.map(|c| c.name()).join(", "))]
pub struct UnknownClass(pub String);

impl FromStr for SceneClass {
    type Err = UnknownClass;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        SceneClass::ALL
            .into_iter()
            .find(|c| c.name() == norm)
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

/// One obstacle entry of a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Primitive {
    pub shape: Shape,
    /// Repulsive gain; the scene's `gains.k_rep` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    /// Constant drift velocity, m/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec3>,
}

impl Primitive {
    pub fn fixed(shape: Shape) -> Self {
        Primitive {
            shape,
            gain: None,
            drift: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<SceneClass>,
    #[serde(default)]
    pub seed: u64,
    pub start: Vec3,
    pub goal: Vec3,
    #[serde(default)]
    pub gains: Gains,
    #[serde(default)]
    pub sim: SimParams,
    #[serde(default)]
    pub boundary: Vec<RectPlane>,
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene file syntax/schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("scene file I/O")]
    Io(#[from] std::io::Error),
}

impl SceneError {
    pub fn is_schema(&self) -> bool {
        matches!(self, SceneError::Schema { .. } | SceneError::Invalid(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("generation of {class} scene (seed {seed}) failed after {attempts} rejected placements")]
pub struct GenerationFailure {
    pub class: SceneClass,
    pub seed: u64,
    pub attempts: usize,
}

impl Scene {
    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Invalid(m));
        self.gains.validate().map_err(|e| SceneError::Invalid(e.to_string()))?;
        self.sim.validate().map_err(|e| SceneError::Invalid(e.to_string()))?;
        if !(self.start.iter().chain(self.goal.iter()).all(|x| x.is_finite())) {
            return bad("start and goal must be finite".into());
        }
        for (i, p) in self.primitives.iter().enumerate() {
            if let Some(g) = p.gain {
                if !(g > 0.0 && g.is_finite()) {
                    return bad(format!("primitives[{i}].gain must be > 0, got {g}"));
                }
            }
            if let Some(d) = p.drift {
                if !d.iter().all(|x| x.is_finite()) {
                    return bad(format!("primitives[{i}].drift must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn world(&self) -> World {
        let obstacles = self
            .primitives
            .iter()
            .map(|p| {
                WorldObstacle::new(
                    p.shape.clone(),
                    p.gain.unwrap_or(self.gains.k_rep),
                    p.drift.unwrap_or_else(Vec3::zeros),
                )
            })
            .collect();
        World::new(obstacles, self.boundary.clone())
    }

    pub fn setup(&self) -> TrialSetup {
        TrialSetup {
            world: self.world(),
            start: self.start,
            goal: self.goal,
            gains: self.gains,
            sim: self.sim,
            seed: self.seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenes always serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Scene, SceneError> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| SceneError::Schema {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Scene, SceneError> {
        Scene::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), SceneError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Corridor box around start and goal, walls facing inward.
pub fn corridor(start: &Vec3, goal: &Vec3) -> Aabb {
    let w = CORRIDOR_HALF_WIDTH;
    Aabb {
        min: Vec3::new(-w, start.y.min(goal.y) - CORRIDOR_MARGIN, -w),
        max: Vec3::new(w, start.y.max(goal.y) + CORRIDOR_MARGIN, w),
    }
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

/// Random orthonormal frame.
fn frame(rng: &mut ChaCha8Rng) -> [Vec3; 3] {
    let u = unit_vector(rng);
    let helper = if u.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let a = u.cross(&helper).normalize();
    let b = u.cross(&a);
    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let v = a * t.cos() + b * t.sin();
    [u, v, u.cross(&v)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Segment,
    Plane,
    Cube,
    Cylinder,
    Sphere,
}

fn sample_shape(kind: Kind, rng: &mut ChaCha8Rng) -> Shape {
    let [u, v, w] = frame(rng);
    let c = Vec3::zeros();
    match kind {
        Kind::Segment => {
            let h = 0.5 * rng.random_range(0.2..=0.4);
            Shape::Segment(Segment::new(c - u * h, c + u * h).expect("positive length"))
        }
        Kind::Plane => {
            let a = 0.5 * rng.random_range(0.1..=0.3);
            let b = 0.5 * rng.random_range(0.1..=0.3);
            Shape::Plane(RectPlane::from_center(c, u * a, v * b).expect("orthogonal frame"))
        }
        Kind::Cube => {
            let s = [0; 3].map(|_| 0.5 * rng.random_range(0.08..=0.2));
            let (a, b, h) = (u * s[0], v * s[1], w * s[2]);
            let o = c - a - b - h;
            let (a, b, h) = (a * 2.0, b * 2.0, h * 2.0);
            Shape::Cube(
                Cuboid::new([o, o + a, o + a + b, o + b, o + h, o + a + h, o + a + b + h, o + b + h])
                    .expect("orthogonal frame"),
            )
        }
        Kind::Cylinder => {
            let r = rng.random_range(0.03..=0.08);
            let h = 0.5 * rng.random_range(0.1..=0.3);
            Shape::Cylinder(Cylinder::new(c - u * h, c + u * h, r).expect("positive size"))
        }
        Kind::Sphere => Shape::Sphere(Sphere::new(c, rng.random_range(0.03..=0.08)).expect("positive radius")),
    }
}

/// Draws one obstacle placed in the transit corridor with its bounding
/// sphere inside `limits`.
fn sample_placed(kind: Kind, limits: &Aabb, rng: &mut ChaCha8Rng) -> Shape {
    let mut shape = sample_shape(kind, rng);
    let BoundingSphere { center, radius } = shape.bounding_sphere();
    let w = CORRIDOR_HALF_WIDTH;
    let mut target = Vec3::new(
        rng.random_range(-w..=w),
        rng.random_range(-OBSTACLE_SPAN..=OBSTACLE_SPAN),
        rng.random_range(-w..=w),
    );
    for a in 0..3 {
        let (lo, hi) = (limits.min[a] + radius, limits.max[a] - radius);
        target[a] = if lo <= hi { target[a].clamp(lo, hi) } else { 0.5 * (limits.min[a] + limits.max[a]) };
    }
    shape.translate(&(target - center));
    shape.rebuilt().expect("translation keeps the shape valid")
}

fn clear_of(shape: &Shape, points: &[Vec3]) -> bool {
    points.iter().all(|p| shape.distance(p) >= CLEARANCE)
}

fn drift_velocity(rng: &mut ChaCha8Rng) -> Vec3 {
    unit_vector(rng) * rng.random_range(0.01..=0.05)
}

/// (kind, count) groups and drift probability of a class.
fn recipe(class: SceneClass, rng: &mut ChaCha8Rng) -> (Vec<(Kind, usize)>, f64) {
    let mut n = |lo: usize, hi: usize| rng.random_range(lo..=hi);
    match class {
        SceneClass::Empty | SceneClass::Maze => (vec![], 0.0),
        SceneClass::LineEasy => (vec![(Kind::Segment, n(5, 10))], 0.0),
        SceneClass::LineHard => (vec![(Kind::Segment, n(10, 50))], 0.0),
        SceneClass::PlaneEasy | SceneClass::PlaneEasyLonger => (vec![(Kind::Plane, n(2, 8))], 0.0),
        SceneClass::PlaneHard | SceneClass::PlaneHardLonger => (vec![(Kind::Plane, n(10, 40))], 0.0),
        SceneClass::Complex => {
            let groups = vec![(Kind::Segment, n(5, 10)), (Kind::Plane, n(2, 5)), (Kind::Cube, n(2, 3))];
            (groups, 0.0)
        }
        SceneClass::DynamicEasy => (vec![(Kind::Segment, n(3, 5)), (Kind::Plane, n(1, 3)), (Kind::Cube, n(1, 2))], 1.0 / 3.0),
        SceneClass::DynamicHard => (vec![(Kind::Segment, n(7, 10)), (Kind::Plane, n(3, 5)), (Kind::Cube, n(2, 3))], 0.5),
    }
}

/// Randomized scene of `class`, fully determined by `seed`.
pub fn generate(class: SceneClass, seed: u64) -> Result<Scene, GenerationFailure> {
    if class == SceneClass::Maze {
        let mut s = maze_scene();
        s.seed = seed;
        return Ok(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(class.stream());
    let goal = match class {
        SceneClass::PlaneEasyLonger | SceneClass::PlaneHardLonger => LONG_GOAL,
        _ => GOAL,
    };
    let limits = corridor(&START, &goal);
    let (groups, drift_p) = recipe(class, &mut rng);
    let mut primitives = Vec::new();
    let mut attempts = 0;
    for (kind, count) in groups {
        for _ in 0..count {
            // The volumetric slot of mixed classes is a cube, cylinder or
            // (dynamic classes only) sphere.
            let kind = match kind {
                Kind::Cube if class == SceneClass::Complex => {
                    if rng.random_bool(0.5) { Kind::Cube } else { Kind::Cylinder }
                }
                Kind::Cube if drift_p > 0.0 => [Kind::Cube, Kind::Cylinder, Kind::Sphere][rng.random_range(0..3)],
                k => k,
            };
            let shape = loop {
                let s = sample_placed(kind, &limits, &mut rng);
                if clear_of(&s, &[START, goal]) {
                    break s;
                }
                attempts += 1;
                if attempts >= MAX_ATTEMPTS {
                    return Err(GenerationFailure { class, seed, attempts });
                }
            };
            let drift = (drift_p > 0.0 && rng.random_bool(drift_p)).then(|| drift_velocity(&mut rng));
            primitives.push(Primitive {
                shape,
                gain: None,
                drift,
            });
        }
    }
    Ok(Scene {
        class: Some(class),
        seed,
        start: START,
        goal,
        gains: Gains::default(),
        sim: SimParams::default(),
        boundary: limits.walls(),
        primitives,
    })
}

fn rect(center: Vec3, u: Vec3, v: Vec3) -> Shape {
    Shape::Plane(RectPlane::from_center(center, u, v).expect("axis-aligned rectangle"))
}

/// Fixed maze: a frontal wall square across the start-goal axis inside a
/// tunnel formed by a floor and a ceiling slab. The straight path is blocked
/// and the wall is symmetric, so pure repulsion stalls at its centre; the
/// way through runs around either side edge.
pub fn maze_scene() -> Scene {
    let primitives = vec![
        // Frontal wall.
        rect(Vec3::new(0.0, 0.2, 0.0), Vec3::new(0.2, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.3)),
        // Tunnel floor and ceiling.
        rect(Vec3::new(0.0, 0.0, -0.15), Vec3::new(0.45, 0.0, 0.0), Vec3::new(0.0, 0.5, 0.0)),
        rect(Vec3::new(0.0, 0.0, 0.15), Vec3::new(0.45, 0.0, 0.0), Vec3::new(0.0, 0.5, 0.0)),
    ]
    .into_iter()
    .map(Primitive::fixed)
    .collect();
    Scene {
        class: Some(SceneClass::Maze),
        seed: 0,
        start: START,
        goal: GOAL,
        gains: Gains::default(),
        sim: SimParams::default(),
        boundary: corridor(&START, &GOAL).walls(),
        primitives,
    }
}

/// A single wall square across the start-goal axis, symmetric about it.
pub fn symmetric_wall_scene(half_width: f64) -> Scene {
    Scene {
        class: None,
        seed: 0,
        start: START,
        goal: GOAL,
        // The uncorrected equilibrium d = k_rep / k_attr must lie strictly
        // inside the activation radius, or the robot chatters on the shell
        // instead of coming to rest.
        gains: Gains {
            activation_radius: 0.15,
            ..Gains::default()
        },
        sim: SimParams::default(),
        boundary: corridor(&START, &GOAL).walls(),
        primitives: vec![Primitive::fixed(rect(
            Vec3::zeros(),
            Vec3::new(half_width, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 0.3),
        ))],
    }
}
