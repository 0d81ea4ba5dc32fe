//! Reactive potential-field planning for a point robot among geometric
//! primitives (spheres, segments, rectangles, boxes, cylinders), with
//! sphere-cloud baselines and a randomized benchmark harness.
//!
//! ```
//! use geopf::{generate, simulate, Planner, SceneClass};
//!
//! let scene = generate(SceneClass::LineEasy, 7).unwrap();
//! let record = simulate(&scene.setup(), &Planner::GEOPF);
//! assert!(record.steps() >= 1);
//! ```

pub mod baselines;
pub mod field;
pub mod geom;
pub mod harness;
pub mod scene;
pub mod sim;
pub mod world;

pub use baselines::{cf_force, pf_force, spherize, SphereCloud, SpherizationParams};
pub use field::{
    attractive_force, geopf_force, plane_force_with_correction, repulsive_force, resultant_force,
    cylinder_cap_correction, CollisionSignal, ForceBreakdown, Gains, ObstacleId,
};
pub use geom::{ClosestFeature, Cuboid, Cylinder, Feature, GeomError, RectPlane, Segment, Shape, Sphere, Vec3};
pub use harness::{compute_metrics, run_suite, SuiteOptions, SuiteReport, TrialMetrics};
pub use scene::{generate, maze_scene, GenerationFailure, Primitive, Scene, SceneClass, SceneError};
pub use sim::{integrate, simulate, Planner, SimParams, State, TrajectoryRecord, Verdict};
pub use world::{Aabb, World, WorldObstacle};
