//! Criterion benchmarks live under benches/. This crate only exposes the
//! fixed inputs they share.

use geopf::{generate, Scene, SceneClass, Vec3};

/// Scenes for a class, seeds `0..n`.
pub fn scenes(class: SceneClass, n: u64) -> Vec<Scene> {
    (0..n).map(|s| generate(class, s).expect("shipped classes generate")).collect()
}

/// A query point partway along the scene's start-goal line.
pub fn probe(scene: &Scene, t: f64) -> Vec3 {
    scene.start + (scene.goal - scene.start) * t
}
