//! Trial metrics, suites over seed ranges, and report output.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::SphereCloud;
use crate::field::ObstacleId;
use crate::geom::plane_foot;
use crate::scene::{generate, GenerationFailure, Scene, SceneClass};
use crate::sim::{simulate, Planner, TrajectoryRecord, Verdict};
use crate::world::World;

/// Replayed distances within this of zero count as contact.
pub const CONTACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialMetrics {
    pub seed: u64,
    pub verdict: Verdict,
    pub success: bool,
    pub steps: usize,
    /// Primitives the planner reasons about: obstacles for GeoPF, spheres
    /// for the baselines.
    pub obstacle_primitives: usize,
    pub ct_per_step_ms: f64,
    pub ct_median_ms: f64,
    pub path_length: f64,
    /// `+inf` when the scene has no obstacles.
    pub min_dist: f64,
    pub avg_dist: f64,
}

impl TrialMetrics {
    /// Everything except the wall-clock fields.
    pub fn same_outcome(&self, other: &TrialMetrics) -> bool {
        let strip = |m: &TrialMetrics| TrialMetrics {
            ct_per_step_ms: 0.0,
            ct_median_ms: 0.0,
            ..m.clone()
        };
        strip(self) == strip(other)
    }
}

/// Replays the world alongside the recorded states, handing each state and
/// the world as it was when that state was observed.
pub fn replay(record: &TrajectoryRecord, scene: &Scene, mut f: impl FnMut(usize, &World)) {
    let mut world = scene.world();
    let dynamic = world.is_dynamic();
    for (k, _) in record.states.iter().enumerate() {
        if k > 0 && dynamic {
            world.advance(scene.sim.dt);
        }
        f(k, &world);
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn compute_metrics(record: &TrajectoryRecord, scene: &Scene, planner: &Planner) -> TrialMetrics {
    let path_length = record
        .states
        .windows(2)
        .map(|w| (w[1].position - w[0].position).norm())
        .sum();
    let (mut min_dist, mut sum, mut n) = (f64::INFINITY, 0.0, 0usize);
    replay(record, scene, |k, world| {
        let p = record.states[k].position;
        for o in &world.obstacles {
            let d = o.shape.distance(&p);
            min_dist = min_dist.min(d);
            sum += d;
            n += 1;
        }
    });
    let avg_dist = if n == 0 { f64::INFINITY } else { sum / n as f64 };
    let mut ms: Vec<f64> = record.step_ns.iter().map(|&ns| ns as f64 * 1e-6).collect();
    let ct_per_step_ms = if ms.is_empty() { 0.0 } else { ms.iter().sum::<f64>() / ms.len() as f64 };
    let ct_median_ms = if ms.is_empty() { 0.0 } else { median(&mut ms) };
    let obstacle_primitives = match planner.spherization() {
        None => scene.primitives.len(),
        Some(s) => SphereCloud::from_world(&scene.world(), s.radius).len(),
    };
    TrialMetrics {
        seed: scene.seed,
        verdict: record.verdict,
        success: record.verdict.is_success(),
        steps: record.steps(),
        obstacle_primitives,
        ct_per_step_ms,
        ct_median_ms,
        path_length,
        min_dist,
        avg_dist,
    }
}

/// Whether a collision verdict is backed by true-geometry contact at the
/// reported step. Non-collision verdicts are trivially consistent.
pub fn collision_is_genuine(record: &TrajectoryRecord, scene: &Scene) -> bool {
    let Verdict::Collision { obstacle, step } = record.verdict else {
        return true;
    };
    let mut ok = false;
    replay(record, scene, |k, world| {
        if k != step {
            return;
        }
        let p = record.states[k].position;
        ok = match obstacle {
            ObstacleId::Obstacle(i) => world.obstacles[i].shape.distance(&p) <= CONTACT_TOLERANCE,
            ObstacleId::Boundary(j) => plane_foot(&p, &world.boundary[j]).1 <= CONTACT_TOLERANCE,
        };
    });
    ok
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population statistics; non-finite samples are skipped, and an empty
    /// sample gives `+inf`.
    pub fn of(values: impl IntoIterator<Item = f64>) -> MeanStd {
        let v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return MeanStd {
                mean: f64::INFINITY,
                std: f64::INFINITY,
            };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TrialOutcome {
    Completed(TrialMetrics),
    Excluded { seed: u64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub class: SceneClass,
    pub planner: Planner,
    pub trials: usize,
    pub excluded: usize,
    pub seed_start: u64,
    pub seed_end: u64,
    pub obstacle_primitives: MeanStd,
    pub success_rate: f64,
    pub steps: MeanStd,
    pub ct_per_step_ms: MeanStd,
    pub ct_median_ms: f64,
    pub path_length: MeanStd,
    pub min_dist: MeanStd,
    pub avg_dist: MeanStd,
    pub outcomes: Vec<TrialOutcome>,
}

impl SuiteReport {
    pub fn completed(&self) -> impl Iterator<Item = &TrialMetrics> {
        self.outcomes.iter().filter_map(|o| match o {
            TrialOutcome::Completed(m) => Some(m),
            TrialOutcome::Excluded { .. } => None,
        })
    }

    pub fn summarize(class: SceneClass, planner: Planner, seed0: u64, outcomes: Vec<TrialOutcome>) -> SuiteReport {
        let done: Vec<&TrialMetrics> = outcomes
            .iter()
            .filter_map(|o| match o {
                TrialOutcome::Completed(m) => Some(m),
                _ => None,
            })
            .collect();
        let stat = |f: fn(&TrialMetrics) -> f64| MeanStd::of(done.iter().map(|m| f(m)));
        let successes = done.iter().filter(|m| m.success).count();
        let mut medians: Vec<f64> = done.iter().map(|m| m.ct_median_ms).collect();
        let trials = outcomes.len();
        SuiteReport {
            class,
            planner,
            trials,
            excluded: trials - done.len(),
            seed_start: seed0,
            seed_end: seed0 + trials.saturating_sub(1) as u64,
            obstacle_primitives: stat(|m| m.obstacle_primitives as f64),
            success_rate: if done.is_empty() { 0.0 } else { successes as f64 / done.len() as f64 },
            steps: stat(|m| m.steps as f64),
            ct_per_step_ms: stat(|m| m.ct_per_step_ms),
            ct_median_ms: median(&mut medians),
            path_length: stat(|m| m.path_length),
            min_dist: stat(|m| m.min_dist),
            avg_dist: stat(|m| m.avg_dist),
            outcomes,
        }
    }

    /// Same report ignoring the wall-clock fields.
    pub fn same_outcome(&self, other: &SuiteReport) -> bool {
        self.outcomes.len() == other.outcomes.len()
            && self.outcomes.iter().zip(&other.outcomes).all(|(a, b)| match (a, b) {
                (TrialOutcome::Completed(x), TrialOutcome::Completed(y)) => x.same_outcome(y),
                _ => a == b,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    /// Run trials on the rayon pool.
    pub parallel: bool,
    /// Overrides the generated scenes' step budget.
    pub max_steps: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            parallel: true,
            max_steps: None,
        }
    }
}

/// Generates, simulates and scores one seed.
pub fn run_seed(class: SceneClass, planner: &Planner, seed: u64, opts: &SuiteOptions) -> Result<TrialMetrics, GenerationFailure> {
    let mut scene = generate(class, seed)?;
    if let Some(n) = opts.max_steps {
        scene.sim.max_steps = n;
    }
    let rec = simulate(&scene.setup(), planner);
    Ok(compute_metrics(&rec, &scene, planner))
}

/// Seeds `seed0 .. seed0 + n` in order; generation failures are excluded
/// and reported.
pub fn run_suite(class: SceneClass, planner: Planner, n_trials: usize, seed0: u64, opts: SuiteOptions) -> SuiteReport {
    let one = |i: usize| {
        let seed = seed0 + i as u64;
        match run_seed(class, &planner, seed, &opts) {
            Ok(m) => TrialOutcome::Completed(m),
            Err(e) => {
                log::warn!("{e}");
                TrialOutcome::Excluded {
                    seed,
                    reason: e.to_string(),
                }
            }
        }
    };
    let outcomes: Vec<TrialOutcome> = if opts.parallel {
        (0..n_trials).into_par_iter().map(one).collect()
    } else {
        (0..n_trials).map(one).collect()
    };
    SuiteReport::summarize(class, planner, seed0, outcomes)
}

pub const CSV_HEADER: [&str; 23] = [
    "class",
    "planner",
    "r_sp",
    "k_sp",
    "trials",
    "excluded",
    "seed_start",
    "seed_end",
    "n_obs_mean",
    "n_obs_std",
    "success_rate",
    "steps_mean",
    "steps_std",
    "ct_per_step_ms_mean",
    "ct_per_step_ms_std",
    "ct_per_step_ms_median",
    "path_length_mean",
    "path_length_std",
    "min_dist_mean",
    "min_dist_std",
    "avg_dist_mean",
    "avg_dist_std",
    "correction",
];

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "n/a".into()
    }
}

/// One row per report under [`CSV_HEADER`].
pub fn write_csv<W: Write>(reports: &[SuiteReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        let (rsp, ksp) = match r.planner.spherization() {
            Some(s) => (num(s.radius), num(s.k_rep)),
            None => (String::new(), String::new()),
        };
        let correction = match r.planner {
            Planner::Geopf { correction } => correction.to_string(),
            _ => String::new(),
        };
        let ms = |m: &MeanStd| [num(m.mean), num(m.std)];
        let mut row = vec![
            r.class.name().to_string(),
            r.planner.id().to_string(),
            rsp,
            ksp,
            r.trials.to_string(),
            r.excluded.to_string(),
            r.seed_start.to_string(),
            r.seed_end.to_string(),
        ];
        row.extend(ms(&r.obstacle_primitives));
        row.push(num(r.success_rate));
        row.extend(ms(&r.steps));
        row.extend(ms(&r.ct_per_step_ms));
        row.push(num(r.ct_median_ms));
        row.extend(ms(&r.path_length));
        row.extend(ms(&r.min_dist));
        row.extend(ms(&r.avg_dist));
        row.push(correction);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Full reports with every trial, as pretty JSON.
pub fn write_json<W: Write>(reports: &[SuiteReport], out: W) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, reports)
}
