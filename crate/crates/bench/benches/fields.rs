use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geopf::sim::trial_rng;
use geopf::{geopf_force, pf_force, simulate, Planner, SceneClass, SphereCloud, SpherizationParams};
use geopf_bench::{probe, scenes};
use std::hint::black_box;

fn distance_queries(c: &mut Criterion) {
    let mut g = c.benchmark_group("distance");
    for class in [SceneClass::LineHard, SceneClass::PlaneHard, SceneClass::Complex] {
        let scene = &scenes(class, 1)[0];
        let p = probe(scene, 0.4);
        g.bench_function(class.name(), |b| {
            b.iter(|| scene.primitives.iter().map(|o| o.shape.distance(black_box(&p))).sum::<f64>())
        });
    }
    g.finish();
}

fn force_per_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("force");
    let scene = &scenes(SceneClass::PlaneEasy, 1)[0];
    let world = scene.world();
    let p = probe(scene, 0.4);
    let mut rng = trial_rng(0);
    g.bench_function("geopf", |b| {
        b.iter(|| geopf_force(black_box(&p), &scene.goal, &world, &scene.gains, true, &mut rng))
    });
    for r in [0.02, 0.01, 0.005] {
        let cloud = SphereCloud::from_world(&world, r);
        g.bench_with_input(BenchmarkId::new("pf", r), &cloud, |b, cloud| {
            b.iter(|| pf_force(black_box(&p), &scene.goal, cloud, 1.0, &world.boundary, &scene.gains))
        });
    }
    g.finish();
}

fn whole_trial(c: &mut Criterion) {
    let mut g = c.benchmark_group("trial");
    g.sample_size(10);
    let scene = &scenes(SceneClass::LineEasy, 1)[0];
    let setup = scene.setup();
    let s = SpherizationParams { radius: 0.01, k_rep: 1.0 };
    for planner in [Planner::GEOPF, Planner::Pf(s), Planner::Cf(s)] {
        g.bench_function(planner.id(), |b| b.iter(|| simulate(black_box(&setup), &planner).steps()));
    }
    g.finish();
}

criterion_group!(benches, distance_queries, force_per_step, whole_trial);
criterion_main!(benches);
