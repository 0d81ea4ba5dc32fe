use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geopf::harness::{write_csv, write_json};
use geopf::{
    compute_metrics, generate, maze_scene, run_suite, simulate, GenerationFailure, Planner, Scene, SceneClass,
    SceneError, SpherizationParams, SuiteOptions, TrialMetrics,
};

/// Reactive potential-field planners over geometric primitives.
#[derive(Parser)]
#[command(name = "geopf", version)]
struct Cli {
    /// Worker threads for trial suites (defaults to one per core).
    #[arg(long, global = true, env = "GEOPF_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scene file and print its metrics.
    Run {
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        planner: PlannerArgs,
        /// Per-step trajectory CSV.
        #[arg(long)]
        traj: Option<PathBuf>,
    },
    /// Run a seeded trial suite and write the report CSV.
    Bench {
        #[arg(long)]
        class: SceneClass,
        #[command(flatten)]
        planner: PlannerArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full per-trial JSON report.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Override the step budget of every generated scene.
        #[arg(long)]
        max_steps: Option<usize>,
        /// Run trials one at a time, for cleaner timings.
        #[arg(long)]
        sequential: bool,
    },
    /// Simulate the fixed maze scene.
    Maze {
        #[command(flatten)]
        planner: PlannerArgs,
        #[arg(long)]
        traj: Option<PathBuf>,
    },
    /// Generate a scene file.
    Gen {
        #[arg(long)]
        class: SceneClass,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scene JSON; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerKind {
    Geopf,
    Pf,
    Cf,
}

#[derive(Args)]
struct PlannerArgs {
    #[arg(long, value_enum, default_value = "geopf")]
    planner: PlannerKind,
    /// Sphere radius for pf/cf.
    #[arg(long, default_value_t = 0.01)]
    rsp: f64,
    /// Per-sphere repulsive gain for pf/cf.
    #[arg(long, default_value_t = 1.0)]
    ksp: f64,
    /// Disable the plane-trap correction (geopf only).
    #[arg(long)]
    no_correction: bool,
}

impl PlannerArgs {
    fn planner(&self) -> Result<Planner> {
        let s = SpherizationParams {
            radius: self.rsp,
            k_rep: self.ksp,
        };
        if !matches!(self.planner, PlannerKind::Geopf) {
            anyhow::ensure!(s.radius > 0.0 && s.radius.is_finite(), "--rsp must be > 0, got {}", s.radius);
            anyhow::ensure!(s.k_rep > 0.0 && s.k_rep.is_finite(), "--ksp must be > 0, got {}", s.k_rep);
        }
        Ok(match self.planner {
            PlannerKind::Geopf => Planner::Geopf {
                correction: !self.no_correction,
            },
            PlannerKind::Pf => Planner::Pf(s),
            PlannerKind::Cf => Planner::Cf(s),
        })
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_trial(planner: &Planner, m: &TrialMetrics) {
    println!(
        "planner={planner} verdict=\"{}\" steps={} path_length={:.6} min_dist={:.6} avg_dist={:.6} ct_per_step_ms={:.6}",
        m.verdict, m.steps, m.path_length, m.min_dist, m.avg_dist, m.ct_per_step_ms
    );
}

fn run_scene(scene: &Scene, planner: &Planner, traj: Option<&Path>) -> Result<()> {
    let rec = simulate(&scene.setup(), planner);
    if let Some(p) = traj {
        rec.write_csv(output(Some(p))?).context("writing trajectory")?;
    }
    print_trial(planner, &compute_metrics(&rec, scene, planner));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { scene, planner, traj } => {
            let s = Scene::load(&scene).with_context(|| format!("loading {}", scene.display()))?;
            run_scene(&s, &planner.planner()?, traj.as_deref())
        }
        Command::Maze { planner, traj } => run_scene(&maze_scene(), &planner.planner()?, traj.as_deref()),
        Command::Gen { class, seed, out } => {
            let s = generate(class, seed)?;
            match out {
                Some(p) => s.save(&p)?,
                None => print!("{}", s.to_json()),
            }
            Ok(())
        }
        Command::Bench {
            class,
            planner,
            trials,
            seed,
            out,
            json,
            max_steps,
            sequential,
        } => {
            anyhow::ensure!(trials >= 1, "--trials must be at least 1");
            let opts = SuiteOptions {
                parallel: !sequential,
                max_steps,
            };
            let report = run_suite(class, planner.planner()?, trials, seed, opts);
            log::info!(
                "{class} {}: success rate {:.3} over {} trials ({} excluded)",
                report.planner,
                report.success_rate,
                report.trials,
                report.excluded
            );
            let reports = [report];
            let mut w = output(out.as_deref())?;
            write_csv(&reports, &mut w).context("writing report")?;
            w.flush()?;
            if let Some(p) = json {
                let mut w = output(Some(&p))?;
                write_json(&reports, &mut w).context("writing JSON report")?;
                w.flush()?;
            }
            Ok(())
        }
    }
}

/// 2 for unreadable scene files, 3 for generation failures, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<GenerationFailure>().is_some() {
        3
    } else if err.downcast_ref::<SceneError>().is_some_and(SceneError::is_schema) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
