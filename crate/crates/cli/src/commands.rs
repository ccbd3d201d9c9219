//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};

use echoplace::anneal::AnnealParams;
use echoplace::objective::{optimize as run_anneal, Evaluator, Propagation};
use echoplace::placement::{sample_listeners_with, sample_sources, CandidateSet, SourceSamples, Stratification};
use echoplace::scene::{load_scene, load_scene_unchecked, validate_scene, DEFAULT_SOURCE_LEVEL_DB};
use echoplace::sti::{empirical_sti, empirical_t60, sti_noiseless};
use echoplace::{derive_seed, BandSpectrum, Scene, Vec3, BAND_CENTERS_HZ};

use crate::report::{Parameters, Placement, RunReport, Timing};
use crate::{BaselineArgs, Common, StiArgs};

const SOURCE_STREAM: u64 = 1;
const LISTENER_STREAM: u64 = 2;
const GEO_STREAM: u64 = 3;

/// Scene validation failed; carries the number of problems for the exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0} problem(s) found")]
pub struct InvalidSceneReport(pub usize);

fn apply_overrides(scene: &mut Scene, rays: Option<usize>, crossover_hz: Option<f64>) {
    if let Some(r) = rays {
        scene.physics.rays = r;
    }
    if let Some(f) = crossover_hz {
        scene.physics.crossover_hz = f;
    }
}

fn propagation(geometric_only: bool) -> Propagation {
    if geometric_only {
        Propagation::GeometricOnly
    } else {
        Propagation::Hybrid
    }
}

fn load(common: &Common) -> Result<Scene> {
    let mut scene = load_scene(&common.config)?;
    apply_overrides(&mut scene, common.rays, common.crossover_hz);
    if let Some(s) = common.spacing {
        scene.physics.listener_spacing = s;
    }
    Ok(scene)
}

fn anneal_params(common: &Common) -> echoplace::Result<AnnealParams> {
    let d = AnnealParams::default();
    let p = AnnealParams {
        t0: common.t0.unwrap_or(d.t0),
        alpha: common.alpha.unwrap_or(d.alpha),
        k_reject: common.k_reject.unwrap_or(d.k_reject),
        seed: common.seed,
        t_end: d.t_end,
    };
    p.validate()?;
    Ok(p)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Small octahedron OBJ marking a point, for overlaying on the scene mesh.
fn write_marker(dir: &Path, p: Vec3) -> Result<()> {
    let r = 0.1;
    let mut w = create(dir, "optimum.obj")?;
    writeln!(w, "# best listener position")?;
    for d in [[r, 0.0, 0.0], [-r, 0.0, 0.0], [0.0, r, 0.0], [0.0, -r, 0.0], [0.0, 0.0, r], [0.0, 0.0, -r]] {
        writeln!(w, "v {} {} {}", p.x + d[0], p.y + d[1], p.z + d[2])?;
    }
    for f in [[1, 3, 5], [3, 2, 5], [2, 4, 5], [4, 1, 5], [3, 1, 6], [2, 3, 6], [4, 2, 6], [1, 4, 6]] {
        writeln!(w, "f {} {} {}", f[0], f[1], f[2])?;
    }
    w.flush()?;
    Ok(())
}

fn thread_count() -> usize {
    rayon::current_num_threads()
}

struct Prepared {
    candidates: CandidateSet,
    sources: SourceSamples,
}

fn prepare(scene: &Scene, seed: u64, mode: Stratification) -> Result<Prepared> {
    let candidates = sample_listeners_with(scene, scene.physics.listener_spacing, mode)?;
    let sources = sample_sources(scene, scene.physics.sources_per_region, derive_seed(seed, SOURCE_STREAM))?;
    Ok(Prepared { candidates, sources })
}

pub fn optimize(common: &Common) -> Result<()> {
    let start = Instant::now();
    let scene = load(common)?;
    let params = anneal_params(common)?;
    let Prepared { candidates, sources } =
        prepare(&scene, common.seed, Stratification::Jittered { seed: derive_seed(common.seed, LISTENER_STREAM) })?;
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    candidates.write_csv(create(&common.out, "candidates.csv")?)?;
    sources.write_csv(create(&common.out, "sources.csv")?)?;

    let total_weight = sources.total_weight();
    let evaluator = Evaluator::new(&scene, sources, derive_seed(common.seed, GEO_STREAM), propagation(common.geometric_only))?;
    log::info!("{} candidates, {} source samples", candidates.len(), evaluator.sources().len());
    let outcome = run_anneal(&evaluator, &candidates, &params)?;
    outcome.trace.write_csv(create(&common.out, "trace.csv")?)?;

    let placement = |id: usize| -> Result<Placement> {
        let e = evaluator.evaluate_candidate(id, candidates.position(id))?;
        Ok(Placement::new(id, candidates.position(id), candidates.points[id].box_id, &e, total_weight))
    };
    let best = placement(outcome.best)?;
    let initial = placement(outcome.initial)?;
    write_marker(&common.out, candidates.position(outcome.best))?;

    let report = RunReport {
        scene_digest: scene.digest(),
        seed: common.seed,
        candidates: candidates.len(),
        sources: evaluator.sources().len(),
        total_weight,
        improvement: outcome.best_q - outcome.initial_q,
        iterations: outcome.trace.iterations(),
        distinct_evaluations: evaluator.cached(),
        wave_runs: evaluator.solver_runs(),
        parameters: Parameters {
            anneal: params,
            scheduled_iterations: params.scheduled_iterations(),
            spacing: scene.physics.listener_spacing,
            rays: scene.physics.rays,
            crossover_hz: scene.physics.crossover_hz,
            sources_per_region: scene.physics.sources_per_region,
            propagation: evaluator.propagation(),
        },
        initial,
        best,
    };
    write_json(&common.out, "report.json", &report)?;
    write_json(&common.out, "timing.json", &Timing { wall_s: start.elapsed().as_secs_f64(), threads: thread_count() })?;

    let b = &report.best;
    println!(
        "best candidate {} at ({:.3}, {:.3}, {:.3}) in box {}: objective {:.4} (mean STI {:.3}), initial {:.4} (mean STI {:.3}), {} iterations",
        b.candidate_id,
        b.position[0],
        b.position[1],
        b.position[2],
        b.box_id,
        b.objective,
        b.mean_sti,
        report.initial.objective,
        report.initial.mean_sti,
        report.iterations
    );
    println!("artifacts written to {}", common.out.display());
    Ok(())
}

pub fn field_map(common: &Common) -> Result<()> {
    let start = Instant::now();
    let scene = load(common)?;
    let Prepared { candidates, sources } = prepare(&scene, common.seed, Stratification::Centered)?;
    std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let evaluator = Evaluator::new(&scene, sources, derive_seed(common.seed, GEO_STREAM), propagation(common.geometric_only))?;

    let mut w = csv::Writer::from_writer(create(&common.out, "field.csv")?);
    w.write_record(["x", "y", "z", "sti_objective"])?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (id, c) in candidates.points.iter().enumerate() {
        let q = evaluator.evaluate_candidate(id, c.position)?.objective;
        log::info!("field point {}/{}: {q:.4}", id + 1, candidates.len());
        lo = lo.min(q);
        hi = hi.max(q);
        let p = c.position;
        w.write_record([p.x.to_string(), p.y.to_string(), p.z.to_string(), q.to_string()])?;
    }
    w.flush()?;
    write_json(&common.out, "timing.json", &Timing { wall_s: start.elapsed().as_secs_f64(), threads: thread_count() })?;
    println!("{} points, objective range [{lo:.4}, {hi:.4}]", candidates.len());
    println!("field written to {}", common.out.join("field.csv").display());
    Ok(())
}

pub fn sti(args: &StiArgs) -> Result<()> {
    if let Some(path) = &args.rir {
        let h = echoplace::io::read_rir(path)?;
        let r = sti_noiseless(&h)?;
        println!("STI {:.4} ({})", r.sti, r.rating);
        for (f, m) in BAND_CENTERS_HZ.iter().zip(r.mti) {
            println!("  {f:>6} Hz  MTI {m:.4}");
        }
        return Ok(());
    }
    let (Some(config), Some(listener)) = (&args.config, args.listener) else {
        anyhow::bail!(echoplace::Error::InvalidArgument("give either --rir, or --config with --listener".into()));
    };
    let mut scene = load_scene(config)?;
    apply_overrides(&mut scene, args.rays, args.crossover_hz);
    let sources = sample_sources(&scene, scene.physics.sources_per_region, derive_seed(args.seed, SOURCE_STREAM))?;
    let total = sources.total_weight();
    let evaluator = Evaluator::new(&scene, sources, derive_seed(args.seed, GEO_STREAM), propagation(args.geometric_only))?;
    let e = evaluator.evaluate(listener)?;
    println!("source  region  weight      x      y      z     STI  rating");
    for (i, s) in evaluator.sources().samples.iter().enumerate() {
        let p = s.position;
        println!(
            "{i:>6}  {:>6}  {:>6.3}  {:>5.2}  {:>5.2}  {:>5.2}  {:.4}  {}",
            s.region, s.weight, p.x, p.y, p.z, e.per_source[i], e.ratings[i]
        );
    }
    println!("objective {:.4}, weighted mean STI {:.4}", e.objective, e.mean_sti(total));
    Ok(())
}

fn level_at(scene: &Scene, p: Vec3) -> BandSpectrum {
    scene
        .sources
        .iter()
        .position(|s| s.region.contains(p))
        .map(|i| scene.source_level(i))
        .unwrap_or_else(|| BandSpectrum::flat_db(DEFAULT_SOURCE_LEVEL_DB))
}

pub fn baseline(args: &BaselineArgs) -> Result<()> {
    let scene = match &args.config {
        Some(c) => {
            let mut s = load_scene(c)?;
            apply_overrides(&mut s, args.rays, args.crossover_hz);
            Some(s)
        }
        None => None,
    };
    let t60 = match (args.t60, args.volume, &scene) {
        (Some(t), _, _) => t,
        (None, Some(v), _) => empirical_t60(v)?,
        (None, None, Some(s)) => empirical_t60(s.air_volume())?,
        (None, None, None) => {
            anyhow::bail!(echoplace::Error::InvalidArgument("give --volume, --t60 or --config".into()))
        }
    };
    let est = empirical_sti(t60)?;
    println!("T60 = {t60:.3} s");
    println!("STI = {:.3}{}", est.sti, if est.clipped { " (clipped)" } else { "" });

    let Some(scene) = scene.filter(|_| !args.pairs.is_empty()) else {
        return Ok(());
    };
    let seed = derive_seed(args.seed, GEO_STREAM);
    let hybrid = Evaluator::new(&scene, SourceSamples::default(), seed, Propagation::Hybrid)?;
    let geometric = Evaluator::new(&scene, SourceSamples::default(), seed, Propagation::GeometricOnly)?;
    println!("pair  hybrid  geometric  empirical");
    for (i, &(s, l)) in args.pairs.iter().enumerate() {
        let level = level_at(&scene, s);
        let h = hybrid.pair_sti(s, &level, l)?;
        let g = geometric.pair_sti(s, &level, l)?;
        println!("{:>4}  {:.4}  {:>9.4}  {:>9.4}", pair_label(i), h.sti, g.sti, est.sti);
    }
    Ok(())
}

fn pair_label(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        i.to_string()
    }
}

pub fn validate(config: &Path) -> Result<()> {
    let scene = load_scene_unchecked(config)?;
    let violations = validate_scene(&scene);
    if violations.is_empty() {
        println!(
            "{}: ok ({} triangles, {} materials, {} source regions, {} noise sources, {} listener boxes, air volume {:.2} m³)",
            config.display(),
            scene.mesh.triangles.len(),
            scene.materials.len(),
            scene.sources.len(),
            scene.noise.len(),
            scene.listener_boxes.len(),
            scene.air_volume()
        );
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(InvalidSceneReport(violations.len()).into())
}
