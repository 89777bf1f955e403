//! Command-line front end: experiments, single votes, metrics and selftest.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radvote::experiment::{
    load_models, noisy_map, random_object_view, run_experiment, ExperimentKind, ExperimentSpec,
};
use radvote::io::{self, IoError, PoseRecord};
use radvote::metrics::{accuracy_at_threshold, add_metric, adds_metric, auc_metric};
use radvote::pipeline::{vote_keypoint, GridBounds};
use radvote::selftest::{run_selftest, SelftestOptions};
use radvote::{Error, SchemeKind};

#[derive(Parser)]
#[command(name = "radvote", version, about = "Keypoint voting experiments in a 3D accumulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All schemes on identical maps and noise.
    SchemeCompare(Common),
    /// Pose error of fixed keypoint perturbations against dispersion.
    Dispersion(Common),
    /// Keypoint error, time and memory against voxel size.
    Resolution(Common),
    /// Pose accuracy against the number of keypoints.
    Keypoints(Common),
    /// Summed accumulators of several schemes.
    Ensemble(Common),
    /// Votes one keypoint of one rendered view and dumps the accumulator.
    VoteOnce(Common),
    /// ADD, ADD-s, accuracy and AUC of estimated poses against ground truth.
    Metrics(MetricsArgs),
    /// Checks rasterisers, pose fitting and metrics against slow references.
    Selftest(SelftestArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment file; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV and grid files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Voxel sizes in mm, comma separated.
    #[arg(long, value_delimiter = ',')]
    resolution: Option<Vec<f64>>,
    /// Scheme names, comma separated.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<String>>,
    /// Per-channel regressor error in mm.
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Growth of per-channel error with channel count.
    #[arg(long)]
    noise_exponent: Option<f64>,
    /// Dispersion scales, comma separated.
    #[arg(long, value_delimiter = ',')]
    scale: Option<Vec<f64>>,
    /// Keypoint counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    keypoints: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Leave the wall_ms column at zero so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct MetricsArgs {
    /// Model point cloud (PLY).
    #[arg(long)]
    model: PathBuf,
    /// Millimetres per model unit.
    #[arg(long)]
    model_scale: f64,
    /// Ground-truth pose file.
    #[arg(long)]
    gt: PathBuf,
    /// Estimated pose file, same order as --gt.
    #[arg(long)]
    est: PathBuf,
    /// Score with ADD-s.
    #[arg(long)]
    symmetric: bool,
    #[arg(long, default_value_t = 0.1)]
    fraction: f64,
    #[arg(long, default_value_t = 100.0)]
    auc_max: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, hide = true, default_value_t = radvote::accumulator::VOXEL_HALF_EXTENT)]
    sphere_half_extent: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RADVOTE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, IoError> {
    let (kind, common) = match command {
        Command::SchemeCompare(c) => (ExperimentKind::SchemeComparison, c),
        Command::Dispersion(c) => (ExperimentKind::DispersionSweep, c),
        Command::Resolution(c) => (ExperimentKind::ResolutionSweep, c),
        Command::Keypoints(c) => (ExperimentKind::KeypointCount, c),
        Command::Ensemble(c) => (ExperimentKind::Ensemble, c),
        Command::VoteOnce(c) => return vote_once(&c),
        Command::Metrics(m) => return metrics(&m),
        Command::Selftest(s) => return selftest(&s),
    };
    let spec = build_spec(&common, Some(kind))?;
    log::info!("running {} with {} trials", kind.name(), spec.trials);
    let out = run_experiment(&spec)?;
    print!("{}", out.summary());
    let path = prepare_out(&common.out)?.join(format!("{}.csv", kind.name()));
    io::write_csv(&path, &out.rows)?;
    log::info!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn build_spec(c: &Common, kind: Option<ExperimentKind>) -> Result<ExperimentSpec, IoError> {
    let mut spec = match &c.config {
        Some(p) => io::load_config(p)?,
        None => ExperimentSpec::default(),
    };
    if let Some(k) = kind {
        spec.kind = k;
    }
    if let Some(s) = c.seed {
        spec.seed = s;
    }
    if c.threads.is_some() {
        spec.threads = c.threads;
    }
    if let Some(r) = &c.resolution {
        spec.resolutions = r.clone();
    }
    if let Some(names) = &c.scheme {
        spec.schemes = names.iter().map(|n| n.parse()).collect::<Result<Vec<SchemeKind>, Error>>()?;
    }
    if let Some(s) = c.noise_sigma {
        spec.noise.sigma = s;
    }
    if let Some(g) = c.noise_exponent {
        spec.noise.dimension_exponent = g;
    }
    if let Some(s) = &c.scale {
        spec.scales = s.clone();
    }
    if let Some(k) = &c.keypoints {
        spec.keypoints = k.clone();
    }
    if let Some(t) = c.trials {
        spec.trials = t;
    }
    if c.no_timing {
        spec.record_timing = false;
    }
    spec.validate()?;
    Ok(spec)
}

fn prepare_out(dir: &Path) -> Result<&Path, IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::File {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(dir)
}

/// First object, first layout, first scheme and resolution of the spec;
/// keypoint 0 of a view drawn from the seed.
fn vote_once(c: &Common) -> Result<ExitCode, IoError> {
    let spec = build_spec(c, None)?;
    let model = load_models(&spec)?.remove(0);
    let scheme = spec.schemes[0];
    let resolution = spec.resolutions[0];
    let kps = model.keypoints(spec.layouts[0], spec.keypoints[0], spec.bbox_scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let depth = (spec.camera.depth_min, spec.camera.depth_max);
    let view = random_object_view(&model, &kps, &spec.camera(), depth, &mut rng)?;
    let map = noisy_map(&view, 0, scheme, &spec.noise, spec.seed)?;
    let keypoint_radius = kps.points().iter().map(|k| k.coords.norm()).fold(0.0, f64::max);
    let bounds = GridBounds::Envelope {
        object_radius: model.radius,
        keypoint_radius,
    };
    let params = spec.voting_params(resolution, bounds, spec.seed);
    let (grid, stats) = vote_keypoint(&view.frame, std::slice::from_ref(&map), &params)?;
    let peak = radvote::accumulator::find_peak(&grid, params.refine_peak)?;
    let truth = view.keypoints[0];
    let g = grid.geometry();
    println!("object      {}", model.name);
    println!("scheme      {}", scheme.name());
    println!("grid        {:?} voxels of {} mm at {:?}", g.dims, g.resolution, g.origin.coords.as_slice());
    println!("votes       {} pixels, {} increments, {} dropped", stats.pixels_voted, stats.increments, stats.dropped);
    println!("peak        {:?} count {}", peak.location.coords.as_slice(), peak.count);
    println!("truth       {:?}", truth.coords.as_slice());
    println!("error       {:.3} mm", (peak.location - truth).norm());
    let path = prepare_out(&c.out)?.join("grid.rvag");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path).map_err(|source| IoError::File {
        path: path.clone(),
        source,
    })?);
    io::write_grid_blob(&mut f, &grid)?;
    std::io::Write::flush(&mut f)?;
    println!("grid file   {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn metrics(m: &MetricsArgs) -> Result<ExitCode, IoError> {
    let model = io::load_ply(&m.model, m.model_scale)?;
    let gt = io::load_poses(&m.gt)?;
    let est = io::load_poses(&m.est)?;
    if gt.len() != est.len() {
        return Err(Error::SizeMismatch {
            what: "ground-truth vs estimated poses",
            left: gt.len(),
            right: est.len(),
        }
        .into());
    }
    if gt.is_empty() {
        return Err(IoError::PoseLine {
            line: 0,
            reason: "no poses".into(),
        });
    }
    let rows: Vec<(&PoseRecord, f64, f64)> = gt
        .iter()
        .zip(&est)
        .map(|(g, e)| (g, add_metric(&model, &g.pose, &e.pose), adds_metric(&model, &g.pose, &e.pose)))
        .collect();
    let scored: Vec<f64> = rows.iter().map(|r| if m.symmetric { r.2 } else { r.1 }).collect();
    let accuracy = accuracy_at_threshold(&scored, model.radius(), m.fraction)?;
    let auc = auc_metric(&scored, m.auc_max)?;
    let path = prepare_out(&m.out)?.join("metrics.csv");
    let file = std::fs::File::create(&path).map_err(|source| IoError::File {
        path: path.clone(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    let to_io = |e: csv::Error| IoError::Stream(std::io::Error::other(e.to_string()));
    w.write_record(["object_id", "add_mm", "adds_mm"]).map_err(to_io)?;
    for (g, add, adds) in &rows {
        w.write_record([g.object_id.clone(), add.to_string(), adds.to_string()]).map_err(to_io)?;
    }
    w.flush()?;
    println!("poses       {}", rows.len());
    println!("radius      {:.3} mm", model.radius());
    println!("accuracy    {:.4} (threshold {:.3} mm, {})", accuracy, m.fraction * model.radius(), if m.symmetric { "ADD-s" } else { "ADD" });
    println!("auc         {auc:.4}");
    Ok(ExitCode::SUCCESS)
}

fn selftest(s: &SelftestArgs) -> Result<ExitCode, IoError> {
    let results = run_selftest(&SelftestOptions {
        cases: s.cases,
        seed: s.seed,
        sphere_half_extent: s.sphere_half_extent,
    });
    for r in &results {
        println!("{r}");
    }
    Ok(if results.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}
