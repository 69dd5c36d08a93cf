use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use skysweep_harness::gradcheck::run_suite;
use skysweep_harness::predict::{evaluate_dirs, fuse_dir, predict_sample, write_prediction};
use skysweep_harness::train::load_checkpoint;
use skysweep_harness::{train, Sample, METRICS_HEADER};
use skysweep_rednet::{selector, selectors, NetConfig, RedNet, Resolution};
use skysweep_synthgen::{generate, read_dataset, write_dataset, Split};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "skysweep", version, about = "Aerial multi-view depth estimation with a recurrent plane-sweep network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a procedural aerial dataset.
    Gen(GenArgs),
    /// Train the network on a generated dataset.
    Train(TrainArgs),
    /// Predict depth maps for dataset tiles.
    Infer(InferArgs),
    /// Score predicted depth maps against ground truth.
    Eval(EvalArgs),
    /// Turn predicted depth maps into a colored point cloud.
    Fuse(FuseArgs),
    /// Finite-difference gradient checks of every differentiable operation.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Views per unit (3 or 5).
    #[arg(long)]
    pub n: Option<usize>,
    /// Dataset root, instead of the configured one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Depth samples per sweep.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Quarter-resolution cost maps and outputs.
    #[arg(long)]
    pub quarter: bool,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Directory for the checkpoints and the loss log.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
    All,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset root; defaults to the configured one.
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Only this unit, e.g. `001_2`.
    #[arg(long)]
    pub unit: Option<String>,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub quarter: bool,
    #[arg(long, default_value = "predictions")]
    pub out: PathBuf,
    /// Depth selection strategy.
    #[arg(long, default_value = "wta")]
    pub selector: String,
    /// Also write per-pixel confidence rasters.
    #[arg(long)]
    pub confidence: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Prediction directory written by `infer`.
    pub pred: PathBuf,
    /// Dataset root holding the ground truth.
    pub gt: PathBuf,
    /// Depth interval in meters; defaults to each tile's own plan.
    #[arg(long)]
    pub interval: Option<f64>,
    /// Also write the CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Prediction directory written by `infer`.
    pub pred: PathBuf,
    /// Output point cloud; defaults to `points.xyz` in the prediction directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

fn emit(out: &mut dyn Write, line: impl AsRef<str>) -> Result<(), CliError> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| CliError::from_io(Path::new("<stdout>"), e))
}

fn check_views(n: usize) -> Result<usize, CliError> {
    if n == 3 || n == 5 {
        Ok(n)
    } else {
        Err(CliError::Config(format!("--n must be 3 or 5, got {n}")))
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen(a, out),
        Command::Train(a) => train_cmd(a, out),
        Command::Infer(a) => infer(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Fuse(a) => fuse(a, out),
        Command::Gradcheck(a) => gradcheck(a, out),
    }
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut config = RunConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(n) = a.n {
        config.dataset.views = check_views(n)?;
    }
    if let Some(root) = a.out {
        config.dataset.root = root;
    }
    let g = config.gen_config();
    let generated = generate(&g)?;
    write_dataset(&generated.subunits, g.views, &config.dataset.root)?;
    let units = |split: Split| -> BTreeSet<String> {
        generated.subunits.iter().filter(|s| s.split == split).map(|s| s.unit_name()).collect()
    };
    let tiles = |split: Split| generated.subunits.iter().filter(|s| s.split == split).count();
    emit(
        out,
        format!(
            "views={} units={} tiles={} train_units={} test_units={} train_tiles={} test_tiles={} root={}",
            generated.views.len(),
            generated.units.len(),
            generated.subunits.len(),
            units(Split::Train).len(),
            units(Split::Test).len(),
            tiles(Split::Train),
            tiles(Split::Test),
            config.dataset.root.display()
        ),
    )
}

fn train_cmd(a: TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut config = RunConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(n) = a.n {
        config.dataset.views = check_views(n)?;
    }
    if let Some(d) = a.d {
        config.train.depth_samples = d;
    }
    if a.quarter {
        config.train.resolution = Resolution::Quarter.name().to_string();
    }
    let mut tc = config.train_config()?;
    if let Some(dir) = a.out {
        tc.checkpoint = dir.join(tc.checkpoint.file_name().unwrap_or("model.ckpt".as_ref()));
        tc.loss_log = dir.join(tc.loss_log.file_name().unwrap_or("loss.csv".as_ref()));
    }
    if let Some(c) = a.checkpoint {
        tc.checkpoint = c;
    }
    tc.validate()?;
    let summary = train(&tc)?;
    emit(
        out,
        format!(
            "iterations={} samples={} final_loss={} checkpoint={} loss_log={}",
            summary.iterations,
            summary.samples,
            summary.final_loss,
            tc.checkpoint.display(),
            tc.loss_log.display()
        ),
    )
}

fn infer(a: InferArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = match &a.config {
        Some(path) => Some(RunConfig::load(path)?),
        None => None,
    };
    let resolution = match (&config, a.quarter) {
        (_, true) => Resolution::Quarter,
        (Some(c), false) => c.resolution()?,
        (None, false) => Resolution::Full,
    };
    let depth_samples = a.d.or(config.as_ref().map(|c| c.train.depth_samples)).unwrap_or(32);
    let root = match (&a.dataset, &config) {
        (Some(root), _) => root.clone(),
        (None, Some(c)) => c.dataset.root.clone(),
        (None, None) => return Err(CliError::Config("give a dataset directory or --config".into())),
    };
    let select = selector(&a.selector).ok_or_else(|| {
        let known: Vec<&str> = selectors().iter().map(|s| s.name()).collect();
        CliError::Config(format!("unknown selector {:?}, expected one of {}", a.selector, known.join(", ")))
    })?;

    let store = load_checkpoint(&a.checkpoint)?;
    let net = RedNet::bind(NetConfig { resolution }, &store).map_err(|e| {
        CliError::Incompatible(format!("checkpoint {} vs {} configuration: {e}", a.checkpoint.display(), resolution.name()))
    })?;
    let dataset = read_dataset(&root)?;
    let chosen: Vec<_> = dataset
        .subunits
        .iter()
        .filter(|s| match a.split {
            SplitArg::All => true,
            SplitArg::Train => s.split == Split::Train,
            SplitArg::Test => s.split == Split::Test,
        })
        .filter(|s| a.unit.as_ref().is_none_or(|u| &s.unit_name() == u))
        .collect();
    if chosen.is_empty() {
        return Err(CliError::NotFound { path: root.join(a.unit.as_deref().unwrap_or("<selected split>")) });
    }
    for sub in chosen {
        let sample = Sample::from_subunit(sub, depth_samples, resolution)?;
        let prediction = predict_sample(&net, &store, &sample, select.as_ref())?;
        let path = write_prediction(&a.out, &sample, &prediction, a.confidence)?;
        emit(
            out,
            format!(
                "{} time_ms={:.1} peak_bytes={} depth={}",
                sample.name,
                prediction.elapsed.as_secs_f64() * 1e3,
                prediction.peak_bytes,
                path.display()
            ),
        )?;
    }
    Ok(())
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(i) = a.interval {
        if !(i > 0.0) {
            return Err(CliError::Config(format!("--interval must be positive, got {i}")));
        }
    }
    let (report, _) = evaluate_dirs(&a.pred, &a.gt, a.interval)?;
    let csv = format!("{METRICS_HEADER}\n{}\n", report.csv_row());
    if let Some(path) = &a.out {
        std::fs::write(path, &csv).map_err(|e| CliError::from_io(path, e))?;
    }
    out.write_all(csv.as_bytes()).map_err(|e| CliError::from_io(Path::new("<stdout>"), e))
}

fn fuse(a: FuseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cloud = fuse_dir(&a.pred)?;
    let path = a.out.unwrap_or_else(|| a.pred.join("points.xyz"));
    cloud.write_xyz(&path)?;
    emit(out, format!("points={} path={}", cloud.len(), path.display()))
}

fn gradcheck(a: GradcheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let outcomes = run_suite(a.seed)?;
    emit(out, format!("{:<22} {:>12} {:>10} {:>8} {:>10}  status", "operation", "max_rel_err", "tolerance", "checked", "time"))?;
    for o in &outcomes {
        emit(
            out,
            format!(
                "{:<22} {:>12.3e} {:>10.0e} {:>8} {:>10.2?}  {}",
                o.name,
                o.report.max_rel_error,
                o.tolerance,
                o.report.checked,
                o.elapsed,
                if o.passed() { "PASS" } else { "FAIL" }
            ),
        )?;
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("gradient check failed for {}", failed.join(", "))))
    }
}
