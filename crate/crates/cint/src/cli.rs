use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cint_core::constellation::{OffsetSet, Tolerance};
use cint_core::imaging::{Peak, PeakList};
use cint_core::Point;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{CliError, StageExt};
use crate::formats;
use crate::pipeline::{self, Run};

#[derive(Debug, Parser)]
#[command(name = "cint", version, about = "Passive array imaging of nearby sources in a random medium")]
pub struct Cli {
    /// Output directory; falls back to `output.dir` in the config, then `out`.
    #[arg(long, global = true, env = "CINT_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Maximum number of worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Run configuration (`key = value` lines).
    #[arg(long, short)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Read recordings from a `data.csv` instead of synthesizing them.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived scales and regime ratios (`scales.json`).
    Scales(ConfigArg),
    /// Raster of one medium realization (`medium.csv`, `medium.pgm`).
    Medium(ConfigArg),
    /// Synthetic array recordings (`data.csv`).
    Synth(ConfigArg),
    /// CINT image on the coarse grid and its peaks.
    Cint(DataArgs),
    /// Two-point image around an anchor on the fine grid, its peaks and offsets.
    OffsetImage {
        #[command(flatten)]
        data: DataArgs,
        /// Anchor `x,z` or `x,y,z`; defaults to the strongest CINT peak.
        #[arg(long, value_parser = parse_point)]
        z0: Option<Point>,
    },
    /// Closed-form kernel envelope on the fine grid (`kernel.csv`).
    Kernel {
        #[command(flatten)]
        config: ConfigArg,
        /// Anchor; defaults to the first source.
        #[arg(long, value_parser = parse_point)]
        z0: Option<Point>,
    },
    /// Constellation search from an offsets or peaks file.
    Reconstruct(ReconstructArgs),
    /// Every stage end to end.
    Pipeline(ConfigArg),
    /// Conventional migration image on the coarse grid (diagnostic).
    Migrate(DataArgs),
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// `offsets.json` from `offset-image` or `pipeline`.
    #[arg(long, conflicts_with = "peaks", required_unless_present = "peaks")]
    pub offsets: Option<PathBuf>,
    /// `peaks_offset.json`; needs a config for the tolerance.
    #[arg(long, requires = "config")]
    pub peaks: Option<PathBuf>,
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Anchor; defaults to the one recorded in the input file.
    #[arg(long, value_parser = parse_point)]
    pub z0: Option<Point>,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v.map_err(|e| e.to_string())?.as_slice() {
        [x, z] => Ok(Point::planar(*x, *z)),
        [x, y, z] => Ok(Point::new(*x, *y, *z)),
        _ => Err("expected `x,z` or `x,y,z`".into()),
    }
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Only fails when a pool already exists, which then keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = |cfg: &RunConfig| -> PathBuf {
        cli.out.clone().or_else(|| cfg.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
    };
    match cli.command {
        Command::Scales(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let mut run = Run::new(cfg.clone(), &out(&cfg), "scales")?;
            let s = run.scales()?;
            run.write_json("scales.json", &serde_json::to_value(&s).expect("serializable"))?;
            run.finish()?;
        }
        Command::Medium(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let mut run = Run::new(cfg.clone(), &out(&cfg), "medium")?;
            run.timed("medium", |run| {
                let m = pipeline::medium_stage(&run.cfg)?;
                pipeline::write_medium(run, &m)
            })?;
            run.finish()?;
        }
        Command::Synth(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let mut run = Run::new(cfg.clone(), &out(&cfg), "synth")?;
            let m = run.timed("medium", |run| pipeline::medium_stage(&run.cfg))?;
            run.timed("synth", |run| {
                let d = pipeline::synth_stage(&run.cfg, &m)?;
                run.write("data.csv", &formats::data_csv(&d))
            })?;
            run.finish()?;
        }
        Command::Cint(d) => {
            let cfg = RunConfig::load(&d.config.config)?;
            let mut run = Run::new(cfg.clone(), &out(&cfg), "cint")?;
            let scales = run.scales()?;
            let data = load_data(&mut run, d.data.as_deref())?;
            let im = pipeline::imager(&cfg, &data, &scales)?;
            run.timed("cint", |run| {
                let c = pipeline::cint_stage(&run.cfg, &im, &scales)?;
                pipeline::write_cint(run, &c)
            })?;
            run.finish()?;
        }
        Command::OffsetImage { data: d, z0 } => {
            let cfg = RunConfig::load(&d.config.config)?;
            let mut run = Run::new(cfg.clone(), &out(&cfg), "offset-image")?;
            let scales = run.scales()?;
            let data = load_data(&mut run, d.data.as_deref())?;
            let im = pipeline::imager(&cfg, &data, &scales)?;
            let (z0, support) = match z0 {
                Some(z) => (z, None),
                None => {
                    let c = run.timed("cint", |run| pipeline::cint_stage(&run.cfg, &im, &scales))?;
                    (c.z0, Some(c.support))
                }
            };
            let fine = pipeline::fine_spec(&cfg, z0, support, &scales)?;
            let o = run.timed("offset-image", |run| {
                let o = pipeline::offset_stage(&run.cfg, &im, z0, &fine)?;
                pipeline::write_offset(run, &o, z0)?;
                Ok(o)
            })?;
            let offsets = pipeline::offsets_stage(&cfg, &o.peaks, z0)?;
            run.write_json("offsets.json", &pipeline::offsets_json(z0, &offsets))?;
            run.finish()?;
        }
        Command::Kernel { config, z0 } => {
            let cfg = RunConfig::load(&config.config)?;
            let mut run = Run::new(cfg.clone(), &out(&cfg), "kernel")?;
            let scales = run.scales()?;
            let z0 = z0.unwrap_or(cfg.sources[0]);
            run.timed("kernel", |run| {
                let spec = pipeline::fine_spec(&run.cfg, z0, None, &scales)?;
                let k = pipeline::kernel_image(&run.cfg, z0, &spec, &scales);
                run.write("kernel.csv", &formats::field_csv(&spec, &k, "kernel"))
            })?;
            run.finish()?;
        }
        Command::Reconstruct(r) => reconstruct_command(&r, cli.out.as_deref())?,
        Command::Pipeline(c) => {
            let cfg = RunConfig::load(&c.config)?;
            let outcome = pipeline::run_pipeline(&cfg, &out(&cfg))?;
            if outcome.reconstruction.is_none() {
                return Err(CliError::EmptyReconstruction);
            }
        }
        Command::Migrate(d) => {
            let cfg = RunConfig::load(&d.config.config)?;
            let mut run = Run::new(cfg.clone(), &out(&cfg), "migrate")?;
            let scales = run.scales()?;
            let data = load_data(&mut run, d.data.as_deref())?;
            let im = pipeline::imager(&cfg, &data, &scales)?;
            run.timed("migrate", |run| {
                let spec = pipeline::coarse_spec(&run.cfg)?;
                let img = im.migration_image(&spec).stage("migrate")?;
                run.write("image_migration.csv", &formats::image_csv(&img))?;
                run.write("image_migration.pgm", &formats::image_pgm(&img))
            })?;
            run.finish()?;
        }
    }
    Ok(())
}

fn load_data(run: &mut Run, path: Option<&Path>) -> Result<cint_core::forward::ArrayData, CliError> {
    match path {
        Some(p) => run.timed("load", |run| {
            let grid = pipeline::frequency_grid(&run.cfg)?;
            formats::read_data_csv(p, &grid, run.cfg.physics.aperture, run.cfg.noise_level)
        }),
        None => {
            let m = run.timed("medium", |run| pipeline::medium_stage(&run.cfg))?;
            run.timed("synth", |run| pipeline::synth_stage(&run.cfg, &m))
        }
    }
}

fn format_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Format { path: path.display().to_string(), line: 0, message: message.into() }
}

fn reconstruct_command(r: &ReconstructArgs, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = r.config.as_deref().map(RunConfig::load).transpose()?;
    let (raw, file_z0, source) = if let Some(path) = &r.offsets {
        let doc = formats::read_json(path)?;
        let tol = doc["tolerance"].as_array().and_then(|t| Some((t.first()?.as_f64()?, t.get(1)?.as_f64()?)));
        let (c, z) = tol.ok_or_else(|| format_error(path, "missing `tolerance`"))?;
        let tol = Tolerance::new(c, z).stage("reconstruct")?;
        let mut set = OffsetSet::new(tol);
        for item in doc["raw"].as_array().ok_or_else(|| format_error(path, "missing `raw`"))? {
            let e = formats::parse_point(&item["offset"]).ok_or_else(|| format_error(path, "bad offset"))?;
            set.insert(e, item["weight"].as_f64().unwrap_or(1.0));
        }
        (set, formats::parse_point(&doc["z0"]), path.clone())
    } else {
        let path = r.peaks.clone().expect("clap enforces one input");
        let cfg = cfg.as_ref().expect("clap enforces a config with --peaks");
        let doc = formats::read_json(&path)?;
        let mut peaks = Vec::new();
        for item in doc["peaks"].as_array().ok_or_else(|| format_error(&path, "missing `peaks`"))? {
            let position = formats::parse_point(&item["position"]).ok_or_else(|| format_error(&path, "bad position"))?;
            let magnitude = item["magnitude"].as_f64().ok_or_else(|| format_error(&path, "bad magnitude"))?;
            peaks.push(Peak { position, magnitude, index: [0; 3] });
        }
        let list = PeakList { peaks, threshold: cfg.fine_threshold, suppression_radius: [0.0; 3] };
        let z0 = r.z0.or_else(|| formats::parse_point(&doc["z0"])).ok_or_else(|| format_error(&path, "no anchor: pass --z0"))?;
        let tol = pipeline::tolerance(cfg)?;
        (cint_core::constellation::peaks_to_offsets(&list, z0, tol), Some(z0), path)
    };
    let z0 = r.z0.or(file_z0).ok_or_else(|| format_error(&source, "no anchor: pass --z0"))?;
    let cfg = match cfg {
        Some(c) => c,
        None => minimal_config(&source)?,
    };
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.output_dir.as_ref().map(PathBuf::from));
    let dir = dir.unwrap_or_else(|| PathBuf::from("out"));
    let mut run = Run::new(cfg, &dir, "reconstruct")?;
    let offsets = pipeline::split_offsets(raw);
    if !offsets.spurious.is_empty() {
        run.warn(format!("{} unpaired offset(s) removed by the symmetry filter", offsets.spurious.len()));
    }
    let c = run.timed("reconstruct", |run| pipeline::reconstruct_into(run, &offsets.filtered, z0))?;
    run.finish()?;
    match c {
        Some(_) => Ok(()),
        None => Err(CliError::EmptyReconstruction),
    }
}

/// The manifest echoes a configuration; without one, the run next to the
/// offsets file provides it.
fn minimal_config(source: &Path) -> Result<RunConfig, CliError> {
    let manifest = source.with_file_name("manifest.json");
    let doc: Value = formats::read_json(&manifest)
        .map_err(|_| CliError::Usage(format!("no --config given and no manifest next to {}", source.display())))?;
    let obj = doc["config"].as_object().ok_or_else(|| format_error(&manifest, "missing `config`"))?;
    let text: String = obj.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    Ok(RunConfig::parse(&text)?)
}
