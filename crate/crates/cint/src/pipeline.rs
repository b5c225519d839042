//! Stage functions and the end-to-end run.
//!
//! Every stage is available in memory (for tests and library users) and
//! through [`Run`], which times stages, writes artifacts and finally the
//! manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cint_core::constellation::{peaks_to_offsets, reconstruct, symmetry_filter, Constellation, OffsetSet, Tolerance};
use cint_core::forward::{self, ArrayData, ArrayGeometry, FrequencyGrid, SourceSet};
use cint_core::imaging::{detect_peaks, peak_support, GridSpec, ImageGrid, Imager, PeakList, WindowConfig};
use cint_core::kernel::kernel_sum;
use cint_core::medium::{generate_medium, MediumRealization};
use cint_core::scales::{compute_scales, ScaleReport};
use cint_core::Point;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, StageExt};
use crate::formats;

/// Fraction of the strongest CINT peak that delimits its support.
pub const SUPPORT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved configuration, one entry per key.
    pub config: Value,
    pub scales: Option<ScaleReport>,
    pub warnings: Vec<String>,
    pub timings: Vec<Timing>,
    pub files: Vec<FileEntry>,
}

/// An output directory plus the bookkeeping for its manifest.
pub struct Run {
    pub cfg: RunConfig,
    out: PathBuf,
    command: String,
    scales: Option<ScaleReport>,
    warnings: Vec<String>,
    timings: Vec<Timing>,
    files: Vec<FileEntry>,
}

impl Run {
    pub fn new(cfg: RunConfig, out: &Path, command: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        Ok(Run {
            cfg,
            out: out.to_path_buf(),
            command: command.to_string(),
            scales: None,
            warnings: Vec::new(),
            timings: Vec::new(),
            files: Vec::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("warning: {message}");
        self.warnings.push(message);
    }

    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T, CliError>) -> Result<T, CliError> {
        let start = Instant::now();
        let out = f(self)?;
        self.timings.push(Timing { stage: stage.to_string(), seconds: start.elapsed().as_secs_f64() });
        Ok(out)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        let entry = FileEntry { name: name.to_string(), bytes: bytes.len() as u64, sha256: formats::sha256_hex(bytes) };
        match self.files.iter_mut().find(|f| f.name == name) {
            Some(f) => *f = entry,
            None => self.files.push(entry),
        }
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        self.write(name, &formats::json_bytes(v))
    }

    pub fn scales(&mut self) -> Result<ScaleReport, CliError> {
        if let Some(s) = &self.scales {
            return Ok(s.clone());
        }
        let s = self.timed("scales", |run| scales_stage(&run.cfg))?;
        for w in regime_warnings(&s) {
            self.warn(w);
        }
        self.scales = Some(s.clone());
        Ok(s)
    }

    /// Writes `manifest.json` and returns its contents.
    pub fn finish(self) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.clone(),
            config: config_echo(&self.cfg),
            scales: self.scales.clone(),
            warnings: self.warnings.clone(),
            timings: self.timings.clone(),
            files: self.files.clone(),
        };
        let v = serde_json::to_value(&manifest).expect("serializable manifest");
        let path = self.out.join("manifest.json");
        std::fs::write(&path, formats::json_bytes(&v)).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

/// The resolved configuration as a JSON object keyed by dotted names.
pub fn config_echo(cfg: &RunConfig) -> Value {
    let mut map = serde_json::Map::new();
    for line in cfg.emit().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            map.insert(k.to_string(), serde_json::from_str(v).expect("emitted values are JSON"));
        }
    }
    Value::Object(map)
}

pub fn scales_stage(cfg: &RunConfig) -> Result<ScaleReport, CliError> {
    compute_scales(&cfg.physics).stage("scales")
}

pub fn regime_warnings(s: &ScaleReport) -> Vec<String> {
    s.validity_ratios
        .iter()
        .filter(|r| !r.satisfied())
        .map(|r| format!("regime ratio {} = {:.3} is not small", r.name, r.value))
        .collect()
}

pub fn medium_stage(cfg: &RunConfig) -> Result<MediumRealization, CliError> {
    let p = &cfg.physics;
    generate_medium(cfg.medium_seed, cfg.medium_modes, p.dim(), p.ell, p.sigma).stage("medium")
}

/// Samples of the normalized fluctuation on the configured box.
pub fn medium_raster(cfg: &RunConfig, m: &MediumRealization) -> Result<(GridSpec, Vec<f64>), CliError> {
    let [x0, z0, x1, z1] = cfg.medium_box();
    let [nx, nz] = cfg.medium_raster;
    let step = |lo: f64, hi: f64, n: usize| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 1.0 };
    let spec = GridSpec::new(Point::planar(x0, z0), [step(x0, x1, nx), 1.0, step(z0, z1, nz)], [nx, 1, nz])
        .stage("medium")?;
    let mu = spec.nodes().map(|p| m.eval_mu(p)).collect();
    Ok((spec, mu))
}

pub fn geometry(cfg: &RunConfig) -> Result<ArrayGeometry, CliError> {
    let (n, a) = (cfg.receivers, cfg.physics.aperture);
    if cfg.physics.cross_range_dim == 2 {
        let side = (n as f64).sqrt().round() as usize;
        if side * side != n {
            return Err(CliError::Usage(format!("a planar array needs a square receiver count, got {n}")));
        }
        return ArrayGeometry::square(side, a).stage("synth");
    }
    match cfg.receiver_spacing {
        Some(s) => ArrayGeometry::linear_with_spacing(n, a, s),
        None => ArrayGeometry::linear(n, a),
    }
    .stage("synth")
}

pub fn frequency_grid(cfg: &RunConfig) -> Result<FrequencyGrid, CliError> {
    FrequencyGrid::for_config(&cfg.physics, cfg.frequencies).stage("synth")
}

pub fn synth_stage(cfg: &RunConfig, m: &MediumRealization) -> Result<ArrayData, CliError> {
    let geom = geometry(cfg)?;
    let grid = frequency_grid(cfg)?;
    let sources = SourceSet::new(cfg.sources.clone()).stage("synth")?;
    forward::synthesize(&geom, &sources, m, &cfg.physics, &grid, cfg.noise_level, cfg.noise_seed).stage("synth")
}

pub fn imager<'a>(cfg: &RunConfig, data: &'a ArrayData, scales: &ScaleReport) -> Result<Imager<'a>, CliError> {
    let im = Imager::new(data, &cfg.physics, WindowConfig::from_scales(scales)).stage("image")?;
    match cfg.taper {
        Some(t) => im.with_taper(t).stage("image"),
        None => Ok(im),
    }
}

pub fn coarse_spec(cfg: &RunConfig) -> Result<GridSpec, CliError> {
    let [dx, dz] = cfg.coarse_spacing;
    let [nx, nz] = cfg.coarse_shape;
    if cfg.physics.cross_range_dim == 2 {
        return GridSpec::centered(cfg.coarse_center, [dx, dx, dz], [nx, nx, nz]).stage("cint");
    }
    GridSpec::planar(cfg.coarse_center, dx, dz, nx, nz).stage("cint")
}

fn radius(cfg: &RunConfig, cross: f64, range: f64) -> [f64; 3] {
    [cross, if cfg.physics.cross_range_dim == 2 { cross } else { 0.0 }, range]
}

/// CINT image on the coarse grid and its strongest peak.
#[derive(Debug, Clone)]
pub struct CintStage {
    pub image: ImageGrid,
    pub peaks: PeakList,
    pub z0: Point,
    /// Box around `z0` where the image stays above half its peak value.
    pub support: (Point, Point),
}

pub fn cint_stage(cfg: &RunConfig, imager: &Imager<'_>, scales: &ScaleReport) -> Result<CintStage, CliError> {
    let spec = coarse_spec(cfg)?;
    let image = imager.cint_image(&spec).stage("cint")?;
    let r = radius(cfg, scales.cint_cross_range_resolution, scales.cint_range_resolution);
    let peaks = detect_peaks(&image, cfg.coarse_threshold, r).stage("cint")?;
    let top = peaks.peaks.first().ok_or(CliError::Stage {
        stage: "cint",
        source: cint_core::Error::InvalidParameter { name: "data", reason: "the CINT image is identically zero".into() },
    })?;
    let support = peak_support(&image, top.index, SUPPORT_FRACTION);
    Ok(CintStage { z0: top.position, support, image, peaks })
}

/// Fine grid centered on `z0`, restricted to the CINT support padded by one
/// CINT resolution cell.
pub fn fine_spec(cfg: &RunConfig, z0: Point, support: Option<(Point, Point)>, scales: &ScaleReport) -> Result<GridSpec, CliError> {
    let [px, pz] = cfg.fine_pixel();
    let [nx, nz] = cfg.fine_shape;
    let full = if cfg.physics.cross_range_dim == 2 {
        GridSpec::centered(z0, [px, px, pz], [nx, nx, nz])
    } else {
        GridSpec::planar(z0, px, pz, nx, nz)
    }
    .stage("offset-image")?;
    let Some((lo, hi)) = support else { return Ok(full) };
    let pad = radius(cfg, scales.cint_cross_range_resolution, scales.cint_range_resolution);
    let pad = Point::from_array(pad);
    Ok(full.clip(lo - pad, hi + pad).unwrap_or(full))
}

#[derive(Debug, Clone)]
pub struct OffsetStage {
    pub image: ImageGrid,
    pub peaks: PeakList,
}

pub fn offset_stage(cfg: &RunConfig, imager: &Imager<'_>, z0: Point, spec: &GridSpec) -> Result<OffsetStage, CliError> {
    let image = imager.offset_image(z0, spec).stage("offset-image")?;
    let [px, pz] = cfg.fine_pixel();
    let peaks = detect_peaks(&image, cfg.fine_threshold, radius(cfg, px, pz)).stage("offset-image")?;
    Ok(OffsetStage { image, peaks })
}

#[derive(Debug, Clone)]
pub struct Offsets {
    pub raw: OffsetSet,
    pub filtered: OffsetSet,
    /// Raw offsets without a mirrored partner.
    pub spurious: Vec<Point>,
}

pub fn tolerance(cfg: &RunConfig) -> Result<Tolerance, CliError> {
    let [c, r] = cfg.tolerance();
    Tolerance::new(c, r).stage("reconstruct")
}

pub fn offsets_stage(cfg: &RunConfig, peaks: &PeakList, z0: Point) -> Result<Offsets, CliError> {
    let raw = peaks_to_offsets(peaks, z0, tolerance(cfg)?);
    Ok(split_offsets(raw))
}

pub fn split_offsets(raw: OffsetSet) -> Offsets {
    let filtered = symmetry_filter(&raw);
    let spurious = raw.offsets().iter().copied().filter(|&e| !filtered.contains(e)).collect();
    Offsets { raw, filtered, spurious }
}

pub fn offsets_json(z0: Point, o: &Offsets) -> Value {
    let t = o.raw.tolerance;
    json!({
        "z0": formats::point_json(z0),
        "tolerance": [t.cross, t.range],
        "raw": formats::offsets_json(&o.raw),
        "filtered": formats::offsets_json(&o.filtered),
        "spurious": o.spurious.iter().map(|&p| formats::point_json(p)).collect::<Vec<_>>(),
    })
}

pub fn reconstruction_json(z0: Point, c: Option<&Constellation>, tol: &Tolerance, warnings: &[String]) -> Value {
    match c {
        Some(c) => json!({
            "status": "ok",
            "anchor": formats::point_json(z0),
            "points": formats::constellation_json(c),
            "reflection_ambiguous": c.reflection_ambiguous(tol),
            "warnings": warnings,
        }),
        None => json!({
            "status": "empty",
            "anchor": formats::point_json(z0),
            "points": [],
            "reflection_ambiguous": false,
            "warnings": warnings,
        }),
    }
}

/// Kernel envelope sum on the fine grid of the given anchor.
pub fn kernel_image(cfg: &RunConfig, z0: Point, spec: &GridSpec, scales: &ScaleReport) -> Vec<f64> {
    spec.nodes().map(|yp| kernel_sum(z0, yp, &cfg.sources, scales, &cfg.physics)).collect()
}

/// Everything the pipeline computed, kept in memory.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub scales: ScaleReport,
    pub data: ArrayData,
    pub cint: CintStage,
    pub fine: GridSpec,
    pub offset: OffsetStage,
    pub offsets: Offsets,
    pub reconstruction: Option<Constellation>,
    pub manifest: RunManifest,
}

impl PipelineOutcome {
    pub fn z0(&self) -> Point {
        self.cint.z0
    }
}

/// Runs every stage in order and writes all artifacts into `out`.
pub fn run_pipeline(cfg: &RunConfig, out: &Path) -> Result<PipelineOutcome, CliError> {
    let mut run = Run::new(cfg.clone(), out, "pipeline")?;
    let scales = run.scales()?;
    run.write_json("scales.json", &serde_json::to_value(&scales).expect("serializable"))?;

    let medium = run.timed("medium", |run| {
        let m = medium_stage(&run.cfg)?;
        write_medium(run, &m)?;
        Ok(m)
    })?;
    let data = run.timed("synth", |run| {
        let d = synth_stage(&run.cfg, &medium)?;
        run.write("data.csv", &formats::data_csv(&d))?;
        Ok(d)
    })?;
    drop(medium);

    let im = imager(cfg, &data, &scales)?;
    let cint = run.timed("cint", |run| {
        let c = cint_stage(&run.cfg, &im, &scales)?;
        write_cint(run, &c)?;
        Ok(c)
    })?;
    let z0 = cint.z0;
    let fine = fine_spec(cfg, z0, Some(cint.support), &scales)?;
    let offset = run.timed("offset-image", |run| {
        let o = offset_stage(&run.cfg, &im, z0, &fine)?;
        write_offset(run, &o, z0)?;
        Ok(o)
    })?;
    let offsets = run.timed("offsets", |run| {
        let o = offsets_stage(&run.cfg, &offset.peaks, z0)?;
        run.write_json("offsets.json", &offsets_json(z0, &o))?;
        Ok(o)
    })?;
    if !offsets.spurious.is_empty() {
        run.warn(format!("{} unpaired offset(s) removed by the symmetry filter", offsets.spurious.len()));
    }
    let reconstruction = run.timed("reconstruct", |run| reconstruct_into(run, &offsets.filtered, z0))?;
    drop(im);
    let manifest = run.finish()?;
    Ok(PipelineOutcome { scales, data, cint, fine, offset, offsets, reconstruction, manifest })
}

pub fn write_medium(run: &mut Run, m: &MediumRealization) -> Result<(), CliError> {
    let (spec, mu) = medium_raster(&run.cfg, m)?;
    run.write("medium.csv", &formats::field_csv(&spec, &mu, "mu"))?;
    run.write("medium.pgm", &formats::medium_pgm(&spec, &mu))
}

pub fn write_cint(run: &mut Run, c: &CintStage) -> Result<(), CliError> {
    run.write("image_cint.csv", &formats::image_csv(&c.image))?;
    run.write("image_cint.pgm", &formats::image_pgm(&c.image))?;
    run.write_json("peaks_cint.json", &formats::peaks_json(&c.peaks, Some(c.z0)))
}

pub fn write_offset(run: &mut Run, o: &OffsetStage, z0: Point) -> Result<(), CliError> {
    run.write("image_offset.csv", &formats::image_csv(&o.image))?;
    run.write("image_offset.pgm", &formats::image_pgm(&o.image))?;
    run.write_json("peaks_offset.json", &formats::peaks_json(&o.peaks, Some(z0)))
}

/// Reconstructs from a filtered offset set and writes `reconstruction.json`.
pub fn reconstruct_into(run: &mut Run, filtered: &OffsetSet, z0: Point) -> Result<Option<Constellation>, CliError> {
    let mut notes = Vec::new();
    if filtered.is_empty() {
        notes.push("no off-center offsets: the reconstruction is the anchor alone".to_string());
    }
    let c = reconstruct(filtered, z0).stage("reconstruct")?;
    if c.is_none() {
        notes.push("no subset of the candidates reproduces the estimated offsets".to_string());
    }
    for n in &notes {
        run.warn(n.clone());
    }
    let tol = filtered.tolerance;
    run.write_json("reconstruction.json", &reconstruction_json(z0, c.as_ref(), &tol, &notes))?;
    Ok(c)
}
