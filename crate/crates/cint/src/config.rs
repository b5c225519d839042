//! Run configuration: flat dotted keys, one `key = value` per line, values
//! written as JSON (numbers, strings in double quotes, arrays). `#` starts a
//! comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use cint_core::scales::PhysicsConfig;
use cint_core::Point;
use serde_json::Value;

use crate::error::ConfigError;

/// Everything a run needs. Seeds are explicit, never drawn from entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physics: PhysicsConfig,
    /// Absolute source positions.
    pub sources: Vec<Point>,
    pub receivers: usize,
    /// Receiver spacing; `None` spreads the receivers over the aperture.
    pub receiver_spacing: Option<f64>,
    pub frequencies: usize,
    pub medium_seed: u64,
    pub medium_modes: usize,
    /// Shape `[cross, range]` of the raster written by the medium stage.
    pub medium_raster: [usize; 2],
    /// Raster box `[x_min, z_min, x_max, z_max]`; `None` is the square of
    /// side `a` below the array.
    pub medium_box: Option<[f64; 4]>,
    pub noise_level: f64,
    pub noise_seed: u64,
    pub coarse_center: Point,
    pub coarse_spacing: [f64; 2],
    pub coarse_shape: [usize; 2],
    /// `None` uses `3.92 L/(k0 a)` and `0.537 c0/B`.
    pub fine_spacing: Option<[f64; 2]>,
    pub fine_shape: [usize; 2],
    pub coarse_threshold: f64,
    pub fine_threshold: f64,
    /// `None` uses one fine pixel per axis.
    pub tolerance: Option<[f64; 2]>,
    /// Standard deviation of an optional Gaussian receiver apodization.
    pub taper: Option<f64>,
    pub output_dir: Option<String>,
}

const REQUIRED: &[&str] = &[
    "physics.lambda0",
    "physics.range",
    "physics.aperture",
    "physics.sigma",
    "physics.bandwidth_frac",
    "sources.positions",
    "array.receivers",
    "medium.seed",
    "noise.level",
    "noise.seed",
    "coarse.center",
    "coarse.spacing",
    "coarse.shape",
];

const OPTIONAL: &[&str] = &[
    "physics.ell",
    "physics.window_x_factor",
    "physics.window_omega_factor",
    "physics.cross_range_dim",
    "sources.origin",
    "sources.unit",
    "array.spacing",
    "frequency.samples",
    "medium.modes",
    "medium.raster",
    "medium.box",
    "fine.spacing",
    "fine.shape",
    "peaks.coarse_threshold",
    "peaks.fine_threshold",
    "reconstruct.tolerance",
    "imaging.taper",
    "output.dir",
];

struct Entry {
    value: Value,
    line: usize,
}

struct Table {
    entries: BTreeMap<String, Entry>,
}

impl Table {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, message: "expected `key = value`".into() })?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_') {
                return Err(ConfigError::Syntax { line, message: format!("invalid key `{key}`") });
            }
            let value: Value = serde_json::from_str(value.trim())
                .map_err(|e| ConfigError::Syntax { line, message: format!("bad value for `{key}`: {e}") })?;
            if let Some(prev) = entries.get(key) {
                return Err(ConfigError::Duplicate { key: key.into(), first: prev.line, second: line });
            }
            if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
                return Err(ConfigError::UnknownKey { key: key.into(), line });
            }
            entries.insert(key.to_string(), Entry { value, line });
        }
        let missing: Vec<String> =
            REQUIRED.iter().filter(|k| !entries.contains_key(**k)).map(|k| k.to_string()).collect();
        if !missing.is_empty() {
            return Err(ConfigError::Missing(missing));
        }
        Ok(Table { entries })
    }

    fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let line = self.entries.get(key).map_or(0, |e| e.line);
        ConfigError::Invalid { key: key.into(), line, message: message.into() }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|e| &e.value)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| self.invalid(key, "expected a number")),
        }
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64_or(key, f64::NAN).and_then(|v| if v.is_nan() { Err(self.invalid(key, "missing")) } else { Ok(v) })
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|_| self.f64(key)).transpose()
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().ok_or_else(|| self.invalid(key, "expected a non-negative integer")),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.u64_or(key, default as u64).map(|v| v as usize)
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let arr = v.as_array().ok_or_else(|| self.invalid(key, "expected an array of numbers"))?;
        arr.iter()
            .map(|x| x.as_f64().ok_or_else(|| self.invalid(key, "expected an array of numbers")))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn pair(&self, key: &str) -> Result<Option<[f64; 2]>, ConfigError> {
        match self.numbers(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some([v[0], v[1]])),
            Some(_) => Err(self.invalid(key, "expected two numbers [cross, range]")),
        }
    }

    fn shape(&self, key: &str, default: [usize; 2]) -> Result<[usize; 2], ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => {
                let arr = v.as_array().filter(|a| a.len() == 2);
                let vals: Option<Vec<u64>> = arr.map(|a| a.iter().filter_map(Value::as_u64).collect());
                match vals {
                    Some(s) if s.len() == 2 && s.iter().all(|&n| n > 0) => Ok([s[0] as usize, s[1] as usize]),
                    _ => Err(self.invalid(key, "expected two positive integers [cross, range]")),
                }
            }
        }
    }

    fn string_or(&self, key: &str, default: &str) -> Result<String, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_string()),
            Some(v) => v.as_str().map(str::to_string).ok_or_else(|| self.invalid(key, "expected a string")),
        }
    }

    fn point(&self, key: &str, v: &Value) -> Result<Point, ConfigError> {
        let arr = v.as_array().ok_or_else(|| self.invalid(key, "expected [cross, range] or [x, y, z]"))?;
        let c: Option<Vec<f64>> = arr.iter().map(Value::as_f64).collect();
        match c.as_deref() {
            Some([x, z]) => Ok(Point::planar(*x, *z)),
            Some([x, y, z]) => Ok(Point::new(*x, *y, *z)),
            _ => Err(self.invalid(key, "expected [cross, range] or [x, y, z]")),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    // A `#` inside a JSON string is kept.
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            '\\' if in_string => escaped = !escaped,
            '"' if !escaped => in_string = !in_string,
            '#' if !in_string => return &line[..i],
            _ => escaped = false,
        }
        if c != '\\' {
            escaped = false;
        }
    }
    line
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let t = Table::parse(text)?;
        let reference = PhysicsConfig::reference_regime();
        let physics = PhysicsConfig {
            lambda0: t.f64("physics.lambda0")?,
            ell: t.f64_or("physics.ell", reference.ell)?,
            range: t.f64("physics.range")?,
            aperture: t.f64("physics.aperture")?,
            sigma: t.f64("physics.sigma")?,
            bandwidth_frac: t.f64("physics.bandwidth_frac")?,
            window_x_factor: t.f64_or("physics.window_x_factor", reference.window_x_factor)?,
            window_omega_factor: t.f64_or("physics.window_omega_factor", reference.window_omega_factor)?,
            cross_range_dim: t.usize_or("physics.cross_range_dim", reference.cross_range_dim)?,
        };
        physics.validate().map_err(|e| ConfigError::Invalid { key: "physics".into(), line: 0, message: e.to_string() })?;

        let origin = match t.get("sources.origin") {
            Some(v) => t.point("sources.origin", v)?,
            None => Point::ORIGIN,
        };
        let unit = t.string_or("sources.unit", "length")?;
        let scale = match unit.as_str() {
            "length" => [1.0, 1.0],
            "fine_pixel" => default_fine_spacing(&physics),
            other => return Err(t.invalid("sources.unit", format!("unknown unit `{other}` (length, fine_pixel)"))),
        };
        let list = t.get("sources.positions").and_then(Value::as_array).filter(|a| !a.is_empty());
        let list = list.ok_or_else(|| t.invalid("sources.positions", "expected a non-empty array of points"))?;
        let sources = list
            .iter()
            .map(|v| {
                let p = t.point("sources.positions", v)?;
                Ok(origin + Point::new(p.x * scale[0], p.y * scale[0], p.z * scale[1]))
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;

        let coarse_center = t.point("coarse.center", t.get("coarse.center").unwrap())?;
        let cfg = RunConfig {
            physics,
            sources,
            receivers: t.usize_or("array.receivers", 0)?,
            receiver_spacing: t.opt_f64("array.spacing")?,
            frequencies: t.usize_or("frequency.samples", cint_core::forward::DEFAULT_FREQUENCIES)?,
            medium_seed: t.u64_or("medium.seed", 0)?,
            medium_modes: t.usize_or("medium.modes", cint_core::medium::DEFAULT_MODES)?,
            medium_raster: t.shape("medium.raster", [64, 64])?,
            medium_box: match t.numbers("medium.box")? {
                None => None,
                Some(b) if b.len() == 4 && b[0] < b[2] && b[1] < b[3] => Some([b[0], b[1], b[2], b[3]]),
                Some(_) => return Err(t.invalid("medium.box", "expected [x_min, z_min, x_max, z_max] with min < max")),
            },
            noise_level: t.f64("noise.level")?,
            noise_seed: t.u64_or("noise.seed", 0)?,
            coarse_center,
            coarse_spacing: t.pair("coarse.spacing")?.unwrap(),
            coarse_shape: t.shape("coarse.shape", [1, 1])?,
            fine_spacing: t.pair("fine.spacing")?,
            fine_shape: t.shape("fine.shape", [61, 61])?,
            coarse_threshold: t.f64_or("peaks.coarse_threshold", 0.5)?,
            fine_threshold: t.f64_or("peaks.fine_threshold", 0.15)?,
            tolerance: t.pair("reconstruct.tolerance")?,
            taper: t.opt_f64("imaging.taper")?,
            output_dir: t.get("output.dir").map(|_| t.string_or("output.dir", "")).transpose()?,
        };
        if cfg.receivers < 2 {
            return Err(t.invalid("array.receivers", "need at least two receivers"));
        }
        for (key, v) in [("peaks.coarse_threshold", cfg.coarse_threshold), ("peaks.fine_threshold", cfg.fine_threshold)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(t.invalid(key, "must lie in (0, 1)"));
            }
        }
        if cfg.noise_level.is_nan() || cfg.noise_level < 0.0 {
            return Err(t.invalid("noise.level", "must be non-negative"));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// The resolved configuration in the input format. Parsing the output
    /// gives back an equal value.
    pub fn emit(&self) -> String {
        let p = &self.physics;
        let mut out = String::new();
        let mut put = |key: &str, v: Value| {
            let _ = writeln!(out, "{key} = {v}");
        };
        let num = |x: f64| Value::from(x);
        let pair = |a: [f64; 2]| Value::from(vec![a[0], a[1]]);
        let shape = |a: [usize; 2]| Value::from(vec![a[0] as u64, a[1] as u64]);
        let point = |q: Point| {
            if q.y == 0.0 {
                Value::from(vec![q.x, q.z])
            } else {
                Value::from(vec![q.x, q.y, q.z])
            }
        };
        put("physics.lambda0", num(p.lambda0));
        put("physics.ell", num(p.ell));
        put("physics.range", num(p.range));
        put("physics.aperture", num(p.aperture));
        put("physics.sigma", num(p.sigma));
        put("physics.bandwidth_frac", num(p.bandwidth_frac));
        put("physics.window_x_factor", num(p.window_x_factor));
        put("physics.window_omega_factor", num(p.window_omega_factor));
        put("physics.cross_range_dim", Value::from(p.cross_range_dim as u64));
        put("sources.positions", Value::Array(self.sources.iter().map(|&q| point(q)).collect()));
        put("array.receivers", Value::from(self.receivers as u64));
        if let Some(s) = self.receiver_spacing {
            put("array.spacing", num(s));
        }
        put("frequency.samples", Value::from(self.frequencies as u64));
        put("medium.seed", Value::from(self.medium_seed));
        put("medium.modes", Value::from(self.medium_modes as u64));
        put("medium.raster", shape(self.medium_raster));
        if let Some(b) = self.medium_box {
            put("medium.box", Value::from(b.to_vec()));
        }
        put("noise.level", num(self.noise_level));
        put("noise.seed", Value::from(self.noise_seed));
        put("coarse.center", point(self.coarse_center));
        put("coarse.spacing", pair(self.coarse_spacing));
        put("coarse.shape", shape(self.coarse_shape));
        if let Some(s) = self.fine_spacing {
            put("fine.spacing", pair(s));
        }
        put("fine.shape", shape(self.fine_shape));
        put("peaks.coarse_threshold", num(self.coarse_threshold));
        put("peaks.fine_threshold", num(self.fine_threshold));
        if let Some(t) = self.tolerance {
            put("reconstruct.tolerance", pair(t));
        }
        if let Some(t) = self.taper {
            put("imaging.taper", num(t));
        }
        if let Some(d) = &self.output_dir {
            put("output.dir", Value::from(d.as_str()));
        }
        out
    }

    /// Fine pixel `[cross, range]`.
    pub fn fine_pixel(&self) -> [f64; 2] {
        self.fine_spacing.unwrap_or_else(|| default_fine_spacing(&self.physics))
    }

    pub fn medium_box(&self) -> [f64; 4] {
        let a = self.physics.aperture;
        self.medium_box.unwrap_or([-0.5 * a, 0.0, 0.5 * a, a])
    }

    /// Reconstruction tolerance `[cross, range]`.
    pub fn tolerance(&self) -> [f64; 2] {
        self.tolerance.unwrap_or_else(|| self.fine_pixel())
    }
}

/// `[3.92 L/(k0 a), 0.537 c0/B]`.
pub fn default_fine_spacing(p: &PhysicsConfig) -> [f64; 2] {
    [3.92 * p.range / (p.k0() * p.aperture), 0.537 * p.c0() / p.bandwidth()]
}

/// Every key the parser accepts, required keys first.
pub fn known_keys() -> impl Iterator<Item = &'static str> {
    REQUIRED.iter().chain(OPTIONAL).copied()
}
