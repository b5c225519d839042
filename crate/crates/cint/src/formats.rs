//! On-disk artifacts: CSV tables, 8-bit graymaps and JSON documents.
//!
//! Floating point values are written with Rust's `Display`, which yields the
//! shortest decimal that parses back to the same `f64`.

use std::path::Path;

use cint_core::constellation::{Constellation, OffsetSet};
use cint_core::forward::{ArrayData, ArrayGeometry, FrequencyGrid};
use cint_core::imaging::{GridSpec, ImageGrid, PeakList};
use cint_core::{Complex64, Point};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Builds a CSV document with a header row.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn num(x: f64) -> String {
    x.to_string()
}

/// `receiver, x, y, z, omega, re, im`, receiver-major.
pub fn data_csv(data: &ArrayData) -> Vec<u8> {
    let rows = (0..data.num_receivers()).flat_map(|r| {
        let x = data.receiver(r);
        data.spectrum(r).iter().zip(&data.grid.omegas).map(move |(v, &w)| {
            vec![r.to_string(), num(x.x), num(x.y), num(x.z), num(w), num(v.re), num(v.im)]
        })
    });
    csv_table(&["receiver", "x", "y", "z", "omega", "re", "im"], rows)
}

/// Reads a `data.csv` file back. The frequencies must match `grid`.
pub fn read_data_csv(path: &Path, grid: &FrequencyGrid, aperture: f64, noise_level: f64) -> Result<ArrayData, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rd = csv::Reader::from_reader(file);
    let bad = |line: usize, message: String| CliError::Format { path: path.display().to_string(), line, message };
    let header: Vec<String> = rd.headers().map_err(|e| bad(1, e.to_string()))?.iter().map(str::to_string).collect();
    if header != ["receiver", "x", "y", "z", "omega", "re", "im"] {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }
    let n = grid.len();
    let mut receivers: Vec<Point> = Vec::new();
    let mut values: Vec<Complex64> = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let field = |i: usize| -> Result<f64, CliError> {
            rec[i].trim().parse::<f64>().map_err(|e| bad(line, format!("column {}: {e}", header[i])))
        };
        let r: usize = rec[0].trim().parse().map_err(|e| bad(line, format!("receiver: {e}")))?;
        let (r_expected, j) = (k / n, k % n);
        if r != r_expected {
            return Err(bad(line, format!("expected receiver {r_expected}, found {r}")));
        }
        let omega = field(4)?;
        if (omega - grid.omegas[j]).abs() > 1e-12 * grid.omegas[j].abs() {
            return Err(bad(line, format!("frequency {omega} does not match the configured grid ({})", grid.omegas[j])));
        }
        if j == 0 {
            receivers.push(Point::new(field(1)?, field(2)?, field(3)?));
        }
        values.push(Complex64::new(field(5)?, field(6)?));
    }
    if values.is_empty() || !values.len().is_multiple_of(n) {
        return Err(bad(0, format!("{} rows is not a whole number of {n}-frequency spectra", values.len())));
    }
    let geometry = ArrayGeometry::new(receivers, aperture).map_err(|e| bad(0, e.to_string()))?;
    ArrayData::new(geometry, grid.clone(), values, noise_level).map_err(|e| bad(0, e.to_string()))
}

/// `ix, iy, iz, x, y, z, re, im, abs` in grid storage order.
pub fn image_csv(img: &ImageGrid) -> Vec<u8> {
    let spec = &img.spec;
    let rows = img.values.iter().enumerate().map(|(i, v)| {
        let m = spec.multi_index(i);
        let p = spec.node(i);
        vec![
            m[0].to_string(),
            m[1].to_string(),
            m[2].to_string(),
            num(p.x),
            num(p.y),
            num(p.z),
            num(v.re),
            num(v.im),
            num(v.norm()),
        ]
    });
    csv_table(&["ix", "iy", "iz", "x", "y", "z", "re", "im", "abs"], rows)
}

/// Real samples on a grid: `ix, iy, iz, x, y, z, <name>`.
pub fn field_csv(spec: &GridSpec, values: &[f64], name: &str) -> Vec<u8> {
    let rows = values.iter().enumerate().map(|(i, &v)| {
        let m = spec.multi_index(i);
        let p = spec.node(i);
        vec![m[0].to_string(), m[1].to_string(), m[2].to_string(), num(p.x), num(p.y), num(p.z), num(v)]
    });
    csv_table(&["ix", "iy", "iz", "x", "y", "z", name], rows)
}

/// Binary graymap of a planar grid: cross-range along the row, range
/// increasing downwards. `map` turns each sample into a byte.
pub fn pgm(spec: &GridSpec, values: &[f64], map: impl Fn(f64) -> u8) -> Vec<u8> {
    let (w, h) = (spec.shape[0], spec.shape[2]);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    for iz in 0..h {
        for ix in 0..w {
            out.push(map(values[spec.index([ix, 0, iz])]));
        }
    }
    out
}

/// Magnitude image normalized to its maximum.
pub fn image_pgm(img: &ImageGrid) -> Vec<u8> {
    let mags = img.magnitudes();
    let max = mags.iter().copied().fold(0.0, f64::max);
    pgm(&img.spec, &mags, |m| if max > 0.0 { (255.0 * m / max).round() as u8 } else { 0 })
}

/// Fluctuation field with `[-3, 3]` mapped linearly to `[0, 255]`.
pub fn medium_pgm(spec: &GridSpec, mu: &[f64]) -> Vec<u8> {
    pgm(spec, mu, |v| (255.0 * (v.clamp(-3.0, 3.0) + 3.0) / 6.0).round() as u8)
}

pub fn point_json(p: Point) -> Value {
    json!([p.x, p.y, p.z])
}

pub fn peaks_json(peaks: &PeakList, z0: Option<Point>) -> Value {
    let list: Vec<Value> = peaks
        .peaks
        .iter()
        .map(|p| json!({ "position": point_json(p.position), "magnitude": p.magnitude, "index": p.index }))
        .collect();
    let mut doc = json!({
        "threshold": peaks.threshold,
        "suppression_radius": peaks.suppression_radius,
        "peaks": list,
    });
    if let Some(z0) = z0 {
        doc["z0"] = point_json(z0);
    }
    doc
}

pub fn offsets_json(set: &OffsetSet) -> Value {
    Value::Array(set.iter().map(|(e, w)| json!({ "offset": point_json(e), "weight": w })).collect())
}

pub fn constellation_json(c: &Constellation) -> Value {
    Value::Array(c.points.iter().map(|&p| point_json(p)).collect())
}

pub fn parse_point(v: &Value) -> Option<Point> {
    let a = v.as_array()?;
    let c: Option<Vec<f64>> = a.iter().map(Value::as_f64).collect();
    match c?.as_slice() {
        [x, z] => Some(Point::planar(*x, *z)),
        [x, y, z] => Some(Point::new(*x, *y, *z)),
        _ => None,
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable value");
    out.push(b'\n');
    out
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
