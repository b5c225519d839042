use super::ImageGrid;
use crate::prelude::*;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: Point,
    pub magnitude: f64,
    pub index: [usize; 3],
}

/// Detected peaks, strongest first.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    pub peaks: Vec<Peak>,
    pub threshold: f64,
    pub suppression_radius: [f64; 3],
}

impl PeakList {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.peaks.iter().map(|p| p.position).collect()
    }
}

fn neighbors(shape: [usize; 3], i: [usize; 3], mut f: impl FnMut([usize; 3])) {
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let j = [i[0] as i64 + dx, i[1] as i64 + dy, i[2] as i64 + dz];
                if (0..3).all(|a| j[a] >= 0 && (j[a] as usize) < shape[a]) {
                    f([j[0] as usize, j[1] as usize, j[2] as usize]);
                }
            }
        }
    }
}

/// Local maxima of `|values|` above `threshold_frac` times the global maximum.
///
/// Candidates are accepted greedily by descending magnitude (ties by node
/// order); a candidate within `suppression_radius` of an accepted peak on
/// every axis is dropped.
pub fn detect_peaks(img: &ImageGrid, threshold_frac: f64, suppression_radius: [f64; 3]) -> Result<PeakList> {
    if !(threshold_frac > 0.0 && threshold_frac < 1.0) {
        return Err(Error::invalid("threshold_frac", "must lie in (0, 1)"));
    }
    if suppression_radius.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::invalid("suppression_radius", "must be non-negative"));
    }
    let spec = &img.spec;
    let mags = img.magnitudes();
    let max = mags.iter().copied().fold(0.0, f64::max);
    let mut list = PeakList { peaks: Vec::new(), threshold: threshold_frac, suppression_radius };
    if max <= 0.0 {
        return Ok(list);
    }
    let cut = threshold_frac * max;
    let mut candidates: Vec<usize> = (0..mags.len())
        .filter(|&i| {
            if mags[i] <= cut {
                return false;
            }
            let mut is_max = true;
            neighbors(spec.shape, spec.multi_index(i), |j| {
                if mags[spec.index(j)] > mags[i] {
                    is_max = false;
                }
            });
            is_max
        })
        .collect();
    candidates.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));
    for i in candidates {
        let p = spec.node(i);
        let suppressed = list.peaks.iter().any(|q| {
            let (u, v) = (p.to_array(), q.position.to_array());
            (0..3).all(|a| (u[a] - v[a]).abs() <= suppression_radius[a])
        });
        if !suppressed {
            list.peaks.push(Peak { position: p, magnitude: mags[i], index: spec.multi_index(i) });
        }
    }
    Ok(list)
}

/// Bounding box of the connected region around node `peak` where `|values|`
/// stays at or above `frac` times the value at the peak.
pub fn peak_support(img: &ImageGrid, peak: [usize; 3], frac: f64) -> (Point, Point) {
    let spec = &img.spec;
    let mags = img.magnitudes();
    let start = spec.index(peak);
    let cut = frac * mags[start];
    let mut seen = vec![false; mags.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let (mut lo, mut hi) = (peak, peak);
    while let Some(i) = stack.pop() {
        let m = spec.multi_index(i);
        for a in 0..3 {
            lo[a] = lo[a].min(m[a]);
            hi[a] = hi[a].max(m[a]);
        }
        for a in 0..3 {
            for step in [-1i64, 1] {
                let k = m[a] as i64 + step;
                if k < 0 || k as usize >= spec.shape[a] {
                    continue;
                }
                let mut n = m;
                n[a] = k as usize;
                let j = spec.index(n);
                if !seen[j] && mags[j] >= cut {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    (spec.node_at(lo), spec.node_at(hi))
}
