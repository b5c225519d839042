//! Offset sets and the recursive reconstruction of source constellations.
//!
//! The offset set of a point set `Y` is `E(Y) = { y_s - y_s' : s != s' }`.
//! Given an estimate of it and one anchor point `z0`, [`reconstruct`] returns
//! a set `Y_est` containing `z0` with `E(Y_est) = E_est`, all comparisons
//! being made up to a per-axis tolerance.

use crate::imaging::PeakList;
use crate::prelude::*;
use crate::{Error, Point, Result};

/// Default cap on the number of recursive calls of [`reconstruct`].
pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;

/// Per-axis tolerance. Both cross-range axes share `cross`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub cross: f64,
    pub range: f64,
}

impl Tolerance {
    pub fn new(cross: f64, range: f64) -> Result<Self> {
        if !(cross > 0.0 && range > 0.0) {
            return Err(Error::invalid("tolerance", "must be positive on every axis"));
        }
        Ok(Tolerance { cross, range })
    }

    pub fn scaled(&self, factor: f64) -> Tolerance {
        Tolerance { cross: self.cross * factor, range: self.range * factor }
    }
}

/// `|u_i - v_i| < tol_i` on every axis.
pub fn vec_eq(u: Point, v: Point, tol: &Tolerance) -> bool {
    (u.x - v.x).abs() < tol.cross && (u.y - v.y).abs() < tol.cross && (u.z - v.z).abs() < tol.range
}

/// A set of offset vectors under tolerance equality. Every offset carries a
/// weight (a peak magnitude, or one) that fixes the search order.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetSet {
    offsets: Vec<Point>,
    weights: Vec<f64>,
    pub tolerance: Tolerance,
}

impl OffsetSet {
    pub fn new(tolerance: Tolerance) -> Self {
        OffsetSet { offsets: Vec::new(), weights: Vec::new(), tolerance }
    }

    /// Builds a set from raw offsets with unit weights.
    pub fn from_offsets(offsets: &[Point], tolerance: Tolerance) -> Self {
        let mut set = Self::new(tolerance);
        for &e in offsets {
            set.insert(e, 1.0);
        }
        set
    }

    /// Adds `e` unless an equal offset is already present; returns whether
    /// it was added.
    pub fn insert(&mut self, e: Point, weight: f64) -> bool {
        if self.contains(e) {
            return false;
        }
        self.offsets.push(e);
        self.weights.push(weight);
        true
    }

    pub fn contains(&self, e: Point) -> bool {
        self.offsets.iter().any(|&o| vec_eq(o, e, &self.tolerance))
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[Point] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.offsets.iter().copied().zip(self.weights.iter().copied())
    }

    /// Offsets by descending weight, ties broken lexicographically.
    pub fn ordered(&self) -> Vec<Point> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.weights[b]
                .total_cmp(&self.weights[a])
                .then_with(|| self.offsets[a].lex_cmp(&self.offsets[b]))
        });
        idx.into_iter().map(|i| self.offsets[i]).collect()
    }

    /// Tolerance equality of sets, using this set's tolerance.
    pub fn set_eq(&self, other: &OffsetSet) -> bool {
        self.offsets.iter().all(|&e| other.offsets.iter().any(|&o| vec_eq(e, o, &self.tolerance)))
            && other.offsets.iter().all(|&o| self.contains(o))
    }

    pub fn is_symmetric(&self) -> bool {
        self.offsets.iter().all(|&e| self.contains(-e))
    }
}

/// `E(Y)`, deduplicated under `tol`.
pub fn build_offsets(points: &[Point], tol: Tolerance) -> OffsetSet {
    let mut set = OffsetSet::new(tol);
    for (i, &a) in points.iter().enumerate() {
        for (j, &b) in points.iter().enumerate() {
            if i != j {
                set.insert(a - b, 1.0);
            }
        }
    }
    set
}

/// Drops every offset whose negative is absent.
pub fn symmetry_filter(set: &OffsetSet) -> OffsetSet {
    let mut out = OffsetSet::new(set.tolerance);
    for (e, w) in set.iter() {
        if set.contains(-e) {
            out.offsets.push(e);
            out.weights.push(w);
        }
    }
    out
}

/// `{ z_j - z0 }` over the detected peaks, without the self-peak at zero.
pub fn peaks_to_offsets(peaks: &PeakList, z0: Point, tol: Tolerance) -> OffsetSet {
    let mut set = OffsetSet::new(tol);
    for p in &peaks.peaks {
        let e = p.position - z0;
        if !vec_eq(e, Point::ORIGIN, &tol) {
            set.insert(e, p.magnitude);
        }
    }
    set
}

/// A reconstructed point set anchored at `z0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub points: Vec<Point>,
    pub anchor: Point,
}

impl Constellation {
    /// Point reflection about the anchor.
    pub fn reflected(&self) -> Constellation {
        let a = self.anchor;
        Constellation { points: self.points.iter().map(|&p| a * 2.0 - p).collect(), anchor: a }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn offsets(&self, tol: Tolerance) -> OffsetSet {
        build_offsets(&self.points, tol)
    }

    /// Whether the reflection is a distinct solution with the same offsets.
    pub fn reflection_ambiguous(&self, tol: &Tolerance) -> bool {
        !same_points(&self.points, &self.reflected().points, tol)
    }
}

/// Outcome of a reconstruction, with the number of recursive calls made.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub constellation: Option<Constellation>,
    pub nodes: usize,
}

/// Exhaustive recursive search with a cap on the number of calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Search {
    pub node_limit: usize,
}

impl Default for Search {
    fn default() -> Self {
        Search { node_limit: DEFAULT_NODE_LIMIT }
    }
}

struct State<'a> {
    target: &'a OffsetSet,
    z0: Point,
    nodes: usize,
    limit: usize,
}

impl Search {
    pub fn run(&self, e_est: &OffsetSet, z0: Point) -> Result<Reconstruction> {
        if !z0.is_finite() {
            return Err(Error::NonFinite("anchor"));
        }
        let order = e_est.ordered();
        let mut state = State { target: e_est, z0, nodes: 0, limit: self.node_limit };
        let mut y = vec![z0];
        let found = recurse(&mut state, &order, &mut y)?;
        Ok(Reconstruction {
            constellation: found.map(|points| Constellation { points, anchor: z0 }),
            nodes: state.nodes,
        })
    }
}

fn recurse(st: &mut State<'_>, remaining: &[Point], y: &mut Vec<Point>) -> Result<Option<Vec<Point>>> {
    st.nodes += 1;
    if st.nodes > st.limit {
        return Err(Error::SearchLimit(st.limit));
    }
    if build_offsets(y, st.target.tolerance).set_eq(st.target) {
        return Ok(Some(y.clone()));
    }
    for (i, &e) in remaining.iter().enumerate() {
        let cand = st.z0 + e;
        let fits = y.iter().all(|&p| st.target.contains(p - cand) && st.target.contains(cand - p));
        if fits {
            y.push(cand);
            let found = recurse(st, &remaining[i + 1..], y)?;
            y.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
    }
    Ok(None)
}

/// Reconstructs a constellation containing `z0` whose offset set equals
/// `e_est` (which should be symmetric). `Ok(None)` when no subset of the
/// candidates `z0 + e` matches.
pub fn reconstruct(e_est: &OffsetSet, z0: Point) -> Result<Option<Constellation>> {
    Ok(Search::default().run(e_est, z0)?.constellation)
}

fn same_points(a: &[Point], b: &[Point], tol: &Tolerance) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for &p in a {
        // Greedy matching is exact when points are separated by more than
        // twice the tolerance.
        match (0..b.len()).find(|&j| !used[j] && vec_eq(p, b[j], tol)) {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Whether `a` equals `b`, or the reflection of `b` about its anchor, after
/// moving the anchor of `b` onto the anchor of `a`.
pub fn congruent_up_to_reflection(a: &Constellation, b: &Constellation, tol: &Tolerance) -> bool {
    let shift = a.anchor - b.anchor;
    let moved = Constellation { points: b.points.iter().map(|&p| p + shift).collect(), anchor: a.anchor };
    same_points(&a.points, &moved.points, tol) || same_points(&a.points, &moved.reflected().points, tol)
}

/// Whether the point sets agree up to some translation and a point
/// reflection. Tries every anchoring of `b` onto the anchor of `a`.
pub fn congruent_any_anchor(a: &Constellation, b: &[Point], tol: &Tolerance) -> bool {
    b.iter().any(|&p| {
        congruent_up_to_reflection(a, &Constellation { points: b.to_vec(), anchor: p }, tol)
    })
}

/// Sorts points lexicographically; convenient for stable output.
pub fn sorted(points: &[Point]) -> Vec<Point> {
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.lex_cmp(b));
    v
}
