use num_complex::Complex64;

use crate::prelude::*;
use crate::{Error, Point, Result};

/// A regular mesh of imaging points. Axis 0 and 1 are cross-range, axis 2
/// is range. Nodes are stored with axis 0 running fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Point,
    pub spacing: [f64; 3],
    pub shape: [usize; 3],
}

impl GridSpec {
    pub fn new(origin: Point, spacing: [f64; 3], shape: [usize; 3]) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::NonFinite("grid origin"));
        }
        if shape.contains(&0) {
            return Err(Error::invalid("shape", "every axis needs at least one node"));
        }
        for (axis, (&h, &n)) in spacing.iter().zip(&shape).enumerate() {
            if n > 1 && !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid("spacing", format!("axis {axis} spacing must be positive")));
            }
        }
        Ok(GridSpec { origin, spacing, shape })
    }

    /// A grid with `shape` nodes centered on `center`.
    pub fn centered(center: Point, spacing: [f64; 3], shape: [usize; 3]) -> Result<Self> {
        let mut o = center.to_array();
        for a in 0..3 {
            o[a] -= 0.5 * spacing[a] * (shape[a].max(1) - 1) as f64;
        }
        Self::new(Point::from_array(o), spacing, shape)
    }

    /// Planar grid in the (cross-range, range) plane.
    pub fn planar(center: Point, cross_spacing: f64, range_spacing: f64, nx: usize, nz: usize) -> Result<Self> {
        Self::centered(center, [cross_spacing, 1.0, range_spacing], [nx, 1, nz])
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[2] * self.shape[1] + i[1]) * self.shape[0] + i[0]
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let ix = flat % self.shape[0];
        let rest = flat / self.shape[0];
        [ix, rest % self.shape[1], rest / self.shape[1]]
    }

    pub fn node_at(&self, i: [usize; 3]) -> Point {
        let o = self.origin.to_array();
        Point::new(
            o[0] + i[0] as f64 * self.spacing[0],
            o[1] + i[1] as f64 * self.spacing[1],
            o[2] + i[2] as f64 * self.spacing[2],
        )
    }

    pub fn node(&self, flat: usize) -> Point {
        self.node_at(self.multi_index(flat))
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Lower and upper corners.
    pub fn bounds(&self) -> (Point, Point) {
        (self.origin, self.node_at([self.shape[0] - 1, self.shape[1] - 1, self.shape[2] - 1]))
    }

    /// Nearest node index to `p`, clamped to the grid.
    pub fn nearest(&self, p: Point) -> [usize; 3] {
        let (o, q) = (self.origin.to_array(), p.to_array());
        let mut out = [0; 3];
        for a in 0..3 {
            if self.shape[a] > 1 {
                let k = ((q[a] - o[a]) / self.spacing[a]).round();
                out[a] = k.clamp(0.0, (self.shape[a] - 1) as f64) as usize;
            }
        }
        out
    }

    /// The nodes that lie inside the box `[lo, hi]`, as a new grid with the
    /// same spacing. `None` when the intersection is empty.
    pub fn clip(&self, lo: Point, hi: Point) -> Option<GridSpec> {
        let (o, l, h) = (self.origin.to_array(), lo.to_array(), hi.to_array());
        let mut first = [0usize; 3];
        let mut shape = [1usize; 3];
        for a in 0..3 {
            if self.shape[a] == 1 {
                continue;
            }
            let s = self.spacing[a];
            let eps = 1e-9 * s;
            let i0 = ((l[a] - o[a] - eps) / s).ceil().max(0.0);
            let i1 = ((h[a] - o[a] + eps) / s).floor().min((self.shape[a] - 1) as f64);
            if i1 < i0 {
                return None;
            }
            first[a] = i0 as usize;
            shape[a] = (i1 - i0) as usize + 1;
        }
        GridSpec::new(self.node_at(first), self.spacing, shape).ok()
    }
}

/// Complex image values on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

impl ImageGrid {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Dimension(format!("{} values for {} nodes", values.len(), spec.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("image value"));
        }
        Ok(ImageGrid { spec, values })
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Flat index and magnitude of the largest `|value|`; the first one on ties.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, v) in self.values.iter().enumerate() {
            let m = v.norm();
            if m > best.1 {
                best = (i, m);
            }
        }
        best
    }

    pub fn max_norm(&self) -> f64 {
        self.argmax().1.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = GridSpec::new(Point::ORIGIN, [1.0, 2.0, 3.0], [4, 3, 5]).unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.index(g.multi_index(flat)), flat);
        }
        assert_eq!(g.node(1), Point::new(1.0, 0.0, 0.0));
        assert_eq!(g.node(4), Point::new(0.0, 2.0, 0.0));
        assert_eq!(g.node(12), Point::new(0.0, 0.0, 3.0));
    }

    #[test]
    fn centered_and_nearest() {
        let g = GridSpec::planar(Point::planar(1.0, 100.0), 0.5, 0.1, 5, 3).unwrap();
        assert_eq!(g.node_at([2, 0, 1]), Point::planar(1.0, 100.0));
        assert_eq!(g.nearest(Point::planar(1.2, 100.06)), [2, 0, 2]);
        assert_eq!(g.nearest(Point::planar(-9.0, 0.0)), [0, 0, 0]);
    }

    #[test]
    fn clipping() {
        let g = GridSpec::planar(Point::ORIGIN, 1.0, 1.0, 11, 11).unwrap();
        let c = g.clip(Point::planar(-2.5, -1.0), Point::planar(1.0, 0.5)).unwrap();
        assert_eq!(c.shape, [4, 1, 2]);
        assert_eq!(c.origin, Point::planar(-2.0, -1.0));
        assert!(g.clip(Point::planar(6.0, 0.0), Point::planar(7.0, 1.0)).is_none());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(Point::ORIGIN, [0.0, 1.0, 1.0], [2, 1, 1]).is_err());
        assert!(GridSpec::new(Point::ORIGIN, [1.0, 1.0, 1.0], [0, 1, 1]).is_err());
        let g = GridSpec::new(Point::ORIGIN, [1.0; 3], [2, 1, 1]).unwrap();
        assert!(ImageGrid::new(g, vec![Complex64::new(0.0, 0.0)]).is_err());
    }
}
