use core::f64::consts::PI;

use num_complex::Complex64;

use super::{phi_hat, GridSpec, ImageGrid, WindowConfig, WINDOW_CUTOFF};
use crate::forward::ArrayData;
use crate::prelude::*;
use crate::scales::PhysicsConfig;
use crate::{Error, Point, Result};

/// A receiver pair that enters the image sum, with its window weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverPair {
    pub r: usize,
    pub rp: usize,
    pub weight: f64,
}

/// Frequency band of the time window around one frequency index.
#[derive(Debug, Clone)]
struct Band {
    first: usize,
    weights: Vec<f64>,
}

/// Evaluates imaging functions of one data set.
///
/// With `A_j(r, y) = p(w_j, x_r) exp(-i w_j tau(x_r, y))` the two-point image
/// is `(dw/2pi)^2 sum_{r,r'} Psi_rr' sum_{j,k} phi_hat((w_j - w_k)/Omega)
/// A_j(r, y) conj(A_k(r', y'))`, which equals the sum of
/// [`correlation_fd`](super::correlation_fd) values at `tbar` and
/// `ttil = tau(x_r', y') - tau(x_r, y)`. The inner sum over `j` only depends on
/// `(r, y)`, which makes offset images cost `O(N_pairs N_freq)` per node.
#[derive(Debug, Clone)]
pub struct Imager<'a> {
    data: &'a ArrayData,
    c0: f64,
    win: WindowConfig,
    taper: Option<f64>,
    pairs: Vec<ReceiverPair>,
    bands: Vec<Band>,
    uses_r: Vec<bool>,
    uses_rp: Vec<bool>,
}

impl<'a> Imager<'a> {
    pub fn new(data: &'a ArrayData, cfg: &PhysicsConfig, win: WindowConfig) -> Result<Self> {
        cfg.validate()?;
        let w = &data.grid.omegas;
        let cutoff = WINDOW_CUTOFF * win.omega;
        let bands = w
            .iter()
            .map(|&wk| {
                let first = w.iter().position(|&wj| (wj - wk).abs() <= cutoff).unwrap_or(0);
                let weights = w[first..]
                    .iter()
                    .take_while(|&&wj| (wj - wk).abs() <= cutoff)
                    .map(|&wj| phi_hat((wj - wk) / win.omega))
                    .collect();
                Band { first, weights }
            })
            .collect();
        let mut imager = Imager {
            data,
            c0: cfg.c0(),
            win,
            taper: None,
            pairs: Vec::new(),
            bands,
            uses_r: Vec::new(),
            uses_rp: Vec::new(),
        };
        imager.build_pairs();
        Ok(imager)
    }

    /// Weights each receiver by the Gaussian apodization
    /// `exp(-|x|^2 / (2 std^2))`, so a pair carries the product of two.
    pub fn with_taper(mut self, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite()) {
            return Err(Error::invalid("taper", "standard deviation must be positive"));
        }
        self.taper = Some(std);
        self.build_pairs();
        Ok(self)
    }

    fn build_pairs(&mut self) {
        let rx = &self.data.geometry.receivers;
        let apod = |x: Point| match self.taper {
            Some(s) => (-0.5 * x.cross_norm_sq() / (s * s)).exp(),
            None => 1.0,
        };
        let mut pairs = Vec::new();
        for (r, &a) in rx.iter().enumerate() {
            for (rp, &b) in rx.iter().enumerate() {
                let d = a.distance(b);
                if d <= WINDOW_CUTOFF * self.win.x {
                    pairs.push(ReceiverPair { r, rp, weight: self.win.psi(d) * apod(a) * apod(b) });
                }
            }
        }
        self.uses_r = vec![false; rx.len()];
        self.uses_rp = vec![false; rx.len()];
        for p in &pairs {
            self.uses_r[p.r] = true;
            self.uses_rp[p.rp] = true;
        }
        self.pairs = pairs;
    }

    pub fn pairs(&self) -> &[ReceiverPair] {
        &self.pairs
    }

    pub fn window(&self) -> WindowConfig {
        self.win
    }

    pub fn travel_time(&self, r: usize, y: Point) -> f64 {
        self.data.receiver(r).distance(y) / self.c0
    }

    /// `A_j(r, y)` for every receiver flagged in `mask`, receiver-major.
    fn steer(&self, y: Point, mask: &[bool]) -> Vec<Complex64> {
        let nf = self.data.num_frequencies();
        let mut out = vec![Complex64::new(0.0, 0.0); mask.len() * nf];
        for (r, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            let tau = self.travel_time(r, y);
            let row = &mut out[r * nf..(r + 1) * nf];
            for ((o, &w), &p) in row.iter_mut().zip(&self.data.grid.omegas).zip(self.data.spectrum(r)) {
                *o = p * Complex64::from_polar(1.0, -w * tau);
            }
        }
        out
    }

    /// `U_k(r, y) = sum_j phi_hat((w_j - w_k)/Omega) A_j(r, y)`.
    fn filtered(&self, y: Point) -> Vec<Complex64> {
        let nf = self.data.num_frequencies();
        let a = self.steer(y, &self.uses_r);
        let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
        for (r, _) in self.uses_r.iter().enumerate().filter(|(_, &m)| m) {
            let row = &a[r * nf..(r + 1) * nf];
            for (k, band) in self.bands.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&wt, &v) in band.weights.iter().zip(&row[band.first..]) {
                    acc += v * wt;
                }
                out[r * nf + k] = acc;
            }
        }
        out
    }

    fn pair_sum(&self, u: &[Complex64], a: &[Complex64]) -> Complex64 {
        let nf = self.data.num_frequencies();
        let mut total = Complex64::new(0.0, 0.0);
        for p in &self.pairs {
            let (ur, ar) = (&u[p.r * nf..(p.r + 1) * nf], &a[p.rp * nf..(p.rp + 1) * nf]);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, &y) in ur.iter().zip(ar) {
                acc += x * y.conj();
            }
            total += acc * p.weight;
        }
        let scale = self.data.grid.spacing / (2.0 * PI);
        total * (scale * scale)
    }

    /// `I(y, y')`.
    pub fn two_point_image(&self, y: Point, yp: Point) -> Result<Complex64> {
        check_point(y)?;
        check_point(yp)?;
        Ok(self.pair_sum(&self.filtered(y), &self.steer(yp, &self.uses_rp)))
    }

    /// The CINT image `I(y, y)` on every node of `spec`.
    pub fn cint_image(&self, spec: &GridSpec) -> Result<ImageGrid> {
        self.check_aliasing(spec, None)?;
        let values = map_nodes(spec, |y| {
            let u = self.filtered(y);
            self.pair_sum(&u, &self.steer(y, &self.uses_rp))
        });
        ImageGrid::new(*spec, values)
    }

    /// `I(z0, y')` for every node `y'` of `spec`.
    pub fn offset_image(&self, z0: Point, spec: &GridSpec) -> Result<ImageGrid> {
        check_point(z0)?;
        self.check_aliasing(spec, Some(z0))?;
        let u = self.filtered(z0);
        let values = map_nodes(spec, |y| self.pair_sum(&u, &self.steer(y, &self.uses_rp)));
        ImageGrid::new(*spec, values)
    }

    /// Conventional migration, `sum_r p(tau(x_r, y), x_r)`.
    pub fn migration_image(&self, spec: &GridSpec) -> Result<ImageGrid> {
        self.check_aliasing(spec, None)?;
        let all = vec![true; self.data.num_receivers()];
        let scale = self.data.grid.spacing / (2.0 * PI);
        let values = map_nodes(spec, |y| {
            let a = self.steer(y, &all);
            a.iter().copied().sum::<Complex64>() * scale
        });
        ImageGrid::new(*spec, values)
    }

    /// Fails when the travel times from some receiver to the nodes of `spec`
    /// (and `extra`) spread over more than the period `2 pi / dw` of the
    /// frequency sampling, which would fold distant arrivals onto the grid.
    pub fn check_aliasing(&self, spec: &GridSpec, extra: Option<Point>) -> Result<()> {
        let (lo, hi) = spec.bounds();
        if !(lo.z > 0.0) {
            return Err(Error::invalid("grid", "imaging points need a positive range"));
        }
        let (mut lo, mut hi) = (lo.to_array(), hi.to_array());
        if let Some(p) = extra {
            check_point(p)?;
            let p = p.to_array();
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let window = self.data.grid.period();
        for x in &self.data.geometry.receivers {
            let x = x.to_array();
            let mut near = 0.0;
            let mut far = 0.0;
            for a in 0..3 {
                let gap = (lo[a] - x[a]).max(x[a] - hi[a]).max(0.0);
                let reach = (x[a] - lo[a]).abs().max((hi[a] - x[a]).abs());
                near += gap * gap;
                far += reach * reach;
            }
            let spread = (far.sqrt() - near.sqrt()) / self.c0;
            if spread > window {
                return Err(Error::Aliasing { duration: spread, window });
            }
        }
        Ok(())
    }
}

fn check_point(y: Point) -> Result<()> {
    if !y.is_finite() {
        return Err(Error::NonFinite("imaging point"));
    }
    if !(y.z > 0.0) {
        return Err(Error::invalid("imaging point", "needs a positive range"));
    }
    Ok(())
}

#[cfg(feature = "rayon")]
fn map_nodes<F>(spec: &GridSpec, f: F) -> Vec<Complex64>
where
    F: Fn(Point) -> Complex64 + Sync + Send,
{
    use rayon::prelude::*;
    (0..spec.len()).into_par_iter().map(|i| f(spec.node(i))).collect()
}

#[cfg(not(feature = "rayon"))]
fn map_nodes<F>(spec: &GridSpec, f: F) -> Vec<Complex64>
where
    F: Fn(Point) -> Complex64,
{
    (0..spec.len()).map(|i| f(spec.node(i))).collect()
}
