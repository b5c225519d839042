//! Frequency-domain array data in the random travel time model.
//!
//! The recorded spectrum at receiver `x_r` is
//! `p(omega, x_r) = f(omega) * sum_s G(omega, x_r, y_s) + W(omega, x_r)`,
//! with the Gaussian pulse spectrum `f`, the Green's function
//! `G = exp(i omega (tau + dtau)) / (4 pi |x - y|)` and complex circular
//! Gaussian noise `W`. Travel times use the exact Euclidean distance.

use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::medium::MediumRealization;
use crate::prelude::*;
use crate::scales::{PhysicsConfig, OMEGA0};
use crate::{Error, Point, Result};

/// Default number of frequency samples.
pub const DEFAULT_FREQUENCIES: usize = 257;

/// Half width of the frequency grid, in units of the bandwidth.
pub const GRID_HALF_WIDTH: f64 = 4.0;

/// Receiver positions on the plane `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub receivers: Vec<Point>,
    pub aperture: f64,
}

impl ArrayGeometry {
    pub fn new(receivers: Vec<Point>, aperture: f64) -> Result<Self> {
        if receivers.len() < 2 {
            return Err(Error::invalid("receivers", "need at least two receivers"));
        }
        if !(aperture > 0.0) {
            return Err(Error::invalid("aperture", "must be positive"));
        }
        if receivers.iter().any(|r| r.z != 0.0 || !r.is_finite()) {
            return Err(Error::invalid("receivers", "receivers must lie on the plane z = 0"));
        }
        let slack = aperture * (1.0 + 1e-12);
        for (i, a) in receivers.iter().enumerate() {
            for b in &receivers[i + 1..] {
                if (*a - *b).cross_norm_sq().sqrt() > slack {
                    return Err(Error::invalid("receivers", "receiver spread exceeds the aperture"));
                }
            }
        }
        Ok(ArrayGeometry { receivers, aperture })
    }

    /// `count` receivers evenly spaced on the segment `[-a/2, a/2]`.
    pub fn linear(count: usize, aperture: f64) -> Result<Self> {
        Self::linear_with_spacing(count, aperture, aperture / (count.max(2) - 1) as f64)
    }

    /// `count` receivers `spacing` apart, centered on the origin.
    pub fn linear_with_spacing(count: usize, aperture: f64, spacing: f64) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid("receivers", "need at least two receivers"));
        }
        let half = 0.5 * spacing * (count - 1) as f64;
        let receivers = (0..count).map(|i| Point::planar(i as f64 * spacing - half, 0.0)).collect();
        Self::new(receivers, aperture)
    }

    /// `side * side` receivers on a square grid filling `[-a/2, a/2]^2`.
    pub fn square(side: usize, aperture: f64) -> Result<Self> {
        if side < 2 {
            return Err(Error::invalid("receivers", "need at least two receivers per side"));
        }
        let h = aperture / (side - 1) as f64;
        let mut receivers = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                receivers.push(Point::new(i as f64 * h - 0.5 * aperture, j as f64 * h - 0.5 * aperture, 0.0));
            }
        }
        // The diagonal of the square exceeds its side; the aperture invariant
        // is checked on the side length.
        let diag = aperture * core::f64::consts::SQRT_2;
        let mut g = Self::new(receivers, diag)?;
        g.aperture = aperture;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.receivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.receivers.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet {
    pub positions: Vec<Point>,
}

impl SourceSet {
    pub fn new(positions: Vec<Point>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptySources);
        }
        if positions.iter().any(|p| !(p.z > 0.0) || !p.is_finite()) {
            return Err(Error::invalid("sources", "every source needs a positive range"));
        }
        Ok(SourceSet { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Uniform angular frequency samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub omegas: Vec<f64>,
    pub center: f64,
    pub spacing: f64,
}

impl FrequencyGrid {
    /// `samples` frequencies covering `[omega0 - 4B, omega0 + 4B]`.
    pub fn new(bandwidth: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::invalid("samples", "need at least two frequencies"));
        }
        if !(bandwidth > 0.0) || GRID_HALF_WIDTH * bandwidth >= OMEGA0 {
            return Err(Error::invalid("bandwidth", "grid must stay at positive frequencies"));
        }
        let lo = OMEGA0 - GRID_HALF_WIDTH * bandwidth;
        let spacing = 2.0 * GRID_HALF_WIDTH * bandwidth / (samples - 1) as f64;
        let omegas = (0..samples).map(|j| lo + j as f64 * spacing).collect();
        Ok(FrequencyGrid { omegas, center: OMEGA0, spacing })
    }

    pub fn for_config(cfg: &PhysicsConfig, samples: usize) -> Result<Self> {
        Self::new(cfg.bandwidth(), samples)
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Longest time span that the grid resolves without wrap-around, `2 pi / d omega`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    pub fn max(&self) -> f64 {
        *self.omegas.last().unwrap()
    }
}

/// Recorded spectra `p(omega_j, x_r)`, stored receiver-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayData {
    pub values: Vec<Complex64>,
    /// Noise-free spectra, when known.
    pub clean: Option<Vec<Complex64>>,
    pub grid: FrequencyGrid,
    pub geometry: ArrayGeometry,
    pub noise_level: f64,
}

impl ArrayData {
    pub fn new(
        geometry: ArrayGeometry,
        grid: FrequencyGrid,
        values: Vec<Complex64>,
        noise_level: f64,
    ) -> Result<Self> {
        if values.len() != geometry.len() * grid.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} receivers x {} frequencies",
                values.len(),
                geometry.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("values", "non-finite data entry"));
        }
        Ok(ArrayData { values, clean: None, grid, geometry, noise_level })
    }

    pub fn num_receivers(&self) -> usize {
        self.geometry.len()
    }

    pub fn num_frequencies(&self) -> usize {
        self.grid.len()
    }

    pub fn spectrum(&self, r: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.values[r * n..(r + 1) * n]
    }

    pub fn receiver(&self, r: usize) -> Point {
        self.geometry.receivers[r]
    }

    pub fn scaled(&self, factor: f64) -> ArrayData {
        ArrayData {
            values: self.values.iter().map(|v| v * factor).collect(),
            clean: self.clean.as_ref().map(|c| c.iter().map(|v| v * factor).collect()),
            ..self.clone()
        }
    }
}

/// Spectrum of the unit-energy Gaussian pulse,
/// `(sqrt(2 pi) / B)^(1/2) exp(-(omega - omega0)^2 / (4 B^2))`.
pub fn pulse_spectrum(omega: f64, cfg: &PhysicsConfig) -> Complex64 {
    let b = cfg.bandwidth();
    let d = omega - OMEGA0;
    Complex64::new(((2.0 * PI).sqrt() / b).sqrt() * (-d * d / (4.0 * b * b)).exp(), 0.0)
}

/// Homogeneous travel time `|x - y| / c0`.
pub fn travel_time(x: Point, y: Point, c0: f64) -> f64 {
    x.distance(y) / c0
}

/// Random travel time Green's function.
pub fn green_function(
    omega: f64,
    x: Point,
    y: Point,
    medium: &MediumRealization,
    cfg: &PhysicsConfig,
) -> Result<Complex64> {
    let dist = x.distance(y);
    if dist == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let delay = dist / cfg.c0() + medium.delta_tau(x, y, cfg)?;
    Ok(Complex64::from_polar(1.0 / (4.0 * PI * dist), omega * delay))
}

/// Synthesizes the array spectra of `sources` through `medium`, adding
/// complex Gaussian noise of standard deviation `noise_level * max |p|`.
pub fn synthesize(
    geometry: &ArrayGeometry,
    sources: &SourceSet,
    medium: &MediumRealization,
    cfg: &PhysicsConfig,
    grid: &FrequencyGrid,
    noise_level: f64,
    noise_seed: u64,
) -> Result<ArrayData> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    if !(noise_level >= 0.0 && noise_level.is_finite()) {
        return Err(Error::invalid("noise_level", "must be finite and non-negative"));
    }
    let c0 = cfg.c0();
    let pulse: Vec<Complex64> = grid.omegas.iter().map(|&w| pulse_spectrum(w, cfg)).collect();
    let nf = grid.len();
    let mut clean = vec![Complex64::new(0.0, 0.0); geometry.len() * nf];
    for (r, &x) in geometry.receivers.iter().enumerate() {
        // (delay, amplitude) per source, in source order.
        let rays = sources
            .positions
            .iter()
            .map(|&y| {
                let dist = x.distance(y);
                if dist == 0.0 {
                    return Err(Error::CoincidentPoints);
                }
                Ok((dist / c0 + medium.delta_tau(x, y, cfg)?, 1.0 / (4.0 * PI * dist)))
            })
            .collect::<Result<Vec<_>>>()?;
        let row = &mut clean[r * nf..(r + 1) * nf];
        for (j, (&w, out)) in grid.omegas.iter().zip(row.iter_mut()).enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(delay, amp) in &rays {
                acc += pulse[j] * Complex64::from_polar(amp, w * delay);
            }
            *out = acc;
        }
    }

    let mut values = clean.clone();
    if noise_level > 0.0 {
        let peak = clean.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let std = noise_level * peak * core::f64::consts::FRAC_1_SQRT_2;
        let mut rng = ChaCha20Rng::seed_from_u64(noise_seed);
        for v in values.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re * std, im * std);
        }
    }
    let mut data = ArrayData::new(geometry.clone(), grid.clone(), values, noise_level)?;
    data.clean = Some(clean);
    Ok(data)
}

/// Time samples of the trace at receiver `r`,
/// `p(t) = sum_j (d omega / 2 pi) exp(-i omega_j t) p(omega_j)`.
pub fn time_trace(data: &ArrayData, r: usize, times: &[f64]) -> Result<Vec<Complex64>> {
    if let (Some(lo), Some(hi)) = (
        times.iter().copied().reduce(f64::min),
        times.iter().copied().reduce(f64::max),
    ) {
        let window = data.grid.period();
        if hi - lo > window {
            return Err(Error::Aliasing { duration: hi - lo, window });
        }
    }
    let spec = data.spectrum(r);
    let scale = data.grid.spacing / (2.0 * PI);
    Ok(times
        .iter()
        .map(|&t| {
            let sum: Complex64 = data
                .grid
                .omegas
                .iter()
                .zip(spec)
                .map(|(&w, &p)| p * Complex64::from_polar(1.0, -w * t))
                .sum();
            sum * scale
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::Mode;

    fn cfg() -> PhysicsConfig {
        PhysicsConfig::reference_regime()
    }

    fn homogeneous() -> MediumRealization {
        MediumRealization::homogeneous(2, 1.0, 2e-6)
    }

    #[test]
    fn pulse_peak_and_decay() {
        let c = cfg();
        let peak = pulse_spectrum(OMEGA0, &c).re;
        assert!((peak - ((2.0 * PI).sqrt() / c.bandwidth()).sqrt()).abs() < 1e-15);
        let two_b = pulse_spectrum(OMEGA0 + 2.0 * c.bandwidth(), &c).re;
        assert!((two_b / peak - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(pulse_spectrum(1.3, &c).im, 0.0);
    }

    #[test]
    fn pulse_energy_on_default_grid() {
        // Dense Simpson quadrature of |f|^2 / (2 pi) over +-12 B as the oracle.
        let c = cfg();
        let b = c.bandwidth();
        let n = 20_000;
        let (lo, hi) = (OMEGA0 - 12.0 * b, OMEGA0 + 12.0 * b);
        let h = (hi - lo) / n as f64;
        let f = |w: f64| pulse_spectrum(w, &c).norm_sqr() / (2.0 * PI);
        let mut dense = f(lo) + f(hi);
        for i in 1..n {
            dense += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        dense *= h / 3.0;
        assert!((dense - 1.0).abs() < 1e-10);

        let grid = FrequencyGrid::for_config(&c, DEFAULT_FREQUENCIES).unwrap();
        let riemann: f64 = grid.omegas.iter().map(|&w| f(w) * grid.spacing).sum();
        assert!((riemann - dense).abs() < 1e-4);
    }

    #[test]
    fn grid_layout() {
        let g = FrequencyGrid::new(0.2, 257).unwrap();
        assert_eq!(g.len(), 257);
        assert!((g.omegas[0] - 0.2).abs() < 1e-15);
        assert!((g.max() - 1.8).abs() < 1e-12);
        assert!((g.omegas[128] - 1.0).abs() < 1e-15);
        assert!(FrequencyGrid::new(0.3, 257).is_err());
    }

    #[test]
    fn green_function_homogeneous() {
        let c = cfg();
        let (x, y) = (Point::planar(2.0, 0.0), Point::planar(0.1, 800.0));
        let w = 1.1;
        let g = green_function(w, x, y, &homogeneous(), &c).unwrap();
        let dist = x.distance(y);
        assert!((g.norm() - 1.0 / (4.0 * PI * dist)).abs() < 1e-18);
        let expected = Complex64::from_polar(1.0, w * (dist / c.c0()));
        let got = g * (4.0 * PI * dist);
        assert!((got - expected).norm() < 1e-12);
        assert_eq!(green_function(w, x, x, &homogeneous(), &c), Err(Error::CoincidentPoints));
    }

    #[test]
    fn green_amplitude_is_deterministic() {
        let c = cfg();
        let m = crate::medium::generate_medium(3, 1000, 2, 1.0, c.sigma).unwrap();
        let (x, y) = (Point::planar(-4.0, 0.0), Point::planar(0.0, 800.0));
        let a = green_function(0.9, x, y, &m, &c).unwrap().norm();
        let b = green_function(0.9, x, y, &homogeneous(), &c).unwrap().norm();
        assert!((a - b).abs() <= 1e-15 * b);
    }

    #[test]
    fn single_source_noise_free_entries() {
        let c = cfg();
        let geom = ArrayGeometry::linear(4, 16.0).unwrap();
        let src = SourceSet::new(vec![Point::planar(0.01, 800.0)]).unwrap();
        let grid = FrequencyGrid::for_config(&c, 33).unwrap();
        let data = synthesize(&geom, &src, &homogeneous(), &c, &grid, 0.0, 0).unwrap();
        for r in 0..geom.len() {
            let dist = geom.receivers[r].distance(src.positions[0]);
            for (j, &w) in grid.omegas.iter().enumerate() {
                let expected = pulse_spectrum(w, &c)
                    * Complex64::from_polar(1.0 / (4.0 * PI * dist), w * (dist / c.c0()));
                assert_eq!(data.spectrum(r)[j], expected);
            }
        }
    }

    #[test]
    fn superposition_is_bit_exact() {
        let c = cfg();
        let geom = ArrayGeometry::linear(5, 16.0).unwrap();
        let grid = FrequencyGrid::for_config(&c, 17).unwrap();
        let m = crate::medium::generate_medium(9, 1000, 2, 1.0, c.sigma).unwrap();
        let (a, b) = (Point::planar(0.0, 800.0), Point::planar(3e-4, 800.00001));
        let run = |pos: Vec<Point>| {
            synthesize(&geom, &SourceSet::new(pos).unwrap(), &m, &c, &grid, 0.0, 0).unwrap()
        };
        let both = run(vec![a, b]);
        let (da, db) = (run(vec![a]), run(vec![b]));
        for i in 0..both.values.len() {
            assert_eq!(both.values[i], da.values[i] + db.values[i]);
        }
    }

    #[test]
    fn empty_sources_rejected() {
        assert_eq!(SourceSet::new(vec![]), Err(Error::EmptySources));
        assert!(SourceSet::new(vec![Point::planar(0.0, -1.0)]).is_err());
    }

    #[test]
    fn geometry_invariants() {
        assert!(ArrayGeometry::linear(1, 16.0).is_err());
        assert!(ArrayGeometry::linear_with_spacing(10, 16.0, 2.0).is_err());
        assert!(ArrayGeometry::new(vec![Point::planar(0.0, 0.0), Point::planar(1.0, 0.1)], 4.0).is_err());
        let g = ArrayGeometry::linear(64, 16.0).unwrap();
        assert!((g.receivers[0].x + 8.0).abs() < 1e-12 && (g.receivers[63].x - 8.0).abs() < 1e-12);
        assert_eq!(ArrayGeometry::square(3, 2.0).unwrap().len(), 9);
    }

    #[test]
    fn reciprocity_of_single_source_amplitude() {
        let c = cfg();
        let m = crate::medium::generate_medium(5, 1000, 2, 1.0, c.sigma).unwrap();
        let grid = FrequencyGrid::for_config(&c, 9).unwrap();
        let x = Point::planar(1.5, 0.0);
        let y = Point::planar(0.2, 300.0);
        let fwd = synthesize(
            &ArrayGeometry::new(vec![x, Point::planar(-1.0, 0.0)], 4.0).unwrap(),
            &SourceSet::new(vec![y]).unwrap(),
            &m,
            &c,
            &grid,
            0.0,
            0,
        )
        .unwrap();
        // Swap roles: a source at the receiver position seen from y.
        for (j, &w) in grid.omegas.iter().enumerate() {
            let g = green_function(w, y, x, &m, &c).unwrap() * pulse_spectrum(w, &c);
            assert!((fwd.spectrum(0)[j].norm() - g.norm()).abs() < 1e-18);
        }
    }

    #[test]
    fn time_trace_basics() {
        let c = cfg();
        let geom = ArrayGeometry::linear(2, 16.0).unwrap();
        let grid = FrequencyGrid::for_config(&c, 33).unwrap();
        let zero = ArrayData::new(geom.clone(), grid.clone(), vec![Complex64::new(0.0, 0.0); 66], 0.0).unwrap();
        assert!(time_trace(&zero, 0, &[0.0, 3.0]).unwrap().iter().all(|v| v.norm() == 0.0));

        let mut vals = vec![Complex64::new(0.0, 0.0); 66];
        vals[7] = Complex64::new(1.0, 0.0);
        let one = ArrayData::new(geom, grid.clone(), vals, 0.0).unwrap();
        let t = 12.5;
        let got = time_trace(&one, 0, &[t]).unwrap()[0];
        let expected = Complex64::from_polar(grid.spacing / (2.0 * PI), -grid.omegas[7] * t);
        assert!((got - expected).norm() < 1e-15);

        let too_long = [0.0, grid.period() * 1.01];
        assert!(matches!(time_trace(&one, 0, &too_long), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn constant_medium_shifts_phase() {
        let c = cfg();
        let m = MediumRealization::from_modes(
            vec![Mode { wavevector: Point::ORIGIN, cos_amp: 1.0, sin_amp: 0.0 }],
            1.0,
            2,
            1.0,
            c.sigma,
        );
        let (x, y) = (Point::ORIGIN, Point::planar(0.0, 100.0));
        let g = green_function(1.0, x, y, &m, &c).unwrap();
        let delay = 100.0 / c.c0() * (1.0 + c.sigma / 2.0);
        let expected = Complex64::from_polar(1.0 / (400.0 * PI), delay);
        // The phase is about 6e7 rad, so agreement is limited by its ulp.
        assert!((g - expected).norm() < 1e-7 * expected.norm(), "{g} {expected}");
    }
}
