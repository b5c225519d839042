//! Random Fourier series realizations of the fluctuation field `mu`.
//!
//! A realization is
//!
//! ```text
//! mu(u) = w * sum_j [ a_j cos(k_j . u) + b_j sin(k_j . u) ],   w = 1 / sqrt(N)
//! ```
//!
//! with `a_j, b_j` independent standard normals and wavevectors `k_j` drawn
//! from the normalized spectral density of the autocorrelation
//! `exp(-|du|^2 / 2)`, which is the standard normal distribution in `d`
//! dimensions. Each realization is Gaussian with unit variance, and its
//! ensemble autocorrelation is exactly `E[cos(k . du)] = exp(-|du|^2 / 2)`.
//!
//! Random numbers come from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64`, and normals from the ziggurat sampler of `rand_distr`.
//! Draws are consumed mode by mode: `d` wavevector components (cross-range
//! first, range last), then the cosine and sine amplitudes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::prelude::*;
use crate::scales::PhysicsConfig;
use crate::{Error, Point, Result};

/// Default number of Fourier modes.
pub const DEFAULT_MODES: usize = 4096;

/// Every mode carries `1/N` of the spectral mass; realizations in which a
/// single mode carries more than 0.1% are rejected, so `N >= 1000`.
pub const MIN_MODES: usize = 1000;

/// One term of the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Wavevector in units of `1/ell`.
    pub wavevector: Point,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

/// An immutable, continuously evaluable realization of `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumRealization {
    pub seed: u64,
    pub dim: usize,
    pub sigma: f64,
    pub ell: f64,
    pub weight: f64,
    pub modes: Vec<Mode>,
}

impl MediumRealization {
    /// The homogeneous medium, `mu = 0`.
    pub fn homogeneous(dim: usize, ell: f64, sigma: f64) -> Self {
        MediumRealization { seed: 0, dim, sigma, ell, weight: 0.0, modes: Vec::new() }
    }

    /// A realization with explicitly given modes and a common weight.
    pub fn from_modes(modes: Vec<Mode>, weight: f64, dim: usize, ell: f64, sigma: f64) -> Self {
        MediumRealization { seed: 0, dim, sigma, ell, weight, modes }
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    /// `mu(point / ell)`.
    pub fn eval_mu(&self, point: Point) -> f64 {
        let u = point * (1.0 / self.ell);
        let sum: f64 = self
            .modes
            .iter()
            .map(|m| {
                let (s, c) = m.wavevector.dot(u).sin_cos();
                m.cos_amp * c + m.sin_amp * s
            })
            .sum();
        self.weight * sum
    }

    /// Mean of `mu` over the straight segment from `y` to `x`, written as
    /// `int_0^1 mu(((1-u) y + u x) / ell) du`.
    ///
    /// Each Fourier mode is integrated in closed form: a mode evaluated at
    /// the segment midpoint times `sinc(k . (x - y) / (2 ell))`. This is the
    /// zero-step limit of any quadrature rule applied to the series.
    pub fn segment_mean(&self, x: Point, y: Point) -> f64 {
        let inv = 1.0 / self.ell;
        let mid = (x + y) * (0.5 * inv);
        let span = (x - y) * inv;
        let sum: f64 = self
            .modes
            .iter()
            .map(|m| {
                let (s, c) = m.wavevector.dot(mid).sin_cos();
                let half = 0.5 * m.wavevector.dot(span);
                (m.cos_amp * c + m.sin_amp * s) * sinc(half)
            })
            .sum();
        self.weight * sum
    }

    /// Random travel time perturbation of the straight ray between `x` and `y`:
    /// `sigma |x - y| / (2 c0) * int_0^1 mu(((1-u) y + u x) / ell) du`.
    pub fn delta_tau(&self, x: Point, y: Point, cfg: &PhysicsConfig) -> Result<f64> {
        let len = x.distance(y);
        if len == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        Ok(self.sigma * len / (2.0 * cfg.c0()) * self.segment_mean(x, y))
    }

    /// Same as [`delta_tau`](Self::delta_tau), but with the segment integral
    /// evaluated by the composite midpoint rule with steps no longer than
    /// `max_step` (a length). Used to cross-check the closed form.
    pub fn delta_tau_midpoint(
        &self,
        x: Point,
        y: Point,
        cfg: &PhysicsConfig,
        max_step: f64,
    ) -> Result<f64> {
        let len = x.distance(y);
        if len == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        if !(max_step > 0.0) {
            return Err(Error::invalid("max_step", "must be positive"));
        }
        let n = (len / max_step).ceil().max(1.0) as usize;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for j in 0..n {
            let u = (j as f64 + 0.5) * h;
            acc += self.eval_mu(y * (1.0 - u) + x * u);
        }
        Ok(self.sigma * len / (2.0 * cfg.c0()) * acc * h)
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Draws a realization with `num_modes` modes in `dim` spatial dimensions.
pub fn generate_medium(
    seed: u64,
    num_modes: usize,
    dim: usize,
    ell: f64,
    sigma: f64,
) -> Result<MediumRealization> {
    if !matches!(dim, 2 | 3) {
        return Err(Error::invalid("dim", format!("must be 2 or 3, got {dim}")));
    }
    if num_modes < MIN_MODES {
        return Err(Error::TooFewModes { got: num_modes, min: MIN_MODES });
    }
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::invalid("ell", "must be finite and positive"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let modes = (0..num_modes)
        .map(|_| {
            let kx = normal();
            let ky = if dim == 3 { normal() } else { 0.0 };
            let kz = normal();
            let cos_amp = normal();
            let sin_amp = normal();
            Mode { wavevector: Point::new(kx, ky, kz), cos_amp, sin_amp }
        })
        .collect();
    Ok(MediumRealization {
        seed,
        dim,
        sigma,
        ell,
        weight: 1.0 / (num_modes as f64).sqrt(),
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PhysicsConfig {
        PhysicsConfig::reference_regime()
    }

    #[test]
    fn homogeneous_is_zero() {
        let m = MediumRealization::homogeneous(2, 1.0, 2e-6);
        assert_eq!(m.eval_mu(Point::planar(0.3, 12.0)), 0.0);
        let dt = m.delta_tau(Point::ORIGIN, Point::planar(0.0, 800.0), &cfg()).unwrap();
        assert_eq!(dt, 0.0);
    }

    #[test]
    fn single_mode_series() {
        let k = Point::planar(0.7, -1.3);
        let w = 0.25;
        let m = MediumRealization::from_modes(
            vec![Mode { wavevector: k, cos_amp: 1.0, sin_amp: 0.0 }],
            w,
            2,
            1.0,
            1e-3,
        );
        let u = Point::planar(1.9, 4.2);
        assert_eq!(m.eval_mu(u), w * k.dot(u).cos());
        assert_eq!(m.eval_mu(u), m.eval_mu(u));
    }

    #[test]
    fn constant_field_gives_straight_ray_delay() {
        let m = MediumRealization::from_modes(
            vec![Mode { wavevector: Point::ORIGIN, cos_amp: 1.0, sin_amp: 0.0 }],
            1.0,
            2,
            1.0,
            2e-6,
        );
        let c = cfg();
        let (x, y) = (Point::planar(3.0, 0.0), Point::planar(-1.0, 800.0));
        let dt = m.delta_tau(x, y, &c).unwrap();
        let expected = 2e-6 * x.distance(y) / (2.0 * c.c0());
        assert!((dt - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn coincident_endpoints_rejected() {
        let m = MediumRealization::homogeneous(2, 1.0, 2e-6);
        let p = Point::planar(1.0, 2.0);
        assert_eq!(m.delta_tau(p, p, &cfg()), Err(Error::CoincidentPoints));
    }

    #[test]
    fn too_few_modes_rejected() {
        assert!(matches!(
            generate_medium(1, 999, 2, 1.0, 2e-6),
            Err(Error::TooFewModes { got: 999, .. })
        ));
        assert!(generate_medium(1, 4096, 4, 1.0, 2e-6).is_err());
    }

    #[test]
    fn seeded_determinism() {
        let a = generate_medium(42, DEFAULT_MODES, 2, 1.0, 2e-6).unwrap();
        let b = generate_medium(42, DEFAULT_MODES, 2, 1.0, 2e-6).unwrap();
        let c = generate_medium(43, DEFAULT_MODES, 2, 1.0, 2e-6).unwrap();
        let p = Point::planar(0.37, 17.5);
        assert_eq!(a.eval_mu(p).to_bits(), b.eval_mu(p).to_bits());
        assert_ne!(a.eval_mu(p), c.eval_mu(p));
    }

    #[test]
    fn two_dimensional_modes_stay_in_plane() {
        let m = generate_medium(7, MIN_MODES, 2, 1.0, 2e-6).unwrap();
        assert!(m.modes.iter().all(|md| md.wavevector.y == 0.0));
        let m3 = generate_medium(7, MIN_MODES, 3, 1.0, 2e-6).unwrap();
        assert!(m3.modes.iter().any(|md| md.wavevector.y != 0.0));
    }

    #[test]
    fn sinc_branches_agree() {
        for x in [9.9e-5, 1.0e-4, 1.01e-4] {
            let series = 1.0 - x * x / 6.0 + x.powi(4) / 120.0;
            assert!((sinc(x) - series).abs() < 1e-15);
        }
        assert_eq!(sinc(0.0), 1.0);
    }
}
