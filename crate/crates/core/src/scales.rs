//! Statistical and resolution scales of the random travel time regime.
//!
//! All quantities are in the internal unit system: lengths relative to the
//! correlation length `ell` (normally 1) and frequencies relative to the
//! central frequency, `omega0 = 1`.

use core::f64::consts::PI;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::prelude::*;
use crate::{Error, Result};

/// Central frequency. Every frequency is expressed as a multiple of it.
pub const OMEGA0: f64 = 1.0;

/// Lower bound of the cross-range offset coefficient of the kernel envelope.
pub const GAMMA1_MIN: f64 = 6.0 * core::f64::consts::SQRT_2;

/// Raw physical parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PhysicsConfig {
    /// Central wavelength.
    pub lambda0: f64,
    /// Correlation length of the fluctuations.
    pub ell: f64,
    /// Distance from the array to the imaging region.
    pub range: f64,
    /// Array aperture.
    pub aperture: f64,
    /// Fluctuation strength.
    pub sigma: f64,
    /// Bandwidth over central frequency, `B / omega0`.
    pub bandwidth_frac: f64,
    /// Receiver-pair window as a fraction of the decorrelation length.
    pub window_x_factor: f64,
    /// Time window frequency as a fraction of the decorrelation frequency.
    pub window_omega_factor: f64,
    /// Number of cross-range dimensions, 1 or 2.
    pub cross_range_dim: usize,
}

impl PhysicsConfig {
    /// Strong-clutter regime used for the desk experiments: `lambda0 = 1.1e-5`,
    /// `L = 800`, `a = 16`, `sigma = 2e-6`, `B = omega0/5`, windows at a third
    /// of the decorrelation scales, one cross-range dimension.
    pub fn reference_regime() -> Self {
        PhysicsConfig {
            lambda0: 1.1e-5,
            ell: 1.0,
            range: 800.0,
            aperture: 16.0,
            sigma: 2e-6,
            bandwidth_frac: 0.2,
            window_x_factor: 1.0 / 3.0,
            window_omega_factor: 1.0 / 3.0,
            cross_range_dim: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda0", self.lambda0),
            ("ell", self.ell),
            ("range", self.range),
            ("aperture", self.aperture),
            ("sigma", self.sigma),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        if !(self.bandwidth_frac > 0.0 && self.bandwidth_frac < 1.0) {
            return Err(Error::invalid("bandwidth_frac", "must lie in (0, 1)"));
        }
        for (name, v) in [
            ("window_x_factor", self.window_x_factor),
            ("window_omega_factor", self.window_omega_factor),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(name, format!("must lie in (0, 1], got {v}")));
            }
        }
        if !matches!(self.cross_range_dim, 1 | 2) {
            return Err(Error::invalid("cross_range_dim", "must be 1 or 2"));
        }
        Ok(())
    }

    /// Background wave speed, `lambda0 * omega0 / (2 pi)`.
    pub fn c0(&self) -> f64 {
        self.lambda0 * OMEGA0 / (2.0 * PI)
    }

    /// Central wavenumber, `2 pi / lambda0`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth_frac * OMEGA0
    }

    /// Spatial dimension of the medium, `1 + cross_range_dim`.
    pub fn dim(&self) -> usize {
        1 + self.cross_range_dim
    }
}

/// How a validity ratio is expected to compare with one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum RatioTarget {
    MuchLessThanOne,
    MuchGreaterThanOne,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ValidityRatio {
    pub name: String,
    pub value: f64,
    pub target: RatioTarget,
}

impl ValidityRatio {
    /// Whether the ratio is at least on the right side of one. "Much" is never
    /// quantified, so callers that care should inspect `value`.
    pub fn satisfied(&self) -> bool {
        match self.target {
            RatioTarget::MuchLessThanOne => self.value < 1.0,
            RatioTarget::MuchGreaterThanOne => self.value > 1.0,
        }
    }
}

/// Every derived scale of a [`PhysicsConfig`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ScaleReport {
    pub c0: f64,
    pub k0: f64,
    pub bandwidth: f64,
    /// Scattering mean free path `S`.
    pub scattering_mean_free_path: f64,
    /// Decorrelation frequency `Omega_d`.
    pub decorrelation_frequency: f64,
    /// Decorrelation length `X_d`.
    pub decorrelation_length: f64,
    /// Time window parameter `Omega`.
    pub window_frequency: f64,
    /// Receiver-pair window parameter `X`.
    pub window_length: f64,
    /// Effective frequency scale `Omega_e`.
    pub effective_frequency: f64,
    /// Effective length scale `X_e`.
    pub effective_length: f64,
    pub gamma: f64,
    pub theta: f64,
    /// Lower bound of `gamma_1`, attained when the center offset vanishes.
    pub gamma1_min: f64,
    /// `L / (k0 X_e)`.
    pub cint_cross_range_resolution: f64,
    /// `c0 / Omega_e`.
    pub cint_range_resolution: f64,
    /// `L / (k0 a)`.
    pub fine_cross_range_resolution: f64,
    /// `c0 / B`.
    pub fine_range_resolution: f64,
    pub validity_ratios: Vec<ValidityRatio>,
}

fn finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(name))
    }
}

/// Derives every scale from the raw parameters.
pub fn compute_scales(cfg: &PhysicsConfig) -> Result<ScaleReport> {
    cfg.validate()?;
    let two_pi = 2.0 * PI;
    let b = cfg.bandwidth();
    let c0 = cfg.c0();
    let k0 = cfg.k0();

    let omega_d = finite(
        "decorrelation_frequency",
        2.0 * OMEGA0 * two_pi.powf(-1.25) * cfg.lambda0 / (cfg.sigma * (cfg.ell * cfg.range).sqrt()),
    )?;
    let x_d = finite("decorrelation_length", 3f64.sqrt() * cfg.ell * omega_d / OMEGA0)?;
    let s = finite(
        "scattering_mean_free_path",
        8.0 * cfg.lambda0 * cfg.lambda0 / (two_pi.powf(2.5) * cfg.sigma * cfg.sigma * cfg.ell),
    )?;

    let omega = cfg.window_omega_factor * omega_d;
    let x = cfg.window_x_factor * x_d;
    let apod = cfg.aperture / 6.0;
    let omega_e = finite(
        "effective_frequency",
        1.0 / (1.0 / (omega * omega) + 1.0 / (omega_d * omega_d) + 1.0 / (4.0 * b * b)).sqrt(),
    )?;
    let x_e = finite(
        "effective_length",
        1.0 / (1.0 / (x * x) + 1.0 / (x_d * x_d) + 1.0 / (4.0 * apod * apod)).sqrt(),
    )?;
    let gamma = finite("gamma", 4.0 * x_d * x_d / (4.0 * x_d * x_d - x_e * x_e))?;
    let theta = finite("theta", OMEGA0 * x_e / (omega_e * apod))?;

    let mut report = ScaleReport {
        c0,
        k0,
        bandwidth: b,
        scattering_mean_free_path: s,
        decorrelation_frequency: omega_d,
        decorrelation_length: x_d,
        window_frequency: omega,
        window_length: x,
        effective_frequency: omega_e,
        effective_length: x_e,
        gamma,
        theta,
        gamma1_min: GAMMA1_MIN,
        cint_cross_range_resolution: finite("cint_cross_range_resolution", cfg.range / (k0 * x_e))?,
        cint_range_resolution: finite("cint_range_resolution", c0 / omega_e)?,
        fine_cross_range_resolution: finite(
            "fine_cross_range_resolution",
            cfg.range / (k0 * cfg.aperture),
        )?,
        fine_range_resolution: finite("fine_range_resolution", c0 / b)?,
        validity_ratios: Vec::new(),
    };
    report.validity_ratios = check_regime(cfg, &report);
    Ok(report)
}

/// Named dimensionless ratios that should be small in the random travel time
/// regime. Never fails: the ratios are advisory.
pub fn check_regime(cfg: &PhysicsConfig, report: &ScaleReport) -> Vec<ValidityRatio> {
    let (l, ell, lam, a) = (cfg.range, cfg.ell, cfg.lambda0, cfg.aperture);
    let ratio = |name: &str, value: f64| ValidityRatio {
        name: name.to_string(),
        value,
        target: RatioTarget::MuchLessThanOne,
    };
    vec![
        ratio("sqrt(lambda0*L)/ell", (lam * l).sqrt() / ell),
        ratio("sigma*L/sqrt(lambda0*ell)", cfg.sigma * l / (lam * ell).sqrt()),
        ratio(
            "lambda0^(2/3)*ell^(1/6)/L^(5/6)/sigma",
            lam.powf(2.0 / 3.0) * ell.powf(1.0 / 6.0) / l.powf(5.0 / 6.0) / cfg.sigma,
        ),
        ratio("a^4/(lambda0*L^3)", a.powi(4) / (lam * l.powi(3))),
        ratio("S/L", report.scattering_mean_free_path / l),
    ]
}

/// Escalates violated regime ratios to errors.
pub fn check_regime_strict(cfg: &PhysicsConfig, report: &ScaleReport) -> Result<()> {
    match check_regime(cfg, report).into_iter().find(|r| !r.satisfied()) {
        Some(r) => Err(Error::RegimeViolated { name: r.name, value: r.value }),
        None => Ok(()),
    }
}
