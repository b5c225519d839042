//! Cross-correlations, CINT images and peak detection.
//!
//! The two-point image is
//!
//! ```text
//! I(y, y') = sum_{r,r'} Psi(|x_r - x_r'| / X) C(tbar, ttil, x_r, x_r')
//! ```
//!
//! where `C` is the windowed cross-correlation and the travel times are
//! evaluated from `y` at receiver `r` and from `y'` at receiver `r'`. Both
//! window functions are Gaussians, `Phi(s) = exp(-s^2/2)` and
//! `Psi(s) = exp(-s^2/2)`, truncated at five standard deviations. The CINT
//! image is the diagonal `I(y, y)`.

mod correlation;
mod grid;
mod image;
mod peaks;

pub use correlation::{correlation_fd, correlation_td, phi_hat};
pub use grid::{GridSpec, ImageGrid};
pub use image::{Imager, ReceiverPair};
pub use peaks::{detect_peaks, peak_support, Peak, PeakList};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::scales::ScaleReport;
use crate::{Error, Result};

/// Truncation of both windows, in standard deviations.
pub const WINDOW_CUTOFF: f64 = 5.0;

/// Window parameters of the cross-correlations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    /// Width of the time window in frequency units.
    pub omega: f64,
    /// Receiver-pair window length.
    pub x: f64,
}

impl WindowConfig {
    pub fn new(omega: f64, x: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega", "window frequency must be positive"));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid("x", "window length must be positive"));
        }
        Ok(WindowConfig { omega, x })
    }

    /// The windows stored in a scale report (by default a third of the
    /// decorrelation scales).
    pub fn from_scales(report: &ScaleReport) -> Self {
        WindowConfig { omega: report.window_frequency, x: report.window_length }
    }

    /// `Psi(d / X)`, zero beyond the cutoff.
    pub fn psi(&self, distance: f64) -> f64 {
        let s = distance / self.x;
        if s > WINDOW_CUTOFF {
            0.0
        } else {
            (-0.5 * s * s).exp()
        }
    }
}
