use core::f64::consts::PI;

use num_complex::Complex64;

use super::{WindowConfig, WINDOW_CUTOFF};
use crate::forward::{time_trace, ArrayData};
use crate::prelude::*;
use crate::{Error, Result};

/// Fourier transform of the time window, `sqrt(2 pi) exp(-u^2 / 2)`.
pub fn phi_hat(u: f64) -> f64 {
    (2.0 * PI).sqrt() * (-0.5 * u * u).exp()
}

fn check_receivers(data: &ArrayData, r: usize, rp: usize) -> Result<()> {
    let n = data.num_receivers();
    if r >= n || rp >= n {
        return Err(Error::invalid("receiver", format!("index out of range for {n} receivers")));
    }
    Ok(())
}

/// Windowed cross-correlation of the traces at receivers `r` and `rp`,
/// evaluated as a double sum over the frequency grid:
///
/// ```text
/// (dw / 2 pi)^2 sum_{j,k} phi_hat((w_j - w_k) / Omega) exp(-i (w_j - w_k) t)
///     exp(i (w_j + w_k) t_diff / 2) p(w_j, x_r) conj(p(w_k, x_rp))
/// ```
///
/// Frequency pairs more than five window widths apart are skipped.
pub fn correlation_fd(
    data: &ArrayData,
    r: usize,
    rp: usize,
    t: f64,
    t_diff: f64,
    win: &WindowConfig,
) -> Result<Complex64> {
    check_receivers(data, r, rp)?;
    if !(t.is_finite() && t_diff.is_finite()) {
        return Err(Error::NonFinite("correlation time"));
    }
    let w = &data.grid.omegas;
    let (p, q) = (data.spectrum(r), data.spectrum(rp));
    let cutoff = WINDOW_CUTOFF * win.omega;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&wj, &pj) in w.iter().zip(p) {
        for (&wk, &qk) in w.iter().zip(q) {
            let d = wj - wk;
            if d.abs() > cutoff {
                continue;
            }
            let phase = -d * t + 0.5 * (wj + wk) * t_diff;
            acc += pj * qk.conj() * Complex64::from_polar(phi_hat(d / win.omega), phase);
        }
    }
    let scale = data.grid.spacing / (2.0 * PI);
    Ok(acc * (scale * scale))
}

/// Direct time-domain quadrature of the windowed cross-correlation,
/// `int ds Omega Phi(Omega (t - s)) p(s - t_diff/2, x_r) conj(p(s + t_diff/2, x_rp))`.
///
/// The window is integrated over eight standard deviations on each side with
/// the trapezoid rule and a step of at most `pi / (8 omega_max)`. Slow; meant
/// as a reference for [`correlation_fd`].
pub fn correlation_td(
    data: &ArrayData,
    r: usize,
    rp: usize,
    t: f64,
    t_diff: f64,
    win: &WindowConfig,
) -> Result<Complex64> {
    check_receivers(data, r, rp)?;
    if !(t.is_finite() && t_diff.is_finite()) {
        return Err(Error::NonFinite("correlation time"));
    }
    let half = 8.0 / win.omega;
    let max_step = PI / (8.0 * data.grid.max());
    let n = (2.0 * half / max_step).ceil() as usize;
    let h = 2.0 * half / n as f64;
    let s: Vec<f64> = (0..=n).map(|i| t - half + i as f64 * h).collect();
    let early: Vec<f64> = s.iter().map(|&si| si - 0.5 * t_diff).collect();
    let late: Vec<f64> = s.iter().map(|&si| si + 0.5 * t_diff).collect();
    let window = data.grid.period();
    let span = 2.0 * half + t_diff.abs();
    if span > window {
        return Err(Error::Aliasing { duration: span, window });
    }
    let a = time_trace(data, r, &early)?;
    let b = time_trace(data, rp, &late)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let u = win.omega * (t - s[i]);
        let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += a[i] * b[i].conj() * (weight * win.omega * (-0.5 * u * u).exp());
    }
    Ok(acc * h)
}
